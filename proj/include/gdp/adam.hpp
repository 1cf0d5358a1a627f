// Adam with bias correction over a list of named parameter tensors.
#pragma once

#include <vector>

#include "gdp/tensor.hpp"

namespace gdp::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  // One update from the gradients currently stored on the parameters.
  // Parameters whose grad buffer was never touched count as zero gradient.
  // Throws NumericError naming the parameter if a gradient is non-finite.
  void step();
  void zero_grad();

  long steps_taken() const { return t_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Mat> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace gdp::num
