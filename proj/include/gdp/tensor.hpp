// Reverse-mode autodiff over dense double matrices.
//
// A Tensor is a shared handle to a value/grad pair. Operations are free
// functions; when an active Tape is in scope (TapeScope) and any input
// requires gradients, the op records a backward closure. Tape::backward
// replays the closures in reverse record order, accumulating gradients
// additively into every node, so parameter grads survive across tapes and
// full-batch gradients can be assembled chunk by chunk.
//
// Tapes are single-threaded; independent tapes may live on separate threads
// (the active-tape pointer is thread_local).
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gdp/types.hpp"

namespace gdp::num {

struct TensorNode {
  Mat value;
  Mat grad;  // empty until first touched
  bool requires_grad = false;
  bool has_grad = false;  // grad allocated and possibly nonzero
  std::string name;       // set for parameters; used in diagnostics
};

class Tensor {
 public:
  Tensor() = default;
  static Tensor constant(Mat v);
  static Tensor scalar(double v);  // 1x1 constant
  // A leaf that wants gradients (model parameter).
  static Tensor param(Mat v, std::string name);

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& value() { return node_->value; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }

  // Gradient buffer, allocated (zeroed) on first access.
  Mat& grad();
  bool has_grad() const { return node_ && node_->has_grad; }
  void zero_grad();

  TensorNode* node() const { return node_.get(); }
  std::shared_ptr<TensorNode> shared() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}
  std::shared_ptr<TensorNode> node_;
  friend Tensor make_op_output(Mat value, const std::vector<Tensor>& inputs);
};

class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Seeds d(loss)/d(loss) = 1 and replays recorded ops in reverse. The loss
  // must be scalar (1x1) and the tape not already consumed.
  void backward(const Tensor& loss);

  size_t size() const { return records_.size(); }
  bool consumed() const { return consumed_; }

  static Tape* active();
  void record(std::function<void()> bw);

 private:
  std::vector<std::function<void()>> records_;
  bool consumed_ = false;
};

// RAII activation of a tape on the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& t);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// ---- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
// One filter application M*X; same contraction as matmul, named for call
// sites that iterate powers of a graph matrix.
inline Tensor power_iteration_step(const Tensor& m, const Tensor& x) {
  return matmul(m, x);
}

// Elementwise add; b may also be a 1 x c bias row broadcast over a's rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise product; one operand may be an r x 1 column broadcast across
// the other's columns.
Tensor mul(const Tensor& a, const Tensor& b);
// Scale by a plain constant / by a differentiable 1x1 tensor.
Tensor scale(const Tensor& a, double c);
Tensor scale(const Tensor& a, const Tensor& s);

Tensor sum_all(const Tensor& a);             // -> 1x1
Tensor row_sum(const Tensor& a);             // -> r x 1
Tensor mse(const Tensor& pred, const Tensor& target);  // mean squared error, 1x1

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, Eigen::Index c0, Eigen::Index c1);
Tensor reshape(const Tensor& a, Eigen::Index r, Eigen::Index c);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor tanh_act(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softsign(const Tensor& a);
// Softmax over the last (column) dimension, numerically shifted per row.
Tensor softmax_rows(const Tensor& a);

// Elementwise x -> 1/sqrt(max(x, eps)) and x -> 1/max(x, eps); the gradient
// is zero where the floor is active.
Tensor rsqrt_floor(const Tensor& a, double eps);
Tensor recip_floor(const Tensor& a, double eps);

// Message-passing contraction. W is n x n (entry (i,j) weighs message
// j -> i), E is (B*n^2) x d with row t*n^2 + i*n + j holding the feature of
// ordered pair (receiver i, sender j) at batch slot t. Returns (B*n) x d with
// out[t*n+i] = sum_j W(i,j) * E[t*n^2+i*n+j].
Tensor edge_aggregate(const Tensor& w, const Tensor& e, Eigen::Index n_nodes);

// Expand per-node rows to ordered-pair rows: Z is (B*n) x d, output is
// (B*n^2) x 2d with row t*n^2+i*n+j = [z_{t,i}, z_{t,j}].
Tensor pair_concat(const Tensor& z, Eigen::Index n_nodes);

}  // namespace gdp::num
