// Information-theoretic edge scorers and the one-step training baseline.
//
// Both scorers work on discretized per-node series pooled from the train and
// validation splits, average over state channels, and use natural-log units.
// Score orientation follows the adjacency convention: entry (i, j) scores
// the influence of j on i.
#ifndef GDP_BASELINES_HPP
#define GDP_BASELINES_HPP

#include "gdp/dynamics.hpp"
#include "gdp/model.hpp"
#include "gdp/types.hpp"

namespace gdp::baselines {

struct BinningConfig {
  int bins = 16;          // artifact default; flagged in CLI metadata
  bool quantile = false;  // equal-width over the observed range by default
};

// Pairwise histogram mutual information; exactly symmetric, diagonal zero.
Mat mi_scores(const dynamics::Dataset& ds, const BinningConfig& cfg = {});

// Transfer entropy with one conditioning lag:
//   TE(s -> r) = H(x_r^t | x_r^{t-1}) - H(x_r^t | x_r^{t-1}, x_s^{t-1})
// returned at entry (r, s); tiny negative plug-in estimates clamp to 0.
Mat te_scores(const dynamics::Dataset& ds, int bins);

// The encoder-free one-step baseline is the full model minus the polynomial
// branch; kept here so Table-1-style comparisons read from one place.
inline model::TrainResult single_step_baseline(const dynamics::Dataset& ds,
                                               const model::TrainConfig& cfg,
                                               uint64_t seed) {
  return model::train_single_step(ds, cfg, seed);
}

}  // namespace gdp::baselines

#endif  // GDP_BASELINES_HPP
