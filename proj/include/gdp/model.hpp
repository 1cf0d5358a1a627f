// The relational learner: a trainable edge-probability generator shared by
// two dynamics surrogates (a one-step branch that weighs messages by the raw
// edge probabilities, and a branch that first passes them through a trainable
// polynomial graph filter). Training minimizes the sum of both branches'
// one-step MSEs with two Adam groups (generator vs surrogate parameters).
#ifndef GDP_MODEL_HPP
#define GDP_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gdp/artifact_io.hpp"
#include "gdp/dynamics.hpp"
#include "gdp/graph.hpp"
#include "gdp/rng.hpp"
#include "gdp/tensor.hpp"
#include "gdp/types.hpp"

namespace gdp::model {

enum class PsiTie {
  from_graph,  // tied when the target graph is undirected
  tied,
  untied,
};

struct TrainConfig {
  int epochs = 3000;
  double lr_gen = 0.1;
  double lr_surrogate = 5e-4;
  double beta_gen = 0.5;
  int K = 4;          // polynomial filter order (K+1 coefficients)
  int d_h = 256;      // MLP hidden width
  int val_every = 10; // validation/selection cadence in epochs
  std::string activation = "tanh";  // tanh | softsign | relu
  int chunk_pairs = 64;  // state pairs per tape chunk (full batch, accumulated)
  bool adj_branch = true;
  bool poly_branch = true;
  int poly_warmup_epochs = 0;  // poly loss weight is 0 for this many epochs
  int rounds = 1;              // message-passing rounds (2 = naive stacking)
  PsiTie tie = PsiTie::from_graph;
  bool freeze_psi = false;     // generator excluded from optimization
};

// Two-hidden-layer MLP on tape tensors.
struct Mlp {
  num::Tensor w1, b1, w2, b2, w3, b3;
  int act = 0;  // 0 tanh, 1 softsign, 2 relu

  static Mlp make(int d_in, int d_h, int d_out, int act, Rng& rng);
  num::Tensor operator()(const num::Tensor& x) const;
  std::vector<num::Tensor> params() const;
};

// All consecutive-pair training examples of one split, stacked: X holds
// node features [state, statics] for the earlier snapshot ((count*n) rows),
// Y the later snapshot's state.
struct PairBatch {
  Mat X;
  Mat Y;
  int n = 0;
  int count = 0;
};

PairBatch make_pairs(const dynamics::Dataset& ds, bool validation);

class GdpModel {
 public:
  GdpModel(int n, int d_s, int d_f, bool directed_psi, const TrainConfig& cfg,
           uint64_t seed);

  // Edge probabilities (A0, A1) from the current logits: per ordered pair,
  // softmax over beta_gen * (psi0, psi1); diagonal zero. Recorded on the
  // active tape.
  std::pair<num::Tensor, num::Tensor> edge_probabilities();

  // polynomial=false: the probabilities pass through unchanged.
  // polynomial=true: probabilistic-degree normalization (symmetric for tied
  // logits, in-degree otherwise) followed by the theta filter, with the
  // diagonal masked out for aggregation.
  std::pair<num::Tensor, num::Tensor> branch_filters(const num::Tensor& a0,
                                                     const num::Tensor& a1,
                                                     bool polynomial);

  // One surrogate step for `batch` stacked feature blocks: messages
  // f_e^a(x_receiver, x_sender) weighted by F^a and summed at the receiver,
  // then a residual vertex update on the state dimensions.
  num::Tensor surrogate_step(bool polynomial, const num::Tensor& f0,
                             const num::Tensor& f1, const num::Tensor& x,
                             int batch);

  // Weighted sum of branch MSEs over one chunk of pairs. Branches with zero
  // weight are skipped entirely (their gradients are exact zeros either way).
  num::Tensor pair_loss(const Mat& x, const Mat& y, int batch,
                        double adj_weight, double poly_weight);

  // Raw probability-of-edge scores (A1) from packed logits; diagonal zero.
  Mat edge_scores() const;
  Mat edge_scores(const Mat& psi_packed) const;

  void set_psi(const Mat& psi_packed);

  std::vector<num::Tensor> generator_params() const;
  std::vector<num::Tensor> surrogate_params() const;

  int n() const { return n_; }
  bool tied() const { return tied_; }
  const TrainConfig& config() const { return cfg_; }
  num::Tensor psi() const { return psi_; }
  num::Tensor theta() const { return theta_; }

  // Branch MLPs, exposed for the weight-sharing checks in tests.
  Mlp& mlp(bool polynomial, int which);  // which: 0 = f_e0, 1 = f_e1, 2 = f_v
  Mlp& round2_mlp(bool polynomial, int which);

  io::Json to_json() const;

 private:
  num::Tensor expand_logits();  // packed psi -> n^2 x 2 via the untie matrix

  int n_, d_s_, d_f_;
  bool tied_;
  TrainConfig cfg_;
  num::Tensor psi_;    // P x 2 packed logits (P = unordered or ordered pairs)
  num::Tensor theta_;  // 1 x (K+1)
  std::vector<Mlp> adj_mlps_, poly_mlps_;    // {f_e0, f_e1, f_v}
  std::vector<Mlp> adj_round2_, poly_round2_;  // {f_e0, f_e1} when rounds == 2
  Mat untie_;  // n^2 x P 0/1 expansion
  Mat mask_;   // off-diagonal mask, n x n
};

struct EpochRecord {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // weighted branch-MSE sum
  double val_mse = std::numeric_limits<double>::quiet_NaN();  // at cadence epochs
  double auc = std::numeric_limits<double>::quiet_NaN();      // complement-resolved
};

struct TrainResult {
  GdpModel model;
  Mat best_psi;    // packed logits minimizing validation MSE
  int best_epoch = 0;
  double best_val = std::numeric_limits<double>::quiet_NaN();
  std::vector<EpochRecord> history;
  Mat scores;      // edge scores from best_psi, symmetrized for undirected targets
};

// Trains on the dataset's train split with validation-MSE model selection.
// psi_override, when given, replaces the random logit initialization (packed
// layout); combined with cfg.freeze_psi it trains surrogates on a pinned
// graph. Throws NumericError naming the epoch if the loss stops being finite.
TrainResult train_gdp(const dynamics::Dataset& ds, const TrainConfig& cfg,
                      uint64_t seed, const Mat* psi_override = nullptr);

// The encoder-free one-step baseline: identical machinery with the
// polynomial branch disabled.
TrainResult train_single_step(const dynamics::Dataset& ds, TrainConfig cfg,
                              uint64_t seed);

void write_checkpoint(const TrainResult& r, const std::string& path);
Mat checkpoint_scores(const io::Json& checkpoint);

}  // namespace gdp::model

#endif  // GDP_MODEL_HPP
