// AUC evaluation and the analysis/ablation drivers. Every driver returns an
// ExperimentReport: a parameter grid with per-seed records, serialized as
// JSON (with per-cell mean/std) and flat CSV (one row per cell-seed).
#ifndef GDP_EXPERIMENTS_HPP
#define GDP_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

#include "gdp/dynamics.hpp"
#include "gdp/graph.hpp"
#include "gdp/model.hpp"
#include "gdp/types.hpp"

namespace gdp::experiments {

// Mann-Whitney AUC x100 with average-rank tie handling. Undirected truth is
// scored over unordered pairs, averaging scores (i,j) and (j,i); directed
// truth over ordered off-diagonal pairs. Throws DataError when the truth has
// no positive or no negative pairs.
double auc(const Mat& scores, const graphs::Graph& truth);

// max(auc, 100 - auc): the graph/complement ambiguity resolution used for
// reporting.
double auc_ambiguous(const Mat& scores, const graphs::Graph& truth);

using Record = std::map<std::string, double>;

struct Cell {
  Record params;
  std::vector<Record> records;  // one per seed/run
};

struct ExperimentReport {
  std::string tag;
  io::Json meta;  // protocol constants, dataset description, flags
  std::vector<Cell> cells;
};

io::Json report_json(const ExperimentReport& r);  // adds per-cell mean/std/count
// Writes <basepath>.json and <basepath>.csv.
void write_report(const ExperimentReport& r, const std::string& basepath);

// ---- effective-graph sweep (no training) -----------------------------------

struct Fig2Config {
  int n = 30;
  double p = 0.3;
  double beta = 1.0;
  std::vector<double> dt_grid;
  bool continuous = true;  // exp(beta*At*dt) vs At^dt
  int seeds = 20;
  uint64_t seed0 = 0;
};

// Per (dt, seed): AUC of the effective graph against the generating ER
// graph, plus per-class mean/std of the raw |J| entries.
ExperimentReport fig2_sweep(const Fig2Config& cfg);

// ---- noise amplification by polynomial filters -----------------------------

struct NoiseAmplifierConfig {
  std::vector<double> eps_grid;
  std::vector<int> k_grid;   // filter order; coefficients all ones
  double t = 1e-5;           // filter mix
  int draws = 50;            // (Xi, x) draws, shared across cells
  uint64_t seed = 0;
  double xi_lo = 0.0, xi_hi = 1.0;  // uniform entry law of the perturbation
  bool normalized_matrix = false;   // probe the normalized adjacency instead
};

// Mean cosine similarity between M x and (M_eps + t*g_K(M_eps)) x per
// (eps, K) cell, M_eps = M + eps*Xi.
ExperimentReport fig3_noise_amplifier(const NoiseAmplifierConfig& cfg,
                                      const graphs::Graph& g);

// ---- training-based experiments ---------------------------------------------

struct EscapeConfig {
  int warmup_epochs = 0;
  int window = 50;           // epochs after the switch searched for the jump
  bool disable_switch = false;  // control: polynomial loss stays off
  std::vector<uint64_t> seeds;
};

// One-step-only warmup, then the polynomial loss switches on; reports
// plateau AUC, best post-switch AUC inside the window, and epochs-to-jump
// (first epoch gaining >= 10 points over the plateau; -1 when absent).
ExperimentReport escape_experiment(const dynamics::Dataset& ds,
                                   model::TrainConfig cfg, const EscapeConfig& ecfg);

struct DistortionConfig {
  std::vector<double> fractions;  // share of node pairs whose type is flipped
  int runs = 10;
  uint64_t seed0 = 0;
  double logit = 10.0;  // frozen logit magnitude encoding the distorted graph
};

// Freezes the generator on a distorted copy of the ground truth and trains
// the surrogates; records final train and validation MSE per run.
ExperimentReport distortion_experiment(const dynamics::Dataset& ds,
                                       model::TrainConfig cfg,
                                       const DistortionConfig& dcfg);

struct KSweepConfig {
  std::vector<int> k_grid;
  std::vector<uint64_t> seeds;
};

ExperimentReport k_sweep(const dynamics::Dataset& ds, model::TrainConfig cfg,
                         const KSweepConfig& kcfg);

struct AblationConfig {
  std::vector<uint64_t> seeds;  // >= 4
  bool include_full = true;     // also run two-branch training per seed
};

// Polynomial-branch-only training; per seed the AUC of the probability
// matrix A, its normalization At, and the learned filter g_theta(At), plus
// which of the three wins.
ExperimentReport ablation_poly_only(const dynamics::Dataset& ds,
                                    model::TrainConfig cfg,
                                    const AblationConfig& acfg);

struct WsSweepConfig {
  int n = 30;
  int k = 2;
  std::vector<double> p_grid;
  std::vector<uint64_t> seeds;
  dynamics::SimConfig sim;  // system/volume/interval for data generation
};

ExperimentReport ws_sweep(const WsSweepConfig& wcfg, model::TrainConfig cfg);

struct StackingConfig {
  std::vector<uint64_t> seeds;
  bool include_full = true;
};

// One-round vs naive two-round message passing on the one-step branch
// (same probabilities applied twice before the vertex update).
ExperimentReport stacking_control(const dynamics::Dataset& ds,
                                  model::TrainConfig cfg,
                                  const StackingConfig& scfg);

// Graph summary helpers used in report metadata.
double mean_clustering(const Mat& adj);
bool is_degree_regular(const Mat& adj);

}  // namespace gdp::experiments

#endif  // GDP_EXPERIMENTS_HPP
