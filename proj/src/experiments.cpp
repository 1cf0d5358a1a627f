#include "gdp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gdp/baselines.hpp"
#include "gdp/rng.hpp"

namespace gdp::experiments {

namespace {

struct ScoredPair {
  double score;
  int label;
};

std::vector<ScoredPair> collect_pairs(const Mat& scores, const graphs::Graph& truth) {
  if (scores.rows() != truth.n || scores.cols() != truth.n)
    throw DataError("auc: score matrix does not match the graph size");
  if (!scores.allFinite()) throw DataError("auc: non-finite scores");
  std::vector<ScoredPair> pairs;
  if (truth.directed) {
    for (int i = 0; i < truth.n; ++i)
      for (int j = 0; j < truth.n; ++j)
        if (i != j)
          pairs.push_back({scores(i, j), truth.adj(i, j) != 0.0 ? 1 : 0});
  } else {
    for (int i = 0; i < truth.n; ++i)
      for (int j = i + 1; j < truth.n; ++j)
        pairs.push_back({0.5 * (scores(i, j) + scores(j, i)),
                         truth.adj(i, j) != 0.0 ? 1 : 0});
  }
  return pairs;
}

}  // namespace

double auc(const Mat& scores, const graphs::Graph& truth) {
  std::vector<ScoredPair> pairs = collect_pairs(scores, truth);
  long long pos = 0;
  for (const auto& p : pairs) pos += p.label;
  const long long neg = static_cast<long long>(pairs.size()) - pos;
  if (pos == 0 || neg == 0)
    throw DataError("auc: ground truth has a single class, metric undefined");

  std::sort(pairs.begin(), pairs.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.score < b.score; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < pairs.size()) {
    size_t j = i;
    while (j < pairs.size() && pairs[j].score == pairs[i].score) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k)
      if (pairs[k].label) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(pos) * (pos + 1);
  return 100.0 * u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auc_ambiguous(const Mat& scores, const graphs::Graph& truth) {
  const double a = auc(scores, truth);
  return std::max(a, 100.0 - a);
}

// ---- reports ----------------------------------------------------------------

io::Json report_json(const ExperimentReport& r) {
  io::Json j;
  j["version"] = kArtifactVersion;
  j["experiment"] = r.tag;
  j["meta"] = r.meta.is_null() ? io::Json::object() : r.meta;
  io::Json cells = io::Json::array();
  for (const auto& cell : r.cells) {
    io::Json c;
    c["params"] = cell.params;
    c["seed_count"] = cell.records.size();
    io::Json stats = io::Json::object();
    if (!cell.records.empty()) {
      for (const auto& [key, first] : cell.records.front()) {
        (void)first;
        double sum = 0.0, sq = 0.0;
        for (const auto& rec : cell.records) {
          const double v = rec.at(key);
          sum += v;
          sq += v * v;
        }
        const double mean = sum / cell.records.size();
        const double var = std::max(0.0, sq / cell.records.size() - mean * mean);
        stats[key] = {{"mean", mean}, {"std", std::sqrt(var)}};
      }
    }
    c["stats"] = std::move(stats);
    c["records"] = cell.records;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

void write_report(const ExperimentReport& r, const std::string& basepath) {
  io::write_json(basepath + ".json", report_json(r));

  std::set<std::string> param_keys, record_keys;
  for (const auto& cell : r.cells) {
    for (const auto& [k, v] : cell.params) param_keys.insert(k);
    for (const auto& rec : cell.records)
      for (const auto& [k, v] : rec) record_keys.insert(k);
  }
  io::Table table;
  for (const auto& k : param_keys) table.header.push_back(k);
  for (const auto& k : record_keys)
    if (!param_keys.count(k)) table.header.push_back(k);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& cell : r.cells)
    for (const auto& rec : cell.records) {
      std::vector<double> row;
      for (const auto& k : table.header) {
        auto tryget = [&](const Record& m) {
          auto it = m.find(k);
          return it == m.end() ? nan : it->second;
        };
        const double v = cell.params.count(k) ? tryget(cell.params) : tryget(rec);
        row.push_back(v);
      }
      table.rows.push_back(std::move(row));
    }
  io::write_csv(basepath + ".csv", table);
}

// ---- fig2: effective-graph oracle sweep -------------------------------------

ExperimentReport fig2_sweep(const Fig2Config& cfg) {
  if (cfg.dt_grid.empty()) throw DataError("fig2_sweep: empty dt grid");
  ExperimentReport rep;
  rep.tag = cfg.continuous ? "fig2_continuous" : "fig2_discrete";
  rep.meta = {{"n", cfg.n}, {"p", cfg.p}, {"beta", cfg.beta},
              {"mode", cfg.continuous ? "continuous" : "discrete"}};
  for (double dt : cfg.dt_grid) {
    Cell cell;
    cell.params = {{"dt", dt}};
    for (int s = 0; s < cfg.seeds; ++s) {
      const graphs::Graph g =
          graphs::gen_er(cfg.n, cfg.p, stream_seed(cfg.seed0, "fig2_graph",
                                                   static_cast<uint64_t>(s)));
      const Mat j = graphs::effective_graph(g, {cfg.continuous, cfg.beta, dt});
      double pm = 0, ps = 0, nm = 0, ns = 0;
      {  // per-class stats of |J| over unordered pairs
        double psum = 0, psq = 0, nsum = 0, nsq = 0;
        int pc = 0, nc = 0;
        for (int a = 0; a < cfg.n; ++a)
          for (int b = a + 1; b < cfg.n; ++b) {
            const double v = std::abs(0.5 * (j(a, b) + j(b, a)));
            if (g.adj(a, b) != 0.0) { psum += v; psq += v * v; ++pc; }
            else { nsum += v; nsq += v * v; ++nc; }
          }
        if (pc) { pm = psum / pc; ps = std::sqrt(std::max(0.0, psq / pc - pm * pm)); }
        if (nc) { nm = nsum / nc; ns = std::sqrt(std::max(0.0, nsq / nc - nm * nm)); }
      }
      cell.records.push_back({{"seed", static_cast<double>(s)},
                              {"auc", auc_ambiguous(j, g)},
                              {"pos_mean", pm}, {"pos_std", ps},
                              {"neg_mean", nm}, {"neg_std", ns}});
    }
    rep.cells.push_back(std::move(cell));
  }
  return rep;
}

// ---- fig3: polynomial filters amplify graph noise ---------------------------

ExperimentReport fig3_noise_amplifier(const NoiseAmplifierConfig& cfg,
                                      const graphs::Graph& g) {
  if (cfg.t <= 0.0) throw DataError("fig3: filter mix t must be positive");
  if (cfg.eps_grid.empty() || cfg.k_grid.empty())
    throw DataError("fig3: empty grid");
  const int n = g.n;
  const Mat m = cfg.normalized_matrix ? graphs::sym_normalize(g.adj) : g.adj;

  std::vector<Mat> xis;
  std::vector<Vec> xs;
  for (int d = 0; d < cfg.draws; ++d) {
    Rng rng = stream_rng(cfg.seed, "fig3_draw", static_cast<uint64_t>(d));
    Mat xi(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) xi(i, j) = rng.uniform(cfg.xi_lo, cfg.xi_hi);
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.normal();
    xis.push_back(std::move(xi));
    xs.push_back(std::move(x));
  }

  // Vector-level Horner of (sum_k M^k) x, all coefficients one.
  auto filter_apply = [](const Mat& mat, int order, const Vec& x) {
    Vec acc = x;  // theta_K * x
    for (int k = order - 1; k >= 0; --k) acc = mat * acc + x;
    return acc;
  };

  ExperimentReport rep;
  rep.tag = "fig3_noise_amplifier";
  rep.meta = {{"n", n}, {"t", cfg.t}, {"draws", cfg.draws},
              {"xi_lo", cfg.xi_lo}, {"xi_hi", cfg.xi_hi},
              {"matrix", cfg.normalized_matrix ? "normalized" : "adjacency"}};
  for (int order : cfg.k_grid) {
    if (order < 1) throw DataError("fig3: K must be >= 1");
    for (double eps : cfg.eps_grid) {
      Cell cell;
      cell.params = {{"K", static_cast<double>(order)}, {"eps", eps}};
      for (int d = 0; d < cfg.draws; ++d) {
        const Mat meps = m + eps * xis[d];
        const Vec y0 = m * xs[d];
        const Vec y = meps * xs[d] + cfg.t * filter_apply(meps, order, xs[d]);
        const double denom = y0.norm() * y.norm();
        const double cos = denom > 0 ? y0.dot(y) / denom : 0.0;
        cell.records.push_back({{"draw", static_cast<double>(d)}, {"cos", cos}});
      }
      rep.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

// ---- training-based drivers -------------------------------------------------

ExperimentReport escape_experiment(const dynamics::Dataset& ds,
                                   model::TrainConfig cfg, const EscapeConfig& ecfg) {
  if (cfg.epochs < 1) throw DataError("escape: needs at least one epoch");
  if (ecfg.warmup_epochs < 0 || ecfg.warmup_epochs > cfg.epochs)
    throw DataError("escape: warmup outside [0, epochs]");
  cfg.poly_branch = true;
  cfg.poly_warmup_epochs = ecfg.disable_switch ? cfg.epochs : ecfg.warmup_epochs;

  ExperimentReport rep;
  rep.tag = "escape";
  rep.meta = {{"system", dynamics::system_name(ds.system)},
              {"warmup_epochs", ecfg.warmup_epochs},
              {"window", ecfg.window},
              {"switch", !ecfg.disable_switch}};
  Cell cell;
  cell.params = {{"warmup", static_cast<double>(ecfg.warmup_epochs)},
                 {"switched", ecfg.disable_switch ? 0.0 : 1.0}};
  for (uint64_t seed : ecfg.seeds) {
    const model::TrainResult r = model::train_gdp(ds, cfg, seed);
    const int w = ecfg.warmup_epochs;
    const double plateau = w >= 1 ? r.history[w - 1].auc
                                  : std::numeric_limits<double>::quiet_NaN();
    double post = -1.0;
    double jump_at = -1.0;
    const int last = std::min(cfg.epochs, w + ecfg.window);
    for (int e = w + 1; e <= last; ++e) {
      const double a = r.history[e - 1].auc;
      post = std::max(post, a);
      if (jump_at < 0 && a >= plateau + 10.0) jump_at = e - w;
    }
    cell.records.push_back({{"seed", static_cast<double>(seed)},
                            {"plateau_auc", plateau},
                            {"post_auc", post},
                            {"epochs_to_jump", jump_at},
                            {"final_auc", r.history.back().auc}});
  }
  rep.cells.push_back(std::move(cell));
  return rep;
}

namespace {

// Packed-logit layout mirror of the generator: tied logits enumerate i<j
// row-major, untied all ordered pairs row-major (diagonal skipped).
Mat frozen_psi_for(const Mat& adj, bool tied, double logit, int n,
                   const std::vector<int>& flipped) {
  const int pairs = tied ? n * (n - 1) / 2 : n * (n - 1);
  Mat psi(pairs, 2);
  std::vector<char> flip(pairs, 0);
  for (int f : flipped) flip[f] = 1;
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = tied ? i + 1 : 0; j < n; ++j) {
      if (j == i) continue;
      bool edge = adj(i, j) != 0.0;
      if (flip[p]) edge = !edge;
      psi(p, 0) = edge ? -logit : logit;
      psi(p, 1) = edge ? logit : -logit;
      ++p;
    }
  return psi;
}

}  // namespace

ExperimentReport distortion_experiment(const dynamics::Dataset& ds,
                                       model::TrainConfig cfg,
                                       const DistortionConfig& dcfg) {
  if (!ds.has_truth) throw DataError("distortion: needs ground truth");
  cfg.freeze_psi = true;
  cfg.tie = ds.truth.directed ? model::PsiTie::untied : model::PsiTie::tied;
  const int n = ds.nodes();
  const bool tied = !ds.truth.directed;
  const int pairs = tied ? n * (n - 1) / 2 : n * (n - 1);

  ExperimentReport rep;
  rep.tag = "distortion";
  rep.meta = {{"system", dynamics::system_name(ds.system)},
              {"runs", dcfg.runs}, {"logit", dcfg.logit}};
  for (double fraction : dcfg.fractions) {
    if (fraction < 0.0 || fraction > 1.0)
      throw DataError("distortion: fraction outside [0,1]");
    Cell cell;
    cell.params = {{"fraction", fraction}};
    const int n_flip = static_cast<int>(std::lround(fraction * pairs));
    for (int run = 0; run < dcfg.runs; ++run) {
      Rng rng = stream_rng(dcfg.seed0, "distort_flip", static_cast<uint64_t>(run));
      std::vector<int> idx(pairs);
      std::iota(idx.begin(), idx.end(), 0);
      for (int k = 0; k < n_flip; ++k)
        std::swap(idx[k], idx[k + static_cast<int>(rng.below(pairs - k))]);
      idx.resize(n_flip);
      const Mat psi = frozen_psi_for(ds.truth.adj, tied, dcfg.logit, n, idx);
      const uint64_t train_seed = stream_seed(dcfg.seed0, "distort_train",
                                              static_cast<uint64_t>(run));
      const model::TrainResult r = model::train_gdp(ds, cfg, train_seed, &psi);
      cell.records.push_back({{"run", static_cast<double>(run)},
                              {"train_mse", r.history.back().train_loss},
                              {"test_mse", r.history.back().val_mse}});
    }
    rep.cells.push_back(std::move(cell));
  }
  return rep;
}

ExperimentReport k_sweep(const dynamics::Dataset& ds, model::TrainConfig cfg,
                         const KSweepConfig& kcfg) {
  if (kcfg.k_grid.empty()) throw DataError("k_sweep: empty grid");
  ExperimentReport rep;
  rep.tag = "k_sweep";
  rep.meta = {{"system", dynamics::system_name(ds.system)},
              {"interval", ds.sample_every},
              {"volume", {{"trajectories", static_cast<int>(ds.train.size())},
                          {"steps", ds.train.empty()
                                        ? 0
                                        : static_cast<int>(ds.train[0].states.size())}}}};
  for (int k : kcfg.k_grid) {
    Cell cell;
    cell.params = {{"K", static_cast<double>(k)}};
    model::TrainConfig c = cfg;
    c.K = k;
    for (uint64_t seed : kcfg.seeds) {
      const model::TrainResult r = model::train_gdp(ds, c, seed);
      cell.records.push_back({{"seed", static_cast<double>(seed)},
                              {"auc", auc_ambiguous(r.scores, ds.truth)},
                              {"train_mse", r.history.back().train_loss},
                              {"test_mse", r.best_val}});
    }
    rep.cells.push_back(std::move(cell));
  }
  return rep;
}

ExperimentReport ablation_poly_only(const dynamics::Dataset& ds,
                                    model::TrainConfig cfg,
                                    const AblationConfig& acfg) {
  if (acfg.seeds.size() < 4) throw DataError("ablation: need at least 4 seeds");
  model::TrainConfig poly_cfg = cfg;
  poly_cfg.adj_branch = false;
  poly_cfg.poly_branch = true;

  ExperimentReport rep;
  rep.tag = "ablation_poly_only";
  rep.meta = {{"system", dynamics::system_name(ds.system)},
              {"candidates", {"A", "At", "g_theta(At)"}}};
  Cell cell;
  cell.params = {};
  for (uint64_t seed : acfg.seeds) {
    const model::TrainResult r = model::train_gdp(ds, poly_cfg, seed);
    const Mat a = r.scores;  // best-psi probabilities, symmetrized
    const Mat at = ds.truth.directed ? graphs::in_deg_normalize(a)
                                     : graphs::sym_normalize(a);
    const Mat theta_row = r.model.theta().value();
    std::vector<double> theta(theta_row.data(), theta_row.data() + theta_row.cols());
    const Mat g = graphs::poly_filter(at, theta);
    const double auc_a = auc_ambiguous(a, ds.truth);
    const double auc_at = auc_ambiguous(at, ds.truth);
    const double auc_g = auc_ambiguous(g, ds.truth);
    const double winner =
        auc_a >= auc_at && auc_a >= auc_g ? 0.0 : (auc_at >= auc_g ? 1.0 : 2.0);
    Record rec = {{"seed", static_cast<double>(seed)},
                  {"auc_A", auc_a}, {"auc_At", auc_at}, {"auc_g", auc_g},
                  {"winner", winner}};
    if (acfg.include_full) {
      const model::TrainResult full = model::train_gdp(ds, cfg, seed);
      rec["full_auc_A"] = auc_ambiguous(full.scores, ds.truth);
    }
    cell.records.push_back(std::move(rec));
  }
  rep.cells.push_back(std::move(cell));
  return rep;
}

ExperimentReport ws_sweep(const WsSweepConfig& wcfg, model::TrainConfig cfg) {
  if (wcfg.p_grid.empty()) throw DataError("ws_sweep: empty grid");
  ExperimentReport rep;
  rep.tag = "ws_sweep";
  rep.meta = {{"n", wcfg.n}, {"k", wcfg.k},
              {"system", dynamics::system_name(wcfg.sim.system)}};
  for (double p : wcfg.p_grid) {
    Cell cell;
    cell.params = {{"p", p}};
    for (uint64_t seed : wcfg.seeds) {
      const graphs::Graph g =
          graphs::gen_ws(wcfg.n, wcfg.k, p, stream_seed(seed, "ws_graph"));
      dynamics::SimConfig sim = wcfg.sim;
      sim.seed = stream_seed(seed, "ws_data");
      const dynamics::Dataset ds = dynamics::build_dataset(g, sim);
      const model::TrainResult r = model::train_gdp(ds, cfg, seed);
      cell.records.push_back({{"seed", static_cast<double>(seed)},
                              {"auc", auc_ambiguous(r.scores, ds.truth)},
                              {"clustering", mean_clustering(g.adj)},
                              {"regular", is_degree_regular(g.adj) ? 1.0 : 0.0}});
    }
    rep.cells.push_back(std::move(cell));
  }
  return rep;
}

ExperimentReport stacking_control(const dynamics::Dataset& ds,
                                  model::TrainConfig cfg,
                                  const StackingConfig& scfg) {
  ExperimentReport rep;
  rep.tag = "stacking_control";
  rep.meta = {{"system", dynamics::system_name(ds.system)}};
  Cell cell;
  cell.params = {};
  for (uint64_t seed : scfg.seeds) {
    model::TrainConfig one = cfg;
    one.rounds = 1;
    model::TrainConfig two = cfg;
    two.rounds = 2;
    const model::TrainResult r1 = model::train_single_step(ds, one, seed);
    const model::TrainResult r2 = model::train_single_step(ds, two, seed);
    Record rec = {{"seed", static_cast<double>(seed)},
                  {"auc_one_round", auc_ambiguous(r1.scores, ds.truth)},
                  {"auc_two_round", auc_ambiguous(r2.scores, ds.truth)}};
    if (scfg.include_full) {
      const model::TrainResult rf = model::train_gdp(ds, one, seed);
      rec["auc_full"] = auc_ambiguous(rf.scores, ds.truth);
    }
    cell.records.push_back(std::move(rec));
  }
  rep.cells.push_back(std::move(cell));
  return rep;
}

double mean_clustering(const Mat& adj) {
  const int n = static_cast<int>(adj.rows());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> nbrs;
    for (int j = 0; j < n; ++j)
      if (j != i && adj(i, j) != 0.0) nbrs.push_back(j);
    const int d = static_cast<int>(nbrs.size());
    if (d < 2) continue;
    int links = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        if (adj(nbrs[a], nbrs[b]) != 0.0) ++links;
    total += 2.0 * links / (static_cast<double>(d) * (d - 1));
  }
  return total / n;
}

bool is_degree_regular(const Mat& adj) {
  const Vec deg = adj.rowwise().sum();
  return deg.size() == 0 || (deg.array() == deg(0)).all();
}

}  // namespace gdp::experiments
