#include "gdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gdp/adam.hpp"
#include "gdp/experiments.hpp"
#include "gdp/rng.hpp"

namespace gdp::model {

using num::Tensor;

namespace {

int act_from_name(const std::string& name) {
  if (name == "tanh") return 0;
  if (name == "softsign") return 1;
  if (name == "relu") return 2;
  throw DataError("unknown activation '" + name + "'");
}

Tensor activate(const Tensor& x, int act) {
  switch (act) {
    case 0: return num::tanh_act(x);
    case 1: return num::softsign(x);
    default: return num::relu(x);
  }
}

Mat xavier(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
  return w;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw DataError("epochs must be >= 0");
  if (cfg.lr_gen <= 0 || cfg.lr_surrogate <= 0) throw DataError("learning rates must be positive");
  if (cfg.beta_gen <= 0) throw DataError("beta_gen must be positive");
  if (cfg.K < 1) throw DataError("filter order K must be >= 1");
  if (cfg.d_h < 1) throw DataError("hidden width must be >= 1");
  if (cfg.val_every < 1) throw DataError("validation cadence must be >= 1");
  if (cfg.chunk_pairs < 1) throw DataError("chunk size must be >= 1");
  if (cfg.rounds != 1 && cfg.rounds != 2) throw DataError("rounds must be 1 or 2");
  if (!cfg.adj_branch && !cfg.poly_branch) throw DataError("at least one branch must be enabled");
  act_from_name(cfg.activation);
}

}  // namespace

Mlp Mlp::make(int d_in, int d_h, int d_out, int act, Rng& rng) {
  Mlp m;
  m.act = act;
  m.w1 = Tensor::param(xavier(d_in, d_h, rng), "w1");
  m.b1 = Tensor::param(Mat::Zero(1, d_h), "b1");
  m.w2 = Tensor::param(xavier(d_h, d_h, rng), "w2");
  m.b2 = Tensor::param(Mat::Zero(1, d_h), "b2");
  m.w3 = Tensor::param(xavier(d_h, d_out, rng), "w3");
  m.b3 = Tensor::param(Mat::Zero(1, d_out), "b3");
  return m;
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = activate(num::add(num::matmul(x, w1), b1), act);
  h = activate(num::add(num::matmul(h, w2), b2), act);
  return num::add(num::matmul(h, w3), b3);
}

std::vector<Tensor> Mlp::params() const { return {w1, b1, w2, b2, w3, b3}; }

PairBatch make_pairs(const dynamics::Dataset& ds, bool validation) {
  const auto& trajs = validation ? ds.val : ds.train;
  const int n = ds.nodes();
  const int d_s = ds.d_s();
  const int d_f = ds.d_f();
  int count = 0;
  for (const auto& tr : trajs) count += static_cast<int>(tr.states.size()) - 1;
  PairBatch b;
  b.n = n;
  b.count = count;
  b.X = Mat::Zero(static_cast<Eigen::Index>(count) * n, d_s + d_f);
  b.Y = Mat::Zero(static_cast<Eigen::Index>(count) * n, d_s);
  Eigen::Index row = 0;
  for (const auto& tr : trajs)
    for (size_t t = 0; t + 1 < tr.states.size(); ++t) {
      b.X.block(row, 0, n, d_s) = tr.states[t];
      if (d_f > 0) b.X.block(row, d_s, n, d_f) = tr.statics;
      b.Y.middleRows(row, n) = tr.states[t + 1];
      row += n;
    }
  return b;
}

GdpModel::GdpModel(int n, int d_s, int d_f, bool directed_psi,
                   const TrainConfig& cfg, uint64_t seed)
    : n_(n), d_s_(d_s), d_f_(d_f), tied_(!directed_psi), cfg_(cfg) {
  validate_config(cfg);
  if (n < 2) throw DataError("need at least two nodes");

  const int pairs = tied_ ? n * (n - 1) / 2 : n * (n - 1);
  untie_ = Mat::Zero(static_cast<Eigen::Index>(n) * n, pairs);
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = tied_ ? i + 1 : 0; j < n; ++j) {
      if (j == i) continue;
      untie_(static_cast<Eigen::Index>(i) * n + j, p) = 1.0;
      if (tied_) untie_(static_cast<Eigen::Index>(j) * n + i, p) = 1.0;
      ++p;
    }
  mask_ = Mat::Ones(n, n);
  mask_.diagonal().setZero();

  Rng psi_rng = stream_rng(seed, "psi");
  Mat psi0(pairs, 2);
  for (int r = 0; r < pairs; ++r)
    for (int c = 0; c < 2; ++c) psi0(r, c) = psi_rng.uniform(-0.1, 0.1);
  psi_ = cfg.freeze_psi ? Tensor::constant(psi0) : Tensor::param(psi0, "psi");

  Mat theta0 = Mat::Zero(1, cfg.K + 1);
  theta0(0, 1) = 1.0;  // start at the identity filter
  theta_ = Tensor::param(theta0, "theta");

  const int act = act_from_name(cfg.activation);
  const int d_in = 2 * (d_s + d_f);
  auto build = [&](const char* prefix, std::vector<Mlp>& out) {
    for (const char* part : {"e0", "e1", "v"}) {
      Rng rng = stream_rng(seed, std::string(prefix) + "_" + part);
      const bool vertex = part[0] == 'v';
      out.push_back(Mlp::make(vertex ? cfg.d_h : d_in, cfg.d_h,
                              vertex ? d_s : cfg.d_h, act, rng));
    }
  };
  build("adj", adj_mlps_);
  build("poly", poly_mlps_);
  if (cfg.rounds == 2) {
    auto build2 = [&](const char* prefix, std::vector<Mlp>& out) {
      for (const char* part : {"e0", "e1"}) {
        Rng rng = stream_rng(seed, std::string(prefix) + "_" + part);
        out.push_back(Mlp::make(2 * cfg.d_h, cfg.d_h, cfg.d_h, act, rng));
      }
    };
    build2("adj2", adj_round2_);
    build2("poly2", poly_round2_);
  }
}

Tensor GdpModel::expand_logits() {
  return num::matmul(Tensor::constant(untie_), psi_);
}

std::pair<Tensor, Tensor> GdpModel::edge_probabilities() {
  Tensor probs = num::softmax_rows(num::scale(expand_logits(), cfg_.beta_gen));
  Tensor mask = Tensor::constant(mask_);
  Tensor a0 = num::mul(num::reshape(num::slice_cols(probs, 0, 1), n_, n_), mask);
  Tensor a1 = num::mul(num::reshape(num::slice_cols(probs, 1, 2), n_, n_), mask);
  return {a0, a1};
}

std::pair<Tensor, Tensor> GdpModel::branch_filters(const Tensor& a0, const Tensor& a1,
                                                   bool polynomial) {
  if (!polynomial) return {a0, a1};
  Tensor eye = Tensor::constant(Mat::Identity(n_, n_));
  Tensor mask = Tensor::constant(mask_);
  auto filter = [&](const Tensor& a) {
    Tensor deg = num::row_sum(a);
    Tensor norm;
    if (tied_) {
      Tensor r = num::rsqrt_floor(deg, graphs::kDegreeEps);
      norm = num::mul(a, num::matmul(r, num::transpose(r)));
    } else {
      norm = num::mul(a, num::recip_floor(deg, graphs::kDegreeEps));
    }
    Tensor f = num::scale(eye, num::slice_cols(theta_, cfg_.K, cfg_.K + 1));
    for (int k = cfg_.K - 1; k >= 0; --k)
      f = num::add(num::matmul(norm, f),
                   num::scale(eye, num::slice_cols(theta_, k, k + 1)));
    return num::mul(f, mask);  // aggregation runs over senders != receiver
  };
  return {filter(a0), filter(a1)};
}

Tensor GdpModel::surrogate_step(bool polynomial, const Tensor& f0, const Tensor& f1,
                                const Tensor& x, int batch) {
  if (x.rows() != static_cast<Eigen::Index>(batch) * n_)
    throw DataError("surrogate_step: feature rows disagree with batch * n");
  auto& mlps = polynomial ? poly_mlps_ : adj_mlps_;
  Tensor edges = num::pair_concat(x, n_);
  Tensor agg = num::add(num::edge_aggregate(f0, mlps[0](edges), n_),
                        num::edge_aggregate(f1, mlps[1](edges), n_));
  if (cfg_.rounds == 2) {
    auto& r2 = polynomial ? poly_round2_ : adj_round2_;
    Tensor edges2 = num::pair_concat(agg, n_);
    agg = num::add(num::edge_aggregate(f0, r2[0](edges2), n_),
                   num::edge_aggregate(f1, r2[1](edges2), n_));
  }
  return num::add(num::slice_cols(x, 0, d_s_), mlps[2](agg));
}

Tensor GdpModel::pair_loss(const Mat& x, const Mat& y, int batch,
                           double adj_weight, double poly_weight) {
  Tensor xt = Tensor::constant(x);
  Tensor yt = Tensor::constant(y);
  auto [a0, a1] = edge_probabilities();
  Tensor total;
  for (bool polynomial : {false, true}) {
    const double w = polynomial ? poly_weight : adj_weight;
    if (w == 0.0) continue;
    auto [f0, f1] = branch_filters(a0, a1, polynomial);
    Tensor branch_mse = num::mse(surrogate_step(polynomial, f0, f1, xt, batch), yt);
    Tensor term = w == 1.0 ? branch_mse : num::scale(branch_mse, w);
    total = total.defined() ? num::add(total, term) : term;
  }
  return total.defined() ? total : Tensor::scalar(0.0);
}

Mat GdpModel::edge_scores() const { return edge_scores(psi_.value()); }

Mat GdpModel::edge_scores(const Mat& psi_packed) const {
  if (psi_packed.rows() != untie_.cols() || psi_packed.cols() != 2)
    throw DataError("edge_scores: packed logit shape mismatch");
  Mat logits = untie_ * psi_packed;
  Mat s(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * n_ + j;
      s(i, j) = 1.0 / (1.0 + std::exp(-cfg_.beta_gen * (logits(r, 1) - logits(r, 0))));
    }
  s.diagonal().setZero();
  return s;
}

void GdpModel::set_psi(const Mat& psi_packed) {
  if (psi_packed.rows() != untie_.cols() || psi_packed.cols() != 2)
    throw DataError("set_psi: packed logit shape mismatch");
  psi_.value() = psi_packed;
}

std::vector<Tensor> GdpModel::generator_params() const {
  if (cfg_.freeze_psi) return {};
  return {psi_};
}

std::vector<Tensor> GdpModel::surrogate_params() const {
  std::vector<Tensor> out = {theta_};
  for (const auto* set : {&adj_mlps_, &poly_mlps_, &adj_round2_, &poly_round2_})
    for (const auto& m : *set)
      for (const auto& t : m.params()) out.push_back(t);
  return out;
}

Mlp& GdpModel::mlp(bool polynomial, int which) {
  return (polynomial ? poly_mlps_ : adj_mlps_).at(which);
}

Mlp& GdpModel::round2_mlp(bool polynomial, int which) {
  return (polynomial ? poly_round2_ : adj_round2_).at(which);
}

namespace {

io::Json mat_to_json(const Mat& m) {
  io::Json rows = io::Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    io::Json row = io::Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const io::Json& rows) {
  if (rows.empty()) return Mat();
  Mat m(rows.size(), rows[0].size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[i][j].get<double>();
  return m;
}

io::Json mlp_to_json(const Mlp& m) {
  return {{"w1", mat_to_json(m.w1.value())}, {"b1", mat_to_json(m.b1.value())},
          {"w2", mat_to_json(m.w2.value())}, {"b2", mat_to_json(m.b2.value())},
          {"w3", mat_to_json(m.w3.value())}, {"b3", mat_to_json(m.b3.value())}};
}

Mat symmetrized(const Mat& s, bool tied, bool truth_directed) {
  if (truth_directed || tied) return s;
  return 0.5 * (s + s.transpose());
}

}  // namespace

io::Json GdpModel::to_json() const {
  io::Json j;
  j["n"] = n_;
  j["d_s"] = d_s_;
  j["d_f"] = d_f_;
  j["tied"] = tied_;
  j["psi"] = mat_to_json(psi_.value());
  j["theta"] = mat_to_json(theta_.value());
  io::Json mlps;
  const char* names[] = {"e0", "e1", "v"};
  for (int i = 0; i < 3; ++i) {
    mlps["adj"][names[i]] = mlp_to_json(adj_mlps_[i]);
    mlps["poly"][names[i]] = mlp_to_json(poly_mlps_[i]);
  }
  for (size_t i = 0; i < adj_round2_.size(); ++i) {
    mlps["adj_round2"][names[i]] = mlp_to_json(adj_round2_[i]);
    mlps["poly_round2"][names[i]] = mlp_to_json(poly_round2_[i]);
  }
  j["mlps"] = std::move(mlps);
  io::Json cfg;
  cfg["epochs"] = cfg_.epochs;
  cfg["lr_gen"] = cfg_.lr_gen;
  cfg["lr_surrogate"] = cfg_.lr_surrogate;
  cfg["beta_gen"] = cfg_.beta_gen;
  cfg["K"] = cfg_.K;
  cfg["d_h"] = cfg_.d_h;
  cfg["val_every"] = cfg_.val_every;
  cfg["activation"] = cfg_.activation;
  cfg["chunk_pairs"] = cfg_.chunk_pairs;
  cfg["adj_branch"] = cfg_.adj_branch;
  cfg["poly_branch"] = cfg_.poly_branch;
  cfg["poly_warmup_epochs"] = cfg_.poly_warmup_epochs;
  cfg["rounds"] = cfg_.rounds;
  cfg["freeze_psi"] = cfg_.freeze_psi;
  j["config"] = std::move(cfg);
  return j;
}

TrainResult train_gdp(const dynamics::Dataset& ds, const TrainConfig& cfg,
                      uint64_t seed, const Mat* psi_override) {
  validate_config(cfg);
  if (ds.val.empty()) throw DataError("training needs a validation split");
  const bool directed_psi =
      cfg.tie == PsiTie::from_graph ? ds.truth.directed : cfg.tie == PsiTie::untied;

  GdpModel model(ds.nodes(), ds.d_s(), ds.d_f(), directed_psi, cfg, seed);
  if (psi_override) model.set_psi(*psi_override);

  const PairBatch train_pairs = make_pairs(ds, false);
  const PairBatch val_pairs = make_pairs(ds, true);
  if (train_pairs.count < 1) throw DataError("train split has no consecutive pairs");

  num::Adam opt_gen(model.generator_params(), {cfg.lr_gen});
  num::Adam opt_sur(model.surrogate_params(), {cfg.lr_surrogate});

  TrainResult r{std::move(model), Mat(), 0,
                std::numeric_limits<double>::quiet_NaN(), {}, Mat()};
  r.best_psi = r.model.psi().value();
  r.history.reserve(cfg.epochs);
  double best_val = std::numeric_limits<double>::infinity();

  const int n = r.model.n();
  auto run_chunks = [&](const PairBatch& pairs, double wa, double wp, bool learn) {
    double total = 0.0;
    for (int p0 = 0; p0 < pairs.count; p0 += cfg.chunk_pairs) {
      const int bc = std::min(cfg.chunk_pairs, pairs.count - p0);
      const Mat xc = pairs.X.middleRows(static_cast<Eigen::Index>(p0) * n,
                                        static_cast<Eigen::Index>(bc) * n);
      const Mat yc = pairs.Y.middleRows(static_cast<Eigen::Index>(p0) * n,
                                        static_cast<Eigen::Index>(bc) * n);
      const double share = static_cast<double>(bc) / pairs.count;
      if (learn) {
        num::Tape tape;
        num::TapeScope scope(tape);
        Tensor loss = num::scale(r.model.pair_loss(xc, yc, bc, wa, wp), share);
        tape.backward(loss);
        total += loss.value()(0, 0);
      } else {
        total += r.model.pair_loss(xc, yc, bc, wa, wp).value()(0, 0) * share;
      }
    }
    return total;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double wa = cfg.adj_branch ? 1.0 : 0.0;
    const double wp =
        cfg.poly_branch && epoch > cfg.poly_warmup_epochs ? 1.0 : 0.0;
    opt_gen.zero_grad();
    opt_sur.zero_grad();
    const double train_loss = run_chunks(train_pairs, wa, wp, true);
    if (!std::isfinite(train_loss))
      throw NumericError("training aborted at epoch " + std::to_string(epoch) +
                         ": non-finite loss");
    opt_gen.step();
    opt_sur.step();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    if (ds.has_truth) {
      const Mat s = symmetrized(r.model.edge_scores(), r.model.tied(), ds.truth.directed);
      rec.auc = experiments::auc_ambiguous(s, ds.truth);
    }
    if (epoch % cfg.val_every == 0 || epoch == cfg.epochs) {
      rec.val_mse = run_chunks(val_pairs, wa, wp, false);
      if (rec.val_mse < best_val) {
        best_val = rec.val_mse;
        r.best_psi = r.model.psi().value();
        r.best_epoch = epoch;
        r.best_val = rec.val_mse;
      }
    }
    r.history.push_back(rec);
  }

  r.scores = symmetrized(r.model.edge_scores(r.best_psi), r.model.tied(),
                         ds.truth.directed);
  return r;
}

TrainResult train_single_step(const dynamics::Dataset& ds, TrainConfig cfg,
                              uint64_t seed) {
  cfg.poly_branch = false;
  return train_gdp(ds, cfg, seed);
}

void write_checkpoint(const TrainResult& r, const std::string& path) {
  io::Json j = r.model.to_json();
  j["version"] = kArtifactVersion;
  j["psi_best"] = mat_to_json(r.best_psi);
  j["best_epoch"] = r.best_epoch;
  j["best_val_mse"] = r.best_val;
  j["scores"] = mat_to_json(r.scores);
  io::Json hist = io::Json::array();
  for (const auto& rec : r.history)
    hist.push_back({{"epoch", rec.epoch},
                    {"train_loss", rec.train_loss},
                    {"val_mse", rec.val_mse},
                    {"auc", rec.auc}});
  j["history"] = std::move(hist);
  io::write_json(path, j);
}

Mat checkpoint_scores(const io::Json& checkpoint) {
  return mat_from_json(checkpoint.at("scores"));
}

}  // namespace gdp::model
