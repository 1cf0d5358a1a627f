#include "gdp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>

#include "gdp/artifact_io.hpp"
#include "gdp/rng.hpp"

namespace gdp::dynamics {

namespace {

using Nbrs = std::vector<std::vector<int>>;

struct SystemInfo {
  const char* name;
  int d_s;
  int d_f;
  double spacing;
  bool discrete;
};

const SystemInfo& info(System s) {
  static const SystemInfo table[] = {
      {"mm", 1, 0, 1.0, false},        // michaelis_menten
      {"rossler", 3, 0, 1.0, false},   //
      {"diffusion", 1, 0, 0.1, false}, //
      {"springs", 4, 0, 0.1, false},   // 100 substeps of 0.001
      {"kuramoto", 3, 1, 0.1, false},  // observes (dphi/dt, sin phi, phi); omega static
      {"fj", 1, 1, 1.0, true},         // expressed opinion x; internal opinion s static
      {"cmn", 1, 0, 1.0, true},
  };
  return table[static_cast<int>(s)];
}

Vec mm_deriv(const Vec& x, const Nbrs& nbrs) {
  const int n = static_cast<int>(x.size());
  for (int j = 0; j < n; ++j)
    if (std::abs(1.0 + x(j)) < 1e-12)
      throw NumericError("deriv_michaelis_menten: x = -1 singularity at node " +
                         std::to_string(j));
  Vec dx(n);
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    for (int j : nbrs[i]) coupling += x(j) / (1.0 + x(j));
    if (!nbrs[i].empty()) coupling /= static_cast<double>(nbrs[i].size());
    dx(i) = -x(i) + coupling;
  }
  return dx;
}

Mat rossler_deriv(const Mat& x, const Nbrs& nbrs, bool standard_form) {
  const int n = static_cast<int>(x.rows());
  Mat dx(n, 3);
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    for (int j : nbrs[i]) coupling += std::sin(x(j, 0));
    if (!nbrs[i].empty()) coupling /= static_cast<double>(nbrs[i].size());
    dx(i, 0) = -x(i, 1) - x(i, 2) + coupling;
    dx(i, 1) = x(i, 0) + 0.1 * x(i, 1);
    dx(i, 2) = 0.1 + x(i, 2) * ((standard_form ? x(i, 0) : x(i, 2)) - 18.0);
  }
  return dx;
}

Vec kuramoto_deriv(const Vec& phi, const Vec& omega, const Nbrs& nbrs, double k) {
  const int n = static_cast<int>(phi.size());
  Vec dphi(n);
  for (int i = 0; i < n; ++i) {
    double coupling = 0.0;
    for (int j : nbrs[i]) coupling += std::sin(phi(j) - phi(i));
    dphi(i) = omega(i) + k * coupling;
  }
  return dphi;
}

Vec fj_step(const Vec& x, const Vec& s, const Nbrs& nbrs) {
  const int n = static_cast<int>(x.size());
  Vec next(n);
  for (int i = 0; i < n; ++i) {
    double acc = s(i);
    for (int j : nbrs[i]) acc += x(j);
    next(i) = acc / (1.0 + static_cast<double>(nbrs[i].size()));
  }
  return next;
}

Vec cmn_step(const Vec& x, const Nbrs& nbrs, double eps, double eta) {
  const int n = static_cast<int>(x.size());
  auto f = [eta](double v) { return eta * v * (1.0 - v); };
  Vec next(n);
  for (int i = 0; i < n; ++i) {
    next(i) = (1.0 - eps) * f(x(i));
    if (!nbrs[i].empty()) {
      double acc = 0.0;
      for (int j : nbrs[i]) acc += f(x(j));
      next(i) += eps * acc / static_cast<double>(nbrs[i].size());
    }
  }
  return next;
}

Mat springs_deriv(const Mat& state, const Nbrs& nbrs, double k) {
  const int n = static_cast<int>(state.rows());
  Mat d(n, 4);
  for (int i = 0; i < n; ++i) {
    d(i, 0) = state(i, 2);
    d(i, 1) = state(i, 3);
    double fx = 0.0, fy = 0.0;
    for (int j : nbrs[i]) {
      fx -= k * (state(i, 0) - state(j, 0));
      fy -= k * (state(i, 1) - state(j, 1));
    }
    d(i, 2) = fx;
    d(i, 3) = fy;
  }
  return d;
}

void reflect_walls(Mat& state, double box_half) {
  const int n = static_cast<int>(state.rows());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) {
      double pos = state(i, c);
      double vel = state(i, c + 2);
      int bounces = 0;
      while (pos > box_half || pos < -box_half) {
        pos = (pos > box_half ? 2.0 * box_half : -2.0 * box_half) - pos;
        vel = -vel;
        if (++bounces > 1000)
          throw NumericError("step_springs: runaway wall reflection");
      }
      state(i, c) = pos;
      state(i, c + 2) = vel;
    }
}

Mat springs_advance(Mat state, const Nbrs& nbrs, double k, double inner_step,
                    int substeps, double box_half) {
  auto deriv = [&](const Mat& s) { return springs_deriv(s, nbrs, k); };
  for (int s = 0; s < substeps; ++s) {
    state = rk4_integrate(deriv, std::move(state), inner_step, 1);
    reflect_walls(state, box_half);
  }
  return state;
}

}  // namespace

System parse_system(const std::string& name) {
  for (int s = 0; s < 7; ++s)
    if (name == info(static_cast<System>(s)).name) return static_cast<System>(s);
  throw DataError("unknown system '" + name + "'");
}

const char* system_name(System s) { return info(s).name; }
int state_dim(System s) { return info(s).d_s; }
int static_dim(System s) { return info(s).d_f; }
double native_spacing(System s) { return info(s).spacing; }
bool is_discrete(System s) { return info(s).discrete; }

Vec deriv_michaelis_menten(const Vec& x, const graphs::Graph& g) {
  return mm_deriv(x, g.in_neighbors());
}

Mat deriv_rossler(const Mat& x, const graphs::Graph& g, bool standard_form) {
  if (x.cols() != 3) throw DataError("deriv_rossler: state must be n x 3");
  return rossler_deriv(x, g.in_neighbors(), standard_form);
}

Vec deriv_diffusion(const Vec& x, const graphs::Graph& g) {
  Mat norm = g.directed ? graphs::in_deg_normalize(g.adj) : graphs::sym_normalize(g.adj);
  return norm * x;
}

Mat step_springs(const Mat& state, const graphs::Graph& g, double k,
                 double inner_step, int substeps, double box_half) {
  if (state.cols() != 4) throw DataError("step_springs: state must be n x 4");
  return springs_advance(state, g.in_neighbors(), k, inner_step, substeps, box_half);
}

Vec deriv_kuramoto(const Vec& phi, const Vec& omega, const graphs::Graph& g, double k) {
  return kuramoto_deriv(phi, omega, g.in_neighbors(), k);
}

Vec step_fj(const Vec& x, const Vec& s, const graphs::Graph& g) {
  return fj_step(x, s, g.in_neighbors());
}

Vec step_cmn(const Vec& x, const graphs::Graph& g, double eps, double eta) {
  return cmn_step(x, g.in_neighbors(), eps, eta);
}

namespace {

// One full trajectory at native resolution. Returns nullopt when a Rossler
// run blows past 1e6 (caller redraws the initial condition).
std::optional<Trajectory> simulate_native(const graphs::Graph& g, const SimConfig& cfg,
                                          int native_len, Rng& rng) {
  const int n = g.n;
  const Nbrs nbrs = g.in_neighbors();
  Trajectory tr;
  tr.statics = Mat::Zero(n, static_dim(cfg.system));
  tr.states.reserve(native_len);

  switch (cfg.system) {
    case System::michaelis_menten: {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(0.5, 1.5);
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 < native_len)
          x = rk4_integrate([&](const Vec& v) { return mm_deriv(v, nbrs); }, x, 0.01, 100);
      }
      break;
    }
    case System::rossler: {
      Mat x(n, 3);
      for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) x(i, c) = rng.uniform(-1.0, 1.0);
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 == native_len) break;
        try {
          x = rk4_integrate(
              [&](const Mat& v) { return rossler_deriv(v, nbrs, cfg.rossler_standard_form); },
              x, 0.01, 100);
        } catch (const NumericError&) {
          return std::nullopt;
        }
        if (x.cwiseAbs().maxCoeff() > 1e6) return std::nullopt;
      }
      break;
    }
    case System::diffusion: {
      Mat norm = g.directed ? graphs::in_deg_normalize(g.adj) : graphs::sym_normalize(g.adj);
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 < native_len)
          x = rk4_integrate([&](const Vec& v) { return Vec(norm * v); }, x, 0.01, 10);
      }
      break;
    }
    case System::springs: {
      Mat x(n, 4);
      for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal(0.0, 0.5);
        x(i, 1) = rng.normal(0.0, 0.5);
        double gx = rng.normal(), gy = rng.normal();
        double norm = std::hypot(gx, gy);
        if (norm < 1e-12) { gx = 1.0; gy = 0.0; norm = 1.0; }
        x(i, 2) = 0.5 * gx / norm;
        x(i, 3) = 0.5 * gy / norm;
      }
      reflect_walls(x, 2.5);  // N(0, 0.5) can start outside the box
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 < native_len)
          x = springs_advance(std::move(x), nbrs, cfg.spring_k, 1e-3, 100, 2.5);
      }
      break;
    }
    case System::kuramoto: {
      Vec omega(n), phi(n);
      for (int i = 0; i < n; ++i) omega(i) = rng.uniform(cfg.omega_min, cfg.omega_max);
      for (int i = 0; i < n; ++i) phi(i) = rng.uniform(0.0, 2.0 * M_PI);
      tr.statics.col(0) = omega;
      for (int t = 0; t < native_len; ++t) {
        Vec dphi = kuramoto_deriv(phi, omega, nbrs, cfg.kuramoto_k);
        Mat obs(n, 3);
        obs.col(0) = dphi;
        obs.col(1) = phi.array().sin();
        obs.col(2) = phi;
        tr.states.push_back(obs);
        if (t + 1 < native_len)
          phi = rk4_integrate(
              [&](const Vec& p) { return kuramoto_deriv(p, omega, nbrs, cfg.kuramoto_k); },
              phi, 0.01, 10);
      }
      break;
    }
    case System::friedkin_johnsen: {
      Vec s(n), x(n);
      for (int i = 0; i < n; ++i) s(i) = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
      tr.statics.col(0) = s;
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 < native_len) x = fj_step(x, s, nbrs);
      }
      break;
    }
    case System::cmn: {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform();
      for (int t = 0; t < native_len; ++t) {
        tr.states.push_back(x);
        if (t + 1 < native_len) x = cmn_step(x, nbrs, cfg.cmn_eps, cfg.cmn_eta);
      }
      break;
    }
  }
  return tr;
}

Trajectory sample_trajectory(const graphs::Graph& g, const SimConfig& cfg, Rng& rng) {
  const int native_len = (cfg.traj_len - 1) * cfg.sample_every + 1;
  std::optional<Trajectory> native;
  for (int attempt = 0; attempt < 100 && !native; ++attempt)
    native = simulate_native(g, cfg, native_len, rng);
  if (!native) throw NumericError("trajectory kept diverging after 100 restarts");
  Trajectory out;
  out.statics = std::move(native->statics);
  out.states.reserve(cfg.traj_len);
  for (int t = 0; t < cfg.traj_len; ++t)
    out.states.push_back(std::move(native->states[t * cfg.sample_every]));
  return out;
}

void validate(const SimConfig& cfg) {
  if (cfg.n_traj < 1) throw DataError("need at least one trajectory");
  if (cfg.traj_len < 2) throw DataError("need at least two snapshots per trajectory");
  if (cfg.sample_every < 1) throw DataError("sampling interval must be >= 1");
  if (cfg.val_traj < 0) throw DataError("validation trajectory count must be >= 0");
  if (cfg.spring_k <= 0.0) throw DataError("spring constant must be positive");
  if (cfg.cmn_eps < 0.0 || cfg.cmn_eps > 1.0) throw DataError("cmn eps outside [0,1]");
  if (cfg.cmn_eta <= 0.0) throw DataError("cmn eta must be positive");
  if (cfg.omega_max < cfg.omega_min) throw DataError("omega range inverted");
}

void apply_normalization(std::vector<Trajectory>& trajs, const Vec& lo, const Vec& hi,
                         const Vec& slo, const Vec& shi) {
  auto map = [](double v, double lo_d, double hi_d) {
    const double denom = hi_d - lo_d;
    if (denom <= 1e-300) return 0.0;
    return 2.0 * (v - lo_d) / denom - 1.0;
  };
  for (auto& tr : trajs) {
    for (auto& st : tr.states)
      for (Eigen::Index i = 0; i < st.rows(); ++i)
        for (Eigen::Index d = 0; d < st.cols(); ++d)
          st(i, d) = map(st(i, d), lo(d), hi(d));
    for (Eigen::Index i = 0; i < tr.statics.rows(); ++i)
      for (Eigen::Index d = 0; d < tr.statics.cols(); ++d)
        tr.statics(i, d) = map(tr.statics(i, d), slo(d), shi(d));
  }
}

}  // namespace

Dataset build_dataset(const graphs::Graph& g, const SimConfig& cfg) {
  validate(cfg);
  Dataset ds;
  ds.system = cfg.system;
  ds.truth = g;
  ds.has_truth = true;
  ds.sample_every = cfg.sample_every;
  ds.config = cfg;

  auto simulate_into = [&](std::vector<Trajectory>& out, const char* stream, int count) {
    for (int i = 0; i < count; ++i) {
      const uint64_t s = stream_seed(cfg.seed, stream, static_cast<uint64_t>(i));
      Rng rng(s);
      try {
        out.push_back(sample_trajectory(g, cfg, rng));
      } catch (const NumericError& e) {
        throw NumericError(std::string(stream) + " " + std::to_string(i) +
                           " (stream seed " + std::to_string(s) + "): " + e.what());
      }
    }
  };
  simulate_into(ds.train, "train_traj", cfg.n_traj);
  simulate_into(ds.val, "val_traj", cfg.val_traj);

  const int d_s = state_dim(cfg.system);
  const int d_f = static_dim(cfg.system);
  ds.state_min = Vec::Constant(d_s, std::numeric_limits<double>::infinity());
  ds.state_max = Vec::Constant(d_s, -std::numeric_limits<double>::infinity());
  ds.static_min = Vec::Constant(d_f, std::numeric_limits<double>::infinity());
  ds.static_max = Vec::Constant(d_f, -std::numeric_limits<double>::infinity());
  for (const auto& tr : ds.train) {
    for (const auto& st : tr.states)
      for (int d = 0; d < d_s; ++d) {
        ds.state_min(d) = std::min(ds.state_min(d), st.col(d).minCoeff());
        ds.state_max(d) = std::max(ds.state_max(d), st.col(d).maxCoeff());
      }
    for (int d = 0; d < d_f; ++d) {
      ds.static_min(d) = std::min(ds.static_min(d), tr.statics.col(d).minCoeff());
      ds.static_max(d) = std::max(ds.static_max(d), tr.statics.col(d).maxCoeff());
    }
  }
  apply_normalization(ds.train, ds.state_min, ds.state_max, ds.static_min, ds.static_max);
  apply_normalization(ds.val, ds.state_min, ds.state_max, ds.static_min, ds.static_max);
  return ds;
}

namespace {

double denorm(double v, double lo, double hi) {
  const double denom = hi - lo;
  if (denom <= 1e-300) return lo;
  return lo + (v + 1.0) * denom / 2.0;
}

std::string traj_path(const std::string& dir, const char* split, int idx, bool statics) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d%s.csv", split, idx, statics ? "_static" : "");
  return dir + "/" + buf;
}

void write_split(const std::string& dir, const char* split,
                 const std::vector<Trajectory>& trajs, const Dataset& ds) {
  const int d_s = static_cast<int>(ds.state_min.size());
  const int d_f = static_cast<int>(ds.static_min.size());
  io::Table table;
  table.header = {"t", "node"};
  for (int d = 0; d < d_s; ++d) table.header.push_back("dim" + std::to_string(d));
  for (size_t k = 0; k < trajs.size(); ++k) {
    table.rows.clear();
    const auto& tr = trajs[k];
    for (size_t t = 0; t < tr.states.size(); ++t)
      for (Eigen::Index i = 0; i < tr.states[t].rows(); ++i) {
        std::vector<double> row = {static_cast<double>(t), static_cast<double>(i)};
        for (int d = 0; d < d_s; ++d)
          row.push_back(denorm(tr.states[t](i, d), ds.state_min(d), ds.state_max(d)));
        table.rows.push_back(std::move(row));
      }
    io::write_csv(traj_path(dir, split, static_cast<int>(k), false), table);
    if (d_f > 0) {
      io::Table st;
      st.header = {"node"};
      for (int d = 0; d < d_f; ++d) st.header.push_back("f" + std::to_string(d));
      for (Eigen::Index i = 0; i < tr.statics.rows(); ++i) {
        std::vector<double> row = {static_cast<double>(i)};
        for (int d = 0; d < d_f; ++d)
          row.push_back(denorm(tr.statics(i, d), ds.static_min(d), ds.static_max(d)));
        st.rows.push_back(std::move(row));
      }
      io::write_csv(traj_path(dir, split, static_cast<int>(k), true), st);
    }
  }
}

io::Json vec_to_json(const Vec& v) {
  io::Json arr = io::Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec vec_from_json(const io::Json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

std::vector<std::string> flagged_defaults(System s) {
  switch (s) {
    case System::kuramoto: return {"kuramoto_k", "omega_min", "omega_max"};
    case System::springs: return {"spring_k"};
    default: return {};
  }
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
  io::ensure_dir(dir);
  if (ds.has_truth) graphs::write_edge_list(ds.truth, dir + "/graph.edges");
  write_split(dir, "train", ds.train, ds);
  write_split(dir, "val", ds.val, ds);

  io::Json m;
  m["version"] = kArtifactVersion;
  m["system"] = system_name(ds.system);
  m["nodes"] = ds.truth.n;
  m["interval"] = ds.sample_every;
  m["native_spacing"] = native_spacing(ds.system);
  m["volume"] = {{"trajectories", static_cast<int>(ds.train.size())},
                 {"steps", ds.train.empty() ? 0 : static_cast<int>(ds.train[0].states.size())}};
  m["val_trajectories"] = static_cast<int>(ds.val.size());
  m["seed"] = ds.config.seed;
  m["normalization"] = {{"state_min", vec_to_json(ds.state_min)},
                        {"state_max", vec_to_json(ds.state_max)},
                        {"static_min", vec_to_json(ds.static_min)},
                        {"static_max", vec_to_json(ds.static_max)}};
  m["ground_truth"] = ds.has_truth ? io::Json("graph.edges") : io::Json(nullptr);
  m["config"] = {{"spring_k", ds.config.spring_k},
                 {"kuramoto_k", ds.config.kuramoto_k},
                 {"omega_min", ds.config.omega_min},
                 {"omega_max", ds.config.omega_max},
                 {"cmn_eps", ds.config.cmn_eps},
                 {"cmn_eta", ds.config.cmn_eta},
                 {"rossler_standard_form", ds.config.rossler_standard_form}};
  m["artifact_defaults"] = flagged_defaults(ds.system);
  io::write_json(dir + "/manifest.json", m);
}

namespace {

std::vector<Trajectory> load_split(const std::string& dir, const char* split, int count,
                                   int n, int d_s, int d_f) {
  std::vector<Trajectory> out;
  for (int k = 0; k < count; ++k) {
    const std::string path = traj_path(dir, split, k, false);
    io::Table table = io::read_csv(path);
    if (static_cast<int>(table.header.size()) != 2 + d_s)
      throw DataError("unexpected column count in " + path);
    if (table.rows.empty() || table.rows.size() % n != 0)
      throw DataError("row count not a multiple of node count in " + path);
    const int len = static_cast<int>(table.rows.size()) / n;
    if (len < 2) throw DataError("trajectory too short in " + path);
    Trajectory tr;
    tr.states.assign(len, Mat::Zero(n, d_s));
    for (size_t r = 0; r < table.rows.size(); ++r) {
      const int t = static_cast<int>(r) / n;
      const int i = static_cast<int>(r) % n;
      if (std::lround(table.rows[r][0]) != t || std::lround(table.rows[r][1]) != i)
        throw DataError("rows out of order in " + path);
      for (int d = 0; d < d_s; ++d) tr.states[t](i, d) = table.rows[r][2 + d];
      if (!tr.states[t].row(i).allFinite())
        throw DataError("non-finite state in " + path);
    }
    tr.statics = Mat::Zero(n, d_f);
    if (d_f > 0) {
      const std::string spath = traj_path(dir, split, k, true);
      io::Table st = io::read_csv(spath);
      if (static_cast<int>(st.rows.size()) != n)
        throw DataError("unexpected node count in " + spath);
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < d_f; ++d) tr.statics(i, d) = st.rows[i][1 + d];
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
  io::Json m = io::read_json(dir + "/manifest.json");
  Dataset ds;
  ds.system = parse_system(m.at("system").get<std::string>());
  ds.sample_every = m.at("interval").get<int>();
  const int n = m.at("nodes").get<int>();
  if (m.at("ground_truth").is_null()) {
    ds.has_truth = false;
    ds.truth.n = n;
    ds.truth.adj = Mat::Zero(n, n);
    ds.truth.directed = false;
  } else {
    ds.truth = graphs::read_edge_list(dir + "/" + m.at("ground_truth").get<std::string>());
    if (ds.truth.n != n) throw DataError("manifest/edge-list node count mismatch in " + dir);
  }
  const auto& norm = m.at("normalization");
  ds.state_min = vec_from_json(norm.at("state_min"));
  ds.state_max = vec_from_json(norm.at("state_max"));
  ds.static_min = vec_from_json(norm.at("static_min"));
  ds.static_max = vec_from_json(norm.at("static_max"));

  ds.config.system = ds.system;
  ds.config.sample_every = ds.sample_every;
  ds.config.seed = m.at("seed").get<uint64_t>();
  const auto& c = m.at("config");
  ds.config.spring_k = c.at("spring_k").get<double>();
  ds.config.kuramoto_k = c.at("kuramoto_k").get<double>();
  ds.config.omega_min = c.at("omega_min").get<double>();
  ds.config.omega_max = c.at("omega_max").get<double>();
  ds.config.cmn_eps = c.at("cmn_eps").get<double>();
  ds.config.cmn_eta = c.at("cmn_eta").get<double>();
  ds.config.rossler_standard_form = c.at("rossler_standard_form").get<bool>();

  const int d_s = static_cast<int>(ds.state_min.size());
  const int d_f = static_cast<int>(ds.static_min.size());
  const int n_train = m.at("volume").at("trajectories").get<int>();
  const int n_val = m.at("val_trajectories").get<int>();
  ds.train = load_split(dir, "train", n_train, n, d_s, d_f);
  ds.val = load_split(dir, "val", n_val, n, d_s, d_f);
  ds.config.n_traj = n_train;
  ds.config.val_traj = n_val;
  ds.config.traj_len = ds.train.empty() ? 0 : static_cast<int>(ds.train[0].states.size());

  apply_normalization(ds.train, ds.state_min, ds.state_max, ds.static_min, ds.static_max);
  apply_normalization(ds.val, ds.state_min, ds.state_max, ds.static_min, ds.static_max);
  return ds;
}

}  // namespace dynamics
