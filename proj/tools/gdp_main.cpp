// gdp: command line front end for dataset generation, training, the
// analysis/ablation experiment drivers, and score evaluation.
//
// Every option is a flat `--key value` pair (bare `--key` for booleans); a
// config file given with `--config path` holds the same keys, one `key value`
// or `key=value` per line, with command line flags taking precedence. The
// fully resolved key set is echoed into every artifact under "cli" so a run
// can be reproduced from its own output. Exit codes: 0 success, 1 usage
// error, 2 data error, 3 numeric failure.
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gdp/artifact_io.hpp"
#include "gdp/baselines.hpp"
#include "gdp/dynamics.hpp"
#include "gdp/experiments.hpp"
#include "gdp/graph.hpp"
#include "gdp/model.hpp"
#include "gdp/rng.hpp"
#include "gdp/types.hpp"

namespace {

using namespace gdp;

const char* kUsage = R"(usage: gdp <command> [--key value]... [--config file]

commands:
  generate    simulate a dataset onto disk
              --system mm|rossler|diffusion|springs|kuramoto|fj|cmn
              --graph er:n:p|erd:n:p|ba:n:m|ws:n:k:p  [--dt N] [--traj N]
              [--len N] [--val_traj N] [--seed S] [--out DIR]
  train       fit edge scores on a generated dataset
              --data DIR [--seeds 0..4] [--baseline gdp|single-step|mi|te]
              [--epochs N] [--d_h N] [--K N] [--activation tanh|softsign|relu]
              [--jobs N] [--out DIR] ...
  experiment  run an analysis driver; tag is one of
              fig2 fig3 escape distortion ksweep ablation ws stacking
  eval        recompute AUC from a score CSV and an edge list
              --scores FILE --truth FILE

A config file holds the same keys one per line (`key value` or `key=value`,
'#' comments); explicit flags win. GDP_OUT sets the default output root.
)";

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw UsageError("--" + key + ": expected an integer, got '" + v + "'");
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw UsageError("--" + key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Flat key-value arguments: config file first, command line on top. Getters
// record the resolved value (default or given) so the whole set can be echoed
// into artifacts, and every key must be consumed by the command that runs.
class Args {
 public:
  Args(const std::vector<std::string>& tokens, const std::string& command) {
    std::map<std::string, std::string> cli;
    for (size_t i = 0; i < tokens.size(); ++i) {
      const std::string& t = tokens[i];
      if (t.rfind("--", 0) != 0) {
        positionals_.push_back(t);
        continue;
      }
      const std::string key = t.substr(2);
      if (key.empty()) throw UsageError("stray '--' in arguments");
      if (i + 1 < tokens.size() && tokens[i + 1].rfind("--", 0) != 0) {
        cli[key] = tokens[++i];
      } else {
        cli[key] = "1";  // bare boolean flag
      }
    }
    auto cfg_it = cli.find("config");
    if (cfg_it != cli.end()) {
      load_config(cfg_it->second);
      cli.erase(cfg_it);
    }
    for (auto& [k, v] : cli) kv_[k] = v;
    resolved_["command"] = command;
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& def) {
    auto it = kv_.find(key);
    const std::string v = it == kv_.end() ? def : it->second;
    consume(key, v);
    return v;
  }
  std::string require_str(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw UsageError("missing required option --" + key);
    consume(key, it->second);
    return it->second;
  }
  long long geti(const std::string& key, long long def) {
    auto it = kv_.find(key);
    long long v = it == kv_.end() ? def : parse_int(key, it->second);
    consume(key, std::to_string(v));
    return v;
  }
  double getd(const std::string& key, double def) {
    auto it = kv_.find(key);
    double v = it == kv_.end() ? def : parse_double(key, it->second);
    consume(key, io::format_double(v));
    return v;
  }
  uint64_t getu(const std::string& key, uint64_t def) {
    auto it = kv_.find(key);
    uint64_t v = it == kv_.end() ? def : parse_u64(key, it->second);
    consume(key, std::to_string(v));
    return v;
  }
  bool getb(const std::string& key) {
    auto it = kv_.find(key);
    bool v = false;
    if (it != kv_.end()) {
      if (it->second == "1" || it->second == "true") v = true;
      else if (it->second == "0" || it->second == "false") v = false;
      else throw UsageError("--" + key + ": expected a boolean, got '" + it->second + "'");
    }
    consume(key, v ? "1" : "0");
    return v;
  }

  const std::vector<std::string>& positionals() const { return positionals_; }

  // Unknown keys are usage errors: typos must not silently fall back to
  // defaults, especially when they arrive via a config file.
  void finish(const std::string& command) const {
    for (const auto& [k, v] : kv_)
      if (!consumed_.count(k))
        throw UsageError("unknown option --" + k + " for 'gdp " + command + "'");
  }

  // The resolved flat config, suitable both as artifact metadata and as a
  // config file for replaying the run.
  io::Json resolved() const {
    io::Json j = io::Json::object();
    for (const auto& [k, v] : resolved_) j[k] = v;
    return j;
  }

 private:
  void consume(const std::string& key, const std::string& resolved_value) {
    consumed_.insert(key);
    resolved_[key] = resolved_value;
  }

  void load_config(const std::string& path) {
    std::istringstream in(io::read_text(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      size_t sep = line.find('=');
      if (sep == std::string::npos) sep = line.find_first_of(" \t");
      if (sep == std::string::npos)
        throw UsageError(path + ":" + std::to_string(lineno) +
                         ": expected 'key value' or 'key=value'");
      std::string key = trim(line.substr(0, sep));
      if (key.rfind("--", 0) == 0) key = key.substr(2);
      const std::string value = trim(line.substr(sep + 1));
      if (key.empty() || value.empty())
        throw UsageError(path + ":" + std::to_string(lineno) + ": empty key or value");
      kv_[key] = value;
    }
  }

  std::map<std::string, std::string> kv_;
  std::vector<std::string> positionals_;
  std::set<std::string> consumed_;
  mutable std::map<std::string, std::string> resolved_;
};

std::string output_root() {
  const char* env = std::getenv("GDP_OUT");
  return env && *env ? env : "out";
}

// ---- shared option grammars -------------------------------------------------

const std::set<std::string> kSystems = {"mm",       "rossler", "diffusion", "springs",
                                        "kuramoto", "fj",      "cmn"};

dynamics::System parse_system_checked(const std::string& tag) {
  if (!kSystems.count(tag)) {
    std::string all;
    for (const auto& s : kSystems) all += (all.empty() ? "" : ", ") + s;
    throw UsageError("unknown system '" + tag + "'; valid tags: " + all);
  }
  return dynamics::parse_system(tag);
}

// er:n:p, erd:n:p, ba:n:m, ws:n:k:p
struct GraphSpec {
  std::string shorthand;
  std::string family;
  int n = 0;
  int m = 0, k = 0;
  double p = 0.0;

  graphs::Graph build(uint64_t seed) const {
    if (family == "er") return graphs::gen_er(n, p, seed, false);
    if (family == "erd") return graphs::gen_er(n, p, seed, true);
    if (family == "ba") return graphs::gen_ba(n, m, seed);
    return graphs::gen_ws(n, k, p, seed);
  }
};

GraphSpec parse_graph_spec(const std::string& s) {
  const auto parts = split(s, ':');
  const std::string how = "graph shorthand must be er:n:p, erd:n:p, ba:n:m or ws:n:k:p";
  if (parts.empty()) throw UsageError(how);
  GraphSpec g;
  g.shorthand = s;
  g.family = parts[0];
  auto num = [&](size_t i) { return static_cast<int>(parse_int("graph", parts[i])); };
  auto real = [&](size_t i) { return parse_double("graph", parts[i]); };
  if (g.family == "er" || g.family == "erd") {
    if (parts.size() != 3) throw UsageError(how);
    g.n = num(1);
    g.p = real(2);
  } else if (g.family == "ba") {
    if (parts.size() != 3) throw UsageError(how);
    g.n = num(1);
    g.m = num(2);
  } else if (g.family == "ws") {
    if (parts.size() != 4) throw UsageError(how);
    g.n = num(1);
    g.k = num(2);
    g.p = real(3);
  } else {
    throw UsageError("unknown graph family '" + g.family + "'; " + how);
  }
  if (g.n < 2) throw UsageError("--graph: need at least 2 nodes");
  return g;
}

// "0..4" (inclusive), "1,3,7", or a single value.
std::vector<uint64_t> parse_seed_list(const std::string& key, const std::string& s) {
  std::vector<uint64_t> out;
  const size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const uint64_t a = parse_u64(key, s.substr(0, dots));
    const uint64_t b = parse_u64(key, s.substr(dots + 2));
    if (b < a) throw UsageError("--" + key + ": descending range '" + s + "'");
    for (uint64_t v = a; v <= b; ++v) out.push_back(v);
  } else {
    for (const auto& part : split(s, ',')) out.push_back(parse_u64(key, trim(part)));
  }
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

std::vector<double> parse_double_grid(const std::string& key, const std::string& s) {
  std::vector<double> out;
  const size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const long long a = parse_int(key, s.substr(0, dots));
    const long long b = parse_int(key, s.substr(dots + 2));
    if (b < a) throw UsageError("--" + key + ": descending range '" + s + "'");
    for (long long v = a; v <= b; ++v) out.push_back(static_cast<double>(v));
  } else {
    for (const auto& part : split(s, ',')) out.push_back(parse_double(key, trim(part)));
  }
  if (out.empty()) throw UsageError("--" + key + ": empty grid");
  return out;
}

std::vector<int> parse_int_grid(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_grid(key, s)) {
    if (v != std::floor(v))
      throw UsageError("--" + key + ": expected integers, got '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

model::TrainConfig train_config_from(Args& args) {
  model::TrainConfig cfg;
  cfg.epochs = static_cast<int>(args.geti("epochs", cfg.epochs));
  cfg.lr_gen = args.getd("lr_gen", cfg.lr_gen);
  cfg.lr_surrogate = args.getd("lr_sur", cfg.lr_surrogate);
  cfg.beta_gen = args.getd("beta_gen", cfg.beta_gen);
  cfg.K = static_cast<int>(args.geti("K", cfg.K));
  cfg.d_h = static_cast<int>(args.geti("d_h", cfg.d_h));
  cfg.val_every = static_cast<int>(args.geti("val_every", cfg.val_every));
  cfg.activation = args.str("activation", cfg.activation);
  cfg.chunk_pairs = static_cast<int>(args.geti("chunk", cfg.chunk_pairs));
  cfg.poly_warmup_epochs = static_cast<int>(args.geti("warmup", cfg.poly_warmup_epochs));
  cfg.rounds = static_cast<int>(args.geti("rounds", cfg.rounds));
  const std::string tie = args.str("tie", "auto");
  if (tie == "auto") cfg.tie = model::PsiTie::from_graph;
  else if (tie == "tied") cfg.tie = model::PsiTie::tied;
  else if (tie == "untied") cfg.tie = model::PsiTie::untied;
  else throw UsageError("--tie must be auto, tied or untied");
  const std::string branch = args.str("branch", "both");
  if (branch == "both") {
    cfg.adj_branch = cfg.poly_branch = true;
  } else if (branch == "adj") {
    cfg.adj_branch = true;
    cfg.poly_branch = false;
  } else if (branch == "poly") {
    cfg.adj_branch = false;
    cfg.poly_branch = true;
  } else {
    throw UsageError("--branch must be both, adj or poly");
  }
  return cfg;
}

// ---- artifact helpers -------------------------------------------------------

void write_score_csv(const Mat& scores, const std::string& path) {
  io::Table t;
  for (Eigen::Index c = 0; c < scores.cols(); ++c)
    t.header.push_back("c" + std::to_string(c));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    std::vector<double> row(scores.cols());
    for (Eigen::Index c = 0; c < scores.cols(); ++c) row[c] = scores(r, c);
    t.rows.push_back(std::move(row));
  }
  io::write_csv(path, t);
}

Mat read_score_csv(const std::string& path) {
  const io::Table t = io::read_csv(path);
  const Eigen::Index rows = static_cast<Eigen::Index>(t.rows.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(t.header.size());
  if (rows == 0 || rows != cols)
    throw DataError(path + ": expected a square score matrix, got " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = t.rows[r][c];
  return m;
}

std::string fmt2(double v) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << v;
  return out.str();
}

void patch_json(const std::string& path, const io::Json& cli) {
  io::Json j = io::read_json(path);
  j["cli"] = cli;
  io::write_json(path, j);
}

// ---- generate ----------------------------------------------------------------

int cmd_generate(Args& args) {
  const std::string system = args.require_str("system");
  const GraphSpec gspec = parse_graph_spec(args.require_str("graph"));

  dynamics::SimConfig cfg;
  cfg.system = parse_system_checked(system);
  cfg.sample_every = static_cast<int>(args.geti("dt", 1));
  cfg.n_traj = static_cast<int>(args.geti("traj", cfg.n_traj));
  cfg.traj_len = static_cast<int>(args.geti("len", cfg.traj_len));
  cfg.val_traj = static_cast<int>(args.geti("val_traj", cfg.val_traj));
  cfg.seed = args.getu("seed", 0);
  cfg.spring_k = args.getd("spring_k", cfg.spring_k);
  cfg.kuramoto_k = args.getd("kuramoto_k", cfg.kuramoto_k);
  cfg.omega_min = args.getd("omega_min", cfg.omega_min);
  cfg.omega_max = args.getd("omega_max", cfg.omega_max);
  cfg.cmn_eps = args.getd("cmn_eps", cfg.cmn_eps);
  cfg.cmn_eta = args.getd("cmn_eta", cfg.cmn_eta);
  cfg.rossler_standard_form = args.getb("rossler_standard");
  const std::string out = args.str("out", output_root() + "/" + system);
  args.finish("generate");

  const graphs::Graph g = gspec.build(stream_seed(cfg.seed, "graph"));
  const dynamics::Dataset ds = dynamics::build_dataset(g, cfg);
  dynamics::write_dataset(ds, out);
  patch_json(out + "/manifest.json", args.resolved());

  std::cout << "wrote " << out << ": system=" << system << " n=" << g.n
            << " edges=" << g.edge_count() << " train=" << cfg.n_traj
            << " val=" << cfg.val_traj << " len=" << cfg.traj_len
            << " dt=" << cfg.sample_every << "\n";
  return 0;
}

// ---- train -------------------------------------------------------------------

struct SeedRun {
  uint64_t seed = 0;
  double auc = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = 0;
  double best_val = std::numeric_limits<double>::quiet_NaN();
  std::exception_ptr error;
};

void write_train_artifacts(const model::TrainResult& r, const std::string& out,
                           uint64_t seed, const io::Json& cli) {
  const std::string tag = std::to_string(seed);
  model::write_checkpoint(r, out + "/checkpoint_seed" + tag + ".json");
  patch_json(out + "/checkpoint_seed" + tag + ".json", cli);
  write_score_csv(r.scores, out + "/scores_seed" + tag + ".csv");

  io::Table hist;
  hist.header = {"epoch", "train_loss", "val_mse", "auc"};
  for (const auto& e : r.history)
    hist.rows.push_back({static_cast<double>(e.epoch), e.train_loss, e.val_mse, e.auc});
  io::write_csv(out + "/history_seed" + tag + ".csv", hist);
}

// Waves of at most `jobs` worker threads; each seed trains and writes its own
// artifacts, so runs are independent and the outputs do not depend on `jobs`.
void run_seeds_parallel(const std::vector<uint64_t>& seeds, int jobs,
                        const std::function<void(size_t)>& body) {
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  for (size_t start = 0; start < seeds.size(); start += static_cast<size_t>(jobs)) {
    const size_t stop = std::min(seeds.size(), start + static_cast<size_t>(jobs));
    if (stop - start == 1) {
      body(start);
      continue;
    }
    std::vector<std::thread> pool;
    for (size_t i = start; i < stop; ++i) pool.emplace_back(body, i);
    for (auto& t : pool) t.join();
  }
}

int cmd_train(Args& args) {
  const std::string data = args.require_str("data");
  const std::string method = args.str("baseline", "gdp");
  const dynamics::Dataset ds = dynamics::load_dataset(data);

  if (method == "mi" || method == "te") {
    const std::string out = args.str("out", data + "/run_" + method);
    io::Json meta;
    Mat scores;
    if (method == "mi") {
      baselines::BinningConfig bc;
      bc.bins = static_cast<int>(args.geti("bins", bc.bins));
      bc.quantile = args.getb("quantile");
      args.finish("train");
      scores = baselines::mi_scores(ds, bc);
      meta["bins"] = bc.bins;
      meta["quantile"] = bc.quantile;
      meta["artifact_default_bins"] = (bc.bins == 16 && !bc.quantile);
    } else {
      args.finish("train");
      io::ensure_dir(out);
      io::Json aucs = io::Json::object();
      std::string shown;
      for (int bins : {2, 200}) {
        const Mat s = baselines::te_scores(ds, bins);
        write_score_csv(s, out + "/te_scores_bins" + std::to_string(bins) + ".csv");
        if (ds.has_truth) {
          const double a = experiments::auc_ambiguous(s, ds.truth);
          aucs["bins" + std::to_string(bins)] = a;
          shown += " bins" + std::to_string(bins) + "=" + fmt2(a);
        }
      }
      meta["bins_evaluated"] = {2, 200};
      meta["auc"] = aucs;
      meta["version"] = kArtifactVersion;
      meta["cli"] = args.resolved();
      io::write_json(out + "/te_meta.json", meta);
      std::cout << "te auc" << (shown.empty() ? " n/a (no ground truth)" : shown) << "\n";
      return 0;
    }
    io::ensure_dir(out);
    write_score_csv(scores, out + "/mi_scores.csv");
    std::string shown = "n/a (no ground truth)";
    if (ds.has_truth) {
      const double a = experiments::auc_ambiguous(scores, ds.truth);
      meta["auc"] = a;
      shown = fmt2(a);
    }
    meta["version"] = kArtifactVersion;
    meta["cli"] = args.resolved();
    io::write_json(out + "/mi_meta.json", meta);
    std::cout << "mi auc " << shown << "\n";
    return 0;
  }

  if (method != "gdp" && method != "single-step")
    throw UsageError("--baseline must be gdp, single-step, mi or te");

  const std::vector<uint64_t> seeds = parse_seed_list("seeds", args.str("seeds", "0"));
  const int jobs = static_cast<int>(args.geti("jobs", 1));
  const model::TrainConfig cfg = train_config_from(args);
  const std::string out =
      args.str("out", data + "/run_" + (method == "gdp" ? "gdp" : "single_step"));
  args.finish("train");
  io::ensure_dir(out);
  const io::Json cli = args.resolved();

  std::vector<SeedRun> runs(seeds.size());
  run_seeds_parallel(seeds, jobs, [&](size_t i) {
    SeedRun& sr = runs[i];
    sr.seed = seeds[i];
    try {
      const model::TrainResult r = method == "gdp"
                                       ? model::train_gdp(ds, cfg, sr.seed)
                                       : model::train_single_step(ds, cfg, sr.seed);
      if (ds.has_truth) sr.auc = experiments::auc_ambiguous(r.scores, ds.truth);
      sr.best_epoch = r.best_epoch;
      sr.best_val = r.best_val;
      write_train_artifacts(r, out, sr.seed, cli);
    } catch (...) {
      sr.error = std::current_exception();
    }
  });
  for (const auto& sr : runs)
    if (sr.error) std::rethrow_exception(sr.error);

  io::Json summary;
  summary["version"] = kArtifactVersion;
  summary["method"] = method;
  summary["cli"] = cli;
  double sum = 0, sq = 0;
  int counted = 0;
  for (const auto& sr : runs) {
    std::cout << "seed " << sr.seed << ": auc " << fmt2(sr.auc) << " best_epoch "
              << sr.best_epoch << " val_mse " << sr.best_val << "\n";
    summary["seeds"].push_back(sr.seed);
    summary["auc"].push_back(sr.auc);
    summary["best_epoch"].push_back(sr.best_epoch);
    summary["best_val"].push_back(sr.best_val);
    if (!std::isnan(sr.auc)) {
      sum += sr.auc;
      sq += sr.auc * sr.auc;
      ++counted;
    }
  }
  if (counted > 0) {
    const double mean = sum / counted;
    const double var = std::max(0.0, sq / counted - mean * mean);
    summary["auc_mean"] = mean;
    summary["auc_std"] = std::sqrt(var);
    std::cout << "auc mean " << fmt2(mean) << " std " << fmt2(std::sqrt(var)) << " ("
              << counted << " seeds)\n";
  } else {
    std::cout << "auc n/a (no ground truth)\n";
  }
  io::write_json(out + "/summary.json", summary);
  return 0;
}

// ---- experiment ----------------------------------------------------------------

int cmd_experiment(Args& args) {
  const auto& pos = args.positionals();
  if (pos.size() != 1)
    throw UsageError("experiment needs exactly one tag: fig2, fig3, escape, "
                     "distortion, ksweep, ablation, ws or stacking");
  const std::string tag = pos[0];

  experiments::ExperimentReport rep;
  if (tag == "fig2") {
    experiments::Fig2Config cfg;
    const std::string mode = args.str("mode", "continuous");
    if (mode == "continuous") cfg.continuous = true;
    else if (mode == "discrete") cfg.continuous = false;
    else throw UsageError("--mode must be continuous or discrete");
    cfg.n = static_cast<int>(args.geti("n", cfg.n));
    cfg.p = args.getd("p", cfg.p);
    cfg.beta = args.getd("beta", cfg.beta);
    cfg.dt_grid = parse_double_grid("dt", args.str("dt", cfg.continuous ? "0.5,1,2,4" : "1..6"));
    cfg.seeds = static_cast<int>(args.geti("nseeds", cfg.seeds));
    cfg.seed0 = args.getu("seed", 0);
    const std::string out = args.str("out", output_root() + "/fig2");
    args.finish("experiment");
    rep = experiments::fig2_sweep(cfg);
    rep.meta["cli"] = args.resolved();
    io::ensure_dir(out);
    experiments::write_report(rep, out + "/fig2");
    std::cout << "wrote " << out << "/fig2.{json,csv}\n";
    return 0;
  }
  if (tag == "fig3") {
    const GraphSpec gspec = parse_graph_spec(args.str("graph", "er:50:0.1"));
    experiments::NoiseAmplifierConfig cfg;
    cfg.t = args.getd("t", cfg.t);
    cfg.k_grid = parse_int_grid("K", args.str("K", "1,2,3,4,5"));
    cfg.eps_grid = parse_double_grid("eps", args.str("eps", "0,0.05"));
    cfg.draws = static_cast<int>(args.geti("draws", cfg.draws));
    cfg.seed = args.getu("seed", 0);
    cfg.xi_lo = args.getd("xi_lo", cfg.xi_lo);
    cfg.xi_hi = args.getd("xi_hi", cfg.xi_hi);
    cfg.normalized_matrix = args.getb("normalized");
    const std::string out = args.str("out", output_root() + "/fig3");
    args.finish("experiment");
    const graphs::Graph g = gspec.build(stream_seed(cfg.seed, "graph"));
    rep = experiments::fig3_noise_amplifier(cfg, g);
    rep.meta["graph"] = gspec.shorthand;
    rep.meta["cli"] = args.resolved();
    io::ensure_dir(out);
    experiments::write_report(rep, out + "/fig3");
    std::cout << "wrote " << out << "/fig3.{json,csv}\n";
    return 0;
  }

  // The remaining tags all train on a generated dataset.
  const std::string data = args.require_str("data");
  const dynamics::Dataset ds = dynamics::load_dataset(data);
  const std::vector<uint64_t> seeds = parse_seed_list("seeds", args.str("seeds", "0..4"));
  const std::string out = args.str("out", output_root() + "/" + tag);

  if (tag == "escape") {
    experiments::EscapeConfig ecfg;
    ecfg.warmup_epochs = static_cast<int>(args.geti("warmup", 0));
    ecfg.window = static_cast<int>(args.geti("window", ecfg.window));
    ecfg.disable_switch = args.getb("no_switch");
    ecfg.seeds = seeds;
    const bool epochs_given = args.has("epochs");
    model::TrainConfig cfg = train_config_from(args);
    if (!epochs_given) cfg.epochs = ecfg.warmup_epochs + ecfg.window;
    args.finish("experiment");
    rep = experiments::escape_experiment(ds, cfg, ecfg);
  } else if (tag == "distortion") {
    experiments::DistortionConfig dcfg;
    dcfg.fractions = parse_double_grid("fractions", args.str("fractions", "0,0.1,0.3,0.5"));
    dcfg.runs = static_cast<int>(args.geti("runs", dcfg.runs));
    dcfg.seed0 = args.getu("seed", 0);
    dcfg.logit = args.getd("logit", dcfg.logit);
    model::TrainConfig cfg = train_config_from(args);
    args.finish("experiment");
    rep = experiments::distortion_experiment(ds, cfg, dcfg);
  } else if (tag == "ksweep") {
    experiments::KSweepConfig kcfg;
    kcfg.k_grid = parse_int_grid("K", args.str("K", "1,2,4,6"));
    kcfg.seeds = seeds;
    model::TrainConfig cfg = train_config_from(args);
    args.finish("experiment");
    rep = experiments::k_sweep(ds, cfg, kcfg);
  } else if (tag == "ablation") {
    experiments::AblationConfig acfg;
    acfg.seeds = seeds;
    acfg.include_full = !args.getb("no_full");
    model::TrainConfig cfg = train_config_from(args);
    args.finish("experiment");
    rep = experiments::ablation_poly_only(ds, cfg, acfg);
  } else if (tag == "stacking") {
    experiments::StackingConfig scfg;
    scfg.seeds = seeds;
    scfg.include_full = !args.getb("no_full");
    model::TrainConfig cfg = train_config_from(args);
    args.finish("experiment");
    rep = experiments::stacking_control(ds, cfg, scfg);
  } else if (tag == "ws") {
    experiments::WsSweepConfig wcfg;
    wcfg.n = static_cast<int>(args.geti("n", wcfg.n));
    wcfg.k = static_cast<int>(args.geti("k", wcfg.k));
    wcfg.p_grid = parse_double_grid("p", args.str("p", "0,0.2,0.4,0.6,0.8,1"));
    wcfg.seeds = seeds;
    wcfg.sim = ds.config;  // volume/interval of the reference dataset
    wcfg.sim.system = ds.system;
    model::TrainConfig cfg = train_config_from(args);
    args.finish("experiment");
    rep = experiments::ws_sweep(wcfg, cfg);
  } else {
    throw UsageError("unknown experiment tag '" + tag +
                     "'; valid: fig2, fig3, escape, distortion, ksweep, ablation, "
                     "ws, stacking");
  }

  rep.meta["data"] = data;
  rep.meta["cli"] = args.resolved();
  io::ensure_dir(out);
  experiments::write_report(rep, out + "/" + tag);
  std::cout << "wrote " << out << "/" << tag << ".{json,csv}\n";
  return 0;
}

// ---- eval ----------------------------------------------------------------------

int cmd_eval(Args& args) {
  const std::string scores_path = args.require_str("scores");
  const std::string truth_path = args.require_str("truth");
  args.finish("eval");
  const Mat scores = read_score_csv(scores_path);
  const graphs::Graph g = graphs::read_edge_list(truth_path);
  if (scores.rows() != g.n)
    throw DataError("score matrix is " + std::to_string(scores.rows()) +
                    "x" + std::to_string(scores.cols()) + " but the graph has " +
                    std::to_string(g.n) + " nodes");
  std::cout << "auc " << io::format_double(experiments::auc(scores, g)) << "\n"
            << "auc_ambiguous "
            << io::format_double(experiments::auc_ambiguous(scores, g)) << "\n";
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> tokens(argv + 1, argv + argc);
  if (tokens.empty() || tokens[0] == "--help" || tokens[0] == "-h" ||
      tokens[0] == "help") {
    std::cout << kUsage;
    return tokens.empty() ? 1 : 0;
  }
  const std::string command = tokens[0];
  Args args(std::vector<std::string>(tokens.begin() + 1, tokens.end()), command);
  if (command == "generate") return cmd_generate(args);
  if (command == "train") return cmd_train(args);
  if (command == "experiment") return cmd_experiment(args);
  if (command == "eval") return cmd_eval(args);
  throw UsageError("unknown command '" + command +
                   "'; expected generate, train, experiment or eval");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
