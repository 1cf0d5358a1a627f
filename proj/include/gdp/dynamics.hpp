// Benchmark dynamical systems on graphs, plus dataset assembly.
//
// A "native" snapshot is one step at the system's own resolution (one map
// application for the discrete systems, a fixed bundle of RK4 substeps for
// the continuous ones). Datasets subsample every `sample_every`-th native
// snapshot and normalize each observed dimension to [-1, 1] using min/max
// taken from the train split only.
#ifndef GDP_DYNAMICS_HPP
#define GDP_DYNAMICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gdp/graph.hpp"
#include "gdp/types.hpp"

namespace gdp::dynamics {

enum class System {
  michaelis_menten,
  rossler,
  diffusion,
  springs,
  kuramoto,
  friedkin_johnsen,
  cmn,
};

System parse_system(const std::string& name);  // DataError on unknown name
const char* system_name(System s);
int state_dim(System s);    // observed channels per node
int static_dim(System s);   // per-node constants observed alongside the states
double native_spacing(System s);  // simulated time between native snapshots
bool is_discrete(System s);

struct SimConfig {
  System system = System::diffusion;
  int n_traj = 50;
  int traj_len = 10;     // snapshots kept per trajectory
  int sample_every = 1;  // native snapshots between kept ones
  int val_traj = 10;
  uint64_t seed = 0;
  double spring_k = 0.1;
  double kuramoto_k = 1.0;
  double omega_min = 0.5;
  double omega_max = 1.5;
  double cmn_eps = 0.2;
  double cmn_eta = 3.5;
  bool rossler_standard_form = false;
};

// Derivatives / one-step maps. Adjacency entry (i, j) couples j -> i; the
// neighbor sums below run over row i of the adjacency.
Vec deriv_michaelis_menten(const Vec& x, const graphs::Graph& g);
Mat deriv_rossler(const Mat& x, const graphs::Graph& g, bool standard_form = false);
Vec deriv_diffusion(const Vec& x, const graphs::Graph& g);
Mat step_springs(const Mat& state, const graphs::Graph& g, double k,
                 double inner_step = 1e-3, int substeps = 100,
                 double box_half = 2.5);
Vec deriv_kuramoto(const Vec& phi, const Vec& omega, const graphs::Graph& g, double k);
Vec step_fj(const Vec& x, const Vec& s, const graphs::Graph& g);
Vec step_cmn(const Vec& x, const graphs::Graph& g, double eps = 0.2, double eta = 3.5);

// Classical fixed-step RK4. Throws NumericError naming the offending step
// if the state stops being finite.
template <typename Deriv, typename State>
State rk4_integrate(Deriv&& deriv, State x, double inner_step, int n_inner) {
  if (!(inner_step > 0.0)) throw DataError("rk4_integrate: inner_step must be positive");
  for (int step = 0; step < n_inner; ++step) {
    const State k1 = deriv(x);
    const State k2 = deriv(x + (0.5 * inner_step) * k1);
    const State k3 = deriv(x + (0.5 * inner_step) * k2);
    const State k4 = deriv(x + inner_step * k3);
    x += (inner_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      throw NumericError("rk4_integrate: state diverged at step " + std::to_string(step));
  }
  return x;
}

struct Trajectory {
  std::vector<Mat> states;  // one n x d_s matrix per snapshot
  Mat statics;              // n x d_f; zero columns when the system has none
};

struct Dataset {
  System system = System::diffusion;
  graphs::Graph truth;
  bool has_truth = true;
  std::vector<Trajectory> train;
  std::vector<Trajectory> val;
  int sample_every = 1;
  Vec state_min, state_max;    // train-split extrema per observed dimension
  Vec static_min, static_max;  // same for static features
  SimConfig config;

  int nodes() const { return truth.n; }
  int d_s() const { return train.empty() ? 0 : static_cast<int>(train[0].states[0].cols()); }
  int d_f() const { return train.empty() ? 0 : static_cast<int>(train[0].statics.cols()); }
};

// Simulates (n_traj + val_traj) trajectories of (traj_len-1)*sample_every + 1
// native snapshots each, subsamples, and normalizes.
Dataset build_dataset(const graphs::Graph& g, const SimConfig& cfg);

// Layout on disk: manifest.json, graph.edges, train_###.csv / val_###.csv
// (header t,node,dim0..; raw values), plus *_static.csv when d_f > 0.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace gdp::dynamics

#endif  // GDP_DYNAMICS_HPP
