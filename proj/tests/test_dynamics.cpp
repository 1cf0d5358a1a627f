// Benchmark systems: hand-checked derivatives, integrator accuracy against
// analytic solutions, dataset assembly/normalization, and disk round-trips.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gdp/artifact_io.hpp"
#include "gdp/dynamics.hpp"
#include "gdp/graph.hpp"
#include "gdp/linalg.hpp"
#include "gdp/types.hpp"

using namespace gdp;
using namespace gdp::dynamics;

namespace {

graphs::Graph two_nodes() {
  graphs::Graph g;
  g.n = 2;
  g.adj = Mat::Zero(2, 2);
  g.adj(0, 1) = g.adj(1, 0) = 1;
  return g;
}

graphs::Graph edge_plus_isolated() {
  graphs::Graph g;
  g.n = 3;
  g.adj = Mat::Zero(3, 3);
  g.adj(0, 1) = g.adj(1, 0) = 1;  // node 2 isolated
  return g;
}

}  // namespace

// ---- per-system derivatives and maps ------------------------------------------

TEST_CASE("michaelis-menten derivative matches hand values") {
  graphs::Graph g = edge_plus_isolated();
  Vec x(3);
  x << 1.0, 1.0, 2.0;
  Vec dx = deriv_michaelis_menten(x, g);
  CHECK(dx(0) == doctest::Approx(-0.5).epsilon(1e-15));  // -1 + (1/1)*1/2
  CHECK(dx(1) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(dx(2) == doctest::Approx(-2.0).epsilon(1e-15));  // isolated: -x
}

TEST_CASE("michaelis-menten rejects the x = -1 singularity") {
  graphs::Graph g = two_nodes();
  Vec x(2);
  x << 0.5, -1.0;
  CHECK_THROWS_AS(deriv_michaelis_menten(x, g), NumericError);
}

TEST_CASE("rossler derivative: isolated origin and the x3=18 line") {
  graphs::Graph g = edge_plus_isolated();
  Mat x = Mat::Zero(3, 3);
  x(2, 2) = 0.0;
  Mat dx = deriv_rossler(x, g);
  // isolated node at the origin
  CHECK(dx(2, 0) == 0.0);
  CHECK(dx(2, 1) == 0.0);
  CHECK(dx(2, 2) == doctest::Approx(0.1).epsilon(1e-15));
  // coupled nodes both at origin: coupling sin(0) = 0
  CHECK(dx(0, 0) == 0.0);

  Mat y = Mat::Zero(3, 3);
  y(0, 2) = 18.0;
  CHECK(deriv_rossler(y, g)(0, 2) == doctest::Approx(0.1).epsilon(1e-12));

  // sender at x1 = pi/2 contributes sin(pi/2) = 1 to the receiver
  Mat z = Mat::Zero(3, 3);
  z(1, 0) = M_PI / 2.0;
  CHECK(deriv_rossler(z, g)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rossler standard form moves the nonlinear term to x1") {
  graphs::Graph g = two_nodes();
  Mat x = Mat::Zero(2, 3);
  x(0, 0) = 18.0;  // x1 = 18
  x(0, 2) = 5.0;
  // as printed: dx3 = 0.1 + x3*(x3 - 18) = 0.1 + 5*(-13)
  CHECK(deriv_rossler(x, g)(0, 2) == doctest::Approx(0.1 - 65.0).epsilon(1e-12));
  // standard: dx3 = 0.1 + x3*(x1 - 18) = 0.1 + 5*0
  CHECK(deriv_rossler(x, g, true)(0, 2) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("diffusion derivative is the normalized adjacency action") {
  graphs::Graph g = two_nodes();
  Vec x(2);
  x << 1.0, -1.0;
  Vec dx = deriv_diffusion(x, g);
  CHECK(dx(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(dx(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spring step matches the analytic two-body oscillation") {
  graphs::Graph g = two_nodes();
  const double k = 0.1, d = 0.5;
  Mat state = Mat::Zero(2, 4);  // (rx, ry, vx, vy)
  state(0, 0) = d;
  state(1, 0) = -d;
  Mat next = step_springs(state, g, k);  // 100 substeps of 1e-3
  // Relative coordinate u = r0x - r1x obeys u'' = -2k u.
  const double w = std::sqrt(2.0 * k), t = 0.1;
  const double u = 2.0 * d * std::cos(w * t);
  const double vu = -2.0 * d * w * std::sin(w * t);
  CHECK(next(0, 0) == doctest::Approx(u / 2.0).epsilon(1e-9));
  CHECK(next(1, 0) == doctest::Approx(-u / 2.0).epsilon(1e-9));
  CHECK(next(0, 2) == doctest::Approx(vu / 2.0).epsilon(1e-9));
  CHECK(next(0, 1) == 0.0);  // nothing moves off-axis
}

TEST_CASE("spring step conserves momentum away from the walls") {
  graphs::Graph g;
  g.n = 3;
  g.adj = Mat::Zero(3, 3);
  g.adj(0, 1) = g.adj(1, 0) = 1;
  g.adj(1, 2) = g.adj(2, 1) = 1;
  Mat state(3, 4);
  state << 0.3, 0.1, 0.02, -0.05,
          -0.2, 0.4, -0.03, 0.01,
           0.1, -0.3, 0.04, 0.02;
  Mat next = step_springs(state, g, 0.1);
  for (int c : {2, 3})
    CHECK(next.col(c).sum() == doctest::Approx(state.col(c).sum()).epsilon(1e-9));
}

TEST_CASE("spring walls reflect elastically") {
  graphs::Graph g;
  g.n = 1;
  g.adj = Mat::Zero(1, 1);
  Mat state(1, 4);
  state << 2.49, 0.0, 0.5, 0.0;  // heading into the +x wall at 2.5
  Mat next = step_springs(state, g, 0.1);
  CHECK(next(0, 0) <= 2.5);
  CHECK(next(0, 2) == doctest::Approx(-0.5).epsilon(1e-12));  // bounced back
  // Mirrored position: wall crossing at t*=0.02, remaining 0.08 returns to 2.46.
  CHECK(next(0, 0) == doctest::Approx(2.46).epsilon(1e-9));
}

TEST_CASE("kuramoto derivative matches the two-node example") {
  graphs::Graph g = two_nodes();
  Vec phi(2), omega(2);
  phi << 0.0, M_PI / 2.0;
  omega << 0.0, 0.0;
  Vec d = deriv_kuramoto(phi, omega, g, 1.0);
  CHECK(d(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d(1) == doctest::Approx(-1.0).epsilon(1e-14));
  // Equal phases leave only the natural frequencies.
  phi << 0.7, 0.7;
  omega << 0.5, 1.5;
  d = deriv_kuramoto(phi, omega, g, 2.0);
  CHECK(d(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d(1) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("friedkin-johnsen step: hand example, fixed point, bounds") {
  graphs::Graph g = two_nodes();
  Vec x(2), s(2);
  x << 0.0, 0.0;
  s << 1.0, -1.0;
  Vec next = step_fj(x, s, g);
  CHECK(next(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(next(1) == doctest::Approx(-0.5).epsilon(1e-15));

  // constant opinions are a fixed point
  x << 0.3, 0.3;
  s << 0.3, 0.3;
  next = step_fj(x, s, g);
  CHECK(next(0) == doctest::Approx(0.3).epsilon(1e-15));

  // isolated node snaps to its internal opinion
  graphs::Graph iso = edge_plus_isolated();
  Vec x3 = Vec::Zero(3), s3(3);
  s3 << 0.2, 0.4, -0.9;
  CHECK(step_fj(x3, s3, iso)(2) == doctest::Approx(-0.9).epsilon(1e-15));
}

TEST_CASE("coupled map network step: hand values and invariants") {
  graphs::Graph iso = edge_plus_isolated();
  Vec x(3);
  x << 0.5, 0.2, 0.5;
  Vec next = step_cmn(x, iso);  // eps 0.2, eta 3.5
  // isolated node: (1-eps)*f(0.5) = 0.8*3.5*0.25 = 0.7
  CHECK(next(2) == doctest::Approx(0.7).epsilon(1e-15));
  // coupled node 0: 0.8*f(0.5) + 0.2*f(0.2) = 0.7 + 0.2*0.56
  CHECK(next(0) == doctest::Approx(0.7 + 0.2 * 3.5 * 0.2 * 0.8).epsilon(1e-12));
  // zero is a fixed point of the whole map
  CHECK(step_cmn(Vec::Zero(3), iso).cwiseAbs().maxCoeff() == 0.0);
  // logistic fixed point on a regular all-equal state is invariant
  graphs::Graph g2 = two_nodes();
  const double xstar = 1.0 - 1.0 / 3.5;
  Vec xs = Vec::Constant(2, xstar);
  CHECK(step_cmn(xs, g2)(0) == doctest::Approx(xstar).epsilon(1e-12));
}

// ---- integrator -----------------------------------------------------------------

TEST_CASE("rk4 reproduces exponential decay to 1e-8") {
  Vec x = Vec::Constant(1, 1.0);
  Vec got = rk4_integrate([](const Vec& v) { return Vec(-v); }, x, 0.01, 100);
  CHECK(got(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("rk4 on linear dynamics matches the matrix exponential") {
  graphs::Graph g = graphs::gen_er(8, 0.4, 3);
  Mat at = graphs::sym_normalize(g.adj);
  Vec x0(8);
  for (int i = 0; i < 8; ++i) x0(i) = std::sin(1.0 + i);
  Vec got = rk4_integrate([&](const Vec& v) { return Vec(at * v); }, x0, 0.01, 100);
  Vec want = num::mat_exp(at, 1.0) * x0;
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rk4 reports divergence with the step index") {
  Vec x = Vec::Constant(1, 1.0);
  CHECK_THROWS_AS(
      rk4_integrate([](const Vec& v) { return Vec(v.array().square().matrix() * 1e10); },
                    x, 1.0, 50),
      NumericError);
  CHECK_THROWS_AS(rk4_integrate([](const Vec& v) { return v; }, x, -0.1, 5), DataError);
}

// ---- dataset assembly --------------------------------------------------------------

TEST_CASE("system metadata table") {
  CHECK(parse_system("mm") == System::michaelis_menten);
  CHECK(parse_system("cmn") == System::cmn);
  CHECK_THROWS_AS(parse_system("unknown"), DataError);
  CHECK(state_dim(System::rossler) == 3);
  CHECK(state_dim(System::springs) == 4);
  CHECK(static_dim(System::kuramoto) == 1);
  CHECK(static_dim(System::friedkin_johnsen) == 1);
  CHECK(static_dim(System::diffusion) == 0);
  CHECK(native_spacing(System::michaelis_menten) == 1.0);
  CHECK(native_spacing(System::diffusion) == 0.1);
  CHECK(is_discrete(System::friedkin_johnsen));
  CHECK_FALSE(is_discrete(System::kuramoto));
}

TEST_CASE("build_dataset shapes, normalization extremes, determinism") {
  graphs::Graph g = graphs::gen_er(8, 0.3, 5);
  SimConfig cfg;
  cfg.system = System::michaelis_menten;
  cfg.n_traj = 4;
  cfg.traj_len = 6;
  cfg.val_traj = 2;
  cfg.seed = 11;
  Dataset ds = build_dataset(g, cfg);
  REQUIRE(ds.train.size() == 4);
  REQUIRE(ds.val.size() == 2);
  REQUIRE(ds.train[0].states.size() == 6);
  CHECK(ds.train[0].states[0].rows() == 8);
  CHECK(ds.d_s() == 1);
  CHECK(ds.d_f() == 0);

  // Train extrema hit exactly -1 and +1 per dimension.
  double lo = 1e300, hi = -1e300;
  for (const auto& tr : ds.train)
    for (const auto& s : tr.states) {
      lo = std::min(lo, s.minCoeff());
      hi = std::max(hi, s.maxCoeff());
    }
  CHECK(lo == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));

  Dataset again = build_dataset(g, cfg);
  CHECK((again.train[2].states[3] - ds.train[2].states[3]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("validation uses train normalization constants, not its own") {
  graphs::Graph g = graphs::gen_er(10, 0.3, 7);
  SimConfig cfg;
  cfg.system = System::diffusion;
  cfg.n_traj = 3;
  cfg.traj_len = 5;
  cfg.val_traj = 3;
  cfg.seed = 2;
  Dataset ds = build_dataset(g, cfg);
  double lo = 1e300, hi = -1e300;
  for (const auto& tr : ds.val)
    for (const auto& s : tr.states) {
      lo = std::min(lo, s.minCoeff());
      hi = std::max(hi, s.maxCoeff());
    }
  // Val is scaled by train's range: its extremes will not be exactly +-1.
  CHECK((std::abs(lo + 1.0) > 1e-9 || std::abs(hi - 1.0) > 1e-9));
}

TEST_CASE("subsampling keeps every sample_every-th native snapshot") {
  graphs::Graph g = graphs::gen_er(6, 0.4, 9);
  SimConfig base;
  base.system = System::cmn;  // discrete: native snapshots are exact map iterates
  base.n_traj = 2;
  base.traj_len = 9;
  base.val_traj = 1;
  base.seed = 4;
  SimConfig coarse = base;
  coarse.traj_len = 5;
  coarse.sample_every = 2;
  Dataset fine = build_dataset(g, base);
  Dataset sub = build_dataset(g, coarse);

  // Same seed, same streams: denormalized values must line up pairwise.
  auto denorm = [](const Dataset& ds, const Mat& s) {
    Mat raw = s;
    for (int c = 0; c < raw.cols(); ++c) {
      const double lo = ds.state_min(c), hi = ds.state_max(c);
      raw.col(c) = ((raw.col(c).array() + 1.0) / 2.0 * (hi - lo) + lo).matrix();
    }
    return raw;
  };
  for (int t = 0; t < 5; ++t) {
    Mat a = denorm(fine, fine.train[1].states[2 * t]);
    Mat b = denorm(sub, sub.train[1].states[t]);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kuramoto dataset channels are mutually consistent") {
  graphs::Graph g = graphs::gen_er(7, 0.4, 13);
  SimConfig cfg;
  cfg.system = System::kuramoto;
  cfg.n_traj = 2;
  cfg.traj_len = 4;
  cfg.val_traj = 1;
  cfg.seed = 19;
  Dataset ds = build_dataset(g, cfg);
  REQUIRE(ds.d_s() == 3);
  REQUIRE(ds.d_f() == 1);

  auto denorm_col = [&](double v, int c) {
    return (v + 1.0) / 2.0 * (ds.state_max(c) - ds.state_min(c)) + ds.state_min(c);
  };
  const auto& tr = ds.train[0];
  // Static omega back to raw units.
  Vec omega(g.n);
  for (int i = 0; i < g.n; ++i)
    omega(i) = (tr.statics(i, 0) + 1.0) / 2.0 * (ds.static_max(0) - ds.static_min(0)) +
               ds.static_min(0);

  for (size_t t = 0; t < tr.states.size(); ++t) {
    Vec phi(g.n), rate(g.n), sphi(g.n);
    for (int i = 0; i < g.n; ++i) {
      rate(i) = denorm_col(tr.states[t](i, 0), 0);
      sphi(i) = denorm_col(tr.states[t](i, 1), 1);
      phi(i) = denorm_col(tr.states[t](i, 2), 2);
    }
    // channel 1 is sin(channel 2)
    for (int i = 0; i < g.n; ++i)
      CHECK(sphi(i) == doctest::Approx(std::sin(phi(i))).epsilon(1e-9));
    // channel 0 is the kuramoto rate at (phi, omega)
    Vec want = deriv_kuramoto(phi, omega, g, cfg.kuramoto_k);
    for (int i = 0; i < g.n; ++i)
      CHECK(rate(i) == doctest::Approx(want(i)).epsilon(1e-9));
  }
}

TEST_CASE("friedkin-johnsen raw states stay in [-1, 1]") {
  graphs::Graph g = graphs::gen_er(9, 0.3, 23);
  SimConfig cfg;
  cfg.system = System::friedkin_johnsen;
  cfg.n_traj = 3;
  cfg.traj_len = 8;
  cfg.val_traj = 1;
  cfg.seed = 5;
  Dataset ds = build_dataset(g, cfg);
  // Raw values live in [-1,1], so train min/max (the raw extrema) must too.
  CHECK(ds.state_min(0) >= -1.0);
  CHECK(ds.state_max(0) <= 1.0);
}

TEST_CASE("diffusion native step matches the effective-graph oracle") {
  graphs::Graph g = graphs::gen_er(8, 0.4, 31);
  SimConfig cfg;
  cfg.system = System::diffusion;
  cfg.n_traj = 1;
  cfg.traj_len = 3;
  cfg.val_traj = 1;
  cfg.seed = 8;
  Dataset ds = build_dataset(g, cfg);
  auto denorm = [&](const Mat& s) {
    return Mat(((s.array() + 1.0) / 2.0 * (ds.state_max(0) - ds.state_min(0)) +
                ds.state_min(0))
                   .matrix());
  };
  Mat x0 = denorm(ds.train[0].states[0]);
  Mat x1 = denorm(ds.train[0].states[1]);
  Mat propagator = num::mat_exp(graphs::sym_normalize(g.adj), 0.1);
  CHECK((x1 - propagator * x0).cwiseAbs().maxCoeff() < 1e-6);
}

// ---- disk round-trip -----------------------------------------------------------------

TEST_CASE("datasets round-trip through their on-disk layout") {
  const std::string dir = "/tmp/gdp_test_dataset";
  std::filesystem::remove_all(dir);
  graphs::Graph g = graphs::gen_er(6, 0.4, 41);
  SimConfig cfg;
  cfg.system = System::kuramoto;  // exercises statics files too
  cfg.n_traj = 3;
  cfg.traj_len = 5;
  cfg.sample_every = 2;
  cfg.val_traj = 2;
  cfg.seed = 17;
  Dataset ds = build_dataset(g, cfg);
  write_dataset(ds, dir);
  Dataset back = load_dataset(dir);

  CHECK(back.system == ds.system);
  CHECK(back.sample_every == 2);
  CHECK(back.has_truth);
  CHECK((back.truth.adj - ds.truth.adj).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.train.size() == ds.train.size());
  REQUIRE(back.val.size() == ds.val.size());
  for (size_t i = 0; i < ds.train.size(); ++i) {
    for (size_t t = 0; t < ds.train[i].states.size(); ++t)
      CHECK((back.train[i].states[t] - ds.train[i].states[t]).cwiseAbs().maxCoeff() <
            1e-12);
    CHECK((back.train[i].statics - ds.train[i].statics).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK((back.state_min - ds.state_min).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.state_max - ds.state_max).cwiseAbs().maxCoeff() == 0.0);

  // Serialization is deterministic: same dataset, same bytes.
  const std::string dir2 = "/tmp/gdp_test_dataset2";
  std::filesystem::remove_all(dir2);
  write_dataset(ds, dir2);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    const auto a = io::read_text(entry.path().string());
    const auto b = io::read_text(dir2 + "/" + name);
    CHECK(a == b);
  }
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("load_dataset validates its inputs") {
  CHECK_THROWS_AS(load_dataset("/tmp/gdp_no_such_dataset"), DataError);
}

TEST_CASE("per-trajectory statics differ across trajectories") {
  graphs::Graph g = graphs::gen_er(6, 0.5, 2);
  SimConfig cfg;
  cfg.system = System::friedkin_johnsen;
  cfg.n_traj = 2;
  cfg.traj_len = 4;
  cfg.val_traj = 1;
  cfg.seed = 33;
  Dataset ds = build_dataset(g, cfg);
  CHECK((ds.train[0].statics - ds.train[1].statics).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("config validation rejects nonsense volumes") {
  graphs::Graph g = graphs::gen_er(6, 0.5, 2);
  SimConfig cfg;
  cfg.system = System::diffusion;
  cfg.n_traj = 0;
  CHECK_THROWS_AS(build_dataset(g, cfg), DataError);
  cfg.n_traj = 2;
  cfg.traj_len = 1;
  CHECK_THROWS_AS(build_dataset(g, cfg), DataError);
  cfg.traj_len = 4;
  cfg.sample_every = 0;
  CHECK_THROWS_AS(build_dataset(g, cfg), DataError);
}
