#include "gdp/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdp/linalg.hpp"
#include "gdp/rng.hpp"

namespace gdp::graphs {

std::vector<std::vector<int>> Graph::in_neighbors() const {
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i && adj(i, j) != 0.0) nbrs[i].push_back(j);
  return nbrs;
}

Eigen::Index Graph::edge_count() const {
  Eigen::Index count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = directed ? 0 : i + 1; j < n; ++j)
      if (j != i && adj(i, j) != 0.0) ++count;
  return count;
}

Graph gen_er(int n, double p, uint64_t seed, bool directed) {
  if (n < 1) throw DataError("gen_er: n must be positive");
  if (p < 0.0 || p > 1.0) throw DataError("gen_er: p outside [0,1]");
  Graph g;
  g.n = n;
  g.adj = Mat::Zero(n, n);
  g.directed = directed;
  g.seed = seed;
  Rng rng(seed);
  if (directed) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.bernoulli(p)) g.adj(i, j) = 1.0;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(p)) {
          g.adj(i, j) = 1.0;
          g.adj(j, i) = 1.0;
        }
  }
  return g;
}

Graph gen_ba(int n, int m, uint64_t seed) {
  if (m < 1) throw DataError("gen_ba: m must be positive");
  if (n < m + 1) throw DataError("gen_ba: need n >= m+1");
  Graph g;
  g.n = n;
  g.adj = Mat::Zero(n, n);
  g.directed = false;
  g.seed = seed;
  Rng rng(seed);

  // Urn with every node repeated once per incident edge; sampling from it is
  // sampling proportional to degree.
  std::vector<int> urn;
  auto add_edge = [&](int a, int b) {
    g.adj(a, b) = 1.0;
    g.adj(b, a) = 1.0;
    urn.push_back(a);
    urn.push_back(b);
  };

  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) add_edge(i, j);

  for (int v = m + 1; v < n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      int t = urn[rng.below(urn.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end())
        targets.push_back(t);
    }
    for (int t : targets) add_edge(v, t);
  }
  return g;
}

Graph gen_ws(int n, int k, double p, uint64_t seed) {
  if (k < 2 || k % 2 != 0) throw DataError("gen_ws: k must be even and >= 2");
  if (k >= n) throw DataError("gen_ws: need k < n");
  if (p < 0.0 || p > 1.0) throw DataError("gen_ws: p outside [0,1]");
  Graph g;
  g.n = n;
  g.adj = Mat::Zero(n, n);
  g.directed = false;
  g.seed = seed;
  Rng rng(seed);

  for (int i = 0; i < n; ++i)
    for (int o = 1; o <= k / 2; ++o) {
      int j = (i + o) % n;
      g.adj(i, j) = 1.0;
      g.adj(j, i) = 1.0;
    }

  // Rewire each original ring edge with probability p, keeping the edge
  // count fixed. Original edges are each visited exactly once.
  for (int i = 0; i < n; ++i)
    for (int o = 1; o <= k / 2; ++o) {
      if (!rng.bernoulli(p)) continue;
      int j = (i + o) % n;
      // Node saturated: nowhere to rewire to.
      if (g.adj.row(i).sum() >= static_cast<double>(n - 1)) continue;
      int t = i;
      do {
        t = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
      } while (t == i || g.adj(i, t) != 0.0);
      g.adj(i, j) = 0.0;
      g.adj(j, i) = 0.0;
      g.adj(i, t) = 1.0;
      g.adj(t, i) = 1.0;
    }
  return g;
}

Mat sym_normalize(const Mat& adj) {
  if (adj.rows() != adj.cols()) throw DataError("sym_normalize: not square");
  Vec deg = adj.rowwise().sum();
  Vec dinv = deg.cwiseMax(kDegreeEps).array().rsqrt();
  return (adj.array().colwise() * dinv.array()).rowwise() *
         dinv.transpose().array();
}

Mat in_deg_normalize(const Mat& adj) {
  if (adj.rows() != adj.cols()) throw DataError("in_deg_normalize: not square");
  Vec deg = adj.rowwise().sum();
  Vec dinv = deg.cwiseMax(kDegreeEps).array().inverse();
  return (adj.array().colwise() * dinv.array()).matrix();
}

Mat norm_laplacian(const Mat& adj) {
  return Mat::Identity(adj.rows(), adj.cols()) - sym_normalize(adj);
}

Mat poly_filter(const Mat& m, const std::vector<double>& theta) {
  if (m.rows() != m.cols()) throw DataError("poly_filter: not square");
  if (theta.empty()) throw DataError("poly_filter: empty coefficients");
  for (double t : theta)
    if (!std::isfinite(t)) throw NumericError("poly_filter: non-finite theta");
  const Eigen::Index n = m.rows();
  const int order = static_cast<int>(theta.size()) - 1;
  Mat acc = theta[order] * Mat::Identity(n, n);
  for (int k = order - 1; k >= 0; --k) {
    acc = m * acc;
    acc.diagonal().array() += theta[k];
  }
  return acc;
}

Mat effective_graph(const Graph& g, const EffectiveGraphConfig& cfg) {
  Mat norm = g.directed ? in_deg_normalize(g.adj) : sym_normalize(g.adj);
  if (cfg.continuous) {
    if (cfg.dt <= 0.0 || !std::isfinite(cfg.beta) || !std::isfinite(cfg.dt))
      throw DataError("effective_graph: need positive finite beta*dt");
    return num::mat_exp(norm, cfg.beta * cfg.dt);
  }
  const double rounded = std::round(cfg.dt);
  if (std::abs(cfg.dt - rounded) > 1e-9 || rounded < 1.0)
    throw DataError("effective_graph: discrete dt must be a positive integer");
  return num::mat_pow(norm, static_cast<int>(rounded));
}

std::vector<double> real_poly_roots(const std::vector<double>& coeffs, double tol) {
  // Strip negligible leading (highest-order) coefficients.
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};  // the zero polynomial: caller's problem
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) <= 1e-12 * scale) --deg;
  if (deg == 0) return {};

  std::vector<double> roots;
  if (deg == 1) {
    roots.push_back(-coeffs[0] / coeffs[1]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[i] / coeffs[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    if (solver.info() != Eigen::Success)
      throw NumericError("real_poly_roots: companion eigensolver failed");
    for (int i = 0; i < deg; ++i) {
      const auto z = solver.eigenvalues()(i);
      if (std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z.real())))
        roots.push_back(z.real());
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots)
    if (unique.empty() || std::abs(r - unique.back()) > tol * std::max(1.0, std::abs(r)))
      unique.push_back(r);
  return unique;
}

RootEnumeration enumerate_poly_roots(const Mat& m, const std::vector<double>& theta,
                                     int max_alternatives) {
  num::SpectralDecomposition d = num::sym_eig(m);
  const Eigen::Index n = m.rows();
  RootEnumeration out;

  const double eig_scale = std::max(1.0, d.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs(d.eigenvalues(i + 1) - d.eigenvalues(i)) <= 1e-8 * eig_scale)
      out.basis_non_unique = true;

  auto eval_poly = [&](double x) {
    double acc = theta.back();
    for (int k = static_cast<int>(theta.size()) - 2; k >= 0; --k)
      acc = acc * x + theta[k];
    return acc;
  };

  out.combination_count = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = d.eigenvalues(i);
    std::vector<double> shifted = theta;
    shifted[0] -= eval_poly(lambda);
    std::vector<double> roots = real_poly_roots(shifted);
    // lambda is a root by construction; make sure numerics did not lose it.
    bool found = false;
    for (double& r : roots)
      if (std::abs(r - lambda) <= 1e-6 * std::max(1.0, std::abs(lambda))) {
        r = lambda;
        found = true;
      }
    if (!found) roots.push_back(lambda);
    std::sort(roots.begin(), roots.end());
    out.combination_count *= static_cast<double>(roots.size());
    out.roots_per_eigenvalue.push_back(std::move(roots));
  }

  const Mat reference = poly_filter(m, theta);
  const double ref_norm = std::max(reference.norm(), 1e-12);

  // Odometer over root choices, capped.
  std::vector<size_t> idx(n, 0);
  while (true) {
    if (static_cast<int>(out.alternatives.size()) >= max_alternatives) break;
    Vec mu(n);
    for (Eigen::Index i = 0; i < n; ++i)
      mu(i) = out.roots_per_eigenvalue[i][idx[i]];
    Mat candidate = d.eigenvectors * mu.asDiagonal() * d.eigenvectors.transpose();
    if ((poly_filter(candidate, theta) - reference).norm() <= 1e-6 * ref_norm)
      out.alternatives.push_back(std::move(candidate));
    // advance odometer
    Eigen::Index pos = 0;
    while (pos < n) {
      if (++idx[pos] < out.roots_per_eigenvalue[pos].size()) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return out;
}

void write_edge_list(const Graph& g, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("write_edge_list: cannot open " + path);
  f << "n " << g.n << " directed " << (g.directed ? 1 : 0) << "\n";
  for (int i = 0; i < g.n; ++i)
    for (int j = g.directed ? 0 : i + 1; j < g.n; ++j)
      if (j != i && g.adj(i, j) != 0.0) f << i << " " << j << "\n";
  if (!f) throw DataError("write_edge_list: write failed for " + path);
}

Graph read_edge_list(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("read_edge_list: cannot open " + path);
  std::string tok_n, tok_directed;
  int n = 0, directed = 0;
  if (!(f >> tok_n >> n >> tok_directed >> directed) || tok_n != "n" ||
      tok_directed != "directed" || n < 1 || (directed != 0 && directed != 1))
    throw DataError("read_edge_list: bad header in " + path);
  Graph g;
  g.n = n;
  g.adj = Mat::Zero(n, n);
  g.directed = directed == 1;
  int i = 0, j = 0;
  while (f >> i >> j) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw DataError("read_edge_list: bad edge in " + path);
    g.adj(i, j) = 1.0;
    if (!g.directed) g.adj(j, i) = 1.0;
  }
  if (!f.eof())
    throw DataError("read_edge_list: trailing garbage in " + path);
  return g;
}

}  // namespace gdp::graphs
