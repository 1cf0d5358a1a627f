// Interaction graphs: random generators, normalizations, polynomial filters,
// effective (multi-hop) graphs, and filter-identifiability root enumeration.
//
// Orientation convention, used consistently by every consumer: adjacency
// entry (i, j) weighs the message j -> i, i.e. row i collects what arrives at
// node i. Undirected graphs are symmetric, so the convention only matters for
// directed ones.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdp/types.hpp"

namespace gdp::graphs {

struct Graph {
  int n = 0;
  Mat adj;  // n x n, zero diagonal; binary for generated ground truth
  bool directed = false;
  uint64_t seed = 0;  // generator seed, 0 for graphs read from files

  std::vector<std::vector<int>> in_neighbors() const;
  Eigen::Index edge_count() const;  // undirected edges counted once
};

// Degree floor shared by every normalization.
inline constexpr double kDegreeEps = 1e-8;

// Erdos-Renyi: each unordered (or ordered, if directed) pair independently
// with probability p.
Graph gen_er(int n, double p, uint64_t seed, bool directed = false);
// Barabasi-Albert preferential attachment, seeded with an (m+1)-clique.
Graph gen_ba(int n, int m, uint64_t seed);
// Watts-Strogatz: ring with k nearest neighbours, each edge rewired with
// probability p. Edge count is preserved exactly.
Graph gen_ws(int n, int k, double p, uint64_t seed);

// D^{-1/2} A D^{-1/2} with degrees floored at kDegreeEps.
Mat sym_normalize(const Mat& adj);
// Row i scaled by 1 / max(in-degree(i), kDegreeEps); in-degree is the row sum.
Mat in_deg_normalize(const Mat& adj);
// I - sym_normalize(A).
Mat norm_laplacian(const Mat& adj);

// g_theta(M) = sum_k theta[k] M^k, Horner-accumulated (theta.size()-1
// multiplications).
Mat poly_filter(const Mat& m, const std::vector<double>& theta);

// Effective one-step interaction graph of linear dynamics observed at
// sampling interval dt: exp(beta * A~ * dt) for continuous-time systems,
// A~^dt for discrete-time ones (dt a positive integer).
struct EffectiveGraphConfig {
  bool continuous = true;
  double beta = 1.0;
  double dt = 1.0;  // integer-valued when continuous == false
};
Mat effective_graph(const Graph& g, const EffectiveGraphConfig& cfg);

// Enumeration of symmetric matrices M' with g_theta(M') = g_theta(M), built
// by re-picking, per eigenvalue lambda_i, any real root of
// g_theta(x) = g_theta(lambda_i) while keeping the eigenbasis.
struct RootEnumeration {
  std::vector<std::vector<double>> roots_per_eigenvalue;
  double combination_count = 0;  // product of root counts
  std::vector<Mat> alternatives; // validated reconstructions (capped)
  bool basis_non_unique = false; // repeated eigenvalues detected
};
RootEnumeration enumerate_poly_roots(const Mat& m, const std::vector<double>& theta,
                                     int max_alternatives = 256);

// Real roots of a polynomial given coefficients c[0] + c[1] x + ... via
// companion-matrix eigenvalues; deduplicated within tolerance.
std::vector<double> real_poly_roots(const std::vector<double>& coeffs,
                                    double tol = 1e-8);

// Edge-list text format: header "n <count> directed <0|1>", then "i j" lines
// (row column, zero-indexed).
void write_edge_list(const Graph& g, const std::string& path);
Graph read_edge_list(const std::string& path);

}  // namespace gdp::graphs
