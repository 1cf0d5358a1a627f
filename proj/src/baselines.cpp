#include "gdp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace gdp::baselines {

namespace {

// codes[d][i] holds the discretized series of node i, channel d, sample-major
// (trajectories concatenated in order, train then val).
struct Discretized {
  std::vector<std::vector<std::vector<int>>> codes;
  std::vector<int> traj_len;  // snapshots per concatenated trajectory
  int n = 0;
  int d_s = 0;
  int samples = 0;
};

std::vector<int> discretize(const std::vector<double>& x, int bins, bool quantile) {
  std::vector<int> out(x.size());
  if (quantile) {
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;  // upper edges of the first bins-1 bins
    for (int b = 1; b < bins; ++b)
      edges.push_back(sorted[sorted.size() * b / bins]);
    for (size_t k = 0; k < x.size(); ++k)
      out[k] = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), x[k]) -
                                edges.begin());
  } else {
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, width = *hi_it - *lo_it;
    for (size_t k = 0; k < x.size(); ++k) {
      int b = width > 0 ? static_cast<int>((x[k] - lo) / width * bins) : 0;
      out[k] = std::clamp(b, 0, bins - 1);
    }
  }
  return out;
}

Discretized discretize_dataset(const dynamics::Dataset& ds, int bins, bool quantile) {
  if (bins < 2) throw DataError("bin count must be >= 2");
  Discretized out;
  out.n = ds.nodes();
  out.d_s = ds.d_s();
  std::vector<const dynamics::Trajectory*> trajs;
  for (const auto& t : ds.train) trajs.push_back(&t);
  for (const auto& t : ds.val) trajs.push_back(&t);
  if (trajs.empty()) throw DataError("dataset has no trajectories");
  for (const auto* t : trajs) {
    out.traj_len.push_back(static_cast<int>(t->states.size()));
    out.samples += out.traj_len.back();
  }
  out.codes.assign(out.d_s, std::vector<std::vector<int>>(out.n));
  std::vector<double> series(out.samples);
  for (int d = 0; d < out.d_s; ++d)
    for (int i = 0; i < out.n; ++i) {
      int k = 0;
      for (const auto* t : trajs)
        for (const auto& st : t->states) series[k++] = st(i, d);
      out.codes[d][i] = discretize(series, bins, quantile);
    }
  return out;
}

double entropy_from_counts(const std::unordered_map<uint64_t, int>& counts, int total) {
  double acc = 0.0;
  for (const auto& [key, c] : counts) acc += c * std::log(static_cast<double>(c));
  return std::log(static_cast<double>(total)) - acc / total;
}

}  // namespace

Mat mi_scores(const dynamics::Dataset& ds, const BinningConfig& cfg) {
  const Discretized dz = discretize_dataset(ds, cfg.bins, cfg.quantile);
  const int n = dz.n, bins = cfg.bins;
  Mat scores = Mat::Zero(n, n);
  std::vector<int> joint(static_cast<size_t>(bins) * bins);
  std::vector<int> marg_a(bins), marg_b(bins);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double mi_sum = 0.0;
      for (int d = 0; d < dz.d_s; ++d) {
        const auto& a = dz.codes[d][i];
        const auto& b = dz.codes[d][j];
        std::fill(joint.begin(), joint.end(), 0);
        std::fill(marg_a.begin(), marg_a.end(), 0);
        std::fill(marg_b.begin(), marg_b.end(), 0);
        for (int k = 0; k < dz.samples; ++k) {
          ++joint[static_cast<size_t>(a[k]) * bins + b[k]];
          ++marg_a[a[k]];
          ++marg_b[b[k]];
        }
        double mi = 0.0;
        const double total = dz.samples;
        for (int u = 0; u < bins; ++u)
          for (int v = 0; v < bins; ++v) {
            const int c = joint[static_cast<size_t>(u) * bins + v];
            if (c == 0) continue;
            mi += (c / total) *
                  std::log(c * total / (static_cast<double>(marg_a[u]) * marg_b[v]));
          }
        mi_sum += mi;
      }
      scores(i, j) = scores(j, i) = mi_sum / dz.d_s;
    }
  return scores;
}

Mat te_scores(const dynamics::Dataset& ds, int bins) {
  const Discretized dz = discretize_dataset(ds, bins, false);
  const int n = dz.n;
  const uint64_t base = static_cast<uint64_t>(bins);

  // Transition index list: (prev sample, cur sample) within each trajectory.
  std::vector<std::pair<int, int>> trans;
  int offset = 0;
  for (int len : dz.traj_len) {
    for (int t = 1; t < len; ++t) trans.emplace_back(offset + t - 1, offset + t);
    offset += len;
  }
  if (trans.empty()) throw DataError("no consecutive snapshot pairs for TE");
  const int total = static_cast<int>(trans.size());

  Mat scores = Mat::Zero(n, n);
  std::unordered_map<uint64_t, int> counts;
  auto entropy = [&](auto key_fn) {
    counts.clear();
    for (const auto& [prev, cur] : trans) ++counts[key_fn(prev, cur)];
    return entropy_from_counts(counts, total);
  };

  for (int d = 0; d < dz.d_s; ++d) {
    for (int r = 0; r < n; ++r) {
      const auto& xr = dz.codes[d][r];
      const double h_prev = entropy([&](int p, int) { return static_cast<uint64_t>(xr[p]); });
      const double h_cur_prev =
          entropy([&](int p, int c) { return xr[c] * base + xr[p]; });
      for (int s = 0; s < n; ++s) {
        if (s == r) continue;
        const auto& xs = dz.codes[d][s];
        const double h_prev2 =
            entropy([&](int p, int) { return xr[p] * base + xs[p]; });
        const double h_all =
            entropy([&](int p, int c) { return (xr[c] * base + xr[p]) * base + xs[p]; });
        const double te = (h_cur_prev - h_prev) - (h_all - h_prev2);
        scores(r, s) += std::max(te, 0.0);
      }
    }
  }
  scores /= static_cast<double>(dz.d_s);
  return scores;
}

}  // namespace gdp::baselines
