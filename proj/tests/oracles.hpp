#pragma once

// Slow reference implementations the tests compare the library against.
// These deliberately avoid every library solver code path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

// Flow on a candidate basis (spanning arc set), found by repeatedly peeling
// rows/columns that have a single remaining basic arc.  Returns false when
// the arc set contains a cycle or the flow goes negative.
inline bool basis_flow(int n, int m, const std::vector<double>& mu,
                       const std::vector<double>& nu, const std::vector<int>& arcs,
                       std::vector<double>& flow_out) {
  std::vector<double> row(mu), col(nu);
  std::vector<char> used(arcs.size(), 0);
  flow_out.assign(std::size_t(n) * m, 0.0);
  int remaining = int(arcs.size());
  bool progress = true;
  while (remaining > 0 && progress) {
    progress = false;
    // find any row or column with exactly one unused arc and peel it
    for (std::size_t k = 0; k < arcs.size() && !progress; ++k) {
      if (used[k]) continue;
      const int a = arcs[k];
      const int i = a / m, j = a % m;
      int row_live = 0, col_live = 0;
      for (std::size_t l = 0; l < arcs.size(); ++l) {
        if (used[l]) continue;
        if (arcs[l] / m == i) ++row_live;
        if (arcs[l] % m == j) ++col_live;
      }
      if (row_live == 1) {
        flow_out[a] = row[i];
        col[j] -= row[i];
        row[i] = 0.0;
        used[k] = 1;
        --remaining;
        progress = true;
      } else if (col_live == 1) {
        flow_out[a] = col[j];
        row[i] -= col[j];
        col[j] = 0.0;
        used[k] = 1;
        --remaining;
        progress = true;
      }
    }
  }
  if (remaining > 0) return false;  // cycle
  for (double r : row)
    if (std::abs(r) > 1e-9) return false;
  for (double c : col)
    if (std::abs(c) > 1e-9) return false;
  for (double& f : flow_out) {
    if (f < -1e-9) return false;
    f = std::max(0.0, f);
  }
  return true;
}

// Exact transport value by enumerating every spanning basis: each vertex of
// the polytope is the flow on some basis of n+m-1 arcs.  Exponential, for
// tiny instances only.
inline double transport_value(const std::vector<double>& mu, const std::vector<double>& nu,
                              const std::vector<double>& cost, bool maximize = false) {
  const int n = int(mu.size()), m = int(nu.size());
  const int arcs_total = n * m, pick = n + m - 1;
  std::vector<int> idx(pick);
  std::iota(idx.begin(), idx.end(), 0);
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  std::vector<double> flow;
  while (true) {
    if (basis_flow(n, m, mu, nu, idx, flow)) {
      double v = 0.0;
      for (int a = 0; a < arcs_total; ++a) v += flow[a] * cost[a];
      best = maximize ? std::max(best, v) : std::min(best, v);
    }
    // next combination of pick out of arcs_total
    int k = pick - 1;
    while (k >= 0 && idx[k] == arcs_total - pick + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int l = k + 1; l < pick; ++l) idx[l] = idx[l - 1] + 1;
  }
  return best;
}

// Uniform equal-size assignment by permutation enumeration.
inline double assignment_value(int n, const std::vector<double>& cost, bool maximize = false) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += cost[std::size_t(i) * n + perm[i]] / n;
    best = maximize ? std::max(best, v) : std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Weighted pair-spread of the tanh pushforwards, straight from the formula.
inline double var_hat(const std::vector<std::vector<double>>& points,
                      const std::vector<double>& weights) {
  if (points.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < points[0].size(); ++c) {
    double spread = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = 0; j < points.size(); ++j) {
        const double d = std::tanh(points[i][c]) - std::tanh(points[j][c]);
        spread += weights[i] * weights[j] * d * d;
      }
    total += std::ldexp(spread, -int(c) - 1);
  }
  return total;
}

}  // namespace oracle
