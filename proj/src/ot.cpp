#include "wotw/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wotw {

namespace {

// Dense network simplex for the balanced transportation problem (min sense).
// Deterministic throughout: northwest-corner start, most-negative pricing
// with lexicographic ties, Bland's rule as an anti-cycling fallback.
// Infinite costs mark forbidden arcs.  They are never priced with a big-M
// surrogate (that poisons the potentials with cancellation noise); instead a
// feasibility phase first drains them, after which they may only linger in
// the basis as zero-flow bridges.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<double>& mu, const std::vector<double>& nu,
                   std::vector<double> cost, int n, int m)
      : mu_(mu), nu_(nu), c_(std::move(cost)), n_(n), m_(m) {
    double cmax = 0.0;
    forbidden_.assign(c_.size(), 0);
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (std::isfinite(c_[k])) {
        cmax = std::max(cmax, std::abs(c_[k]));
      } else {
        forbidden_[k] = 1;
        c_[k] = 0.0;
        has_forbidden_ = true;
      }
    }
    eps_ = 1e-11 * (1.0 + cmax);
  }

  void solve() {
    init_northwest();
    if (has_forbidden_) {
      run(Phase::Feasibility);
      double rest = 0.0;
      for (const Arc& a : basis_)
        if (forbidden_[idx(a)]) rest += std::max(0.0, a.flow);
      if (rest > 1e-9)
        throw std::runtime_error("transport simplex: restricted problem infeasible");
    }
    run(Phase::Cost);
  }

  Coupling plan() const {
    Coupling out;
    out.rows = n_;
    out.cols = m_;
    out.pi.assign(std::size_t(n_) * m_, 0.0);
    for (const Arc& a : basis_) {
      double f = a.flow;
      if (f < 0.0) {
        if (f < -1e-6) throw std::runtime_error("transport simplex: negative flow");
        f = 0.0;
      }
      if (forbidden_[idx(a)]) {
        if (f > 1e-9)
          throw std::runtime_error("transport simplex: restricted problem infeasible");
        f = 0.0;
      }
      out.pi[idx(a)] = f;
    }
    return out;
  }

  double objective() const {
    double v = 0.0;
    for (const Arc& a : basis_)
      if (a.flow > 0.0) v += a.flow * c_[std::size_t(a.i) * m_ + a.j];
    return v;
  }

  std::vector<double> row_potentials() const {
    return std::vector<double>(pot_.begin(), pot_.begin() + n_);
  }
  std::vector<double> col_potentials() const {
    return std::vector<double>(pot_.begin() + n_, pot_.end());
  }

 private:
  enum class Phase { Feasibility, Cost };

  struct Arc {
    int i, j;
    double flow;
  };

  std::size_t idx(const Arc& a) const { return std::size_t(a.i) * m_ + a.j; }

  // Phase one prices unit cost on forbidden arcs and zero elsewhere; phase two
  // prices the real costs, with forbidden basic arcs acting as free bridges.
  double arc_cost(std::size_t k) const {
    if (phase_ == Phase::Feasibility) return forbidden_[k] ? 1.0 : 0.0;
    return c_[k];
  }

  double price_eps() const { return phase_ == Phase::Feasibility ? 1e-12 : eps_; }

  void run(Phase ph) {
    phase_ = ph;
    const long bland_after = 1000 + 40L * (n_ + m_);
    const long cap = 4000000;
    for (long iter = 0;; ++iter) {
      if (iter > cap) throw std::runtime_error("transport simplex: iteration cap hit");
      rebuild_tree();
      int ei = -1, ej = -1;
      if (!price(iter > bland_after, &ei, &ej)) break;
      pivot(ei, ej);
    }
  }

  void init_northwest() {
    basis_.clear();
    int i = 0, j = 0;
    double a = mu_[0], b = nu_[0];
    for (;;) {
      const double t = std::min(a, b);
      basis_.push_back({i, j, t});
      a -= t;
      b -= t;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (a == 0.0 && i < n_ - 1) {
        ++i;
        a = mu_[i];
      } else {
        ++j;
        b = nu_[j];
      }
    }
  }

  // Parent pointers, depths and potentials from the current basis.
  void rebuild_tree() {
    const int N = n_ + m_;
    adj_.assign(N, {});
    for (int k = 0; k < int(basis_.size()); ++k) {
      adj_[basis_[k].i].push_back(k);
      adj_[n_ + basis_[k].j].push_back(k);
    }
    parent_.assign(N, -1);
    parent_arc_.assign(N, -1);
    depth_.assign(N, 0);
    pot_.assign(N, 0.0);
    std::vector<int> stack{0};
    std::vector<char> seen(N, 0);
    seen[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int k : adj_[u]) {
        const Arc& a = basis_[k];
        const int v = (u == a.i) ? n_ + a.j : a.i;
        if (seen[v]) continue;
        seen[v] = 1;
        parent_[v] = u;
        parent_arc_[v] = k;
        depth_[v] = depth_[u] + 1;
        pot_[v] = arc_cost(idx(a)) - pot_[u];
        stack.push_back(v);
      }
    }
  }

  // Finds an entering arc; returns false at optimality.
  bool price(bool bland, int* ei, int* ej) const {
    const double eps = price_eps();
    const bool skip_forbidden = phase_ == Phase::Cost && has_forbidden_;
    double best = -eps;
    for (int i = 0; i < n_; ++i) {
      const double ui = pot_[i];
      const std::size_t row = std::size_t(i) * m_;
      for (int j = 0; j < m_; ++j) {
        if (skip_forbidden && forbidden_[row + j]) continue;
        const double r = arc_cost(row + j) - ui - pot_[n_ + j];
        if (r < best) {
          best = r;
          *ei = i;
          *ej = j;
          if (bland) return true;
        }
      }
    }
    return best < -eps;
  }

  void pivot(int ei, int ej) {
    // Tree path from the entering row node to the entering column node;
    // cycle arcs alternate -theta, +theta starting at the row end.
    int u = ei, v = n_ + ej;
    std::vector<int> up_u, up_v;
    while (depth_[u] > depth_[v]) {
      up_u.push_back(parent_arc_[u]);
      u = parent_[u];
    }
    while (depth_[v] > depth_[u]) {
      up_v.push_back(parent_arc_[v]);
      v = parent_[v];
    }
    while (u != v) {
      up_u.push_back(parent_arc_[u]);
      u = parent_[u];
      up_v.push_back(parent_arc_[v]);
      v = parent_[v];
    }
    std::vector<int> path = up_u;
    path.insert(path.end(), up_v.rbegin(), up_v.rend());

    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (int p = 0; p < int(path.size()); ++p) {
      const Arc& a = basis_[path[p]];
      double bound;
      if (p % 2 == 0) {
        bound = a.flow;
      } else if (phase_ == Phase::Cost && forbidden_[idx(a)]) {
        bound = 0.0;  // zero-capacity bridge may not regain flow
      } else {
        continue;
      }
      if (bound < theta ||
          (bound == theta && leave >= 0 &&
           std::make_pair(a.i, a.j) < std::make_pair(basis_[leave].i, basis_[leave].j))) {
        theta = bound;
        leave = path[p];
      }
    }
    for (int p = 0; p < int(path.size()); ++p)
      basis_[path[p]].flow += (p % 2 == 0) ? -theta : theta;
    basis_[leave] = {ei, ej, theta};
  }

  std::vector<double> mu_, nu_, c_;
  int n_, m_;
  double eps_ = 0.0;
  bool has_forbidden_ = false;
  Phase phase_ = Phase::Cost;
  std::vector<char> forbidden_;
  std::vector<Arc> basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<double> pot_;
};

std::vector<int> sorted_order(const std::vector<double>& xs) {
  std::vector<int> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return xs[a] < xs[b]; });
  return idx;
}

}  // namespace

OTSolution solve_exact_ot(const std::vector<double>& mu, const std::vector<double>& nu,
                          const std::vector<double>& cost, int rows, int cols, Sense sense) {
  if (rows < 1 || cols < 1 || int(mu.size()) != rows || int(nu.size()) != cols ||
      int(cost.size()) != rows * cols)
    throw std::invalid_argument("solve_exact_ot: inconsistent shapes");
  std::vector<double> c = cost;
  if (sense == Sense::Max)
    for (double& x : c) x = -x;
  TransportSimplex simplex(mu, nu, c, rows, cols);
  simplex.solve();
  OTSolution sol;
  sol.sense = sense;
  sol.coupling = simplex.plan();
  sol.value = simplex.objective();
  sol.dual_phi = simplex.row_potentials();
  sol.dual_psi = simplex.col_potentials();
  if (sense == Sense::Max) {
    sol.value = -sol.value;
    for (double& x : sol.dual_phi) x = -x;
    for (double& x : sol.dual_psi) x = -x;
  }
  return sol;
}

double ot_value_1d_squared(const std::vector<double>& xs, const std::vector<double>& mu,
                           const std::vector<double>& ys, const std::vector<double>& nu) {
  const std::vector<int> sx = sorted_order(xs), sy = sorted_order(ys);
  int i = 0, j = 0;
  double a = mu[sx[0]], b = nu[sy[0]], value = 0.0;
  const int n = int(xs.size()), m = int(ys.size());
  for (;;) {
    const double t = std::min(a, b);
    const double d = xs[sx[i]] - ys[sy[j]];
    value += t * d * d;
    a -= t;
    b -= t;
    if (i == n - 1 && j == m - 1) break;
    if (a == 0.0 && i < n - 1)
      a = mu[sx[++i]];
    else
      b = nu[sy[++j]];
  }
  return value;
}

OTSolution solve_1d_squared(const std::vector<double>& xs, const std::vector<double>& mu,
                            const std::vector<double>& ys, const std::vector<double>& nu) {
  const int n = int(xs.size()), m = int(ys.size());
  const std::vector<int> sx = sorted_order(xs), sy = sorted_order(ys);
  OTSolution sol;
  sol.sense = Sense::Min;
  sol.coupling.rows = n;
  sol.coupling.cols = m;
  sol.coupling.pi.assign(std::size_t(n) * m, 0.0);
  sol.dual_phi.assign(n, 0.0);
  sol.dual_psi.assign(m, 0.0);

  // Monotone staircase; duals propagate along it from phi = 0 at the lowest
  // source atom.  Squared distance is submodular on sorted atoms, which makes
  // these chain duals globally feasible.
  auto cost = [&](int i, int j) {
    const double d = xs[i] - ys[j];
    return d * d;
  };
  int i = 0, j = 0;
  double a = mu[sx[0]], b = nu[sy[0]], value = 0.0;
  sol.dual_phi[sx[0]] = 0.0;
  sol.dual_psi[sy[0]] = cost(sx[0], sy[0]);
  for (;;) {
    const double t = std::min(a, b);
    sol.coupling.at(sx[i], sy[j]) += t;
    value += t * cost(sx[i], sy[j]);
    a -= t;
    b -= t;
    if (i == n - 1 && j == m - 1) break;
    if (a == 0.0 && i < n - 1) {
      ++i;
      a = mu[sx[i]];
      sol.dual_phi[sx[i]] = cost(sx[i], sy[j]) - sol.dual_psi[sy[j]];
    } else {
      ++j;
      b = nu[sy[j]];
      sol.dual_psi[sy[j]] = cost(sx[i], sy[j]) - sol.dual_phi[sx[i]];
    }
  }
  sol.value = value;
  return sol;
}

std::vector<double> squared_cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> c(std::size_t(mu.size()) * nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      c[std::size_t(i) * nu.size() + j] = sqdist(mu.points[i], nu.points[j]);
  return c;
}

std::vector<double> inner_product_cost_matrix(const DiscreteMeasure& mu,
                                              const DiscreteMeasure& nu) {
  std::vector<double> c(std::size_t(mu.size()) * nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      c[std::size_t(i) * nu.size() + j] = dot(mu.points[i], nu.points[j]);
  return c;
}

OTSolution mc_solution(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("mc: dimension mismatch");
  return solve_exact_ot(mu.weights, nu.weights, inner_product_cost_matrix(mu, nu),
                        mu.size(), nu.size(), Sense::Max);
}

double mc(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return mc_solution(mu, nu).value;
}

W2Result w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("w2: dimension mismatch");
  W2Result r;
  r.solution = solve_exact_ot(mu.weights, nu.weights, squared_cost_matrix(mu, nu),
                              mu.size(), nu.size(), Sense::Min);
  r.value_sq = r.solution.value;
  r.value = std::sqrt(std::max(0.0, r.value_sq));
  return r;
}

MongeMap extract_monge(const Coupling& plan, double tol) {
  MongeMap mm;
  mm.map.assign(plan.rows, -1);
  mm.is_monge = true;
  const std::vector<double> rs = plan.row_sums();
  for (int i = 0; i < plan.rows; ++i) {
    const double cut = tol * rs[i];
    int hits = 0, col = -1;
    for (int j = 0; j < plan.cols; ++j) {
      if (plan.at(i, j) > cut) {
        ++hits;
        col = j;
      }
    }
    if (hits == 1)
      mm.map[i] = col;
    else
      mm.is_monge = false;
  }
  return mm;
}

}  // namespace wotw
