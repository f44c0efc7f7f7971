#include "wotw/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wotw/rng.hpp"
#include "wotw/samplers.hpp"

namespace wotw {

namespace {

int term_count(int dim, const VarHatConfig& cfg) {
  return cfg.max_terms > 0 ? std::min(cfg.max_terms, dim) : dim;
}

// tanh of coordinate n for every target atom; the objective and its gradient
// only ever see the targets through this table.
std::vector<std::vector<double>> squash_table(const DiscreteMeasure& nu, int terms) {
  std::vector<std::vector<double>> v(terms, std::vector<double>(nu.size()));
  for (int n = 0; n < terms; ++n)
    for (int j = 0; j < nu.size(); ++j) v[n][j] = std::tanh(nu.points[j][n]);
  return v;
}

}  // namespace

double var_hat(const DiscreteMeasure& rho, const VarHatConfig& cfg) {
  const int terms = term_count(rho.dim(), cfg);
  double total = 0.0;
  double weight = 0.5;
  for (int n = 0; n < terms; ++n, weight *= 0.5) {
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < rho.size(); ++i) {
      const double f = std::tanh(rho.points[i][n]);
      m1 += rho.weights[i] * f;
      m2 += rho.weights[i] * f * f;
    }
    // Pair form E|f(X) - f(X')|^2 = 2 Var(f(X)).
    total += weight * 2.0 * std::max(0.0, m2 - m1 * m1);
  }
  return total;
}

TauResult tau(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<double>& cost, Sense sense, const TauOptions& opt) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("tau: dimension mismatch");
  const int n = mu.size(), m = nu.size();
  if (int(cost.size()) != n * m) throw std::invalid_argument("tau: cost shape");

  TauResult res;
  const OTSolution base = solve_exact_ot(mu.weights, nu.weights, cost, n, m, sense);
  res.transport_value = base.value;

  // The optimal face is cut out by the arcs with tight duals; everything else
  // is forbidden in the inner linear maximizations.
  double scale = 0.0;
  for (double c : cost) scale = std::max(scale, std::abs(c));
  const double tight_tol = opt.face_tol * (1.0 + scale);
  std::vector<char> tight(cost.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double slack = cost[std::size_t(i) * m + j] - base.dual_phi[i] - base.dual_psi[j];
      tight[std::size_t(i) * m + j] = std::abs(slack) <= tight_tol;
    }

  const int terms = term_count(nu.dim(), opt.var_hat);
  const auto v = squash_table(nu, terms);
  std::vector<double> term_weight(terms);
  {
    double w = 0.5;
    for (int t = 0; t < terms; ++t, w *= 0.5) term_weight[t] = w;
  }

  std::vector<double> pi = base.coupling.pi;

  // Row sums a[n][i] of pi against the squash table.
  auto row_scores = [&](const std::vector<double>& p) {
    std::vector<std::vector<double>> a(terms, std::vector<double>(n, 0.0));
    for (int t = 0; t < terms; ++t)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += p[std::size_t(i) * m + j] * v[t][j];
        a[t][i] = s;
      }
    return a;
  };
  auto objective = [&](const std::vector<double>& p) {
    const auto a = row_scores(p);
    double f = 0.0;
    for (int t = 0; t < terms; ++t) {
      double lin = 0.0, quad = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
          const double x = p[std::size_t(i) * m + j];
          lin += x * v[t][j] * v[t][j];
        }
        if (mu.weights[i] > 0.0) quad += a[t][i] * a[t][i] / mu.weights[i];
      }
      f += 2.0 * term_weight[t] * (lin - quad);
    }
    return f;
  };

  const double forbidden = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    // Gradient of the concave objective at the current plan.
    const auto a = row_scores(pi);
    std::vector<double> grad(std::size_t(n) * m, forbidden);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        if (!tight[std::size_t(i) * m + j]) continue;
        double g = 0.0;
        for (int t = 0; t < terms; ++t) {
          const double inv = mu.weights[i] > 0.0 ? 1.0 / mu.weights[i] : 0.0;
          g += 2.0 * term_weight[t] * (v[t][j] * v[t][j] - 2.0 * a[t][i] * v[t][j] * inv);
        }
        grad[std::size_t(i) * m + j] = g;
      }
    const OTSolution lin =
        solve_exact_ot(mu.weights, nu.weights, grad, n, m, Sense::Max);
    double gd = 0.0;
    std::vector<double> d(std::size_t(n) * m);
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = lin.coupling.pi[k] - pi[k];
      if (tight[k]) gd += grad[k] * d[k];
    }
    gap = gd;
    if (gap < opt.gap_tol) break;
    // The objective is quadratic along the segment, so the line search is
    // closed form: f(pi + s d) = f(pi) + s*gd + s^2*q with q <= 0.
    double q = 0.0;
    for (int t = 0; t < terms; ++t)
      for (int i = 0; i < n; ++i) {
        if (mu.weights[i] <= 0.0) continue;
        double b = 0.0;
        for (int j = 0; j < m; ++j) b += d[std::size_t(i) * m + j] * v[t][j];
        q -= 2.0 * term_weight[t] * b * b / mu.weights[i];
      }
    const double step = q < 0.0 ? std::min(1.0, gd / (-2.0 * q)) : 1.0;
    for (std::size_t k = 0; k < d.size(); ++k) pi[k] += step * d[k];
    if (step >= 1.0 && q >= 0.0) break;  // linear along this direction, s=1 is exact
  }

  res.iterations = it;
  res.gap = std::isfinite(gap) ? gap : 0.0;
  res.raw_value = objective(pi);
  res.monge = res.raw_value < opt.zero_tol;
  res.value = res.monge ? 0.0 : res.raw_value;
  res.argmax.rows = n;
  res.argmax.cols = m;
  res.argmax.pi = pi;
  return res;
}

TauResult tau_squared_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const TauOptions& opt) {
  return tau(mu, nu, squared_cost_matrix(mu, nu), Sense::Min, opt);
}

TauRResult tau_r(const DiscreteMeasure& mu, double radius, int targets, std::uint64_t seed,
                 const std::vector<DiscreteMeasure>& planted, const TauOptions& opt) {
  if (radius < 0.0) throw std::invalid_argument("tau_r: negative radius");
  TauRResult out;
  const int d = mu.dim();
  auto measure_radius = [](const DiscreteMeasure& nu) {
    return std::sqrt(nu.second_moment());
  };
  auto consider = [&](const DiscreteMeasure& nu) {
    ++out.candidates;
    if (measure_radius(nu) > radius) return;
    ++out.admitted;
    out.value = std::max(out.value, tau_squared_cost(mu, nu, opt).value);
  };
  for (int k = 0; k < targets; ++k) {
    Rng rng(seed, std::uint64_t(k));
    const int atoms = 2 + int(rng.next_below(4));
    DiscreteMeasure nu;
    // Log-uniform overall scale, so candidates cover several radius decades
    // independently of the requested ball.
    const double scale = std::exp(rng.next_uniform(-3.0, 1.0));
    double sum = 0.0;
    for (int a = 0; a < atoms; ++a) {
      Vec p(d);
      for (double& x : p) x = scale * rng.next_gaussian();
      nu.points.push_back(p);
      const double w = rng.next_double();
      nu.weights.push_back(w);
      sum += w;
    }
    for (double& w : nu.weights) w /= sum;
    consider(nu);
  }
  for (const DiscreteMeasure& nu : planted) consider(nu);
  return out;
}

ExperimentResult monge_rate_experiment(const ExperimentConfig& cfg) {
  ExperimentResult out;
  int monge_count = 0;
  for (int s = 0; s < cfg.n_samples; ++s) {
    DiscreteMeasure source;
    if (!cfg.planted_sources.empty()) {
      source = cfg.planted_sources[std::size_t(s) % cfg.planted_sources.size()];
    } else {
      source = occupation_measure(
          sample_sheet(cfg.sheet_params, cfg.dim, cfg.grid, cfg.seed, std::uint64_t(s)));
    }
    for (int k = 0; k < cfg.targets; ++k) {
      DiscreteMeasure target;
      Rng rng(cfg.seed ^ 0xA5A5A5A5ull,
              (std::uint64_t(s) << 20) + std::uint64_t(k) + 1);
      switch (cfg.target_kind) {
        case ExperimentConfig::TargetKind::Planted:
          target = cfg.planted_targets[(std::size_t(s) * cfg.targets + k) %
                                       cfg.planted_targets.size()];
          break;
        case ExperimentConfig::TargetKind::Dirac: {
          Vec p(source.dim());
          for (double& x : p) x = rng.next_gaussian();
          target.points.push_back(p);
          target.weights.push_back(1.0);
          break;
        }
        case ExperimentConfig::TargetKind::Random: {
          double sum = 0.0;
          for (int a = 0; a < cfg.target_atoms; ++a) {
            Vec p(source.dim());
            for (double& x : p) x = rng.next_gaussian();
            target.points.push_back(p);
            const double w = rng.next_double();
            target.weights.push_back(w);
            sum += w;
          }
          for (double& w : target.weights) w /= sum;
          break;
        }
      }
      const TauResult t = tau_squared_cost(source, target, cfg.tau);
      out.records.push_back({s, k, t.value, t.monge});
      if (t.monge) ++monge_count;
    }
  }
  out.monge_rate =
      out.records.empty() ? 0.0 : double(monge_count) / double(out.records.size());
  return out;
}

}  // namespace wotw
