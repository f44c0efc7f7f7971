#include "wotw/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wotw/nested.hpp"
#include "wotw/ot.hpp"
#include "wotw/rng.hpp"

namespace wotw {

namespace {

bool finite_value(double v) { return std::isfinite(v); }

// Full pairwise score table of the family; entry (a, b) treats support a as
// source and b as target.
std::vector<double> score_table(const FunctionalTable& phi) {
  const int n = int(phi.supports.size());
  std::vector<double> m(std::size_t(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      m[std::size_t(a) * n + b] = nested_mc(phi.supports[a], phi.supports[b]);
  return m;
}

std::vector<double> transform_from_table(const std::vector<double>& score,
                                         const std::vector<double>& values, int n) {
  std::vector<double> out(n, -FunctionalTable::inf);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      if (!finite_value(values[a])) continue;
      out[b] = std::max(out[b], score[std::size_t(a) * n + b] - values[a]);
    }
  return out;
}

}  // namespace

Validation validate(const FunctionalTable& phi) {
  Validation v;
  auto fail = [&](const std::string& msg) {
    v.ok = false;
    v.message = msg;
    return v;
  };
  if (phi.supports.empty()) return fail("empty-family: no supports");
  if (phi.supports.size() != phi.values.size())
    return fail("shape: supports/values size mismatch");
  bool any_finite = false;
  for (double x : phi.values) {
    if (std::isnan(x) || x == -FunctionalTable::inf)
      return fail("bad-value: values must be finite or +inf");
    if (finite_value(x)) any_finite = true;
  }
  if (!any_finite) return fail("improper: all values are +inf");
  for (const NestedMeasure& P : phi.supports) {
    if (P.depth != phi.depth) return fail("depth: support depth mismatch");
    Validation m = validate(P);
    if (!m.ok) return m;
  }
  for (std::size_t a = 0; a < phi.supports.size(); ++a)
    for (std::size_t b = a + 1; b < phi.supports.size(); ++b)
      if (nested_w2(phi.supports[a], phi.supports[b]).value <= 1e-12)
        return fail("duplicate-support: supports " + std::to_string(a) + " and " +
                    std::to_string(b) + " coincide");
  return v;
}

double mc_transform(const FunctionalTable& phi, const NestedMeasure& Q) {
  double best = -FunctionalTable::inf;
  bool any = false;
  for (std::size_t a = 0; a < phi.supports.size(); ++a) {
    if (!finite_value(phi.values[a])) continue;
    any = true;
    best = std::max(best, nested_mc(phi.supports[a], Q) - phi.values[a]);
  }
  if (!any) throw std::invalid_argument("mc_transform: improper table");
  return best;
}

ConvexityReport mc_convexity_residual(const FunctionalTable& phi) {
  const int n = int(phi.supports.size());
  const std::vector<double> score = score_table(phi);
  ConvexityReport rep;
  rep.transform = transform_from_table(score, phi.values, n);
  // The transform is finite everywhere once one value is finite, so the
  // second and third transforms reuse the same table with roles swapped.
  std::vector<double> score_t(std::size_t(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) score_t[std::size_t(b) * n + a] = score[std::size_t(a) * n + b];
  rep.biconjugate = transform_from_table(score_t, rep.transform, n);
  const std::vector<double> triple = transform_from_table(score, rep.biconjugate, n);
  rep.one_sided_excess = -FunctionalTable::inf;
  rep.biconjugation_residual = 0.0;
  rep.triple_residual = 0.0;
  for (int a = 0; a < n; ++a) {
    if (finite_value(phi.values[a])) {
      rep.one_sided_excess = std::max(rep.one_sided_excess, rep.biconjugate[a] - phi.values[a]);
      rep.biconjugation_residual =
          std::max(rep.biconjugation_residual, std::abs(phi.values[a] - rep.biconjugate[a]));
    } else if (finite_value(rep.biconjugate[a])) {
      // phi = +inf there; the double transform lying below it is automatic.
      rep.biconjugation_residual = FunctionalTable::inf;
    }
    rep.triple_residual = std::max(rep.triple_residual, std::abs(triple[a] - rep.transform[a]));
  }
  return rep;
}

std::vector<std::pair<int, int>> mc_subdifferential_pairs(const FunctionalTable& phi,
                                                          double tol) {
  const int n = int(phi.supports.size());
  const std::vector<double> score = score_table(phi);
  const std::vector<double> transform = transform_from_table(score, phi.values, n);
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    if (!finite_value(phi.values[a])) continue;
    for (int b = 0; b < n; ++b)
      if (std::abs(phi.values[a] + transform[b] - score[std::size_t(a) * n + b]) <= tol)
        pairs.emplace_back(a, b);
  }
  return pairs;
}

NestedMeasure random_probe_tree(int depth, int dim, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  const std::function<NestedMeasure(int)> build = [&](int d) -> NestedMeasure {
    const int fan = 2 + int(rng.next_below(2));
    NestedMeasure m;
    m.depth = d;
    std::vector<double> w(fan);
    double sum = 0.0;
    for (double& x : w) {
      x = rng.next_double();
      sum += x;
    }
    for (double& x : w) x /= sum;
    m.weights = w;
    if (d == 1) {
      for (int k = 0; k < fan; ++k) {
        Vec p(dim);
        for (double& x : p) x = rng.next_gaussian();
        m.points.push_back(p);
      }
    } else {
      for (int k = 0; k < fan; ++k) m.children.push_back(build(d - 1));
    }
    return m;
  };
  return build(depth);
}

OrderReport mc_order_test(const NestedMeasure& P, const NestedMeasure& Q, int probes,
                          std::uint64_t seed) {
  if (P.depth != Q.depth || P.dim() != Q.dim())
    throw std::invalid_argument("mc_order_test: incompatible measures");
  OrderReport rep;
  rep.probes = probes;
  rep.seed = seed;
  for (int k = 0; k < probes; ++k) {
    const NestedMeasure R = random_probe_tree(P.depth, P.dim(), seed, std::uint64_t(k));
    const double gap = nested_mc(P, R) - nested_mc(Q, R);
    if (gap > 1e-9) {
      rep.dominated = false;
      rep.witness_probe = k;
      rep.witness_gap = gap;
      break;
    }
  }
  return rep;
}

bool convex_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double mean_tol) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw std::invalid_argument("convex_order_1d: measures must be scalar");
  const double mean_mu = mu.mean()[0], mean_nu = nu.mean()[0];
  if (std::abs(mean_mu - mean_nu) > mean_tol) return false;
  auto potential = [](const DiscreteMeasure& m, double u) {
    double s = 0.0;
    for (int i = 0; i < m.size(); ++i) s += m.weights[i] * std::abs(m.points[i][0] - u);
    return s;
  };
  // Piecewise-linear potentials only cross at kinks, so atom locations of
  // either measure are the only points that need checking.
  for (const DiscreteMeasure* m : {&mu, &nu})
    for (const Vec& p : m->points)
      if (potential(mu, p[0]) > potential(nu, p[0]) + 1e-12) return false;
  return true;
}

}  // namespace wotw
