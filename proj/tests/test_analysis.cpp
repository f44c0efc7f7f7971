#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wotw/convexity.hpp"
#include "wotw/measures.hpp"
#include "wotw/nested.hpp"
#include "wotw/ot.hpp"
#include "wotw/regularity.hpp"
#include "wotw/rng.hpp"

using namespace wotw;

namespace {

DiscreteMeasure flat(std::vector<Vec> pts, std::vector<double> w) {
  DiscreteMeasure m;
  m.points = std::move(pts);
  m.weights = std::move(w);
  return m;
}

DiscreteMeasure random_flat(Rng& rng, int atoms, int dim) {
  DiscreteMeasure m;
  double sum = 0.0;
  for (int i = 0; i < atoms; ++i) {
    Vec p(dim);
    for (double& x : p) x = rng.next_gaussian();
    m.points.push_back(p);
    const double w = 0.1 + rng.next_double();
    m.weights.push_back(w);
    sum += w;
  }
  for (double& w : m.weights) w /= sum;
  return m;
}

// side-by-side plan of the crossed two-by-two instance, one free parameter
Coupling planted_plan(double a) {
  Coupling pi;
  pi.rows = pi.cols = 2;
  pi.pi = {a, 0.5 - a, 0.5 - a, a};
  return pi;
}

// spread objective of the crossed instance along its one-parameter family
double planted_objective(double a) {
  const double t = std::tanh(1.0);
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double p = (i == 0 ? a : 0.5 - a) / 0.5;  // P(first column | row i)
    // column atoms are (1,0) and (-1,0): only coordinate 1 spreads
    const double m1 = p * t + (1.0 - p) * (-t);
    const double m2 = t * t;
    total += 0.5 * 0.5 * 2.0 * (m2 - m1 * m1);  // weight 2^-1 on coordinate 1
  }
  return total;
}

// the crossed instance: source varies in coordinate 2, target in coordinate 1
std::pair<DiscreteMeasure, DiscreteMeasure> planted_pair() {
  return {flat({{0.0, 1.0}, {0.0, -1.0}}, {0.5, 0.5}),
          flat({{1.0, 0.0}, {-1.0, 0.0}}, {0.5, 0.5})};
}

FunctionalTable random_table(Rng& rng, int depth, int dim, int supports) {
  FunctionalTable phi;
  phi.depth = depth;
  for (int k = 0; k < supports; ++k) {
    phi.supports.push_back(random_probe_tree(depth, dim, rng.next_u64(), k));
    phi.values.push_back(rng.next_gaussian());
  }
  // sprinkle a point outside the effective domain now and then
  if (supports > 2 && rng.next_below(2) == 0) phi.values[1] = FunctionalTable::inf;
  return phi;
}

}  // namespace

TEST_CASE("pair spread basics") {
  CHECK(var_hat(flat({{3.0}}, {1.0})) == 0.0);
  CHECK(var_hat(flat({{0.0, 0.0, 0.0}}, {1.0})) == 0.0);

  const double t1 = std::tanh(1.0);
  CHECK(var_hat(flat({{-1.0}, {1.0}}, {0.5, 0.5})) == doctest::Approx(t1 * t1).epsilon(1e-14));

  // truncating to the first coordinate matches the projected measure
  Rng rng(811);
  const DiscreteMeasure two = random_flat(rng, 4, 2);
  DiscreteMeasure first;
  for (const Vec& p : two.points) first.points.push_back({p[0]});
  first.weights = two.weights;
  VarHatConfig head;
  head.max_terms = 1;
  CHECK(var_hat(two, head) == doctest::Approx(var_hat(first)).epsilon(1e-14));
  CHECK(var_hat(two, head) <= var_hat(two) + 1e-15);
}

TEST_CASE("pair spread agrees with the quadratic form") {
  Rng rng(822);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure m =
        random_flat(rng, 1 + int(rng.next_below(5)), 1 + int(rng.next_below(3)));
    const double direct = oracle::var_hat(m.points, m.weights);
    CHECK(var_hat(m) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("functional table validation") {
  FunctionalTable empty;
  CHECK_FALSE(validate(empty).ok);

  FunctionalTable phi;
  phi.depth = 1;
  phi.supports.push_back(NestedMeasure::discrete({{0.0}}, {1.0}));
  phi.supports.push_back(NestedMeasure::discrete({{1.0}}, {1.0}));
  phi.values = {0.5, 1.5};
  CHECK(validate(phi).ok);

  phi.values = {FunctionalTable::inf, FunctionalTable::inf};
  CHECK_FALSE(validate(phi).ok);  // nowhere finite

  phi.values = {0.5};
  CHECK_FALSE(validate(phi).ok);  // length mismatch

  phi.values = {0.5, 1.5};
  phi.supports[1] = phi.supports[0];
  CHECK_FALSE(validate(phi).ok);  // duplicate support
}

TEST_CASE("transform is the tight envelope over the family") {
  Rng rng(833);
  for (int trial = 0; trial < 8; ++trial) {
    const int depth = 1 + int(rng.next_below(2));
    const FunctionalTable phi =
        random_table(rng, depth, 1 + int(rng.next_below(2)), 3 + int(rng.next_below(3)));
    REQUIRE(validate(phi).ok);

    const int n = int(phi.supports.size());
    for (int j = 0; j < n; ++j) {
      double best = -FunctionalTable::inf;
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(phi.values[i])) continue;
        best = std::max(best, nested_mc(phi.supports[i], phi.supports[j]) - phi.values[i]);
      }
      const double star = mc_transform(phi, phi.supports[j]);
      CHECK(std::abs(star - best) <= 1e-12);
      // every support gives a lower bound, the best one is attained
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(phi.values[i])) continue;
        CHECK(star >= nested_mc(phi.supports[i], phi.supports[j]) - phi.values[i] - 1e-12);
      }
    }
  }
}

TEST_CASE("double transform never exceeds and third transform fixes") {
  Rng rng(844);
  for (int trial = 0; trial < 20; ++trial) {
    const int depth = 1 + int(rng.next_below(2));
    const FunctionalTable phi = random_table(rng, depth, 1, 3 + int(rng.next_below(3)));
    REQUIRE(validate(phi).ok);
    const ConvexityReport rep = mc_convexity_residual(phi);
    CHECK(rep.one_sided_excess <= 1e-12);
    CHECK(rep.triple_residual <= 1e-12);
    CHECK(rep.transform.size() == phi.supports.size());
    CHECK(rep.biconjugate.size() == phi.supports.size());
  }
}

TEST_CASE("a transform is its own double transform") {
  Rng rng(855);
  FunctionalTable psi = random_table(rng, 2, 1, 5);
  REQUIRE(validate(psi).ok);

  FunctionalTable phi = psi;
  for (std::size_t j = 0; j < psi.supports.size(); ++j)
    phi.values[j] = mc_transform(psi, psi.supports[j]);
  const ConvexityReport rep = mc_convexity_residual(phi);
  CHECK(rep.biconjugation_residual <= 1e-9);
}

TEST_CASE("tight duality pairs include every argmax") {
  Rng rng(866);
  const FunctionalTable phi = random_table(rng, 2, 1, 4);
  REQUIRE(validate(phi).ok);
  const auto pairs = mc_subdifferential_pairs(phi);
  const int n = int(phi.supports.size());
  for (int j = 0; j < n; ++j) {
    int arg = -1;
    double best = -FunctionalTable::inf;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(phi.values[i])) continue;
      const double s = nested_mc(phi.supports[i], phi.supports[j]) - phi.values[i];
      if (s > best) {
        best = s;
        arg = i;
      }
    }
    REQUIRE(arg >= 0);
    CHECK(std::count(pairs.begin(), pairs.end(), std::make_pair(arg, j)) == 1);
  }
}

TEST_CASE("randomized dominance test") {
  const NestedMeasure X = NestedMeasure::discrete({{-1.0}, {1.0}}, {0.5, 0.5});
  const NestedMeasure Y = NestedMeasure::discrete({{-2.0}, {2.0}}, {0.5, 0.5});

  const OrderReport self = mc_order_test(X, X, 32, 99);
  CHECK(self.dominated);
  CHECK(self.witness_probe == -1);
  CHECK(self.probes == 32);
  CHECK(self.seed == 99);

  // centered scores are nonnegative, doubling the atoms doubles them
  CHECK(mc_order_test(X, Y, 64, 99).dominated);
  const OrderReport rev = mc_order_test(Y, X, 64, 99);
  CHECK_FALSE(rev.dominated);
  CHECK(rev.witness_probe >= 0);
  CHECK(rev.witness_gap > 0.0);
}

TEST_CASE("scalar convex order") {
  const DiscreteMeasure point = flat({{0.0}}, {1.0});
  const DiscreteMeasure pm1 = flat({{-1.0}, {1.0}}, {0.5, 0.5});
  const DiscreteMeasure pm2 = flat({{-2.0}, {2.0}}, {0.5, 0.5});
  const DiscreteMeasure shifted = flat({{1.0}}, {1.0});

  CHECK(convex_order_1d(point, pm1));
  CHECK(convex_order_1d(pm1, pm2));
  CHECK_FALSE(convex_order_1d(pm2, pm1));
  CHECK_FALSE(convex_order_1d(shifted, pm1));  // means differ
  CHECK(convex_order_1d(pm1, pm1));
}

TEST_CASE("crossed two by two attains the spread of the target") {
  const auto [mu, nu] = planted_pair();
  const TauResult r = tau_squared_cost(mu, nu);

  const double t1 = std::tanh(1.0);
  CHECK(std::abs(r.value - t1 * t1) <= 1e-9);
  CHECK_FALSE(r.monge);
  CHECK(r.gap <= 1e-7);
  CHECK(r.value > 0.1 * var_hat(nu));
  CHECK(r.transport_value == doctest::Approx(2.0).epsilon(1e-12));

  // argmax stays on the polytope
  const auto rows = r.argmax.row_sums();
  CHECK(rows[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(rows[1] == doctest::Approx(0.5).epsilon(1e-10));

  // fine scan of the one-parameter optimal family
  double best = 0.0;
  for (double a = 0.0; a <= 0.5 + 1e-12; a += 1e-5) best = std::max(best, planted_objective(a));
  CHECK(std::abs(r.value - best) <= 1e-4);
  CHECK(planted_objective(0.25) == doctest::Approx(t1 * t1).epsilon(1e-14));
  CHECK(validate_coupling(planted_plan(0.25), mu.weights, nu.weights).ok);
}

TEST_CASE("generic scalar pairs are deterministic") {
  Rng rng(877);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + int(rng.next_below(4));
    DiscreteMeasure mu, nu;
    for (int i = 0; i < n; ++i) {
      mu.points.push_back({rng.next_gaussian()});
      nu.points.push_back({rng.next_gaussian()});
      mu.weights.push_back(1.0 / n);
      nu.weights.push_back(1.0 / n);
    }
    const TauResult r = tau_squared_cost(mu, nu);
    CHECK(r.monge);
    CHECK(r.value == 0.0);
    CHECK(r.raw_value <= 1e-12);
  }
}

TEST_CASE("spread value ignores atom order") {
  const auto [mu, nu] = planted_pair();
  DiscreteMeasure nu_swapped = nu;
  std::swap(nu_swapped.points[0], nu_swapped.points[1]);
  CHECK(std::abs(tau_squared_cost(mu, nu).value - tau_squared_cost(mu, nu_swapped).value) <=
        1e-12);
}

TEST_CASE("breaking the tie collapses the spread") {
  const auto [mu, nu] = planted_pair();
  std::vector<double> cost = squared_cost_matrix(mu, nu);
  cost[0] += 1e-3;  // favor the anti-diagonal permutation
  const TauResult r = tau(mu, nu, cost);
  CHECK(r.value == 0.0);
  CHECK(r.monge);
  CHECK(r.value <= tau_squared_cost(mu, nu).value + 1e-6);
}

TEST_CASE("ball estimate: point target contributes nothing") {
  Rng rng(888);
  const DiscreteMeasure mu = random_flat(rng, 3, 2);
  const TauRResult r = tau_r(mu, 2.0, 0, 505, {flat({{0.0, 0.0}}, {1.0})});
  CHECK(r.candidates == 1);
  CHECK(r.admitted == 1);
  CHECK(r.value == 0.0);
}

TEST_CASE("ball estimate grows with the radius and sees the planted target") {
  const auto [mu, nu] = planted_pair();
  const double t1 = std::tanh(1.0);

  double prev = -1.0;
  int prev_admitted = -1;
  for (const double radius : {0.25, 1.0, 4.0}) {
    const TauRResult r = tau_r(mu, radius, 12, 606, {nu});
    CHECK(r.candidates == 13);
    CHECK(r.value >= prev - 1e-15);
    CHECK(r.admitted >= prev_admitted);
    prev = r.value;
    prev_admitted = r.admitted;
  }

  // second moment of the planted target is 1, so radius 4 admits it
  const TauRResult wide = tau_r(mu, 4.0, 12, 606, {nu});
  CHECK(wide.value >= t1 * t1 - 1e-9);
}

TEST_CASE("experiment sweep, degenerate corners") {
  ExperimentConfig dirac;
  dirac.n_samples = 2;
  dirac.targets = 2;
  dirac.grid = 8;
  dirac.target_kind = ExperimentConfig::TargetKind::Dirac;
  const ExperimentResult dr = monge_rate_experiment(dirac);
  CHECK(dr.records.size() == 4);
  CHECK(dr.monge_rate == 1.0);
  for (const ExperimentRecord& rec : dr.records) {
    CHECK(rec.monge);
    CHECK(rec.tau == 0.0);
  }

  const auto [mu, nu] = planted_pair();
  ExperimentConfig planted;
  planted.n_samples = 2;
  planted.targets = 1;
  planted.target_kind = ExperimentConfig::TargetKind::Planted;
  planted.planted_sources = {mu};
  planted.planted_targets = {nu};
  const ExperimentResult pr = monge_rate_experiment(planted);
  CHECK(pr.records.size() == 2);
  CHECK(pr.monge_rate == 0.0);
  const double t1 = std::tanh(1.0);
  for (const ExperimentRecord& rec : pr.records) CHECK(std::abs(rec.tau - t1 * t1) <= 1e-9);

  // same configuration, same numbers
  const ExperimentResult pr2 = monge_rate_experiment(planted);
  REQUIRE(pr2.records.size() == pr.records.size());
  for (std::size_t i = 0; i < pr.records.size(); ++i)
    CHECK(pr2.records[i].tau == pr.records[i].tau);
}
