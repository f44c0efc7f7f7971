#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wotw/measures.hpp"
#include "wotw/nested.hpp"
#include "wotw/ot.hpp"
#include "wotw/rng.hpp"

using namespace wotw;

namespace {

DiscreteMeasure random_flat(Rng& rng, int atoms, int dim) {
  DiscreteMeasure mu;
  double sum = 0.0;
  for (int i = 0; i < atoms; ++i) {
    Vec p(dim);
    for (double& x : p) x = rng.next_gaussian();
    mu.points.push_back(p);
    const double w = 0.1 + rng.next_double();
    mu.weights.push_back(w);
    sum += w;
  }
  for (double& w : mu.weights) w /= sum;
  return mu;
}

NestedMeasure random_nested(Rng& rng, int depth, int dim) {
  const int k = 2 + int(rng.next_below(2));
  NestedMeasure P;
  P.depth = depth;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = 0.1 + rng.next_double();
    P.weights.push_back(w);
    sum += w;
  }
  for (double& w : P.weights) w /= sum;
  if (depth == 1) {
    for (int i = 0; i < k; ++i) {
      Vec p(dim);
      for (double& x : p) x = rng.next_gaussian();
      P.points.push_back(p);
    }
  } else {
    for (int i = 0; i < k; ++i) P.children.push_back(random_nested(rng, depth - 1, dim));
  }
  return P;
}

// same fan-out sequence on both sides, uniform weights: the shape the
// permutation oracle can handle
NestedMeasure random_uniform_nested(Rng& rng, const std::vector<int>& fan, int level,
                                    int dim) {
  const int k = fan[level];
  NestedMeasure P;
  P.depth = int(fan.size()) - level;
  P.weights.assign(k, 1.0 / k);
  if (P.depth == 1) {
    for (int i = 0; i < k; ++i) {
      Vec p(dim);
      for (double& x : p) x = rng.next_gaussian();
      P.points.push_back(p);
    }
  } else {
    for (int i = 0; i < k; ++i)
      P.children.push_back(random_uniform_nested(rng, fan, level + 1, dim));
  }
  return P;
}

double plan_cost(const OTSolution& sol, const std::vector<double>& cost) {
  double v = 0.0;
  for (std::size_t k = 0; k < sol.coupling.pi.size(); ++k) v += sol.coupling.pi[k] * cost[k];
  return v;
}

}  // namespace

TEST_CASE("simplex agrees with the basis-enumeration reference") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + int(rng.next_below(3));
    const int m = 2 + int(rng.next_below(3));
    DiscreteMeasure mu = random_flat(rng, n, 1), nu = random_flat(rng, m, 1);
    std::vector<double> cost(std::size_t(n) * m);
    for (double& c : cost) c = rng.next_uniform(-2.0, 2.0);

    for (const Sense sense : {Sense::Min, Sense::Max}) {
      const OTSolution sol = solve_exact_ot(mu.weights, nu.weights, cost, n, m, sense);
      const double ref =
          oracle::transport_value(mu.weights, nu.weights, cost, sense == Sense::Max);
      CHECK(std::abs(sol.value - ref) <= 1e-9);
      CHECK(validate_coupling(sol.coupling, mu.weights, nu.weights).ok);
      CHECK(std::abs(plan_cost(sol, cost) - sol.value) <= 1e-9);

      // dual feasibility and complementary slackness
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          const double slack = cost[std::size_t(i) * m + j] - sol.dual_phi[i] - sol.dual_psi[j];
          if (sense == Sense::Min)
            CHECK(slack >= -1e-8);
          else
            CHECK(slack <= 1e-8);
          CHECK(std::abs(slack) * sol.coupling.at(i, j) <= 1e-8);
        }
    }
  }
}

TEST_CASE("forbidden arcs are respected") {
  const std::vector<double> half{0.5, 0.5};
  std::vector<double> cost{0.0, 1.0, 1.0, 0.0};
  cost[0] = std::numeric_limits<double>::infinity();  // forbid the cheap diagonal arc
  const OTSolution sol = solve_exact_ot(half, half, cost, 2, 2, Sense::Min);
  CHECK(sol.coupling.at(0, 0) == 0.0);
  // mass forced onto the expensive arcs: 0->1 full, 1 splits
  CHECK(std::abs(sol.value - 1.0) <= 1e-12);
}

TEST_CASE("one dimensional fast path matches the simplex") {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + int(rng.next_below(20));
    const int m = 2 + int(rng.next_below(20));
    DiscreteMeasure mu = random_flat(rng, n, 1), nu = random_flat(rng, m, 1);
    std::vector<double> xs(n), ys(m);
    for (int i = 0; i < n; ++i) xs[i] = mu.points[i][0];
    for (int j = 0; j < m; ++j) ys[j] = nu.points[j][0];

    const std::vector<double> cost = squared_cost_matrix(mu, nu);
    const OTSolution dense = solve_exact_ot(mu.weights, nu.weights, cost, n, m, Sense::Min);
    const double fast = ot_value_1d_squared(xs, mu.weights, ys, nu.weights);
    CHECK(std::abs(fast - dense.value) <= 1e-9);

    const OTSolution plan = solve_1d_squared(xs, mu.weights, ys, nu.weights);
    CHECK(validate_coupling(plan.coupling, mu.weights, nu.weights).ok);
    CHECK(std::abs(plan_cost(plan, cost) - dense.value) <= 1e-9);
    // fast-path duals must certify optimality for the dense problem too
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        CHECK(cost[std::size_t(i) * m + j] - plan.dual_phi[i] - plan.dual_psi[j] >= -1e-8);
  }
}

TEST_CASE("max covariance and distance on a frozen pair") {
  const DiscreteMeasure mu{{{0.0, 0.0}, {1.0, 1.0}}, {0.5, 0.5}};
  const DiscreteMeasure nu{{{1.0, 0.0}, {0.0, -1.0}}, {0.5, 0.5}};
  CHECK(std::abs(mc(mu, nu) - 0.5) <= 1e-12);
  const W2Result r = w2(mu, nu);
  CHECK(r.value_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance identity against self terms") {
  Rng rng(303);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + int(rng.next_below(3));
    const DiscreteMeasure mu = random_flat(rng, 2 + int(rng.next_below(3)), d);
    const DiscreteMeasure nu = random_flat(rng, 2 + int(rng.next_below(3)), d);
    const double lhs = w2(mu, nu).value_sq;
    const double rhs = mu.second_moment() + nu.second_moment() - 2.0 * mc(mu, nu);
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("monge extraction") {
  Coupling perm;
  perm.rows = perm.cols = 3;
  perm.pi = {0.0, 0.3, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.2};
  const MongeMap mm = extract_monge(perm);
  CHECK(mm.is_monge);
  CHECK(mm.map == std::vector<int>{1, 0, 2});

  Coupling split;
  split.rows = 1;
  split.cols = 2;
  split.pi = {0.5, 0.5};
  CHECK_FALSE(extract_monge(split).is_monge);
}

TEST_CASE("nested value on a frozen pair") {
  NestedMeasure P;
  P.depth = 2;
  P.weights = {0.5, 0.5};
  P.children.push_back(NestedMeasure::discrete({{0.0}}, {1.0}));
  P.children.push_back(NestedMeasure::discrete({{2.0}}, {1.0}));
  NestedMeasure Q;
  Q.depth = 2;
  Q.weights = {1.0};
  Q.children.push_back(NestedMeasure::discrete({{0.0}, {2.0}}, {0.5, 0.5}));

  CHECK(std::abs(nested_mc(P, Q) - 1.0) <= 1e-12);
  const NestedW2Result r = nested_w2(P, Q);
  CHECK(r.value_sq == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.identity_residual <= 1e-10);
}

TEST_CASE("depth one reduces to the flat problem") {
  Rng rng(404);
  const DiscreteMeasure mu = random_flat(rng, 3, 2), nu = random_flat(rng, 4, 2);
  const NestedMeasure P = NestedMeasure::discrete(mu.points, mu.weights);
  const NestedMeasure Q = NestedMeasure::discrete(nu.points, nu.weights);
  CHECK(nested_mc(P, Q) == doctest::Approx(mc(mu, nu)).epsilon(1e-12));
  CHECK(nested_w2(P, Q).value == doctest::Approx(w2(mu, nu).value).epsilon(1e-12));
}

TEST_CASE("recursion agrees with permutation enumeration on uniform trees") {
  Rng rng(505);
  for (int trial = 0; trial < 12; ++trial) {
    const int depth = 2 + int(rng.next_below(2));
    const int d = 1 + int(rng.next_below(2));
    std::vector<int> fan(depth);
    for (int& f : fan) f = 2 + int(rng.next_below(2));
    const NestedMeasure P = random_uniform_nested(rng, fan, 0, d);
    const NestedMeasure Q = random_uniform_nested(rng, fan, 0, d);

    const double fast = nested_mc(P, Q);
    CHECK(std::abs(fast - brute_force_nested_mc(P, Q)) <= 1e-9);
    CHECK(std::abs(fast - nested_mc(P, Q, false)) <= 1e-12);

    const NCoupling plan = assemble_ncoupling(P, Q);
    CHECK(validate_ncoupling(plan, P, Q).ok);
    CHECK(std::abs(flattened_score(plan, P, Q) - fast) <= 1e-8);
  }
}

TEST_CASE("nested identity residual stays small on mixed weights") {
  Rng rng(606);
  for (int trial = 0; trial < 15; ++trial) {
    const int depth = 2 + int(rng.next_below(2));
    const int d = 1 + int(rng.next_below(3));
    const NestedMeasure P = random_nested(rng, depth, d);
    const NestedMeasure Q = random_nested(rng, depth, d);
    const NestedW2Result r = nested_w2(P, Q);
    CHECK(r.identity_residual <= 1e-8);
    CHECK(r.value >= 0.0);

    // symmetry and self distance
    CHECK(std::abs(nested_w2(Q, P).value - r.value) <= 1e-9);
    CHECK(nested_w2(P, P).value <= 1e-9);
    CHECK(std::abs(nested_mc(P, Q) - nested_mc(Q, P)) <= 1e-9);
  }
}
