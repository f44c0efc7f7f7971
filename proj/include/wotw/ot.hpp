#pragma once

#include <vector>

#include "wotw/measures.hpp"

namespace wotw {

enum class Sense { Min, Max };

// Exact transportation solve.  The coupling is an optimal vertex of the
// transport polytope and (dual_phi, dual_psi) certify optimality in the
// solved sense: for Min, phi_i + psi_j <= cost_ij up to roundoff with
// equality on the support; for Max the inequality is reversed.
struct OTSolution {
  Coupling coupling;
  double value = 0.0;
  std::vector<double> dual_phi;
  std::vector<double> dual_psi;
  Sense sense = Sense::Min;
};

// Dense exact solve by network simplex with deterministic pivoting (most
// negative reduced cost, lexicographic ties, Bland fallback), so reruns give
// the same vertex on ties.  cost is row-major rows x cols.  Entries equal to
// `forbidden` mark arcs that must carry no flow; pass +inf/-inf per sense.
OTSolution solve_exact_ot(const std::vector<double>& mu, const std::vector<double>& nu,
                          const std::vector<double>& cost, int rows, int cols,
                          Sense sense = Sense::Min);

// Monotone-rearrangement solve for scalar atoms and squared distance; exact
// for this cost and O(n log n).  Produces the northwest-corner quantile
// coupling and chain-rule duals.
OTSolution solve_1d_squared(const std::vector<double>& xs, const std::vector<double>& mu,
                            const std::vector<double>& ys, const std::vector<double>& nu);

// Value-only version of the above; no allocation beyond two index sorts.
double ot_value_1d_squared(const std::vector<double>& xs, const std::vector<double>& mu,
                           const std::vector<double>& ys, const std::vector<double>& nu);

// Largest expected inner product over couplings.
OTSolution mc_solution(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double mc(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct W2Result {
  double value = 0.0;     // the distance itself
  double value_sq = 0.0;  // transport cost under squared distance
  OTSolution solution;
};
W2Result w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// A plan is a map when every row pushes its whole mass to one column.
// Entries below tol * (row mass) count as zero.
struct MongeMap {
  bool is_monge = false;
  std::vector<int> map;  // row -> column, -1 where the row splits
};
MongeMap extract_monge(const Coupling& plan, double tol = 1e-9);

std::vector<double> squared_cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
std::vector<double> inner_product_cost_matrix(const DiscreteMeasure& mu,
                                              const DiscreteMeasure& nu);

}  // namespace wotw
