#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "wotw/measures.hpp"

namespace wotw {

// A functional on nested measures given by its values on a finite family of
// supports.  +infinity marks points outside the effective domain; at least
// one value must be finite and supports must be pairwise distinct.
struct FunctionalTable {
  int depth = 1;
  std::vector<NestedMeasure> supports;
  std::vector<double> values;

  static constexpr double inf = std::numeric_limits<double>::infinity();
};

Validation validate(const FunctionalTable& phi);

// Conjugate under the inner-product transport payoff, restricted to the
// family:  phi*(Q) = max over finite-valued supports P of  score(P,Q) - phi(P).
double mc_transform(const FunctionalTable& phi, const NestedMeasure& Q);

// Transform, double transform and triple transform evaluated across the
// family, with the residuals the convexity theory predicts: the double
// transform never exceeds phi, agrees with it when phi is a max of
// transport-affine functionals, and transforming a third time changes
// nothing.
struct ConvexityReport {
  std::vector<double> transform;     // phi* on the supports, read as targets
  std::vector<double> biconjugate;   // phi** on the supports
  double one_sided_excess = 0.0;     // max(phi** - phi), at most roundoff
  double biconjugation_residual = 0.0;  // max |phi - phi**|
  double triple_residual = 0.0;      // max |phi*** - phi*|
};
ConvexityReport mc_convexity_residual(const FunctionalTable& phi);

// Pairs (P, Q) of family indices in tight duality:
// phi(P) + phi*(Q) = score(P, Q) within tol.
std::vector<std::pair<int, int>> mc_subdifferential_pairs(const FunctionalTable& phi,
                                                          double tol = 1e-9);

// Randomized one-sided dominance test: P is below Q when no probe R gives
// score(P, R) > score(Q, R).  Probes are random trees of matching depth with
// fan-out 2-3 and standard Gaussian atoms, one stream per probe index.
struct OrderReport {
  bool dominated = true;
  int witness_probe = -1;
  double witness_gap = 0.0;
  int probes = 0;
  std::uint64_t seed = 0;
};
OrderReport mc_order_test(const NestedMeasure& P, const NestedMeasure& Q, int probes,
                          std::uint64_t seed);
NestedMeasure random_probe_tree(int depth, int dim, std::uint64_t seed, std::uint64_t stream);

// Convex order for scalar measures: equal means (within mean_tol) plus
// dominance of the potential u -> E|X-u| at every atom of either side.
bool convex_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     double mean_tol = 1e-10);

}  // namespace wotw
