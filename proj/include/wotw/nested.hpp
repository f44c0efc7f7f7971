#pragma once

#include "wotw/measures.hpp"
#include "wotw/ot.hpp"

namespace wotw {

// Largest expected inner product over tree-structured plans, computed by
// backward recursion: at depth 1 it is a max-sense transport with inner
// product payoff, above that the payoff between two children is their own
// nested value.  Node pairs recur across branches, so results are memoized
// on node identity; pass use_cache = false to recompute everything (the
// numbers are identical either way, the cache is pure lookup).
double nested_mc(const NestedMeasure& P, const NestedMeasure& Q, bool use_cache = true);

struct NestedW2Result {
  double value = 0.0;     // distance
  double value_sq = 0.0;  // from the direct recursion
  // |direct - via the self/cross inner-product identity|, on squared values.
  double identity_residual = 0.0;
};

// Squared distance by direct recursion (child payoff = child squared
// distance, min sense) cross-checked against
//   mc(P,P) + mc(Q,Q) - 2 mc(P,Q).
NestedW2Result nested_w2(const NestedMeasure& P, const NestedMeasure& Q);

// Tree-structured optimal plan assembled from the recursion's couplings.
NCoupling assemble_ncoupling(const NestedMeasure& P, const NestedMeasure& Q);

// Expected inner product of a plan after flattening it to a coupling of the
// ground spaces (the plan analogue of iterated_intensity).
double flattened_score(const NCoupling& plan, const NestedMeasure& P, const NestedMeasure& Q);

// Exhaustive reference for uniform trees: maximizes over one permutation per
// level.  Only valid when every node has equally many, equally weighted
// children; intended for small instances.
double brute_force_nested_mc(const NestedMeasure& P, const NestedMeasure& Q);

}  // namespace wotw
