#pragma once

#include <map>
#include <string>
#include <vector>

#include "wotw/measures.hpp"
#include "wotw/ot.hpp"

namespace wotw {

// A tree in which no two siblings carry the same value and onward law, i.e.
// the cheapest representative of its equivalence class.  Produced by
// adapted_law and accepted anywhere a ProcessTree is.
struct CanonicalAdaptedLaw {
  ProcessTree tree;
  double merge_tol = 0.0;
};

// Bottom-up canonicalization: siblings whose subtrees are within merge_tol
// of each other (in the recursive value-plus-transport metric) are merged,
// weights added, first sibling kept as representative.  merge_tol 0 merges
// exact duplicates only and preserves the path law verbatim.  Idempotent:
// surviving siblings are pairwise farther than merge_tol apart.
CanonicalAdaptedLaw adapted_law(const ProcessTree& tree, double merge_tol = 0.0);

// Stage-wise node labels under exact structural interning: two nodes share a
// label iff their values coincide and their children induce the same law on
// labels one stage down.  The root-layer label law is the tree's adapted law
// in id form.
struct InformationProcess {
  std::vector<int> label;                            // per node index
  std::vector<int> stage_label_count;                // [t-1] = labels at stage t
  std::vector<std::pair<int, double>> root_law;      // label -> probability
};
InformationProcess information_process(const ProcessTree& tree);

// Nested transport distance between processes, by backward recursion over
// matched node pairs: the cost of matching children c, d is
// |value_c - value_d|^2 + V(c, d), V = 0 at the final stage, and the squared
// distance is the root-layer transport value.  Full pair tables are kept per
// stage.  threads splits the pair loops; results do not depend on it.
struct Aw2Result {
  double value = 0.0;
  double value_sq = 0.0;
  OTSolution top;                        // plan over root pairs
  std::vector<std::vector<int>> stage_a, stage_b;  // node ids per stage
  std::vector<std::vector<double>> v;    // [t-1][pa * nB + pb], cost-to-go; final stage empty (zero)
};
Aw2Result aw2(const ProcessTree& A, const ProcessTree& B, int threads = 1);

// Optimal coupling of the children of a matched pair, under the same costs
// the recursion used.  Deterministic, so re-solving reproduces the plan that
// produced result.v.
OTSolution aw2_pair_solution(const ProcessTree& A, const ProcessTree& B,
                             const Aw2Result& result, int node_a, int node_b);

// The optimal plan pushed all the way down to scenario space: a coupling of
// enumerate_paths(A) x enumerate_paths(B).
Coupling aw2_path_coupling(const ProcessTree& A, const ProcessTree& B,
                           const Aw2Result& result);

// Checks both conditional-independence directions of a scenario coupling:
// given the stage-t history of one side, the other side's first t stages may
// not depend on the future.  Reports the first violation found.
Validation check_bicausal(const Coupling& pi, const ProcessTree& A, const ProcessTree& B,
                          double tol = 1e-9);

// True when nodes are determined by their value history: no two stage-t
// nodes with the same history (sup distance <= 1e-12) carry different onward
// laws.
bool is_naturally_filtered(const ProcessTree& tree);

// Builds the canonical adapted law of a measure on R^{stages*dim} read as a
// path law, via exact successive disintegration.
CanonicalAdaptedLaw embed_J(const DiscreteMeasure& mu, int stages, int dim);

// Stage maps of the optimal plan, when it is deterministic.
struct BiadaptedMonge {
  bool is_monge = false;      // every reachable node maps to a single partner
  bool is_biadapted = false;  // same in the reverse direction
  std::vector<bool> stage_invertible;       // forward map injective per stage
  std::vector<std::map<int, int>> stage_map;  // [t-1]: node of A -> node of B
};
BiadaptedMonge extract_biadapted_monge(const ProcessTree& A, const ProcessTree& B,
                                       const Aw2Result& result);

// Image of a tree under the recursive embedding into nested measures over
// flattened path space: a stage-t node becomes its value prefixed onto every
// ground atom of its children's image, so depth drops by one per stage and
// ground atoms live in R^{stages*dim}.
NestedMeasure encode_adapted(const ProcessTree& tree);

// Cross-check of the two independent pipelines: the process-space recursion
// against the nested recursion applied to encoded canonical laws.
struct IsometryReport {
  double aw2_value = 0.0;
  double nested_value = 0.0;
  double residual = 0.0;
};
IsometryReport verify_isometry(const ProcessTree& A, const ProcessTree& B, int threads = 1);

// Scenario law as a flat measure on R^{stages*dim}.
DiscreteMeasure path_law(const ProcessTree& tree);

// Node index sequences matching enumerate_paths order.
std::vector<std::vector<int>> enumerate_node_paths(const ProcessTree& tree);

}  // namespace wotw
