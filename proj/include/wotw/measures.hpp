#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wotw/vec.hpp"

namespace wotw {

// Construction-time weight tolerance vs. the looser one applied to solver
// output.  Inputs are expected to be clean; couplings coming out of the
// simplex accumulate roundoff.
inline constexpr double kWeightTol = 1e-12;
inline constexpr double kMarginalTol = 1e-9;

struct Validation {
  bool ok = true;
  std::string message;  // first failed check, machine-readable "code: detail"
};

// Finitely supported probability measure on R^d.
struct DiscreteMeasure {
  std::vector<Vec> points;
  std::vector<double> weights;

  int size() const { return int(points.size()); }
  int dim() const { return points.empty() ? 0 : int(points[0].size()); }
  double second_moment() const;
  Vec mean() const;
};

// Measure over measures over ... over R^d.  depth 1 is a plain discrete
// measure; at depth k > 1 the atoms are the children, each of depth k-1.
// Instances are treated as immutable once built, so node addresses are
// stable and usable as cache keys.
struct NestedMeasure {
  int depth = 1;
  std::vector<double> weights;
  std::vector<NestedMeasure> children;  // depth > 1
  std::vector<Vec> points;              // depth == 1

  int size() const { return depth == 1 ? int(points.size()) : int(children.size()); }
  int dim() const;
  static NestedMeasure discrete(std::vector<Vec> pts, std::vector<double> w);
  static NestedMeasure dirac_tower(const Vec& x, int depth);
  DiscreteMeasure as_discrete() const;  // depth 1 only
};

// Finite-horizon scenario tree of an R^d-valued process.  Stage-t nodes hold
// the value X_t; child weights are one-step transition probabilities and the
// root layer carries the stage-1 law.  Stored as a flat arena so handles in
// the C API and pair tables in the dynamic programs can index nodes directly.
struct ProcessNode {
  Vec value;
  int stage = 1;
  std::vector<int> children;
  std::vector<double> weights;
};

struct ProcessTree {
  int stages = 1;
  int dim = 0;
  std::vector<ProcessNode> nodes;
  std::vector<int> roots;
  std::vector<double> root_weights;

  std::vector<int> stage_nodes(int t) const;
};

// One scenario of a tree: probability and stage values flattened to R^{N*d}.
struct Path {
  double weight = 0.0;
  Vec values;
};

std::vector<Path> enumerate_paths(const ProcessTree& tree);

// Transport plan between two finitely supported measures, row-major.
struct Coupling {
  int rows = 0, cols = 0;
  std::vector<double> pi;

  double& at(int i, int j) { return pi[std::size_t(i) * cols + j]; }
  double at(int i, int j) const { return pi[std::size_t(i) * cols + j]; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

// Tree-structured plan between two nested measures: coupling of the child
// indices on top, and for every matched pair a plan one level down.
struct NCoupling {
  int depth = 1;
  Coupling top;
  // (row child, col child, plan) for every top entry with positive mass.
  std::vector<std::tuple<int, int, NCoupling>> subplans;
};

Validation validate(const DiscreteMeasure& mu);
Validation validate(const NestedMeasure& P);
Validation validate(const ProcessTree& tree);
Validation validate_coupling(const Coupling& c, const std::vector<double>& row_marginal,
                             const std::vector<double>& col_marginal,
                             double tol = kMarginalTol);
// Checks the projection identity: pushing the plan to either side reproduces
// the corresponding input tree node-for-node.
Validation validate_ncoupling(const NCoupling& plan, const NestedMeasure& P,
                              const NestedMeasure& Q, double tol = kMarginalTol);

// Averages the child measures: the depth drops by one and grandchildren
// become children with product weights.  depth 1 is returned unchanged.
NestedMeasure intensity(const NestedMeasure& P);
// Applies intensity until only a discrete measure is left.
DiscreteMeasure iterated_intensity(const NestedMeasure& P);

// Applies x -> A x + b to every ground atom (A row-major, shape out_dim x dim).
NestedMeasure pushforward_affine(const NestedMeasure& P, const std::vector<double>& A,
                                 const Vec& b, int out_dim);
DiscreteMeasure pushforward_affine(const DiscreteMeasure& mu, const std::vector<double>& A,
                                   const Vec& b, int out_dim);
NestedMeasure scale(const NestedMeasure& P, double s);

// Builds a scenario tree from weighted paths.  Paths whose stage-t value
// histories agree within merge_tol in sup norm share the stage-t node; the
// first path of a group is its representative and node values are the
// weight-averaged values of the group.  merge_tol 0 requires exact equality.
ProcessTree tree_from_paths(const std::vector<Path>& paths, int stages, int dim,
                            double merge_tol = 0.0);

bool same_discrete(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = 0.0);

}  // namespace wotw
