#pragma once

#include <utility>
#include <vector>

#include "wotw/measures.hpp"

namespace wotw {

// Two-stage pair whose optimal adapted transport pushes each target point back
// onto two far-apart sources.  The forward stage-1 map is exactly two-to-one,
// so the reversed problem has no map solution even though the forward one does.
//
// Stage 1 of both processes is the uniform midpoint n-grid on
// [-1/sqrt2, 1/sqrt2].  Stage 2 is the uniform midpoint m-grid on a unit
// interval whose left end depends on the stage-1 value: shift_a for the first
// process, shift_b for the second.
double two_to_one_shift_a(double x);
double two_to_one_shift_b(double y);
double two_to_one_t1(double x);   // optimal stage-1 map, two-to-one
double two_to_one_phi(double x);  // dual potential pair certifying optimality
double two_to_one_psi(double y);

struct TwoToOneInstance {
  ProcessTree a, b;
  std::vector<double> stage1;  // shared stage-1 grid
  double spacing = 0.0;
};
TwoToOneInstance make_two_to_one_instance(int n, int m);

struct TwoToOneReport {
  int n = 0, m = 0;
  double spacing = 0.0;
  double aw2_value = 0.0;
  double aw2_sq = 0.0;
  double analytic_sq = 0.0;       // closed-form limit 5/12
  double t1_max_error = 0.0;      // assigned image vs t1 over stage-1 atoms
  double dual_residual = 0.0;     // |phi(x)+psi(t1 x) - cost(x, t1 x)| max
  bool map_extracted = false;     // stage-1 plan was a permutation
  bool forward_two_to_one = false;
  bool reverse_monge_witness = false;  // far sources sent to nearly equal targets
  std::vector<double> map_x, map_y;    // extracted stage-1 assignment
};
TwoToOneReport two_to_one_report(int n, int m, int threads = 1);

// Minimal pair separating adapted from plain transport: one process reveals
// its final sign at stage 1 in a +-eps whisper, the other not at all.
// Bicausality forbids using the whisper, so the adapted cost keeps the full
// jump (value^2 = eps^2 + 2) while the plain cost is only eps^2.
std::pair<ProcessTree, ProcessTree> epsilon_split_pair(double eps);

}  // namespace wotw
