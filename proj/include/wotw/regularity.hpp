#pragma once

#include <cstdint>
#include <vector>

#include "wotw/measures.hpp"
#include "wotw/ot.hpp"

namespace wotw {

// Bounded point-separating test family behind the spread functional:
// coordinate n is squashed through tanh and weighted 2^-n.  max_terms
// truncates the series; 0 means one term per coordinate.
struct VarHatConfig {
  int max_terms = 0;
};

// Weighted pair spread  sum_n 2^-n E|f_n(X) - f_n(X')|^2  with X, X' i.i.d.
// from rho.  Zero exactly on point masses.
double var_hat(const DiscreteMeasure& rho, const VarHatConfig& cfg = {});

struct TauOptions {
  double face_tol = 1e-8;    // dual slack threshold defining the optimal face
  double gap_tol = 1e-7;     // conditional-gradient stopping gap
  double zero_tol = 1e-6;    // below this the instance counts as deterministic
  int max_iterations = 5000;
  VarHatConfig var_hat;
};

// Largest average conditional spread over optimal couplings: maximizes the
// concave row-spread objective over the optimal face of the transport
// polytope (arcs with tight duals) by conditional gradient with exact line
// search.  Zero means every optimal plan is a map from the source side.
struct TauResult {
  double value = 0.0;      // raw value clamped to 0 below zero_tol
  double raw_value = 0.0;  // objective at the last iterate
  double gap = 0.0;        // final conditional-gradient gap
  int iterations = 0;
  bool monge = false;      // raw_value < zero_tol
  double transport_value = 0.0;
  Coupling argmax;
};
TauResult tau(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
              const std::vector<double>& cost, Sense sense = Sense::Min,
              const TauOptions& opt = {});
TauResult tau_squared_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const TauOptions& opt = {});

// Monte-Carlo lower estimate of the worst conditional spread against targets
// in a transport ball: candidate targets come from per-index streams with
// R-independent shapes and radii, and only those with radius <= R enter the
// maximum.  Larger R therefore maximizes over a superset.  Planted targets
// join the pool under the same radius rule.
struct TauRResult {
  double value = 0.0;
  int candidates = 0;
  int admitted = 0;
};
TauRResult tau_r(const DiscreteMeasure& mu, double radius, int targets, std::uint64_t seed,
                 const std::vector<DiscreteMeasure>& planted = {}, const TauOptions& opt = {});

// End-to-end deterministic sweep: draws occupation measures of sampled paths
// (or uses planted sources), pairs each with random atomic targets (or
// Diracs, or planted measures), runs tau on every pair and reports the
// fraction that came out deterministic.
struct ExperimentConfig {
  int n_samples = 50;
  int targets = 5;
  int grid = 64;          // sampler lattice per axis
  int sheet_params = 1;   // 1 = scalar path occupation
  int dim = 1;
  int target_atoms = 5;
  std::uint64_t seed = 12345;
  enum class TargetKind { Random, Dirac, Planted } target_kind = TargetKind::Random;
  std::vector<DiscreteMeasure> planted_targets;
  std::vector<DiscreteMeasure> planted_sources;  // non-empty replaces the sampler
  TauOptions tau;
};

struct ExperimentRecord {
  int sample = 0;
  int target = 0;
  double tau = 0.0;
  bool monge = false;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  double monge_rate = 0.0;
};

ExperimentResult monge_rate_experiment(const ExperimentConfig& cfg);

}  // namespace wotw
