#pragma once

#include <cstdint>
#include <vector>

#include "wotw/measures.hpp"

namespace wotw {

// Diagonal covariance spectrum for the coordinate-wise scaled path sampler.
// Defaults to lambda_k = k^-2 over `modes` coordinates.
struct QSpec {
  int modes = 16;
  std::vector<double> lambda;  // empty = k^-2 defaults

  std::vector<double> spectrum() const;
  double trace() const;
};

// One draw of the multiparameter field on the dyadic-style lattice: box
// increments are i.i.d. centered Gaussians of variance grid^-params, summed
// cumulatively along every axis, which reproduces the product-of-minima
// covariance exactly at lattice corners.  Values at any index with a zero
// component are identically zero and not stored.
struct SheetSample {
  int params = 1;  // number of time axes
  int dim = 1;     // value dimension
  int grid = 1;    // cells per axis
  std::vector<Vec> values;  // lattice {1..grid}^params, row-major, axis 1 slowest

  // idx has `params` entries in 0..grid; any zero component gives the zero vector.
  Vec value_at(const std::vector<int>& idx) const;
};

SheetSample sample_sheet(int params, int dim, int grid, std::uint64_t seed,
                         std::uint64_t stream = 0);

// Uniform weight on every lattice value of the sample.
DiscreteMeasure occupation_measure(const SheetSample& s);

// Block-partitioned view of the same sample: axis t < params is split into
// blocks[t-1] equal runs forming the level-t children, and each leaf is the
// occupation measure of its box with the last axis left whole.  Averaging
// the levels back out recovers occupation_measure(s) exactly.
NestedMeasure nested_occupation(const SheetSample& s, const std::vector<int>& blocks);

// Scaled coordinate-wise random walk bridge to continuous time: coordinate k
// is an independent Brownian path with variance lambda_k * t, sampled on
// {0, 1/grid, ..., 1}.
struct QWienerPath {
  int grid = 1;
  std::vector<double> lambda;
  std::vector<Vec> values;  // grid+1 entries, values[0] = 0
};

QWienerPath sample_q_wiener(const QSpec& spec, int grid, std::uint64_t seed,
                            std::uint64_t stream = 0);

}  // namespace wotw
