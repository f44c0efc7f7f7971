#include "wotw/samplers.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "wotw/rng.hpp"

namespace wotw {

std::vector<double> QSpec::spectrum() const {
  if (!lambda.empty()) {
    if (int(lambda.size()) != modes)
      throw std::invalid_argument("QSpec: lambda size != modes");
    return lambda;
  }
  std::vector<double> l(modes);
  for (int k = 0; k < modes; ++k) l[k] = 1.0 / double((k + 1) * (k + 1));
  return l;
}

double QSpec::trace() const {
  double s = 0.0;
  for (double x : spectrum()) s += x;
  return s;
}

Vec SheetSample::value_at(const std::vector<int>& idx) const {
  if (int(idx.size()) != params) throw std::invalid_argument("value_at: index arity");
  std::size_t flat = 0;
  for (int t = 0; t < params; ++t) {
    if (idx[t] < 0 || idx[t] > grid) throw std::invalid_argument("value_at: index range");
    if (idx[t] == 0) return Vec(dim, 0.0);
    flat = flat * grid + std::size_t(idx[t] - 1);
  }
  return values[flat];
}

SheetSample sample_sheet(int params, int dim, int grid, std::uint64_t seed,
                         std::uint64_t stream) {
  if (params < 1 || dim < 1 || grid < 1)
    throw std::invalid_argument("sample_sheet: params, dim, grid must be positive");
  SheetSample s;
  s.params = params;
  s.dim = dim;
  s.grid = grid;
  std::size_t cells = 1;
  for (int t = 0; t < params; ++t) cells *= std::size_t(grid);
  const double sd = std::pow(double(grid), -0.5 * params);
  Rng rng(seed, stream);
  s.values.assign(cells, Vec(dim, 0.0));
  for (std::size_t c = 0; c < cells; ++c)
    for (int k = 0; k < dim; ++k) s.values[c][k] = sd * rng.next_gaussian();
  // Cumulative sums along each axis turn box increments into corner values.
  std::size_t inner = 1;  // stride of the current axis (last axis fastest)
  for (int t = params - 1; t >= 0; --t) {
    const std::size_t run = inner * std::size_t(grid);
    for (std::size_t base = 0; base < cells; base += run)
      for (std::size_t off = 0; off < inner; ++off)
        for (int i = 1; i < grid; ++i) {
          Vec& cur = s.values[base + off + std::size_t(i) * inner];
          const Vec& prev = s.values[base + off + std::size_t(i - 1) * inner];
          for (int k = 0; k < dim; ++k) cur[k] += prev[k];
        }
    inner = run;
  }
  return s;
}

DiscreteMeasure occupation_measure(const SheetSample& s) {
  DiscreteMeasure mu;
  const double w = 1.0 / double(s.values.size());
  mu.points = s.values;
  mu.weights.assign(s.values.size(), w);
  return mu;
}

NestedMeasure nested_occupation(const SheetSample& s, const std::vector<int>& blocks) {
  if (int(blocks.size()) != s.params - 1)
    throw std::invalid_argument("nested_occupation: need one block count per axis but the last");
  for (int t = 0; t < s.params - 1; ++t)
    if (blocks[t] < 1 || s.grid % blocks[t] != 0)
      throw std::invalid_argument("nested_occupation: block counts must divide the grid");

  // Strides of the flattened lattice, axis 1 slowest.
  std::vector<std::size_t> stride(s.params, 1);
  for (int t = s.params - 2; t >= 0; --t) stride[t] = stride[t + 1] * std::size_t(s.grid);

  // lo[t] = first lattice index of the current box on axis t.
  std::vector<int> lo(s.params, 0);
  const std::function<NestedMeasure(int)> build = [&](int level) -> NestedMeasure {
    NestedMeasure m;
    if (level == s.params) {
      // Leaf: the box with the final axis whole.
      std::vector<int> len(s.params);
      std::size_t count = 1;
      for (int t = 0; t < s.params - 1; ++t) {
        len[t] = s.grid / blocks[t];
        count *= std::size_t(len[t]);
      }
      len[s.params - 1] = s.grid;
      count *= std::size_t(s.grid);
      m.depth = 1;
      m.weights.assign(count, 1.0 / double(count));
      std::vector<int> idx(s.params, 0);
      for (;;) {
        std::size_t flat = 0;
        for (int t = 0; t < s.params; ++t) flat += std::size_t(lo[t] + idx[t]) * stride[t];
        m.points.push_back(s.values[flat]);
        int t = s.params - 1;
        while (t >= 0 && ++idx[t] == len[t]) idx[t--] = 0;
        if (t < 0) break;
      }
      return m;
    }
    m.depth = s.params - level + 1;
    const int b = blocks[level - 1];
    const int len = s.grid / b;
    for (int block = 0; block < b; ++block) {
      lo[level - 1] = block * len;
      m.children.push_back(build(level + 1));
      m.weights.push_back(1.0 / double(b));
    }
    lo[level - 1] = 0;
    return m;
  };
  return build(1);
}

QWienerPath sample_q_wiener(const QSpec& spec, int grid, std::uint64_t seed,
                            std::uint64_t stream) {
  if (grid < 1) throw std::invalid_argument("sample_q_wiener: grid must be positive");
  QWienerPath path;
  path.grid = grid;
  path.lambda = spec.spectrum();
  const int K = int(path.lambda.size());
  path.values.assign(std::size_t(grid) + 1, Vec(K, 0.0));
  std::vector<double> sd(K);
  for (int k = 0; k < K; ++k) sd[k] = std::sqrt(path.lambda[k] / double(grid));
  Rng rng(seed, stream);
  for (int i = 1; i <= grid; ++i)
    for (int k = 0; k < K; ++k)
      path.values[i][k] = path.values[i - 1][k] + sd[k] * rng.next_gaussian();
  return path;
}

}  // namespace wotw
