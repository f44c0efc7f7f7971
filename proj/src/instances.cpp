#include "wotw/instances.hpp"

#include <cmath>
#include <stdexcept>

#include "wotw/adapted.hpp"
#include "wotw/ot.hpp"

namespace wotw {

namespace {
const double kHalfWidth = 1.0 / std::sqrt(2.0);
}

double two_to_one_shift_a(double x) {
  return x >= 0.0 ? std::sqrt(2.0) * x - 1.0 : std::sqrt(2.0) * x + 1.0;
}

double two_to_one_shift_b(double y) { return y / std::sqrt(2.0); }

double two_to_one_t1(double x) {
  return x >= 0.0 ? 2.0 * x - kHalfWidth : 2.0 * x + kHalfWidth;
}

double two_to_one_phi(double x) { return 0.5 - x * x; }

double two_to_one_psi(double y) { return 0.5 * y * y; }

TwoToOneInstance make_two_to_one_instance(int n, int m) {
  if (n < 10 || n % 2 != 0)
    throw std::invalid_argument("two_to_one: n must be even and at least 10");
  if (m < 1) throw std::invalid_argument("two_to_one: m must be positive");

  TwoToOneInstance inst;
  inst.spacing = 2.0 * kHalfWidth / n;
  inst.stage1.resize(n);
  for (int i = 0; i < n; ++i) inst.stage1[i] = -kHalfWidth + (i + 0.5) * inst.spacing;

  auto build = [&](bool first) {
    ProcessTree t;
    t.stages = 2;
    t.dim = 1;
    for (int i = 0; i < n; ++i) {
      const double x = inst.stage1[i];
      ProcessNode root;
      root.value = {x};
      root.stage = 1;
      const double lo = first ? two_to_one_shift_a(x) : two_to_one_shift_b(x);
      for (int k = 0; k < m; ++k) {
        ProcessNode leaf;
        leaf.value = {lo + (k + 0.5) / m};
        leaf.stage = 2;
        root.children.push_back(int(t.nodes.size()));
        root.weights.push_back(1.0 / m);
        t.nodes.push_back(leaf);
      }
      t.roots.push_back(int(t.nodes.size()));
      t.root_weights.push_back(1.0 / n);
      t.nodes.push_back(root);
    }
    return t;
  };
  inst.a = build(true);
  inst.b = build(false);
  return inst;
}

TwoToOneReport two_to_one_report(int n, int m, int threads) {
  const TwoToOneInstance inst = make_two_to_one_instance(n, m);
  const Aw2Result r = aw2(inst.a, inst.b, threads);

  TwoToOneReport rep;
  rep.n = n;
  rep.m = m;
  rep.spacing = inst.spacing;
  rep.aw2_value = r.value;
  rep.aw2_sq = r.value_sq;
  rep.analytic_sq = 5.0 / 12.0;

  const MongeMap mm = extract_monge(r.top.coupling);
  rep.map_extracted = mm.is_monge;
  if (mm.is_monge) {
    rep.map_x = inst.stage1;
    rep.map_y.resize(n);
    for (int i = 0; i < n; ++i) rep.map_y[i] = inst.stage1[mm.map[i]];
    for (int i = 0; i < n; ++i)
      rep.t1_max_error =
          std::max(rep.t1_max_error, std::abs(rep.map_y[i] - two_to_one_t1(rep.map_x[i])));
    // Far-apart sources landing on essentially the same target: running the
    // same transport backwards would have to split that target's mass.
    for (int i = 0; i < n && !rep.reverse_monge_witness; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(rep.map_x[i] - rep.map_x[j]) >= 0.5 &&
            std::abs(rep.map_y[i] - rep.map_y[j]) <= 2.0 * inst.spacing) {
          rep.reverse_monge_witness = true;
          break;
        }
  }

  for (int i = 0; i < n && !rep.forward_two_to_one; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(two_to_one_t1(inst.stage1[i]) - two_to_one_t1(inst.stage1[j])) <= 1e-12) {
        rep.forward_two_to_one = true;
        break;
      }

  for (double x : inst.stage1) {
    const double y = two_to_one_t1(x);
    const double da = two_to_one_shift_a(x) - two_to_one_shift_b(y);
    const double cost = (x - y) * (x - y) + da * da;
    const double duals = two_to_one_phi(x) + two_to_one_psi(y);
    rep.dual_residual = std::max(rep.dual_residual, std::abs(duals - cost));
  }
  return rep;
}

std::pair<ProcessTree, ProcessTree> epsilon_split_pair(double eps) {
  ProcessTree a;
  a.stages = 2;
  a.dim = 1;
  a.nodes.push_back({{-1.0}, 2, {}, {}});
  a.nodes.push_back({{1.0}, 2, {}, {}});
  a.nodes.push_back({{0.0}, 1, {0, 1}, {0.5, 0.5}});
  a.roots = {2};
  a.root_weights = {1.0};

  ProcessTree b;
  b.stages = 2;
  b.dim = 1;
  b.nodes.push_back({{-1.0}, 2, {}, {}});
  b.nodes.push_back({{-eps}, 1, {0}, {1.0}});
  b.nodes.push_back({{1.0}, 2, {}, {}});
  b.nodes.push_back({{eps}, 1, {2}, {1.0}});
  b.roots = {1, 3};
  b.root_weights = {0.5, 0.5};
  return {a, b};
}

}  // namespace wotw
