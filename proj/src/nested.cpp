#include "wotw/nested.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace wotw {

namespace {

using PairKey = std::pair<const NestedMeasure*, const NestedMeasure*>;

struct McContext {
  std::map<PairKey, double> cache;
  bool use_cache = true;
};

double mc_rec(const NestedMeasure& P, const NestedMeasure& Q, McContext& ctx) {
  if (ctx.use_cache) {
    auto it = ctx.cache.find({&P, &Q});
    if (it != ctx.cache.end()) return it->second;
  }
  double value;
  if (P.depth == 1) {
    value = solve_exact_ot(P.weights, Q.weights,
                           inner_product_cost_matrix(P.as_discrete(), Q.as_discrete()),
                           P.size(), Q.size(), Sense::Max)
                .value;
  } else {
    std::vector<double> payoff(std::size_t(P.size()) * Q.size());
    for (int a = 0; a < P.size(); ++a)
      for (int b = 0; b < Q.size(); ++b)
        payoff[std::size_t(a) * Q.size() + b] = mc_rec(P.children[a], Q.children[b], ctx);
    value = solve_exact_ot(P.weights, Q.weights, payoff, P.size(), Q.size(), Sense::Max).value;
  }
  if (ctx.use_cache) ctx.cache[{&P, &Q}] = value;
  return value;
}

void check_pair(const NestedMeasure& P, const NestedMeasure& Q) {
  if (P.depth != Q.depth) throw std::invalid_argument("nested: depth mismatch");
  if (P.dim() != Q.dim()) throw std::invalid_argument("nested: dimension mismatch");
}

double w2_sq_rec(const NestedMeasure& P, const NestedMeasure& Q,
                 std::map<PairKey, double>& cache) {
  auto it = cache.find({&P, &Q});
  if (it != cache.end()) return it->second;
  double value;
  if (P.depth == 1) {
    value = solve_exact_ot(P.weights, Q.weights,
                           squared_cost_matrix(P.as_discrete(), Q.as_discrete()), P.size(),
                           Q.size(), Sense::Min)
                .value;
  } else {
    std::vector<double> cost(std::size_t(P.size()) * Q.size());
    for (int a = 0; a < P.size(); ++a)
      for (int b = 0; b < Q.size(); ++b)
        cost[std::size_t(a) * Q.size() + b] = w2_sq_rec(P.children[a], Q.children[b], cache);
    value = solve_exact_ot(P.weights, Q.weights, cost, P.size(), Q.size(), Sense::Min).value;
  }
  cache[{&P, &Q}] = value;
  return value;
}

NCoupling assemble_rec(const NestedMeasure& P, const NestedMeasure& Q, McContext& ctx) {
  NCoupling plan;
  plan.depth = P.depth;
  if (P.depth == 1) {
    plan.top = solve_exact_ot(P.weights, Q.weights,
                              inner_product_cost_matrix(P.as_discrete(), Q.as_discrete()),
                              P.size(), Q.size(), Sense::Max)
                   .coupling;
    return plan;
  }
  std::vector<double> payoff(std::size_t(P.size()) * Q.size());
  for (int a = 0; a < P.size(); ++a)
    for (int b = 0; b < Q.size(); ++b)
      payoff[std::size_t(a) * Q.size() + b] = mc_rec(P.children[a], Q.children[b], ctx);
  plan.top =
      solve_exact_ot(P.weights, Q.weights, payoff, P.size(), Q.size(), Sense::Max).coupling;
  for (int a = 0; a < P.size(); ++a)
    for (int b = 0; b < Q.size(); ++b)
      if (plan.top.at(a, b) > 0.0)
        plan.subplans.emplace_back(a, b, assemble_rec(P.children[a], Q.children[b], ctx));
  return plan;
}

}  // namespace

double nested_mc(const NestedMeasure& P, const NestedMeasure& Q, bool use_cache) {
  check_pair(P, Q);
  McContext ctx;
  ctx.use_cache = use_cache;
  return mc_rec(P, Q, ctx);
}

NestedW2Result nested_w2(const NestedMeasure& P, const NestedMeasure& Q) {
  check_pair(P, Q);
  NestedW2Result r;
  std::map<PairKey, double> cache;
  r.value_sq = w2_sq_rec(P, Q, cache);
  r.value = std::sqrt(std::max(0.0, r.value_sq));
  const double via_mc = nested_mc(P, P) + nested_mc(Q, Q) - 2.0 * nested_mc(P, Q);
  r.identity_residual = std::abs(r.value_sq - via_mc);
  return r;
}

NCoupling assemble_ncoupling(const NestedMeasure& P, const NestedMeasure& Q) {
  check_pair(P, Q);
  McContext ctx;
  return assemble_rec(P, Q, ctx);
}

double flattened_score(const NCoupling& plan, const NestedMeasure& P, const NestedMeasure& Q) {
  if (plan.depth == 1) {
    double s = 0.0;
    for (int i = 0; i < plan.top.rows; ++i)
      for (int j = 0; j < plan.top.cols; ++j)
        if (plan.top.at(i, j) > 0.0) s += plan.top.at(i, j) * dot(P.points[i], Q.points[j]);
    return s;
  }
  double s = 0.0;
  for (const auto& [a, b, sub] : plan.subplans)
    s += plan.top.at(a, b) * flattened_score(sub, P.children[a], Q.children[b]);
  return s;
}

namespace {

bool is_uniform(const NestedMeasure& P) {
  const double w = 1.0 / P.size();
  for (double x : P.weights)
    if (std::abs(x - w) > 1e-12) return false;
  if (P.depth == 1) return true;
  return std::all_of(P.children.begin(), P.children.end(),
                     [](const NestedMeasure& c) { return is_uniform(c); });
}

double brute_rec(const NestedMeasure& P, const NestedMeasure& Q) {
  if (P.size() != Q.size())
    throw std::invalid_argument("brute_force_nested_mc: unequal support sizes");
  const int k = P.size();
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int a = 0; a < k; ++a) {
      if (P.depth == 1)
        s += dot(P.points[a], Q.points[perm[a]]);
      else
        s += brute_rec(P.children[a], Q.children[perm[a]]);
    }
    best = std::max(best, s / k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

double brute_force_nested_mc(const NestedMeasure& P, const NestedMeasure& Q) {
  check_pair(P, Q);
  if (!is_uniform(P) || !is_uniform(Q))
    throw std::invalid_argument("brute_force_nested_mc: weights must be uniform");
  return brute_rec(P, Q);
}

}  // namespace wotw
