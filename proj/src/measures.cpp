#include "wotw/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wotw {

namespace {

bool finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

Validation fail(const std::string& code, const std::string& detail) {
  Validation v;
  v.ok = false;
  v.message = code + ": " + detail;
  return v;
}

Validation check_weights(const std::vector<double>& w, double tol) {
  if (w.empty()) return fail("empty-support", "measure has no atoms");
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) return fail("bad-weight", "non-finite weight");
    if (x < 0.0) return fail("bad-weight", "negative weight " + std::to_string(x));
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol)
    return fail("weight-sum", "weights sum to " + std::to_string(sum));
  return {};
}

}  // namespace

double DiscreteMeasure::second_moment() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += weights[i] * sqnorm(points[i]);
  return s;
}

Vec DiscreteMeasure::mean() const {
  Vec m(dim(), 0.0);
  for (int i = 0; i < size(); ++i)
    for (int k = 0; k < dim(); ++k) m[k] += weights[i] * points[i][k];
  return m;
}

int NestedMeasure::dim() const {
  if (depth == 1) return points.empty() ? 0 : int(points[0].size());
  return children.empty() ? 0 : children[0].dim();
}

NestedMeasure NestedMeasure::discrete(std::vector<Vec> pts, std::vector<double> w) {
  NestedMeasure m;
  m.depth = 1;
  m.points = std::move(pts);
  m.weights = std::move(w);
  return m;
}

NestedMeasure NestedMeasure::dirac_tower(const Vec& x, int depth) {
  NestedMeasure m = discrete({x}, {1.0});
  for (int k = 1; k < depth; ++k) {
    NestedMeasure up;
    up.depth = k + 1;
    up.weights = {1.0};
    up.children.push_back(std::move(m));
    m = std::move(up);
  }
  return m;
}

DiscreteMeasure NestedMeasure::as_discrete() const {
  if (depth != 1) throw std::logic_error("as_discrete: depth != 1");
  return DiscreteMeasure{points, weights};
}

std::vector<int> ProcessTree::stage_nodes(int t) const {
  std::vector<int> out;
  for (int i = 0; i < int(nodes.size()); ++i)
    if (nodes[i].stage == t) out.push_back(i);
  return out;
}

std::vector<Path> enumerate_paths(const ProcessTree& tree) {
  std::vector<Path> out;
  // Depth-first from each root, accumulating probability and values.
  struct Frame {
    int node;
    double w;
    Vec prefix;
  };
  std::vector<Frame> stack;
  for (int r = int(tree.roots.size()) - 1; r >= 0; --r)
    stack.push_back({tree.roots[r], tree.root_weights[r], {}});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const ProcessNode& n = tree.nodes[f.node];
    Vec vals = concat(f.prefix, n.value);
    if (n.children.empty()) {
      out.push_back({f.w, std::move(vals)});
      continue;
    }
    for (int c = int(n.children.size()) - 1; c >= 0; --c)
      stack.push_back({n.children[c], f.w * n.weights[c], vals});
  }
  return out;
}

std::vector<double> Coupling::row_sums() const {
  std::vector<double> s(rows, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) s[i] += at(i, j);
  return s;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> s(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) s[j] += at(i, j);
  return s;
}

Validation validate(const DiscreteMeasure& mu) {
  Validation w = check_weights(mu.weights, kWeightTol);
  if (!w.ok) return w;
  if (mu.points.size() != mu.weights.size())
    return fail("shape", "points/weights size mismatch");
  const int d = mu.dim();
  if (d < 1) return fail("dimension", "atoms must live in R^d with d >= 1");
  for (const Vec& p : mu.points) {
    if (int(p.size()) != d) return fail("dimension", "atoms of mixed dimension");
    if (!finite(p)) return fail("bad-point", "non-finite coordinate");
  }
  return {};
}

Validation validate(const NestedMeasure& P) {
  if (P.depth < 1) return fail("depth", "depth must be >= 1");
  if (P.depth == 1) {
    if (!P.children.empty()) return fail("shape", "depth-1 node has children");
    return validate(P.as_discrete());
  }
  if (!P.points.empty()) return fail("shape", "inner node has points");
  Validation w = check_weights(P.weights, kWeightTol);
  if (!w.ok) return w;
  if (P.children.size() != P.weights.size())
    return fail("shape", "children/weights size mismatch");
  const int d = P.dim();
  for (const NestedMeasure& c : P.children) {
    if (c.depth != P.depth - 1) return fail("depth", "child depth mismatch");
    Validation v = validate(c);
    if (!v.ok) return v;
    if (c.dim() != d) return fail("dimension", "children of mixed dimension");
  }
  return {};
}

Validation validate(const ProcessTree& tree) {
  if (tree.stages < 1) return fail("stages", "stages must be >= 1");
  if (tree.dim < 1) return fail("dimension", "dim must be >= 1");
  if (tree.roots.size() != tree.root_weights.size())
    return fail("shape", "roots/root_weights size mismatch");
  Validation w = check_weights(tree.root_weights, kWeightTol);
  if (!w.ok) return w;
  for (int i = 0; i < int(tree.nodes.size()); ++i) {
    const ProcessNode& n = tree.nodes[i];
    if (int(n.value.size()) != tree.dim) return fail("dimension", "node value dimension");
    if (!finite(n.value)) return fail("bad-point", "non-finite node value");
    if (n.children.size() != n.weights.size())
      return fail("shape", "children/weights size mismatch at node " + std::to_string(i));
    if (n.stage < tree.stages) {
      if (n.children.empty())
        return fail("leaf-depth", "interior node " + std::to_string(i) + " has no children");
      Validation cw = check_weights(n.weights, kWeightTol);
      if (!cw.ok) return cw;
      for (int c : n.children) {
        if (c < 0 || c >= int(tree.nodes.size()))
          return fail("shape", "child index out of range");
        if (tree.nodes[c].stage != n.stage + 1)
          return fail("leaf-depth", "child stage is not parent stage + 1");
      }
    } else if (!n.children.empty()) {
      return fail("leaf-depth", "leaf at final stage has children");
    }
  }
  for (int r : tree.roots) {
    if (r < 0 || r >= int(tree.nodes.size())) return fail("shape", "root index out of range");
    if (tree.nodes[r].stage != 1) return fail("shape", "root not at stage 1");
  }
  return {};
}

Validation validate_coupling(const Coupling& c, const std::vector<double>& row_marginal,
                             const std::vector<double>& col_marginal, double tol) {
  if (c.rows != int(row_marginal.size()) || c.cols != int(col_marginal.size()))
    return fail("shape", "coupling shape does not match marginals");
  for (double x : c.pi) {
    if (!std::isfinite(x)) return fail("bad-weight", "non-finite coupling entry");
    if (x < -tol) return fail("bad-weight", "negative coupling entry");
  }
  const std::vector<double> rs = c.row_sums(), cs = c.col_sums();
  for (int i = 0; i < c.rows; ++i)
    if (std::abs(rs[i] - row_marginal[i]) > tol)
      return fail("marginal", "row " + std::to_string(i) + " off by " +
                                  std::to_string(rs[i] - row_marginal[i]));
  for (int j = 0; j < c.cols; ++j)
    if (std::abs(cs[j] - col_marginal[j]) > tol)
      return fail("marginal", "col " + std::to_string(j) + " off by " +
                                  std::to_string(cs[j] - col_marginal[j]));
  return {};
}

namespace {

bool same_nested(const NestedMeasure& a, const NestedMeasure& b) {
  if (a.depth != b.depth || a.weights != b.weights) return false;
  if (a.depth == 1) return a.points == b.points;
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_nested(a.children[i], b.children[i])) return false;
  return true;
}

}  // namespace

Validation validate_ncoupling(const NCoupling& plan, const NestedMeasure& P,
                              const NestedMeasure& Q, double tol) {
  if (plan.depth != P.depth || plan.depth != Q.depth)
    return fail("depth", "plan depth does not match measures");
  Validation top = validate_coupling(plan.top, P.weights, Q.weights, tol);
  if (!top.ok) return top;
  if (plan.depth == 1) {
    if (!plan.subplans.empty()) return fail("shape", "depth-1 plan has subplans");
    return {};
  }
  for (const auto& [a, b, sub] : plan.subplans) {
    if (a < 0 || a >= P.size() || b < 0 || b >= Q.size())
      return fail("shape", "subplan indices out of range");
    Validation v = validate_ncoupling(sub, P.children[a], Q.children[b], tol);
    if (!v.ok) return v;
  }
  // Every positive top entry needs a subplan; projections then recover the
  // child measures verbatim because the subplans couple them directly.
  for (int a = 0; a < plan.top.rows; ++a)
    for (int b = 0; b < plan.top.cols; ++b) {
      if (plan.top.at(a, b) <= tol) continue;
      const bool found = std::any_of(plan.subplans.begin(), plan.subplans.end(),
                                     [&](const auto& s) {
                                       return std::get<0>(s) == a && std::get<1>(s) == b;
                                     });
      if (!found)
        return fail("projection", "matched pair (" + std::to_string(a) + "," +
                                      std::to_string(b) + ") has no subplan");
    }
  return {};
}

NestedMeasure intensity(const NestedMeasure& P) {
  if (P.depth == 1) return P;
  NestedMeasure out;
  out.depth = P.depth - 1;
  if (P.depth == 2) {
    for (int i = 0; i < P.size(); ++i) {
      const NestedMeasure& c = P.children[i];
      for (int j = 0; j < c.size(); ++j) {
        out.points.push_back(c.points[j]);
        out.weights.push_back(P.weights[i] * c.weights[j]);
      }
    }
  } else {
    for (int i = 0; i < P.size(); ++i) {
      const NestedMeasure& c = P.children[i];
      for (int j = 0; j < c.size(); ++j) {
        out.children.push_back(c.children[j]);
        out.weights.push_back(P.weights[i] * c.weights[j]);
      }
    }
  }
  return out;
}

DiscreteMeasure iterated_intensity(const NestedMeasure& P) {
  NestedMeasure cur = P;
  while (cur.depth > 1) cur = intensity(cur);
  return cur.as_discrete();
}

namespace {

Vec apply_affine(const std::vector<double>& A, const Vec& b, const Vec& x, int out_dim) {
  Vec y(out_dim, 0.0);
  const int d = int(x.size());
  for (int r = 0; r < out_dim; ++r) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += A[std::size_t(r) * d + c] * x[c];
    y[r] = s + b[r];
  }
  return y;
}

}  // namespace

DiscreteMeasure pushforward_affine(const DiscreteMeasure& mu, const std::vector<double>& A,
                                   const Vec& b, int out_dim) {
  DiscreteMeasure out;
  out.weights = mu.weights;
  out.points.reserve(mu.points.size());
  for (const Vec& p : mu.points) out.points.push_back(apply_affine(A, b, p, out_dim));
  return out;
}

NestedMeasure pushforward_affine(const NestedMeasure& P, const std::vector<double>& A,
                                 const Vec& b, int out_dim) {
  NestedMeasure out;
  out.depth = P.depth;
  out.weights = P.weights;
  if (P.depth == 1) {
    out.points.reserve(P.points.size());
    for (const Vec& p : P.points) out.points.push_back(apply_affine(A, b, p, out_dim));
  } else {
    out.children.reserve(P.children.size());
    for (const NestedMeasure& c : P.children)
      out.children.push_back(pushforward_affine(c, A, b, out_dim));
  }
  return out;
}

NestedMeasure scale(const NestedMeasure& P, double s) {
  const int d = P.dim();
  std::vector<double> A(std::size_t(d) * d, 0.0);
  for (int k = 0; k < d; ++k) A[std::size_t(k) * d + k] = s;
  return pushforward_affine(P, A, Vec(d, 0.0), d);
}

ProcessTree tree_from_paths(const std::vector<Path>& paths, int stages, int dim,
                            double merge_tol) {
  if (paths.empty()) throw std::invalid_argument("tree_from_paths: no paths");
  for (const Path& p : paths)
    if (int(p.values.size()) != stages * dim)
      throw std::invalid_argument("tree_from_paths: path length != stages*dim");
  ProcessTree tree;
  tree.stages = stages;
  tree.dim = dim;

  // Recursive grouping: a group of paths sharing a history becomes one node.
  // Greedy first-fit against group representatives; with merge_tol 0 this is
  // exact grouping and the order of paths does not matter.
  struct Group {
    std::vector<int> members;
  };
  auto stage_value = [&](int path, int t) {
    Vec v(paths[path].values.begin() + std::size_t(t - 1) * dim,
          paths[path].values.begin() + std::size_t(t) * dim);
    return v;
  };
  auto history = [&](int path, int t) {
    return Vec(paths[path].values.begin(), paths[path].values.begin() + std::size_t(t) * dim);
  };

  // Builds the node for `members` at stage t and returns its index.
  auto build = [&](auto&& self, const std::vector<int>& members, int t) -> int {
    double total = 0.0;
    Vec value(dim, 0.0);
    for (int m : members) {
      total += paths[m].weight;
      for (int k = 0; k < dim; ++k) value[k] += paths[m].weight * stage_value(m, t)[k];
    }
    for (int k = 0; k < dim; ++k) value[k] /= total;
    ProcessNode node;
    node.stage = t;
    node.value = value;
    const int idx = int(tree.nodes.size());
    tree.nodes.push_back(node);
    if (t < stages) {
      std::vector<Group> groups;
      for (int m : members) {
        const Vec h = history(m, t + 1);
        bool placed = false;
        for (Group& g : groups) {
          if (supdist(history(g.members[0], t + 1), h) <= merge_tol) {
            g.members.push_back(m);
            placed = true;
            break;
          }
        }
        if (!placed) groups.push_back({{m}});
      }
      for (const Group& g : groups) {
        double gw = 0.0;
        for (int m : g.members) gw += paths[m].weight;
        const int child = self(self, g.members, t + 1);
        tree.nodes[idx].children.push_back(child);
        tree.nodes[idx].weights.push_back(gw / total);
      }
    }
    return idx;
  };

  std::vector<Group> top;
  for (int m = 0; m < int(paths.size()); ++m) {
    const Vec h = history(m, 1);
    bool placed = false;
    for (Group& g : top) {
      if (supdist(history(g.members[0], 1), h) <= merge_tol) {
        g.members.push_back(m);
        placed = true;
        break;
      }
    }
    if (!placed) top.push_back({{m}});
  }
  double total = 0.0;
  for (const Path& p : paths) total += p.weight;
  for (const Group& g : top) {
    double gw = 0.0;
    for (int m : g.members) gw += paths[m].weight;
    tree.roots.push_back(build(build, g.members, 1));
    tree.root_weights.push_back(gw / total);
  }
  return tree;
}

bool same_discrete(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  // Compare as sorted atom lists so support enumeration order is irrelevant.
  auto key = [](const DiscreteMeasure& m) {
    std::vector<std::pair<Vec, double>> k;
    for (int i = 0; i < m.size(); ++i) k.emplace_back(m.points[i], m.weights[i]);
    std::sort(k.begin(), k.end());
    return k;
  };
  const auto ka = key(a), kb = key(b);
  for (std::size_t i = 0; i < ka.size(); ++i) {
    if (supdist(ka[i].first, kb[i].first) > tol) return false;
    if (std::abs(ka[i].second - kb[i].second) > tol) return false;
  }
  return true;
}

}  // namespace wotw
