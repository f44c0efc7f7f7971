#include "wotw/adapted.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <thread>

#include "wotw/nested.hpp"

namespace wotw {

namespace {

void check_compatible(const ProcessTree& A, const ProcessTree& B) {
  if (A.stages != B.stages) throw std::invalid_argument("adapted: stage count mismatch");
  if (A.dim != B.dim) throw std::invalid_argument("adapted: dimension mismatch");
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count < 2) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  for (std::thread& t : pool) t.join();
}

// Children transport cost between two matched stage-t nodes, given the
// cost-to-go table of stage t+1.  An empty table means the horizon, where the
// continuation vanishes; keeping it empty avoids a leafcount-squared zero
// matrix that no one would ever read a nonzero from.
std::vector<double> child_cost_matrix(const ProcessTree& A, const ProcessTree& B, int ua,
                                      int ub, const std::vector<double>& v_next,
                                      const std::vector<int>& pos_a,
                                      const std::vector<int>& pos_b, int nb_next) {
  const ProcessNode& na = A.nodes[ua];
  const ProcessNode& nb = B.nodes[ub];
  std::vector<double> c(na.children.size() * nb.children.size());
  for (std::size_t i = 0; i < na.children.size(); ++i) {
    const int ca = na.children[i];
    for (std::size_t j = 0; j < nb.children.size(); ++j) {
      const int cb = nb.children[j];
      const double cont =
          v_next.empty() ? 0.0 : v_next[std::size_t(pos_a[ca]) * nb_next + pos_b[cb]];
      c[i * nb.children.size() + j] =
          sqdist(A.nodes[ca].value, B.nodes[cb].value) + cont;
    }
  }
  return c;
}

bool leaf_stage_1d(const ProcessTree& A, int stage_below) {
  return A.dim == 1 && stage_below == A.stages;
}

}  // namespace

Aw2Result aw2(const ProcessTree& A, const ProcessTree& B, int threads) {
  check_compatible(A, B);
  const int N = A.stages;
  Aw2Result res;
  res.stage_a.resize(N);
  res.stage_b.resize(N);
  for (int t = 1; t <= N; ++t) {
    res.stage_a[t - 1] = A.stage_nodes(t);
    res.stage_b[t - 1] = B.stage_nodes(t);
  }
  std::vector<int> pos_a(A.nodes.size(), -1), pos_b(B.nodes.size(), -1);
  for (int t = 0; t < N; ++t) {
    for (int k = 0; k < int(res.stage_a[t].size()); ++k) pos_a[res.stage_a[t][k]] = k;
    for (int k = 0; k < int(res.stage_b[t].size()); ++k) pos_b[res.stage_b[t][k]] = k;
  }
  res.v.assign(N, {});

  for (int t = N - 1; t >= 1; --t) {
    const std::vector<int>& ua = res.stage_a[t - 1];
    const std::vector<int>& ub = res.stage_b[t - 1];
    const int nb_next = int(res.stage_b[t].size());
    std::vector<double>& table = res.v[t - 1];
    table.assign(ua.size() * ub.size(), 0.0);
    const int pairs = int(ua.size() * ub.size());
    parallel_for(pairs, threads, [&](int p) {
      const int pa = p / int(ub.size());
      const int pb = p % int(ub.size());
      const int u = ua[pa], w = ub[pb];
      const ProcessNode& nu = A.nodes[u];
      const ProcessNode& nw = B.nodes[w];
      double val;
      if (leaf_stage_1d(A, t + 1)) {
        // Leaf children in one dimension: squared distance with no
        // continuation term, solved by monotone rearrangement.
        std::vector<double> xs(nu.children.size()), ys(nw.children.size());
        for (std::size_t i = 0; i < nu.children.size(); ++i)
          xs[i] = A.nodes[nu.children[i]].value[0];
        for (std::size_t j = 0; j < nw.children.size(); ++j)
          ys[j] = B.nodes[nw.children[j]].value[0];
        val = ot_value_1d_squared(xs, nu.weights, ys, nw.weights);
      } else {
        const std::vector<double> c =
            child_cost_matrix(A, B, u, w, res.v[t], pos_a, pos_b, nb_next);
        val = solve_exact_ot(nu.weights, nw.weights, c, int(nu.children.size()),
                             int(nw.children.size()), Sense::Min)
                  .value;
      }
      table[std::size_t(pa) * ub.size() + pb] = val;
    });
  }

  std::vector<double> top_cost(A.roots.size() * B.roots.size());
  const int nb0 = int(res.stage_b[0].size());
  for (std::size_t r = 0; r < A.roots.size(); ++r)
    for (std::size_t s = 0; s < B.roots.size(); ++s) {
      const double cont =
          res.v[0].empty()
              ? 0.0
              : res.v[0][std::size_t(pos_a[A.roots[r]]) * nb0 + pos_b[B.roots[s]]];
      top_cost[r * B.roots.size() + s] =
          sqdist(A.nodes[A.roots[r]].value, B.nodes[B.roots[s]].value) + cont;
    }
  res.top = solve_exact_ot(A.root_weights, B.root_weights, top_cost, int(A.roots.size()),
                           int(B.roots.size()), Sense::Min);
  res.value_sq = res.top.value;
  res.value = std::sqrt(std::max(0.0, res.value_sq));
  return res;
}

OTSolution aw2_pair_solution(const ProcessTree& A, const ProcessTree& B,
                             const Aw2Result& result, int node_a, int node_b) {
  const int t = A.nodes[node_a].stage;
  if (t != B.nodes[node_b].stage || t >= A.stages)
    throw std::invalid_argument("aw2_pair_solution: not an interior matched pair");
  const ProcessNode& nu = A.nodes[node_a];
  const ProcessNode& nw = B.nodes[node_b];
  if (leaf_stage_1d(A, t + 1)) {
    std::vector<double> xs(nu.children.size()), ys(nw.children.size());
    for (std::size_t i = 0; i < nu.children.size(); ++i)
      xs[i] = A.nodes[nu.children[i]].value[0];
    for (std::size_t j = 0; j < nw.children.size(); ++j)
      ys[j] = B.nodes[nw.children[j]].value[0];
    return solve_1d_squared(xs, nu.weights, ys, nw.weights);
  }
  std::vector<int> pos_a(A.nodes.size(), -1), pos_b(B.nodes.size(), -1);
  for (int k = 0; k < int(result.stage_a[t].size()); ++k) pos_a[result.stage_a[t][k]] = k;
  for (int k = 0; k < int(result.stage_b[t].size()); ++k) pos_b[result.stage_b[t][k]] = k;
  const std::vector<double> c = child_cost_matrix(A, B, node_a, node_b, result.v[t], pos_a,
                                                  pos_b, int(result.stage_b[t].size()));
  return solve_exact_ot(nu.weights, nw.weights, c, int(nu.children.size()),
                        int(nw.children.size()), Sense::Min);
}

std::vector<std::vector<int>> enumerate_node_paths(const ProcessTree& tree) {
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  const std::function<void(int)> walk = [&](int u) {
    prefix.push_back(u);
    if (tree.nodes[u].children.empty())
      out.push_back(prefix);
    else
      for (int c : tree.nodes[u].children) walk(c);
    prefix.pop_back();
  };
  for (int r : tree.roots) walk(r);
  return out;
}

DiscreteMeasure path_law(const ProcessTree& tree) {
  DiscreteMeasure mu;
  for (const Path& p : enumerate_paths(tree)) {
    mu.weights.push_back(p.weight);
    mu.points.push_back(p.values);
  }
  return mu;
}

Coupling aw2_path_coupling(const ProcessTree& A, const ProcessTree& B,
                           const Aw2Result& result) {
  const auto paths_a = enumerate_node_paths(A);
  const auto paths_b = enumerate_node_paths(B);
  std::vector<int> leaf_to_path_a(A.nodes.size(), -1), leaf_to_path_b(B.nodes.size(), -1);
  for (int p = 0; p < int(paths_a.size()); ++p) leaf_to_path_a[paths_a[p].back()] = p;
  for (int p = 0; p < int(paths_b.size()); ++p) leaf_to_path_b[paths_b[p].back()] = p;

  Coupling pi;
  pi.rows = int(paths_a.size());
  pi.cols = int(paths_b.size());
  pi.pi.assign(std::size_t(pi.rows) * pi.cols, 0.0);

  const std::function<void(int, int, double)> spread = [&](int u, int v, double mass) {
    if (A.nodes[u].children.empty()) {
      pi.at(leaf_to_path_a[u], leaf_to_path_b[v]) += mass;
      return;
    }
    const OTSolution sol = aw2_pair_solution(A, B, result, u, v);
    for (int i = 0; i < sol.coupling.rows; ++i)
      for (int j = 0; j < sol.coupling.cols; ++j) {
        const double q = sol.coupling.at(i, j);
        if (q > 0.0) spread(A.nodes[u].children[i], B.nodes[v].children[j], mass * q);
      }
  };
  for (std::size_t r = 0; r < A.roots.size(); ++r)
    for (std::size_t s = 0; s < B.roots.size(); ++s) {
      const double m = result.top.coupling.at(int(r), int(s));
      if (m > 0.0) spread(A.roots[r], B.roots[s], m);
    }
  return pi;
}

namespace {

// Groups path indices by their first t stage values, sup tolerance 1e-12.
std::vector<int> history_groups(const std::vector<Path>& paths, int t, int dim,
                                int* group_count) {
  std::vector<int> group(paths.size(), -1);
  std::vector<int> reps;
  for (int p = 0; p < int(paths.size()); ++p) {
    const auto head = [&](int q) {
      return Vec(paths[q].values.begin(), paths[q].values.begin() + std::size_t(t) * dim);
    };
    for (int g = 0; g < int(reps.size()); ++g)
      if (supdist(head(reps[g]), head(p)) <= 1e-12) {
        group[p] = g;
        break;
      }
    if (group[p] < 0) {
      group[p] = int(reps.size());
      reps.push_back(p);
    }
  }
  *group_count = int(reps.size());
  return group;
}

Validation causality_violation(const Coupling& pi, const std::vector<Path>& pa,
                               const std::vector<Path>& pb, int stages, int dim,
                               const char* direction, double tol) {
  for (int t = 1; t < stages; ++t) {
    int ga_count = 0, gb_count = 0;
    const std::vector<int> ga = history_groups(pa, t, dim, &ga_count);
    const std::vector<int> gb = history_groups(pb, t, dim, &gb_count);
    // Conditional law of the partner's first t stages, per full path and per
    // history group; the two must agree for every path with positive mass.
    std::vector<double> row_mass(pa.size(), 0.0);
    std::vector<std::vector<double>> cond_path(pa.size(), std::vector<double>(gb_count, 0.0));
    for (int p = 0; p < int(pa.size()); ++p)
      for (int q = 0; q < int(pb.size()); ++q) {
        row_mass[p] += pi.at(p, q);
        cond_path[p][gb[q]] += pi.at(p, q);
      }
    std::vector<double> group_mass(ga_count, 0.0);
    std::vector<std::vector<double>> cond_group(ga_count, std::vector<double>(gb_count, 0.0));
    for (int p = 0; p < int(pa.size()); ++p) {
      group_mass[ga[p]] += row_mass[p];
      for (int g = 0; g < gb_count; ++g) cond_group[ga[p]][g] += cond_path[p][g];
    }
    for (int p = 0; p < int(pa.size()); ++p) {
      if (row_mass[p] <= tol) continue;
      for (int g = 0; g < gb_count; ++g) {
        const double a = cond_path[p][g] / row_mass[p];
        const double b = cond_group[ga[p]][g] / group_mass[ga[p]];
        if (std::abs(a - b) > tol) {
          Validation v;
          v.ok = false;
          v.message = std::string("causality: direction ") + direction + ", stage " +
                      std::to_string(t) + ", path " + std::to_string(p) +
                      ": conditional mismatch " + std::to_string(a - b);
          return v;
        }
      }
    }
  }
  return {};
}

}  // namespace

Validation check_bicausal(const Coupling& pi, const ProcessTree& A, const ProcessTree& B,
                          double tol) {
  check_compatible(A, B);
  const std::vector<Path> pa = enumerate_paths(A);
  const std::vector<Path> pb = enumerate_paths(B);
  if (pi.rows != int(pa.size()) || pi.cols != int(pb.size())) {
    Validation v;
    v.ok = false;
    v.message = "shape: coupling does not match path counts";
    return v;
  }
  {
    std::vector<double> wa(pa.size()), wb(pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) wa[i] = pa[i].weight;
    for (std::size_t j = 0; j < pb.size(); ++j) wb[j] = pb[j].weight;
    Validation m = validate_coupling(pi, wa, wb, 1e-9);
    if (!m.ok) return m;
  }
  Validation fwd = causality_violation(pi, pa, pb, A.stages, A.dim, "A->B", tol);
  if (!fwd.ok) return fwd;
  Coupling tr;
  tr.rows = pi.cols;
  tr.cols = pi.rows;
  tr.pi.assign(pi.pi.size(), 0.0);
  for (int i = 0; i < pi.rows; ++i)
    for (int j = 0; j < pi.cols; ++j) tr.at(j, i) = pi.at(i, j);
  return causality_violation(tr, pb, pa, A.stages, A.dim, "B->A", tol);
}

// ---------------------------------------------------------------------------
// Canonicalization.

namespace {

struct TmpNode {
  Vec value;
  double weight = 0.0;
  std::vector<std::unique_ptr<TmpNode>> kids;
};

// Recursive value-plus-transport distance between already-canonical scratch
// subtrees, memoized on node identity.
struct TmpDist {
  std::map<std::pair<const TmpNode*, const TmpNode*>, double> memo;

  double future_sq(const TmpNode* a, const TmpNode* b) {
    if (a->kids.empty() && b->kids.empty()) return 0.0;
    const auto key = std::make_pair(a, b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<double> wa, wb;
    for (const auto& k : a->kids) wa.push_back(k->weight);
    for (const auto& k : b->kids) wb.push_back(k->weight);
    std::vector<double> c(a->kids.size() * b->kids.size());
    for (std::size_t i = 0; i < a->kids.size(); ++i)
      for (std::size_t j = 0; j < b->kids.size(); ++j)
        c[i * b->kids.size() + j] = dist_sq(a->kids[i].get(), b->kids[j].get());
    const double v = solve_exact_ot(wa, wb, c, int(wa.size()), int(wb.size()), Sense::Min).value;
    memo[key] = v;
    return v;
  }

  double dist_sq(const TmpNode* a, const TmpNode* b) {
    return sqdist(a->value, b->value) + future_sq(a, b);
  }
};

// Merges candidate into the first list entry within tol, else appends it.
void place(std::vector<std::unique_ptr<TmpNode>>& list, std::unique_ptr<TmpNode> cand,
           double tol, TmpDist& dist) {
  for (auto& rep : list) {
    const double d2 = dist.dist_sq(rep.get(), cand.get());
    if (std::sqrt(std::max(0.0, d2)) <= tol) {
      rep->weight += cand->weight;
      return;
    }
  }
  list.push_back(std::move(cand));
}

std::unique_ptr<TmpNode> canonicalize_node(const ProcessTree& tree, int u, double weight,
                                           double tol, TmpDist& dist) {
  auto node = std::make_unique<TmpNode>();
  node->value = tree.nodes[u].value;
  node->weight = weight;
  const ProcessNode& in = tree.nodes[u];
  for (std::size_t c = 0; c < in.children.size(); ++c)
    place(node->kids, canonicalize_node(tree, in.children[c], in.weights[c], tol, dist), tol,
          dist);
  return node;
}

int flatten_tmp(const TmpNode* n, int stage, ProcessTree& out) {
  ProcessNode pn;
  pn.stage = stage;
  pn.value = n->value;
  const int idx = int(out.nodes.size());
  out.nodes.push_back(pn);
  for (const auto& k : n->kids) {
    const int c = flatten_tmp(k.get(), stage + 1, out);
    out.nodes[idx].children.push_back(c);
    out.nodes[idx].weights.push_back(k->weight);
  }
  return idx;
}

}  // namespace

CanonicalAdaptedLaw adapted_law(const ProcessTree& tree, double merge_tol) {
  if (merge_tol < 0.0) throw std::invalid_argument("adapted_law: negative tolerance");
  TmpDist dist;
  std::vector<std::unique_ptr<TmpNode>> roots;
  for (std::size_t r = 0; r < tree.roots.size(); ++r)
    place(roots, canonicalize_node(tree, tree.roots[r], tree.root_weights[r], merge_tol, dist),
          merge_tol, dist);
  CanonicalAdaptedLaw law;
  law.merge_tol = merge_tol;
  law.tree.stages = tree.stages;
  law.tree.dim = tree.dim;
  for (const auto& r : roots) {
    law.tree.roots.push_back(flatten_tmp(r.get(), 1, law.tree));
    law.tree.root_weights.push_back(r->weight);
  }
  return law;
}

InformationProcess information_process(const ProcessTree& tree) {
  InformationProcess ip;
  ip.label.assign(tree.nodes.size(), -1);
  ip.stage_label_count.assign(tree.stages, 0);
  // Interning runs from the leaves up; a node's key is its value plus the law
  // its children induce on stage-(t+1) labels.
  using Key = std::pair<Vec, std::vector<std::pair<int, double>>>;
  for (int t = tree.stages; t >= 1; --t) {
    std::map<Key, int> intern;
    for (int u : tree.stage_nodes(t)) {
      const ProcessNode& n = tree.nodes[u];
      std::map<int, double> law;
      for (std::size_t c = 0; c < n.children.size(); ++c)
        law[ip.label[n.children[c]]] += n.weights[c];
      Key key{n.value, {law.begin(), law.end()}};
      auto it = intern.find(key);
      if (it == intern.end()) it = intern.emplace(key, int(intern.size())).first;
      ip.label[u] = it->second;
    }
    ip.stage_label_count[t - 1] = int(intern.size());
  }
  std::map<int, double> root_law;
  for (std::size_t r = 0; r < tree.roots.size(); ++r)
    root_law[ip.label[tree.roots[r]]] += tree.root_weights[r];
  ip.root_law.assign(root_law.begin(), root_law.end());
  return ip;
}

namespace {

// Lazy cost-to-go between nodes of one tree, for history/filtration checks.
struct ArenaDist {
  const ProcessTree& tree;
  std::map<std::pair<int, int>, double> memo;

  explicit ArenaDist(const ProcessTree& t) : tree(t) {}

  double future_sq(int a, int b) {
    const ProcessNode& na = tree.nodes[a];
    const ProcessNode& nb = tree.nodes[b];
    if (na.children.empty() && nb.children.empty()) return 0.0;
    const auto key = std::make_pair(a, b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<double> c(na.children.size() * nb.children.size());
    for (std::size_t i = 0; i < na.children.size(); ++i)
      for (std::size_t j = 0; j < nb.children.size(); ++j) {
        const int ca = na.children[i], cb = nb.children[j];
        c[i * nb.children.size() + j] =
            sqdist(tree.nodes[ca].value, tree.nodes[cb].value) + future_sq(ca, cb);
      }
    const double v = solve_exact_ot(na.weights, nb.weights, c, int(na.children.size()),
                                    int(nb.children.size()), Sense::Min)
                         .value;
    memo[key] = v;
    return v;
  }
};

}  // namespace

bool is_naturally_filtered(const ProcessTree& tree) {
  // Node histories via parent pointers.
  std::vector<int> parent(tree.nodes.size(), -1);
  for (int u = 0; u < int(tree.nodes.size()); ++u)
    for (int c : tree.nodes[u].children) parent[c] = u;
  std::vector<Vec> history(tree.nodes.size());
  const std::function<Vec(int)> hist = [&](int u) -> Vec {
    if (!history[u].empty()) return history[u];
    history[u] = parent[u] < 0 ? tree.nodes[u].value
                               : concat(hist(parent[u]), tree.nodes[u].value);
    return history[u];
  };
  ArenaDist dist(tree);
  for (int t = 1; t <= tree.stages; ++t) {
    const std::vector<int> nodes = tree.stage_nodes(t);
    for (std::size_t a = 0; a < nodes.size(); ++a)
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        if (supdist(hist(nodes[a]), hist(nodes[b])) > 1e-12) continue;
        if (std::sqrt(std::max(0.0, dist.future_sq(nodes[a], nodes[b]))) > 1e-12)
          return false;
      }
  }
  return true;
}

CanonicalAdaptedLaw embed_J(const DiscreteMeasure& mu, int stages, int dim) {
  if (mu.dim() != stages * dim)
    throw std::invalid_argument("embed_J: measure dimension is not stages*dim");
  std::vector<Path> paths;
  paths.reserve(mu.size());
  for (int i = 0; i < mu.size(); ++i) paths.push_back({mu.weights[i], mu.points[i]});
  return adapted_law(tree_from_paths(paths, stages, dim, 0.0), 0.0);
}

BiadaptedMonge extract_biadapted_monge(const ProcessTree& A, const ProcessTree& B,
                                       const Aw2Result& result) {
  BiadaptedMonge out;
  const int N = A.stages;
  std::vector<std::map<int, std::set<int>>> fwd(N), rev(N);
  std::set<std::pair<int, int>> visited;
  std::vector<std::pair<int, int>> queue;
  for (std::size_t r = 0; r < A.roots.size(); ++r)
    for (std::size_t s = 0; s < B.roots.size(); ++s)
      if (result.top.coupling.at(int(r), int(s)) > 0.0) {
        fwd[0][A.roots[r]].insert(B.roots[s]);
        rev[0][B.roots[s]].insert(A.roots[r]);
        queue.emplace_back(A.roots[r], B.roots[s]);
      }
  while (!queue.empty()) {
    const auto [u, v] = queue.back();
    queue.pop_back();
    if (!visited.insert({u, v}).second) continue;
    if (A.nodes[u].children.empty()) continue;
    const OTSolution sol = aw2_pair_solution(A, B, result, u, v);
    const int t = A.nodes[u].stage;  // children live at stage t+1
    for (int i = 0; i < sol.coupling.rows; ++i)
      for (int j = 0; j < sol.coupling.cols; ++j)
        if (sol.coupling.at(i, j) > 0.0) {
          const int ca = A.nodes[u].children[i], cb = B.nodes[v].children[j];
          fwd[t][ca].insert(cb);
          rev[t][cb].insert(ca);
          queue.emplace_back(ca, cb);
        }
  }
  out.is_monge = true;
  out.is_biadapted = true;
  out.stage_invertible.assign(N, true);
  out.stage_map.resize(N);
  for (int t = 0; t < N; ++t) {
    std::set<int> hit;
    for (const auto& [u, targets] : fwd[t]) {
      if (targets.size() != 1) {
        out.is_monge = false;
        continue;
      }
      const int v = *targets.begin();
      out.stage_map[t][u] = v;
      if (!hit.insert(v).second) out.stage_invertible[t] = false;
    }
    for (const auto& [v, sources] : rev[t])
      if (sources.size() != 1) out.is_biadapted = false;
  }
  if (!out.is_monge) {
    out.is_biadapted = false;
    for (int t = 0; t < N; ++t)
      if (!fwd[t].empty() && out.stage_map[t].size() != fwd[t].size())
        out.stage_invertible[t] = false;
  }
  return out;
}

namespace {

void prepend_ground(NestedMeasure& m, const Vec& x) {
  if (m.depth == 1) {
    for (Vec& p : m.points) p = concat(x, p);
  } else {
    for (NestedMeasure& c : m.children) prepend_ground(c, x);
  }
}

NestedMeasure encode_subtree(const ProcessTree& tree, int u) {
  const ProcessNode& n = tree.nodes[u];
  NestedMeasure out;
  if (n.stage == tree.stages - 1) {
    out.depth = 1;
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      out.points.push_back(concat(n.value, tree.nodes[n.children[c]].value));
      out.weights.push_back(n.weights[c]);
    }
    return out;
  }
  out.depth = tree.stages - n.stage;
  for (std::size_t c = 0; c < n.children.size(); ++c) {
    NestedMeasure sub = encode_subtree(tree, n.children[c]);
    prepend_ground(sub, n.value);
    out.children.push_back(std::move(sub));
    out.weights.push_back(n.weights[c]);
  }
  return out;
}

}  // namespace

NestedMeasure encode_adapted(const ProcessTree& tree) {
  NestedMeasure out;
  if (tree.stages == 1) {
    out.depth = 1;
    for (std::size_t r = 0; r < tree.roots.size(); ++r) {
      out.points.push_back(tree.nodes[tree.roots[r]].value);
      out.weights.push_back(tree.root_weights[r]);
    }
    return out;
  }
  out.depth = tree.stages;
  for (std::size_t r = 0; r < tree.roots.size(); ++r) {
    out.children.push_back(encode_subtree(tree, tree.roots[r]));
    out.weights.push_back(tree.root_weights[r]);
  }
  return out;
}

IsometryReport verify_isometry(const ProcessTree& A, const ProcessTree& B, int threads) {
  check_compatible(A, B);
  IsometryReport rep;
  rep.aw2_value = aw2(A, B, threads).value;
  const NestedMeasure ea = encode_adapted(adapted_law(A).tree);
  const NestedMeasure eb = encode_adapted(adapted_law(B).tree);
  rep.nested_value = nested_w2(ea, eb).value;
  rep.residual = std::abs(rep.aw2_value - rep.nested_value);
  return rep;
}

}  // namespace wotw
