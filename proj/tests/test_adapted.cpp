#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "wotw/adapted.hpp"
#include "wotw/instances.hpp"
#include "wotw/io.hpp"
#include "wotw/measures.hpp"
#include "wotw/nested.hpp"
#include "wotw/ot.hpp"
#include "wotw/rng.hpp"

using namespace wotw;

namespace {

ProcessTree random_tree(Rng& rng, int stages, int dim, int max_fan = 3) {
  ProcessTree t;
  t.stages = stages;
  t.dim = dim;
  std::function<int(int)> build = [&](int stage) {
    ProcessNode n;
    n.stage = stage;
    n.value.resize(dim);
    for (double& x : n.value) x = rng.next_gaussian();
    if (stage < stages) {
      const int k = 1 + int(rng.next_below(max_fan));
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        n.children.push_back(build(stage + 1));
        const double w = 0.1 + rng.next_double();
        n.weights.push_back(w);
        sum += w;
      }
      for (double& w : n.weights) w /= sum;
    }
    t.nodes.push_back(n);
    return int(t.nodes.size()) - 1;
  };
  const int r = 1 + int(rng.next_below(3));
  double sum = 0.0;
  for (int i = 0; i < r; ++i) {
    t.roots.push_back(build(1));
    const double w = 0.1 + rng.next_double();
    t.root_weights.push_back(w);
    sum += w;
  }
  for (double& w : t.root_weights) w /= sum;
  return t;
}

double plain_w2_sq(const ProcessTree& A, const ProcessTree& B) {
  const DiscreteMeasure a = path_law(A), b = path_law(B);
  const std::vector<double> cost = squared_cost_matrix(a, b);
  return solve_exact_ot(a.weights, b.weights, cost, a.size(), b.size(), Sense::Min).value;
}

}  // namespace

TEST_CASE("whisper pair: adapted value keeps the jump") {
  for (const double eps : {0.1, 0.01}) {
    const auto [A, B] = epsilon_split_pair(eps);
    REQUIRE(validate(A).ok);
    REQUIRE(validate(B).ok);

    const Aw2Result r = aw2(A, B);
    CHECK(std::abs(r.value_sq - (eps * eps + 2.0)) <= 1e-8);

    // the plain distance may use the whisper and stays tiny
    const double plain = plain_w2_sq(A, B);
    CHECK(std::abs(plain - eps * eps) <= 1e-10);
    CHECK(plain <= eps * eps + 4.0 * eps);
    CHECK(r.value_sq >= plain - 1e-12);

    // cost-to-go of both root pairs is the full jump
    REQUIRE(r.v.size() >= 1);
    REQUIRE(r.v[0].size() == 2);
    CHECK(r.v[0][0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.v[0][1] == doctest::Approx(2.0).epsilon(1e-12));

    // symmetric and zero on the diagonal
    CHECK(std::abs(aw2(B, A).value_sq - r.value_sq) <= 1e-10);
    CHECK(aw2(A, A).value_sq <= 1e-12);

    const Coupling pi = aw2_path_coupling(A, B, r);
    CHECK(check_bicausal(pi, A, B).ok);
    // optimal top plan splits the single source root, so no forward map
    CHECK_FALSE(extract_biadapted_monge(A, B, r).is_monge);
  }
}

TEST_CASE("comonotone path plan of the whisper pair is not bicausal") {
  const auto [A, B] = epsilon_split_pair(0.1);
  Coupling comono;
  comono.rows = comono.cols = 2;
  comono.pi = {0.5, 0.0, 0.0, 0.5};  // matches signs, uses stage-1 information
  CHECK_FALSE(check_bicausal(comono, A, B).ok);

  Coupling product;
  product.rows = product.cols = 2;
  product.pi = {0.25, 0.25, 0.25, 0.25};
  CHECK(check_bicausal(product, A, B).ok);
}

TEST_CASE("identical trees couple along the diagonal") {
  Rng rng(711);
  const ProcessTree A = random_tree(rng, 3, 1);
  const Aw2Result r = aw2(A, A);
  CHECK(r.value_sq <= 1e-12);
  const BiadaptedMonge mm = extract_biadapted_monge(A, A, r);
  CHECK(mm.is_monge);
  CHECK(mm.is_biadapted);
}

TEST_CASE("recursion value is thread count independent") {
  Rng rng(722);
  const ProcessTree A = random_tree(rng, 3, 2);
  const ProcessTree B = random_tree(rng, 3, 2);
  const Aw2Result one = aw2(A, B, 1);
  const Aw2Result four = aw2(A, B, 4);
  CHECK(one.value_sq == four.value_sq);
}

TEST_CASE("exact duplicate siblings merge and preserve the law") {
  ProcessTree t;
  t.stages = 2;
  t.dim = 1;
  t.nodes.push_back({{1.0}, 2, {}, {}});
  t.nodes.push_back({{1.0}, 2, {}, {}});
  t.nodes.push_back({{0.0}, 1, {0, 1}, {0.25, 0.75}});
  t.roots = {2};
  t.root_weights = {1.0};

  const CanonicalAdaptedLaw c = adapted_law(t);
  CHECK(c.tree.nodes.size() == 2);
  CHECK(c.tree.nodes[c.tree.roots[0]].weights == std::vector<double>{1.0});
  CHECK(aw2(t, c.tree).value_sq <= 1e-12);

  // idempotent
  CHECK(adapted_law(c.tree).tree.nodes.size() == c.tree.nodes.size());
}

TEST_CASE("loose tolerance merges near duplicates monotonically") {
  Rng rng(733);
  const ProcessTree t = random_tree(rng, 3, 1);
  std::size_t last = t.nodes.size() + 1;
  for (const double tol : {0.0, 0.05, 0.5, 5.0}) {
    const CanonicalAdaptedLaw c = adapted_law(t, tol);
    CHECK(c.tree.nodes.size() <= last);
    last = c.tree.nodes.size();
    CHECK(validate(c.tree).ok);
    // canonicalization is itself stable at the same tolerance
    CHECK(adapted_law(c.tree, tol).tree.nodes.size() == c.tree.nodes.size());
  }
}

TEST_CASE("canonicalization at zero does not move the distance") {
  Rng rng(744);
  for (int trial = 0; trial < 5; ++trial) {
    const ProcessTree A = random_tree(rng, 2 + int(rng.next_below(2)), 1);
    const ProcessTree B = random_tree(rng, A.stages, 1);
    const double direct = aw2(A, B).value_sq;
    const double canon = aw2(adapted_law(A).tree, adapted_law(B).tree).value_sq;
    CHECK(std::abs(canon - direct) <= 1e-9);
  }
}

TEST_CASE("information process labels structural duplicates") {
  // two roots with equal values and equal child laws share a label
  ProcessTree t;
  t.stages = 2;
  t.dim = 1;
  t.nodes.push_back({{5.0}, 2, {}, {}});
  t.nodes.push_back({{0.0}, 1, {0}, {1.0}});
  t.nodes.push_back({{5.0}, 2, {}, {}});
  t.nodes.push_back({{0.0}, 1, {2}, {1.0}});
  t.nodes.push_back({{7.0}, 2, {}, {}});
  t.nodes.push_back({{0.0}, 1, {4}, {1.0}});
  t.roots = {1, 3, 5};
  t.root_weights = {0.25, 0.25, 0.5};

  const InformationProcess ip = information_process(t);
  CHECK(ip.label[1] == ip.label[3]);
  CHECK(ip.label[1] != ip.label[5]);
  CHECK(ip.stage_label_count[0] == 2);  // {0 -> ...5}, {0 -> ...7}
  CHECK(ip.stage_label_count[1] == 2);  // leaves 5 and 7
  double mass = 0.0;
  for (const auto& [label, p] : ip.root_law) mass += p;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("natural filtration detection") {
  // distinct stage-1 values: the path determines the node
  std::vector<Path> plain{{0.5, {0.0, 1.0}}, {0.5, {2.0, -1.0}}};
  CHECK(is_naturally_filtered(tree_from_paths(plain, 2, 1)));

  // hidden state: equal histories, different onward laws
  ProcessTree hidden;
  hidden.stages = 2;
  hidden.dim = 1;
  hidden.nodes.push_back({{1.0}, 2, {}, {}});
  hidden.nodes.push_back({{0.0}, 1, {0}, {1.0}});
  hidden.nodes.push_back({{-1.0}, 2, {}, {}});
  hidden.nodes.push_back({{0.0}, 1, {2}, {1.0}});
  hidden.roots = {1, 3};
  hidden.root_weights = {0.5, 0.5};
  CHECK_FALSE(is_naturally_filtered(hidden));
}

TEST_CASE("path embedding reproduces the law and is naturally filtered") {
  Rng rng(755);
  DiscreteMeasure mu;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    mu.points.push_back({rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
    const double w = 0.1 + rng.next_double();
    mu.weights.push_back(w);
    sum += w;
  }
  for (double& w : mu.weights) w /= sum;

  const CanonicalAdaptedLaw emb = embed_J(mu, 3, 1);
  CHECK(validate(emb.tree).ok);
  CHECK(is_naturally_filtered(emb.tree));
  CHECK(same_discrete(path_law(emb.tree), mu, 1e-12));
}

TEST_CASE("encoding and recursion are two routes to one number") {
  Rng rng(766);
  for (int trial = 0; trial < 10; ++trial) {
    const int stages = 2 + int(rng.next_below(2));
    const int dim = 1 + int(rng.next_below(2));
    const ProcessTree A = random_tree(rng, stages, dim, 2);
    const ProcessTree B = random_tree(rng, stages, dim, 2);

    const IsometryReport iso = verify_isometry(A, B);
    CHECK(iso.residual <= 1e-7);
    CHECK(iso.aw2_value >= std::sqrt(std::max(0.0, plain_w2_sq(A, B))) - 1e-9);

    const NestedMeasure enc = encode_adapted(A);
    CHECK(enc.depth == stages);
    CHECK(iterated_intensity(enc).dim() == stages * dim);
  }
}

TEST_CASE("pair solutions reproduce the stored cost to go") {
  const auto [A, B] = epsilon_split_pair(0.1);
  const Aw2Result r = aw2(A, B);
  for (std::size_t pb = 0; pb < r.stage_b[0].size(); ++pb) {
    const OTSolution inner = aw2_pair_solution(A, B, r, r.stage_a[0][0], r.stage_b[0][pb]);
    CHECK(std::abs(inner.value - r.v[0][pb]) <= 1e-10);
  }
}

TEST_CASE("two to one instance at coarse resolution") {
  const TwoToOneReport rep = two_to_one_report(20, 20);
  CHECK(rep.map_extracted);
  CHECK(rep.forward_two_to_one);
  CHECK(rep.reverse_monge_witness);
  CHECK(rep.t1_max_error <= rep.spacing + 1e-12);
  CHECK(rep.dual_residual <= 1e-10);
  CHECK(std::abs(rep.aw2_sq - 5.0 / 12.0) <= 5e-3);

  CHECK_THROWS_AS(make_two_to_one_instance(7, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_two_to_one_instance(4, 3), std::invalid_argument);
}
