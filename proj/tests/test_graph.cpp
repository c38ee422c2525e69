#include <cmath>
#include <set>

#include "doctest.h"

#include "egraph/error.hpp"
#include "egraph/graph.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace egraph;

TEST_CASE("upper-triangle slots are a bijection") {
  const std::size_t n = 7;
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      seen.insert(GraphShape::pair_index(i, j, n));
    }
  }
  CHECK(seen.size() == n * (n - 1) / 2);
  CHECK(*seen.rbegin() == n * (n - 1) / 2 - 1);
}

TEST_CASE("permutations must be bijections") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), InvalidInput);
  CHECK_THROWS_AS(Permutation({0, 3}), InvalidInput);
  const Permutation p({2, 0, 1});
  CHECK(compose(p, p.inverse()) == Permutation::identity(3));
}

TEST_CASE("graphs reject self-loops and duplicate edges") {
  synth::Rng rng(1);
  GraphShape g(3, 2, 20);
  const Edge e = Edge::from_curve(synth::smooth_curve(rng, 20, 2), 0);
  CHECK_THROWS_AS(g.add_edge(1, 1, e), InvalidInput);
  g.add_edge(0, 1, e);
  CHECK_THROWS_AS(g.add_edge(1, 0, Edge::from_curve(e.curve, 1)),
                  InvalidInput);
  CHECK(g.edge_count() == 1);
  CHECK(g.edge(1, 0) == g.edge(0, 1));
  CHECK(g.edge(0, 2) == nullptr);
  CHECK(g.edge(2, 2) == nullptr);
}

TEST_CASE("pre-shape distance counts each edge from both directions") {
  synth::Rng rng(2);
  GraphShape a(2, 2, 30), b(2, 2, 30);
  const Curve ca = synth::smooth_curve(rng, 30, 2);
  const Curve cb = synth::smooth_curve(rng, 30, 2);
  a.add_edge(0, 1, Edge::from_curve(ca, 0));
  b.add_edge(0, 1, Edge::from_curve(cb, 1));
  CHECK(pre_shape_distance(a, b) ==
        doctest::Approx(std::sqrt(2.0) * shape_distance(ca, cb)));
}

TEST_CASE("pre-shape distance agrees with a direct double loop") {
  synth::Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphShape a = synth::random_graph(rng, 5, 20, 2);
    const GraphShape b = synth::random_graph(rng, 5, 20, 2);
    CHECK(pre_shape_distance(a, b) ==
          doctest::Approx(oracle::preshape_distance(a, b)).epsilon(1e-12));
    CHECK(pre_shape_distance(a, a) == 0.0);
    CHECK(pre_shape_distance(a, b) == pre_shape_distance(b, a));
  }
}

TEST_CASE("relabeling both graphs is an isometry") {
  synth::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const GraphShape a = synth::random_graph(rng, 6, 20, 2);
    const GraphShape b = synth::random_graph(rng, 6, 20, 2);
    const Permutation p = synth::random_permutation(rng, 6);
    CHECK(pre_shape_distance(permute(p, a), permute(p, b)) ==
          pre_shape_distance(a, b));
  }
}

TEST_CASE("permute follows the composition law") {
  synth::Rng rng(5);
  const GraphShape a = synth::random_graph(rng, 5, 20, 2, 0.7);
  const Permutation p = synth::random_permutation(rng, 5);
  const Permutation q = synth::random_permutation(rng, 5);
  const GraphShape lhs = permute(compose(p, q), a);
  const GraphShape rhs = permute(p, permute(q, a));
  CHECK(pre_shape_distance(lhs, rhs) == 0.0);
  CHECK(lhs.labels() == rhs.labels());
  // Edge (P(i), P(j)) of the result is edge (i, j) of the input.
  for (const auto& [i, j] : a.edge_list()) {
    REQUIRE(permute(p, a).edge(p(i), p(j)) != nullptr);
    CHECK(permute(p, a).edge(p(i), p(j))->q.values == a.edge(i, j)->q.values);
  }
}

TEST_CASE("padding with null nodes leaves distances unchanged") {
  synth::Rng rng(6);
  const GraphShape a = synth::random_graph(rng, 4, 20, 2);
  const GraphShape b = synth::random_graph(rng, 4, 20, 2);
  const GraphShape pa = pad(a, 2);
  CHECK(pa.size() == 6);
  CHECK(pa.edge_count() == a.edge_count());
  CHECK(pre_shape_distance(pa, pad(b, 2)) ==
        doctest::Approx(pre_shape_distance(a, b)).epsilon(1e-14));
}

TEST_CASE("pre-shape geodesic has exact endpoints and a short midpoint") {
  synth::Rng rng(7);
  const GraphShape a = synth::random_graph(rng, 4, 30, 2, 0.6);
  const GraphShape b = synth::random_graph(rng, 4, 30, 2, 0.6);
  const GraphGeodesic path = pre_shape_geodesic(a, b, 3);
  REQUIRE(path.steps.size() == 3);
  CHECK(pre_shape_distance(path.steps.front(), a) == 0.0);
  CHECK(pre_shape_distance(path.steps.back(), b) == 0.0);
  const double d = pre_shape_distance(a, b);
  // Within the slack of one-sided edge alignment.
  CHECK(pre_shape_distance(a, path.steps[1]) <= 0.505 * d);
  // The far half also carries the discretization of the warp action.
  CHECK(pre_shape_distance(path.steps[1], b) <= 0.55 * d);
}

TEST_CASE("total length normalization yields unit total length") {
  synth::Rng rng(8);
  const GraphShape a = synth::random_graph(rng, 5, 30, 3, 0.6);
  const GraphShape n = total_length_normalize(a);
  CHECK(total_length(n) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(total_length_normalize(GraphShape(3, 2, 10)), InvalidInput);
}
