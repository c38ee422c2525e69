#include <cmath>
#include <vector>

#include "doctest.h"

#include "egraph/error.hpp"
#include "egraph/statistics.hpp"
#include "support/synth.hpp"

using namespace egraph;

namespace {

MeanOptions exact_options() {
  MeanOptions o;
  o.match.exact_limit = 8;
  return o;
}

}  // namespace

TEST_CASE("template is the graph with most edges, first on ties") {
  synth::Rng rng(41);
  std::vector<GraphShape> g = {synth::random_graph(rng, 4, 10, 2, 0.3),
                               synth::random_graph(rng, 4, 10, 2, 1.0),
                               synth::random_graph(rng, 4, 10, 2, 1.0)};
  CHECK(template_index(g) == 1);
}

TEST_CASE("mean of one graph, or of copies of it, is that graph") {
  synth::Rng rng(42);
  const GraphShape a = synth::random_graph(rng, 5, 20, 2, 0.6);
  const std::vector<GraphShape> one = {a};
  const MeanResult m1 = karcher_mean(one, exact_options());
  CHECK(pre_shape_distance(m1.mean, a) < 1e-12);
  CHECK(m1.final_variance < 1e-20);

  const Permutation p = synth::random_permutation(rng, 5);
  const std::vector<GraphShape> copies = {a, permute(p, a), a};
  const MeanResult m3 = karcher_mean(copies, exact_options());
  CHECK(quotient_distance(m3.mean, a) < 1e-12);
}

TEST_CASE("one averaging round of two graphs gives their geodesic midpoint") {
  synth::Rng rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    const GraphShape a = synth::random_graph(rng, 4, 20, 2, 0.7);
    const GraphShape b = synth::random_graph(rng, 4, 20, 2, 0.7);
    const std::vector<GraphShape> pair = {a, b};
    MeanOptions once = exact_options();
    once.mode = MeanMode::template_;
    // The mean aligns every sample to the template, so the matching
    // geodesic starts at the template.
    const std::size_t t = template_index(pair);
    const Registration r = register_graphs(pair[t], pair[1 - t]);
    const GraphGeodesic path =
        pre_shape_geodesic(r.reference, r.registered, 3);
    CHECK(pre_shape_distance(karcher_mean(pair, once).mean, path.steps[1]) <
          1e-12);

    // Further rounds only lower the variance below the midpoint's.
    const MeanResult full = karcher_mean(pair, exact_options());
    CHECK(full.final_variance <= full.variance_history.front());
  }
}

TEST_CASE("karcher variance never increases across accepted iterations") {
  synth::Rng rng(44);
  std::vector<GraphShape> g;
  for (int k = 0; k < 5; ++k) g.push_back(synth::random_graph(rng, 5, 20, 2));
  const MeanResult m = karcher_mean(g, exact_options());
  REQUIRE(!m.variance_history.empty());
  for (std::size_t k = 1; k < m.variance_history.size(); ++k) {
    CHECK(m.variance_history[k] <= m.variance_history[k - 1]);
  }
  CHECK(m.final_variance == m.variance_history.back());
  CHECK(m.registered.size() == g.size());
}

TEST_CASE("template mode runs a single registration round") {
  synth::Rng rng(45);
  std::vector<GraphShape> g;
  for (int k = 0; k < 4; ++k) g.push_back(synth::random_graph(rng, 4, 20, 2));
  MeanOptions o = exact_options();
  o.mode = MeanMode::template_;
  CHECK(karcher_mean(g, o).iterations == 1);
  CHECK(parse_mean_mode("template") == MeanMode::template_);
  CHECK_THROWS_AS(parse_mean_mode("median"), UsageError);
}

TEST_CASE("rarely present edges are hidden from the displayed mean") {
  synth::Rng rng(46);
  GraphShape base(3, 2, 20);
  base.add_edge(0, 1, Edge::from_curve(synth::smooth_curve(rng, 20, 2), 0));
  GraphShape extra = base;
  extra.add_edge(1, 2, Edge::from_curve(synth::smooth_curve(rng, 20, 2), 1));
  const std::vector<GraphShape> g = {base, base, extra};
  const MeanResult m = karcher_mean(g, exact_options());
  CHECK(m.mean.edge_count() == 2);
  CHECK(display_mean(m, 0.5).edge_count() == 1);
  CHECK(display_mean(m, 0.0).edge_count() == 2);
}

TEST_CASE("tangent PCA rank, reconstruction and explained variance") {
  synth::Rng rng(47);
  std::vector<GraphShape> g;
  for (int k = 0; k < 4; ++k) g.push_back(synth::random_graph(rng, 4, 20, 2));
  const TangentModel tm = tangent_pca(g, exact_options());
  CHECK(tm.rank() <= 3);
  for (Eigen::Index k = 1; k < tm.singular_values.size(); ++k) {
    CHECK(tm.singular_values(k) <= tm.singular_values(k - 1));
  }
  const Eigen::MatrixXd rebuilt =
      (tm.scores * tm.directions).rowwise() + tm.center.transpose();
  CHECK((rebuilt - tm.shooting_vectors).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(variance_explained(tm, tm.rank()) == doctest::Approx(1.0));
  CHECK(pre_shape_distance(principal_path(tm, 0, 0.0), tm.mean) < 1e-9);
  CHECK_THROWS_AS(principal_path(tm, 5, 1.0), InvalidInput);

  // Directions are orthonormal.
  const Eigen::MatrixXd dirs = tm.directions.topRows(
      static_cast<Eigen::Index>(tm.rank()));
  CHECK((dirs * dirs.transpose() -
         Eigen::MatrixXd::Identity(dirs.rows(), dirs.rows()))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("shooting vector length is the aligned pre-shape distance") {
  synth::Rng rng(48);
  const GraphShape a = synth::random_graph(rng, 4, 30, 2, 0.8);
  const GraphShape b = synth::random_graph(rng, 4, 30, 2, 0.8);
  const Eigen::VectorXd v = shooting_vector(a, b);
  // One-sided alignment never beats the symmetrized edge distance.
  const double d = pre_shape_distance(a, b);
  CHECK(std::sqrt(2.0) * v.norm() >= d - 1e-9);
  // The two argument orders differ only by discretization of the warp.
  CHECK(std::sqrt(2.0) * v.norm() <= 1.05 * d);
  CHECK(pre_shape_distance(exp_map(a, Eigen::VectorXd::Zero(v.size())), a) <
        1e-9);
}

TEST_CASE("tangent PCA needs two graphs") {
  synth::Rng rng(49);
  const std::vector<GraphShape> g = {synth::random_graph(rng, 3, 10, 2)};
  CHECK_THROWS_AS(tangent_pca(g), InvalidInput);
}
