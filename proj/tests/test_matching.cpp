#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "egraph/error.hpp"
#include "egraph/hungarian.hpp"
#include "egraph/matching.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace egraph;

TEST_CASE("hungarian assignment matches brute force") {
  synth::Rng rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    Eigen::MatrixXd w(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) w(r, c) = u(rng);
    }
    const auto row_of = max_weight_assignment(w);
    double got = 0.0;
    for (int c = 0; c < n; ++c) got += w(static_cast<Eigen::Index>(row_of[c]), c);
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    double best = -1e300;
    do {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += w(m[c], c);
      best = std::max(best, s);
    } while (std::next_permutation(m.begin(), m.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("lawler objective with separable affinity equals the trace form") {
  synth::Rng rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 5;
  Eigen::MatrixXd w1(n, n), w2(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      w1(i, j) = w1(j, i) = i == j ? 0.0 : u(rng);
      w2(i, j) = w2(j, i) = i == j ? 0.0 : u(rng);
    }
  }
  AffinityMatrix k{Eigen::MatrixXd(n * n, n * n), n};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t j = 0; j < n; ++j) {
          k.k(a * n + i, b * n + j) = w1(a, b) * w2(i, j);
        }
      }
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Permutation p = synth::random_permutation(rng, n);
    CHECK(lawler_objective(k, p) ==
          doctest::Approx(trace_objective(w1, w2, p)).epsilon(1e-12));
  }
  const Permutation exact = solve_lawler(k, Solver::exact);
  const Permutation brute = scalar_qap_oracle(w1, w2);
  CHECK(lawler_objective(k, exact) ==
        doctest::Approx(trace_objective(w1, w2, brute)).epsilon(1e-12));
}

TEST_CASE("exact matching agrees with direct enumeration of d_a") {
  synth::Rng rng(33);
  for (int trial = 0; trial < 4; ++trial) {
    const GraphShape a = synth::random_graph(rng, 5, 20, 2);
    const GraphShape b = synth::random_graph(rng, 5, 20, 2);
    const MatchResult m = match_exact(a, b);
    const auto brute = oracle::quotient_distance(a, b);
    CHECK(m.quotient_distance ==
          doctest::Approx(brute.distance).epsilon(1e-10));
    CHECK(pre_shape_distance(a, permute(m.permutation, b)) ==
          doctest::Approx(m.quotient_distance).epsilon(1e-12));
  }
}

TEST_CASE("a relabeled copy is at quotient distance zero") {
  synth::Rng rng(34);
  for (std::size_t n : {3u, 5u, 7u}) {
    const GraphShape a = synth::random_graph(rng, n, 20, 2, 0.6);
    const Permutation p = synth::random_permutation(rng, n);
    const MatchResult m = match_exact(a, permute(p, a));
    CHECK(m.quotient_distance < 1e-12);
  }
}

TEST_CASE("approximate solvers never beat the exact optimum") {
  synth::Rng rng(35);
  for (int trial = 0; trial < 5; ++trial) {
    const GraphShape a = synth::random_graph(rng, 5, 20, 2);
    const GraphShape b = synth::random_graph(rng, 5, 20, 2);
    const double exact = match_exact(a, b).quotient_distance;
    for (Solver s : {Solver::spectral, Solver::graduated}) {
      const MatchResult m = match_approx(a, b, s);
      CHECK(m.quotient_distance >= exact - 1e-8);
      CHECK(pre_shape_distance(a, permute(m.permutation, b)) ==
            doctest::Approx(m.quotient_distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("graduated assignment recovers a planted relabeling") {
  synth::Rng rng(36);
  int recovered = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const GraphShape a = synth::random_graph(rng, 6, 20, 2, 0.6);
    const Permutation p = synth::random_permutation(rng, 6);
    const GraphShape b = permute(p, synth::perturb(rng, a, 0.02));
    const MatchResult m = match_approx(a, b, Solver::graduated);
    recovered += m.permutation == p.inverse() ? 1 : 0;
  }
  CHECK(recovered >= 4);
}

TEST_CASE("graphs of different sizes are padded before matching") {
  synth::Rng rng(37);
  const GraphShape a = synth::random_graph(rng, 3, 20, 2, 0.8);
  const GraphShape b = synth::random_graph(rng, 4, 20, 2, 0.8);
  const Registration r = register_graphs(a, b);
  CHECK(r.reference.size() == 7);
  CHECK(r.registered.size() == 7);
  CHECK(r.registered.edge_count() == b.edge_count());
  CHECK(r.match.quotient_distance ==
        doctest::Approx(pre_shape_distance(r.reference, r.registered)));
  CHECK(quotient_distance(a, b) == doctest::Approx(quotient_distance(b, a)));
}

TEST_CASE("solver tags round trip and unknown tags are usage errors") {
  for (Solver s : {Solver::exact, Solver::spectral, Solver::graduated}) {
    CHECK(parse_solver(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_solver("simplex"), UsageError);
  synth::Rng rng(38);
  const GraphShape a = synth::random_graph(rng, 3, 10, 2);
  CHECK_THROWS_AS(match_approx(a, a, Solver::exact), UsageError);
  CHECK_THROWS_AS(match_exact(synth::random_graph(rng, 9, 10, 2), synth::random_graph(rng, 9, 10, 2)), InvalidInput);
}

TEST_CASE("approximate matching refuses graphs past the dense affinity limit") {
  const GraphShape big(65, 2, 10);
  CHECK_THROWS_AS(match_approx(big, big, Solver::spectral), InvalidInput);
}
