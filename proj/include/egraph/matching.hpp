#pragma once

// Node registration between elastic graphs (graph matching) and the
// quotient distance d_g = min_P d_a(A1, P * A2).

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "egraph/graph.hpp"

namespace egraph {

enum class Solver { exact, spectral, graduated };

std::string to_string(Solver solver);
// Throws UsageError for unknown tags.
Solver parse_solver(const std::string& tag);

// Annealing schedule for graduated assignment.
struct GraduatedSchedule {
  double beta_start = 0.5;
  double beta_max = 200.0;
  double beta_rate = 1.075;
  int sinkhorn_sweeps = 30;
  int inner_iterations = 1;
};

struct MatchOptions {
  Solver approximate_solver = Solver::graduated;
  // Largest padded size solved by enumeration.
  std::size_t exact_limit = 8;
  GraduatedSchedule schedule;
  int power_iterations = 1000;
  AlignOptions align;
};

// Dense n^2 x n^2 Lawler affinity; entry (a*n+i, b*n+j) pairs edge (a,b) of
// the first graph with edge (i,j) of the second.
struct AffinityMatrix {
  Eigen::MatrixXd k;
  std::size_t n = 0;

  double operator()(std::size_t a, std::size_t i, std::size_t b,
                    std::size_t j) const {
    return k(static_cast<Eigen::Index>(a * n + i),
             static_cast<Eigen::Index>(b * n + j));
  }
};

struct MatchResult {
  // Maps nodes of the second graph onto nodes of the first.
  Permutation permutation;
  double quotient_distance = 0.0;
  double objective = 0.0;
  Solver solver = Solver::exact;
};

// Both graphs padded to a common size, and the second one permuted onto
// the first.
struct Registration {
  GraphShape reference;
  GraphShape registered;
  MatchResult match;
};

// d_s and clamped affinities between every present edge of two equal-size
// graphs, evaluated once. Entries are computed independently, so the table
// is filled in parallel.
class EdgePairTable {
 public:
  EdgePairTable(const GraphShape& a1, const GraphShape& a2,
                const AlignOptions& options = {});

  std::size_t size() const { return n_; }
  // d_s between edge (a,b) of the first graph and (i,j) of the second,
  // with null edges handled by the zero-Srvf convention.
  double distance(std::size_t a, std::size_t b, std::size_t i,
                  std::size_t j) const;
  // Aligned inner product clamped at zero; zero if either edge is null.
  double affinity(std::size_t a, std::size_t b, std::size_t i,
                  std::size_t j) const;

  // d_a(A1, P * A2) summed exactly like pre_shape_distance.
  double preshape_distance(const Permutation& p) const;
  double lawler_objective(const Permutation& p) const;

 private:
  int id1(std::size_t a, std::size_t b) const;
  int id2(std::size_t i, std::size_t j) const;

  std::size_t n_ = 0;
  std::vector<int> slot1_;
  std::vector<int> slot2_;
  std::vector<double> norm1_;
  std::vector<double> norm2_;
  Eigen::MatrixXd distance_;
  Eigen::MatrixXd affinity_;
};

AffinityMatrix build_affinity(const GraphShape& a1, const GraphShape& a2,
                              const AlignOptions& options = {});
AffinityMatrix build_affinity(const EdgePairTable& table);

double lawler_objective(const AffinityMatrix& k, const Permutation& p);

// argmax_P vec(P)^T K vec(P). Solver::exact enumerates (n <= 8).
Permutation solve_lawler(const AffinityMatrix& k, Solver solver,
                         const MatchOptions& options = {});

MatchResult match_exact(const GraphShape& a1, const GraphShape& a2,
                        const MatchOptions& options = {});
// Refuses more than 64 nodes, where the dense affinity stops fitting in memory.
MatchResult match_approx(const GraphShape& a1, const GraphShape& a2,
                         Solver solver, const MatchOptions& options = {});

// Pads to n1 + n2 when sizes differ, then uses the exact solver up to
// options.exact_limit nodes and the approximate solver beyond.
Registration register_graphs(const GraphShape& a1, const GraphShape& a2,
                             const MatchOptions& options = {});
double quotient_distance(const GraphShape& a1, const GraphShape& a2,
                         const MatchOptions& options = {});

// Koopmans-Beckmann brute force: argmax_P Tr(W1 P W2 P^T) over
// symmetric scalar matrices, n <= 8.
Permutation scalar_qap_oracle(const Eigen::MatrixXd& w1,
                              const Eigen::MatrixXd& w2);
double trace_objective(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                       const Permutation& p);

}  // namespace egraph
