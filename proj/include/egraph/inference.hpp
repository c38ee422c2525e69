#pragma once

// Hypothesis tests and embeddings on principal scores and shape distances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace egraph {

struct DistanceMatrix {
  Eigen::MatrixXd d;
  std::vector<std::string> labels;
  std::optional<std::vector<double>> covariate;

  // Throws InvalidInput unless symmetric (1e-6), zero-diagonal and
  // non-negative.
  void validate() const;
};

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  // Degrees of freedom: (df, 0) for t, (df1, df2) for F.
  double dof1 = 0.0;
  double dof2 = 0.0;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

enum class TTestVariance { welch, pooled };

TestReport two_sample_t(std::span<const double> a, std::span<const double> b,
                        TTestVariance variance = TTestVariance::welch);

// Rows are samples, columns are score components.
TestReport hotelling_t2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

TestReport covariate_correlation(std::span<const double> scores,
                                 std::span<const double> covariate);

enum class PermutationStatistic { between_minus_within, pseudo_f };

std::string to_string(PermutationStatistic statistic);
PermutationStatistic parse_permutation_statistic(const std::string& tag);

double permutation_statistic(const Eigen::MatrixXd& d,
                             std::span<const int> labels,
                             PermutationStatistic statistic);

// Labels are 0/1 group memberships.
TestReport permutation_test(
    const DistanceMatrix& dist, std::span<const int> labels,
    std::size_t n_perm, std::uint64_t seed,
    PermutationStatistic statistic = PermutationStatistic::between_minus_within);

struct MdsResult {
  // m x k' coordinates, k' <= k.
  Eigen::MatrixXd coordinates;
  Eigen::VectorXd eigenvalues;
  // Set when fewer than k positive eigenvalues were available.
  bool truncated = false;
};

MdsResult classical_mds(const DistanceMatrix& dist, std::size_t k);

}  // namespace egraph
