#pragma once

// Population summaries of elastic graphs: Karcher mean in the graph shape
// space and tangent PCA at the mean.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "egraph/graph.hpp"
#include "egraph/matching.hpp"

namespace egraph {

enum class MeanMode {
  full,      // alternate registration and averaging until convergence
  template_  // register once to the largest graph, average once
};

std::string to_string(MeanMode mode);
MeanMode parse_mean_mode(const std::string& tag);

struct MeanOptions {
  MeanMode mode = MeanMode::full;
  std::size_t max_iterations = 20;
  double relative_tolerance = 1e-6;
  // Edges present in fewer samples are hidden from display_mean().
  double presence_threshold = 0.5;
  MatchOptions match;
};

struct MeanResult {
  GraphShape mean;
  // Inputs padded to the mean's size and registered to it.
  std::vector<GraphShape> registered;
  std::vector<Permutation> permutations;
  std::size_t iterations = 0;
  double final_variance = 0.0;
  // Karcher variance of every accepted iterate, in order.
  std::vector<double> variance_history;
  // Per node pair (i < j, row-major): fraction of samples with an edge.
  std::vector<double> presence;
};

// Index of the graph with the most present edges (first on ties).
std::size_t template_index(std::span<const GraphShape> graphs);

// Karcher variance (1/m) sum_i d_a(mean, registered_i)^2.
double karcher_variance(const GraphShape& mean,
                        std::span<const GraphShape> registered,
                        const AlignOptions& options = {});

MeanResult karcher_mean(std::span<const GraphShape> graphs,
                        const MeanOptions& options = {});

// Mean with rarely present edges removed.
GraphShape display_mean(const MeanResult& result, double presence_threshold);

// Length n(n-1)/2 * T * d. Each edge block is the aligned Srvf difference
// scaled by square-root quadrature weights, so the Euclidean norm of a block
// is the L2 norm of the difference.
Eigen::VectorXd shooting_vector(const GraphShape& mean,
                                const GraphShape& registered,
                                const AlignOptions& options = {});

// Inverse of shooting_vector: the graph with edge Srvfs mean + v.
GraphShape exp_map(const GraphShape& mean, const Eigen::VectorXd& v);

struct TangentModel {
  GraphShape mean;
  MeanResult mean_result;
  // m x D, one shooting vector per sample.
  Eigen::MatrixXd shooting_vectors;
  // Column means of shooting_vectors.
  Eigen::VectorXd center;
  // Orthonormal principal directions, one per row.
  Eigen::MatrixXd directions;
  // Variance along each direction (eigenvalues of the sample covariance),
  // non-increasing.
  Eigen::VectorXd singular_values;
  // m x r principal scores of the centered shooting vectors.
  Eigen::MatrixXd scores;

  std::size_t rank(double tolerance = 1e-10) const;
};

TangentModel tangent_pca(std::span<const GraphShape> graphs,
                         const MeanOptions& options = {});

// Graph along principal direction `component`, t standard deviations away
// from the mean.
GraphShape principal_path(const TangentModel& model, std::size_t component,
                          double t);

double variance_explained(const TangentModel& model, std::size_t r);

}  // namespace egraph
