#pragma once

// Synthetic curves and graphs for tests and the acceptance runner.

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "egraph/curve.hpp"
#include "egraph/graph.hpp"

namespace synth {

using Rng = std::mt19937_64;

// Smooth open curve: a random chord plus a few sinusoidal modes.
egraph::Curve smooth_curve(Rng& rng, Eigen::Index samples, Eigen::Index dim,
                           double wiggle = 0.3);

// Smooth strictly increasing warp with gamma(0) = 0, gamma(1) = 1.
egraph::Reparam smooth_warp(Rng& rng, Eigen::Index samples,
                            double strength = 0.5);

egraph::Rotation random_rotation(Rng& rng, Eigen::Index dim);

// Apply rotation and warp to a curve by resampling the polyline at gamma.
egraph::Curve warp_curve(const egraph::Curve& c, const egraph::Reparam& gamma);
egraph::Curve rotate_curve(const egraph::Curve& c, const egraph::Rotation& r);

egraph::Permutation random_permutation(Rng& rng, std::size_t n);

// Each node pair carries an edge with probability `density`; at least one
// edge is always present.
egraph::GraphShape random_graph(Rng& rng, std::size_t nodes,
                                Eigen::Index samples, Eigen::Index dim,
                                double density = 0.5);

// Adds smooth noise of amplitude `sigma` to every edge curve.
egraph::GraphShape perturb(Rng& rng, const egraph::GraphShape& g, double sigma);

// Tree graphs sharing a main branch (root -> mid -> top) with differing
// side branches, stored with a shuffled node order.
struct TreeSample {
  egraph::GraphShape graph;
  // Node index of root, mid and top in `graph`.
  std::size_t root = 0, mid = 0, top = 0;
};

struct TreeFamily {
  egraph::Curve lower;  // root -> mid
  egraph::Curve upper;  // mid -> top
  std::vector<TreeSample> trees;
};

TreeFamily tree_family(Rng& rng, std::size_t count, Eigen::Index samples);

}  // namespace synth
