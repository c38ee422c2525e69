#pragma once

// Elastic shape analysis of open curves in R^2 / R^3 using the square-root
// velocity representation. All curves are sampled on a uniform grid over
// [0,1]; the L2 inner product uses trapezoidal weights on that grid.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace egraph {

// T x d sample points, parameter uniform on [0,1].
struct Curve {
  Eigen::MatrixXd points;

  Eigen::Index samples() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

// Square-root velocity function sampled on the same grid as its curve.
// The all-zero Srvf represents a null edge.
struct Srvf {
  Eigen::MatrixXd values;

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
  bool is_null() const { return values.size() == 0 || values.isZero(0.0); }

  static Srvf zero(Eigen::Index samples, Eigen::Index dim) {
    return {Eigen::MatrixXd::Zero(samples, dim)};
  }
};

// Grid values of a non-decreasing map of [0,1] onto itself.
struct Reparam {
  Eigen::VectorXd gamma;

  static Reparam identity(Eigen::Index samples);
};

// Proper rotation (orthogonal, det = +1).
struct Rotation {
  Eigen::MatrixXd matrix;

  static Rotation identity(Eigen::Index dim) {
    return {Eigen::MatrixXd::Identity(dim, dim)};
  }
};

struct AlignOptions {
  int max_rounds = 10;
  double tolerance = 1e-8;
};

// Result of aligning a moving Srvf onto a fixed target: aligned equals
// rotation * ((moving reversed if `reversed`) * gamma).
struct Alignment {
  Srvf aligned;
  Rotation rotation;
  Reparam gamma;
  bool reversed = false;
  double distance = 0.0;
};

// Symmetrized comparison of two edge shapes. distance is d_s, the
// inner product is the aligned affinity sup <q1, O (q2 * gamma)>.
struct ShapeComparison {
  double distance = 0.0;
  double inner_product = 0.0;
};

// Trapezoidal quadrature weights on the uniform T-point grid of [0,1].
Eigen::VectorXd quadrature_weights(Eigen::Index samples);

double l2_inner(const Srvf& q1, const Srvf& q2);
double l2_norm(const Srvf& q);

// Scale-aware threshold below which a speed counts as zero.
double speed_epsilon(const Curve& curve);

Srvf srvf(const Curve& curve);
Curve recover_curve(const Srvf& q, const Eigen::RowVectorXd& start);

double curve_length(const Curve& curve);
// Polyline resampled to `samples` points equally spaced in arc length.
Curve resample_arc_length(const Curve& curve, Eigen::Index samples);
// beta(1 - t). The Srvf counterpart is -q(1 - t).
Curve reversed(const Curve& curve);
Srvf reversed(const Srvf& q);

Srvf rotate(const Rotation& rotation, const Srvf& q);
// (q o gamma) sqrt(gamma'), q interpolated linearly, gamma' by finite
// differences.
Srvf apply_reparam(const Srvf& q, const Reparam& gamma);

Rotation optimal_rotation(const Srvf& q1, const Srvf& q2);
Reparam optimal_reparam(const Srvf& q1, const Srvf& q2);
// Coordinate descent on the interior values of gamma, lowering the
// trapezoidal ||q1 - (q2 o gamma) sqrt(gamma')||^2 of the piecewise-linear
// warp; segment slopes stay within the lattice's range.
Reparam refine_reparam(const Srvf& q1, const Srvf& q2, Reparam gamma,
                       int sweeps = 6);

// Lattice steps (a, b), 1 <= a, b <= 7 with gcd(a, b) = 1, used by the
// reparameterization search.
const std::vector<std::pair<int, int>>& reparam_steps();

// Best alignment of `moving` onto `target` (rotation and reparameterization,
// both orientations of `moving`). Minimizes the L2 distance.
Alignment align(const Srvf& target, const Srvf& moving,
                const AlignOptions& options = {});

ShapeComparison compare_shapes(const Srvf& q1, const Srvf& q2,
                               const AlignOptions& options = {});

double shape_distance(const Srvf& q1, const Srvf& q2,
                      const AlignOptions& options = {});
double shape_distance(const Curve& c1, const Curve& c2,
                      const AlignOptions& options = {});
double edge_inner_product(const Srvf& q1, const Srvf& q2,
                          const AlignOptions& options = {});

// Straight-line interpolation between q1 and q2 aligned onto q1, sampled at
// t = k / (steps - 1).
std::vector<Srvf> srvf_geodesic(const Srvf& q1, const Srvf& q2,
                                std::size_t steps,
                                const AlignOptions& options = {});
std::vector<Curve> curve_geodesic(const Curve& c1, const Curve& c2,
                                  std::size_t steps,
                                  const AlignOptions& options = {});

}  // namespace egraph
