#include "egraph/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include "egraph/error.hpp"

namespace egraph {
namespace {

// Largest lattice step (in grid cells) along either axis of the
// reparameterization search.
constexpr int kStepReach = 7;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + " contains non-finite values");
  }
}

void require_same_grid(const Srvf& q1, const Srvf& q2) {
  if (q1.samples() != q2.samples() || q1.dim() != q2.dim()) {
    throw InvalidInput("srvf grid mismatch: " + std::to_string(q1.samples()) +
                       "x" + std::to_string(q1.dim()) + " vs " +
                       std::to_string(q2.samples()) + "x" +
                       std::to_string(q2.dim()));
  }
  if (q1.samples() < 2) {
    throw InvalidInput("srvf needs at least 2 samples");
  }
}

double grid_step(Eigen::Index samples) {
  return 1.0 / static_cast<double>(samples - 1);
}

// Linear interpolation of the rows of `m` at fractional row index `u`.
Eigen::RowVectorXd interpolate_row(const Eigen::MatrixXd& m, double u) {
  const Eigen::Index last = m.rows() - 1;
  u = std::clamp(u, 0.0, static_cast<double>(last));
  const auto lo = static_cast<Eigen::Index>(std::floor(u));
  const double frac = u - static_cast<double>(lo);
  if (lo >= last || frac == 0.0) {
    return m.row(std::min(lo, last));
  }
  return (1.0 - frac) * m.row(lo) + frac * m.row(lo + 1);
}

double squared_distance(const Srvf& q1, const Srvf& q2) {
  const Eigen::VectorXd w = quadrature_weights(q1.samples());
  return (q1.values - q2.values).rowwise().squaredNorm().dot(w);
}

// Normalized cumulative arc length of the curve behind q (speed |q|^2).
Eigen::VectorXd arc_fraction(const Srvf& q) {
  const Eigen::Index n = q.samples();
  const Eigen::VectorXd speed = q.values.rowwise().squaredNorm();
  Eigen::VectorXd s(n);
  s(0) = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    s(i) = s(i - 1) + 0.5 * (speed(i - 1) + speed(i));
  }
  if (s(n - 1) <= 0.0) return Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  return s / s(n - 1);
}

// Warp that carries moving's arc-length fraction onto target's.
Reparam arc_length_match(const Srvf& target, const Srvf& moving) {
  const Eigen::Index n = target.samples();
  const Eigen::VectorXd s1 = arc_fraction(target);
  const Eigen::VectorXd s2 = arc_fraction(moving);
  const double h = grid_step(n);
  Reparam out{Eigen::VectorXd(n)};
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    while (k + 2 < n && s2(k + 1) < s1(i)) ++k;
    const double span = s2(k + 1) - s2(k);
    const double frac =
        span > 0.0 ? std::clamp((s1(i) - s2(k)) / span, 0.0, 1.0) : 0.0;
    out.gamma(i) = (static_cast<double>(k) + frac) * h;
  }
  out.gamma(0) = 0.0;
  out.gamma(n - 1) = 1.0;
  // Keep gamma strictly increasing.
  for (Eigen::Index i = 1; i < n; ++i) {
    out.gamma(i) = std::max(out.gamma(i), out.gamma(i - 1) + 1e-9 * h);
  }
  out.gamma(n - 1) = 1.0;
  return out;
}

// Alternates rotation and reparameterization from `start`, folding every
// state into `best`.
void alternate(const Srvf& target, const Srvf& moving, Reparam gamma,
               bool warped, const AlignOptions& options, Alignment& best) {
  double previous = std::numeric_limits<double>::infinity();
  for (int round = 0; round < options.max_rounds; ++round) {
    const Srvf warped_q = warped ? apply_reparam(moving, gamma) : moving;
    const Rotation rotation = optimal_rotation(target, warped_q);
    Srvf candidate = rotate(rotation, warped_q);
    double d = std::sqrt(squared_distance(target, candidate));
    if (d < best.distance) {
      best = {std::move(candidate), rotation, gamma, false, d};
    }
    double reached = d;

    const Srvf rotated = rotate(rotation, moving);
    gamma = refine_reparam(target, rotated, optimal_reparam(target, rotated));
    warped = true;
    candidate = rotate(rotation, apply_reparam(moving, gamma));
    d = std::sqrt(squared_distance(target, candidate));
    if (d < best.distance) {
      best = {std::move(candidate), rotation, gamma, false, d};
    }
    reached = std::min(reached, d);

    if (previous - reached < options.tolerance) break;
    previous = reached;
  }
}

// Two starts: the inputs as given, and arc-length matched parameterizations.
Alignment align_oriented(const Srvf& target, const Srvf& moving,
                         const AlignOptions& options) {
  const Eigen::Index dim = target.dim();
  Alignment best{moving, Rotation::identity(dim),
                 Reparam::identity(moving.samples()), false,
                 std::sqrt(squared_distance(target, moving))};
  alternate(target, moving, Reparam::identity(moving.samples()), false,
            options, best);
  alternate(target, moving, arc_length_match(target, moving), true, options,
            best);
  return best;
}

}  // namespace

Reparam Reparam::identity(Eigen::Index samples) {
  return {Eigen::VectorXd::LinSpaced(samples, 0.0, 1.0)};
}

Eigen::VectorXd quadrature_weights(Eigen::Index samples) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(samples, grid_step(samples));
  w(0) *= 0.5;
  w(samples - 1) *= 0.5;
  return w;
}

double l2_inner(const Srvf& q1, const Srvf& q2) {
  require_same_grid(q1, q2);
  const Eigen::VectorXd w = quadrature_weights(q1.samples());
  return q1.values.cwiseProduct(q2.values).rowwise().sum().dot(w);
}

double l2_norm(const Srvf& q) {
  if (q.samples() < 2) return 0.0;
  const Eigen::VectorXd w = quadrature_weights(q.samples());
  return std::sqrt(q.values.rowwise().squaredNorm().dot(w));
}

double speed_epsilon(const Curve& curve) {
  double diameter = 0.0;
  for (Eigen::Index i = 0; i < curve.samples(); ++i) {
    for (Eigen::Index j = i + 1; j < curve.samples(); ++j) {
      diameter = std::max(
          diameter, (curve.points.row(i) - curve.points.row(j)).norm());
    }
  }
  return 1e-8 * (diameter + 1.0);
}

Srvf srvf(const Curve& curve) {
  const Eigen::Index n = curve.samples();
  if (n < 2) throw InvalidInput("curve needs at least 2 samples");
  require_finite(curve.points, "curve");

  const Eigen::MatrixXd& p = curve.points;
  const double h = grid_step(n);
  Eigen::MatrixXd velocity(n, curve.dim());
  if (n == 2) {
    velocity.row(0) = (p.row(1) - p.row(0)) / h;
    velocity.row(1) = velocity.row(0);
  } else {
    velocity.row(0) = (-3.0 * p.row(0) + 4.0 * p.row(1) - p.row(2)) / (2.0 * h);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      velocity.row(i) = (p.row(i + 1) - p.row(i - 1)) / (2.0 * h);
    }
    velocity.row(n - 1) =
        (3.0 * p.row(n - 1) - 4.0 * p.row(n - 2) + p.row(n - 3)) / (2.0 * h);
  }

  const double eps = speed_epsilon(curve);
  Srvf q{Eigen::MatrixXd::Zero(n, curve.dim())};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double speed = velocity.row(i).norm();
    if (speed > eps) q.values.row(i) = velocity.row(i) / std::sqrt(speed);
  }
  return q;
}

Curve recover_curve(const Srvf& q, const Eigen::RowVectorXd& start) {
  const Eigen::Index n = q.samples();
  if (n < 2) throw InvalidInput("srvf needs at least 2 samples");
  if (start.size() != q.dim()) {
    throw InvalidInput("start point dimension does not match srvf");
  }
  require_finite(q.values, "srvf");

  Eigen::MatrixXd integrand(n, q.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    integrand.row(i) = q.values.row(i) * q.values.row(i).norm();
  }
  const double h = grid_step(n);
  Curve c{Eigen::MatrixXd(n, q.dim())};
  c.points.row(0) = start;
  for (Eigen::Index i = 1; i < n; ++i) {
    c.points.row(i) = c.points.row(i - 1) +
                      0.5 * h * (integrand.row(i - 1) + integrand.row(i));
  }
  return c;
}

double curve_length(const Curve& curve) {
  double length = 0.0;
  for (Eigen::Index i = 1; i < curve.samples(); ++i) {
    length += (curve.points.row(i) - curve.points.row(i - 1)).norm();
  }
  return length;
}

Curve resample_arc_length(const Curve& curve, Eigen::Index samples) {
  if (curve.samples() < 2) throw InvalidInput("curve needs at least 2 samples");
  if (samples < 2) throw InvalidInput("resampling needs at least 2 samples");
  require_finite(curve.points, "curve");

  const Eigen::MatrixXd& p = curve.points;
  std::vector<double> cumulative(static_cast<std::size_t>(p.rows()), 0.0);
  for (Eigen::Index i = 1; i < p.rows(); ++i) {
    cumulative[i] = cumulative[i - 1] + (p.row(i) - p.row(i - 1)).norm();
  }
  const double total = cumulative.back();

  Curve out{Eigen::MatrixXd(samples, p.cols())};
  if (total == 0.0) {
    out.points.rowwise() = p.row(0);
    return out;
  }
  Eigen::Index seg = 1;
  for (Eigen::Index k = 0; k < samples; ++k) {
    if (k == samples - 1) {
      out.points.row(k) = p.row(p.rows() - 1);
      break;
    }
    const double target = total * static_cast<double>(k) /
                          static_cast<double>(samples - 1);
    while (seg < p.rows() - 1 && cumulative[seg] < target) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double frac =
        len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / len, 0.0, 1.0)
                  : 0.0;
    out.points.row(k) = (1.0 - frac) * p.row(seg - 1) + frac * p.row(seg);
  }
  return out;
}

Curve reversed(const Curve& curve) {
  return {curve.points.colwise().reverse()};
}

Srvf reversed(const Srvf& q) { return {-q.values.colwise().reverse()}; }

Srvf rotate(const Rotation& rotation, const Srvf& q) {
  return {q.values * rotation.matrix.transpose()};
}

Srvf apply_reparam(const Srvf& q, const Reparam& gamma) {
  const Eigen::Index n = q.samples();
  if (gamma.gamma.size() != n) {
    throw InvalidInput("reparameterization grid does not match srvf");
  }
  const Eigen::VectorXd& g = gamma.gamma;
  const double h = grid_step(n);
  const double scale = static_cast<double>(n - 1);

  Eigen::VectorXd slope(n);
  if (n == 2) {
    slope.setConstant((g(1) - g(0)) / h);
  } else {
    slope(0) = (g(1) - g(0)) / h;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      slope(i) = (g(i + 1) - g(i - 1)) / (2.0 * h);
    }
    slope(n - 1) = (g(n - 1) - g(n - 2)) / h;
  }

  Srvf out{Eigen::MatrixXd(n, q.dim())};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values.row(i) = interpolate_row(q.values, g(i) * scale) *
                        std::sqrt(std::max(slope(i), 0.0));
  }
  return out;
}

Rotation optimal_rotation(const Srvf& q1, const Srvf& q2) {
  require_same_grid(q1, q2);
  const Eigen::Index d = q1.dim();
  const Eigen::VectorXd w = quadrature_weights(q1.samples());
  const Eigen::MatrixXd cross =
      q1.values.transpose() * w.asDiagonal() * q2.values;
  if (cross.norm() == 0.0) return Rotation::identity(d);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(d - 1) *= -1.0;
  return {u * v.transpose()};
}

const std::vector<std::pair<int, int>>& reparam_steps() {
  static const std::vector<std::pair<int, int>> steps = [] {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= kStepReach; ++i) {
      for (int j = 1; j <= kStepReach; ++j) {
        if (std::gcd(i, j) == 1) out.emplace_back(i, j);
      }
    }
    return out;
  }();
  return steps;
}

Reparam optimal_reparam(const Srvf& q1, const Srvf& q2) {
  require_same_grid(q1, q2);
  const Eigen::Index n = q1.samples();
  const double h = grid_step(n);
  const auto& steps = reparam_steps();

  // Pointwise products q1(t_s) . q2(t_r).
  const Eigen::MatrixXd gram = q1.values * q2.values.transpose();

  // Trapezoidal integral of q1 . (q2 o gamma) sqrt(gamma') over a segment
  // (k,l) -> (k+a,l+b) of a piecewise-linear gamma. The interpolation
  // offsets depend only on the step, so they are tabulated once.
  struct Term {
    Eigen::Index row;
    Eigen::Index col;
    double frac;
    double weight;
  };
  std::vector<std::vector<Term>> plans(steps.size());
  std::vector<double> scales(steps.size());
  for (std::size_t st = 0; st < steps.size(); ++st) {
    const auto [a, b] = steps[st];
    scales[st] = h * std::sqrt(static_cast<double>(b) / static_cast<double>(a));
    for (int m = 0; m <= a; ++m) {
      const int whole = (b * m) / a;
      plans[st].push_back({m, whole,
                           static_cast<double>(b * m - whole * a) /
                               static_cast<double>(a),
                           (m == 0 || m == a) ? 0.5 : 1.0});
    }
  }
  auto segment = [&](std::size_t st, Eigen::Index k, Eigen::Index l) {
    double sum = 0.0;
    for (const Term& t : plans[st]) {
      double value = gram(k + t.row, l + t.col);
      if (t.frac > 0.0) {
        value = (1.0 - t.frac) * value + t.frac * gram(k + t.row, l + t.col + 1);
      }
      sum += t.weight * value;
    }
    return sum * scales[st];
  };

  constexpr double kUnreached = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd value = Eigen::MatrixXd::Constant(n, n, kUnreached);
  Eigen::MatrixXi from(n, n);
  from.setConstant(-1);
  value(0, 0) = 0.0;

  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 1; j < n; ++j) {
      double best = kUnreached;
      int best_step = -1;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const Eigen::Index k = i - steps[s].first;
        const Eigen::Index l = j - steps[s].second;
        if (k < 0 || l < 0 || value(k, l) == kUnreached) continue;
        const double candidate = value(k, l) + segment(s, k, l);
        if (candidate > best) {
          best = candidate;
          best_step = static_cast<int>(s);
        }
      }
      value(i, j) = best;
      from(i, j) = best_step;
    }
  }

  Reparam out{Eigen::VectorXd(n)};
  Eigen::Index i = n - 1;
  Eigen::Index j = n - 1;
  out.gamma(i) = 1.0;
  while (i > 0) {
    const auto& step = steps[static_cast<std::size_t>(from(i, j))];
    const Eigen::Index k = i - step.first;
    const Eigen::Index l = j - step.second;
    const double slope =
        static_cast<double>(j - l) / static_cast<double>(i - k);
    for (Eigen::Index s = k; s < i; ++s) {
      out.gamma(s) =
          (static_cast<double>(l) + slope * static_cast<double>(s - k)) * h;
    }
    i = k;
    j = l;
  }
  out.gamma(0) = 0.0;
  out.gamma(n - 1) = 1.0;
  return out;
}

Reparam refine_reparam(const Srvf& q1, const Srvf& q2, Reparam gamma,
                       int sweeps) {
  require_same_grid(q1, q2);
  const Eigen::Index n = q1.samples();
  if (gamma.gamma.size() != n) {
    throw InvalidInput("reparameterization grid does not match srvf");
  }
  if (n < 3) return gamma;
  Eigen::VectorXd& g = gamma.gamma;
  const double h = grid_step(n);
  const double scale = static_cast<double>(n - 1);
  const Eigen::Index dim = q1.dim();
  const Eigen::Index last = n - 1;
  // Segment slopes stay within the range the lattice can express.
  const double min_slope = 1.0 / kStepReach;
  const double max_slope = kStepReach;

  // |q1(t_i) - q2(g_i) root|^2.
  auto residual = [&](Eigen::Index i, double root) {
    const double u = std::clamp(g(i) * scale, 0.0, static_cast<double>(last));
    const Eigen::Index lo = std::min(static_cast<Eigen::Index>(u), last - 1);
    const double frac = u - static_cast<double>(lo);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double moved =
          ((1.0 - frac) * q2.values(lo, c) + frac * q2.values(lo + 1, c)) *
          root;
      const double r = q1.values(i, c) - moved;
      sum += r * r;
    }
    return sum;
  };
  // Trapezoid of |q1 - (q2 o gamma) sqrt(gamma')|^2 over [t_s, t_s+1] with
  // gamma linear on the segment.
  auto segment_cost = [&](Eigen::Index s) {
    const double root = std::sqrt((g(s + 1) - g(s)) / h);
    return 0.5 * h * (residual(s, root) + residual(s + 1, root));
  };
  auto local_cost = [&](Eigen::Index i) {
    return segment_cost(i - 1) + segment_cost(i);
  };

  constexpr double kGolden = 0.6180339887498949;
  constexpr int kSectionSteps = 20;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double gained = 0.0;
    for (Eigen::Index i = 1; i < last; ++i) {
      const double keep = g(i);
      const double start = local_cost(i);
      double lo = std::max(g(i - 1) + min_slope * h, g(i + 1) - max_slope * h);
      double hi = std::min(g(i - 1) + max_slope * h, g(i + 1) - min_slope * h);
      if (!(lo < hi)) continue;
      auto cost_at = [&](double v) {
        g(i) = v;
        return local_cost(i);
      };
      double x1 = hi - kGolden * (hi - lo);
      double x2 = lo + kGolden * (hi - lo);
      double f1 = cost_at(x1);
      double f2 = cost_at(x2);
      for (int step = 0; step < kSectionSteps; ++step) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kGolden * (hi - lo);
          f1 = cost_at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kGolden * (hi - lo);
          f2 = cost_at(x2);
        }
      }
      if (std::min(f1, f2) < start) {
        g(i) = f1 < f2 ? x1 : x2;
        gained += start - std::min(f1, f2);
      } else {
        g(i) = keep;
      }
    }
    if (gained <= 1e-14) break;
  }
  return gamma;
}

Alignment align(const Srvf& target, const Srvf& moving,
                const AlignOptions& options) {
  require_same_grid(target, moving);
  if (target.is_null() || moving.is_null()) {
    return {moving, Rotation::identity(target.dim()),
            Reparam::identity(target.samples()), false,
            std::sqrt(squared_distance(target, moving))};
  }
  Alignment forward = align_oriented(target, moving, options);
  Alignment backward = align_oriented(target, reversed(moving), options);
  if (backward.distance < forward.distance) {
    backward.reversed = true;
    return backward;
  }
  return forward;
}

ShapeComparison compare_shapes(const Srvf& q1, const Srvf& q2,
                               const AlignOptions& options) {
  require_same_grid(q1, q2);
  if (q1.is_null() || q2.is_null()) {
    return {std::sqrt(squared_distance(q1, q2)), 0.0};
  }
  const Alignment a12 = align(q1, q2, options);
  const Alignment a21 = align(q2, q1, options);
  return {std::min(a12.distance, a21.distance),
          std::max(l2_inner(q1, a12.aligned), l2_inner(q2, a21.aligned))};
}

double shape_distance(const Srvf& q1, const Srvf& q2,
                      const AlignOptions& options) {
  return compare_shapes(q1, q2, options).distance;
}

double shape_distance(const Curve& c1, const Curve& c2,
                      const AlignOptions& options) {
  if (c1.dim() != c2.dim()) {
    throw InvalidInput("curves live in different ambient dimensions");
  }
  if (c1.samples() != c2.samples()) {
    throw InvalidInput("curves must be resampled to a common grid");
  }
  return shape_distance(srvf(c1), srvf(c2), options);
}

double edge_inner_product(const Srvf& q1, const Srvf& q2,
                          const AlignOptions& options) {
  return compare_shapes(q1, q2, options).inner_product;
}

std::vector<Srvf> srvf_geodesic(const Srvf& q1, const Srvf& q2,
                                std::size_t steps,
                                const AlignOptions& options) {
  if (steps < 2) throw InvalidInput("geodesic needs at least 2 steps");
  const Srvf end = align(q1, q2, options).aligned;
  std::vector<Srvf> path;
  path.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    path.push_back({(1.0 - t) * q1.values + t * end.values});
  }
  return path;
}

std::vector<Curve> curve_geodesic(const Curve& c1, const Curve& c2,
                                  std::size_t steps,
                                  const AlignOptions& options) {
  if (steps < 2) throw InvalidInput("geodesic needs at least 2 steps");
  if (c1.dim() != c2.dim() || c1.samples() != c2.samples()) {
    throw InvalidInput("curves must share grid and dimension");
  }
  const Srvf q1 = srvf(c1);
  const Srvf q2 = srvf(c2);
  const Alignment a = align(q1, q2, options);
  const Eigen::RowVectorXd start1 = c1.points.row(0);
  const Eigen::RowVectorXd start2 =
      a.reversed ? c2.points.row(c2.samples() - 1) : c2.points.row(0);

  std::vector<Curve> path;
  path.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
    const Srvf q{(1.0 - t) * q1.values + t * a.aligned.values};
    path.push_back(recover_curve(q, (1.0 - t) * start1 + t * start2));
  }
  return path;
}

}  // namespace egraph
