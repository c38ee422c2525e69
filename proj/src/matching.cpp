#include "egraph/matching.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "egraph/error.hpp"
#include "egraph/hungarian.hpp"

namespace egraph {
namespace {

constexpr std::size_t kExactMax = 8;
// The dense affinity holds n^4 entries.
constexpr std::size_t kLawlerMax = 64;

std::size_t slot_count(std::size_t n) { return n * (n > 0 ? n - 1 : 0) / 2; }

void require_equal_size(const GraphShape& a1, const GraphShape& a2) {
  if (a1.size() != a2.size()) {
    throw InvalidInput("matching needs equal padded sizes, got " +
                       std::to_string(a1.size()) + " and " +
                       std::to_string(a2.size()));
  }
  if (a1.dim() != a2.dim() || a1.samples() != a2.samples()) {
    throw InvalidInput("graphs use different edge grids or dimensions");
  }
}

// Runs job(r) for r in [0, count) on all hardware threads.
template <typename Job>
void parallel_rows(std::size_t count, Job job) {
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
  if (workers <= 1) {
    for (std::size_t r = 0; r < count; ++r) job(r);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t r = w; r < count; r += workers) job(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Eigen::MatrixXd reshape_nodes(const Eigen::VectorXd& x, std::size_t n) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) =
          x(static_cast<Eigen::Index>(a * n + i));
    }
  }
  return m;
}

Eigen::VectorXd flatten_nodes(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd x(n * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index i = 0; i < n; ++i) x(a * n + i) = m(a, i);
  }
  return x;
}

Permutation project_to_permutation(const Eigen::MatrixXd& scores) {
  return Permutation(max_weight_assignment(scores));
}

Permutation spectral_solve(const AffinityMatrix& k, const MatchOptions& opt) {
  const std::size_t n = k.n;
  const Eigen::Index dim = static_cast<Eigen::Index>(n * n);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(
      dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (int it = 0; it < opt.power_iterations; ++it) {
    Eigen::VectorXd y = k.k * x;
    const double norm = y.norm();
    if (norm == 0.0) break;
    y /= norm;
    const double change = (y - x).norm();
    x = std::move(y);
    if (change < 1e-12) break;
  }
  return project_to_permutation(reshape_nodes(x, n));
}

void sinkhorn(Eigen::MatrixXd& m, int sweeps) {
  for (int s = 0; s < sweeps; ++s) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double sum = m.row(r).sum();
      if (sum > 0.0) m.row(r) /= sum;
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double sum = m.col(c).sum();
      if (sum > 0.0) m.col(c) /= sum;
    }
  }
}

Permutation graduated_solve(const AffinityMatrix& k, const MatchOptions& opt) {
  const std::size_t n = k.n;
  const GraduatedSchedule& s = opt.schedule;
  if (!(s.beta_start > 0.0) || !(s.beta_rate > 1.0) ||
      s.beta_max < s.beta_start || s.sinkhorn_sweeps < 1 ||
      s.inner_iterations < 1) {
    throw UsageError("invalid graduated assignment schedule");
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Constant(nn, nn, 1.0 / static_cast<double>(n));
  const double peak = k.k.size() > 0 ? k.k.maxCoeff() : 0.0;
  if (peak > 0.0) {
    // Temperatures act on affinities rescaled to a unit maximum.
    const Eigen::MatrixXd scaled = k.k / peak;
    for (double beta = s.beta_start; beta <= s.beta_max; beta *= s.beta_rate) {
      for (int it = 0; it < s.inner_iterations; ++it) {
        const Eigen::MatrixXd q = reshape_nodes(scaled * flatten_nodes(m), n);
        m = (beta * (q.array() - q.maxCoeff())).exp().matrix();
        sinkhorn(m, s.sinkhorn_sweeps);
      }
    }
  }
  return project_to_permutation(m);
}

Permutation exact_lawler(const AffinityMatrix& k) {
  if (k.n > kExactMax) {
    throw InvalidInput("exact Lawler search is limited to 8 nodes");
  }
  std::vector<std::size_t> mapping(k.n);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  Permutation best = Permutation::identity(k.n);
  double best_value = lawler_objective(k, best);
  while (std::next_permutation(mapping.begin(), mapping.end())) {
    Permutation p(mapping);
    const double value = lawler_objective(k, p);
    if (value > best_value + 1e-12 * std::max(1.0, std::abs(best_value))) {
      best_value = value;
      best = std::move(p);
    }
  }
  return best;
}

}  // namespace

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::exact:
      return "exact";
    case Solver::spectral:
      return "spectral";
    case Solver::graduated:
      return "graduated";
  }
  return "unknown";
}

Solver parse_solver(const std::string& tag) {
  if (tag == "exact") return Solver::exact;
  if (tag == "spectral") return Solver::spectral;
  if (tag == "graduated") return Solver::graduated;
  throw UsageError("unknown solver '" + tag +
                   "' (expected exact, spectral or graduated)");
}

EdgePairTable::EdgePairTable(const GraphShape& a1, const GraphShape& a2,
                             const AlignOptions& options)
    : n_(a1.size()),
      slot1_(slot_count(a1.size()), -1),
      slot2_(slot_count(a2.size()), -1) {
  require_equal_size(a1, a2);
  const auto edges1 = a1.edge_list();
  const auto edges2 = a2.edge_list();
  const Srvf zero = Srvf::zero(a1.samples(), a1.dim());

  std::vector<const Srvf*> q1, q2;
  for (const auto& [a, b] : edges1) {
    slot1_[GraphShape::pair_index(a, b, n_)] = static_cast<int>(q1.size());
    q1.push_back(&a1.edge(a, b)->q);
    norm1_.push_back(shape_distance(*q1.back(), zero, options));
  }
  for (const auto& [i, j] : edges2) {
    slot2_[GraphShape::pair_index(i, j, n_)] = static_cast<int>(q2.size());
    q2.push_back(&a2.edge(i, j)->q);
    norm2_.push_back(shape_distance(zero, *q2.back(), options));
  }

  const auto rows = static_cast<Eigen::Index>(q1.size());
  const auto cols = static_cast<Eigen::Index>(q2.size());
  distance_.resize(rows, cols);
  affinity_.resize(rows, cols);
  parallel_rows(q1.size(), [&](std::size_t r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const ShapeComparison cmp = compare_shapes(
          *q1[r], *q2[static_cast<std::size_t>(c)], options);
      distance_(static_cast<Eigen::Index>(r), c) = cmp.distance;
      affinity_(static_cast<Eigen::Index>(r), c) =
          std::max(0.0, cmp.inner_product);
    }
  });
}

int EdgePairTable::id1(std::size_t a, std::size_t b) const {
  if (a == b) return -1;
  if (a > b) std::swap(a, b);
  return slot1_[GraphShape::pair_index(a, b, n_)];
}

int EdgePairTable::id2(std::size_t i, std::size_t j) const {
  if (i == j) return -1;
  if (i > j) std::swap(i, j);
  return slot2_[GraphShape::pair_index(i, j, n_)];
}

double EdgePairTable::distance(std::size_t a, std::size_t b, std::size_t i,
                               std::size_t j) const {
  const int e1 = id1(a, b);
  const int e2 = id2(i, j);
  if (e1 < 0 && e2 < 0) return 0.0;
  if (e1 < 0) return norm2_[static_cast<std::size_t>(e2)];
  if (e2 < 0) return norm1_[static_cast<std::size_t>(e1)];
  return distance_(e1, e2);
}

double EdgePairTable::affinity(std::size_t a, std::size_t b, std::size_t i,
                               std::size_t j) const {
  const int e1 = id1(a, b);
  const int e2 = id2(i, j);
  if (e1 < 0 || e2 < 0) return 0.0;
  return affinity_(e1, e2);
}

double EdgePairTable::preshape_distance(const Permutation& p) const {
  std::vector<double> terms;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (id1(p(i), p(j)) < 0 && id2(i, j) < 0) continue;
      const double d = distance(p(i), p(j), i, j);
      terms.push_back(d * d);
    }
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return std::sqrt(2.0 * sum);
}

double EdgePairTable::lawler_objective(const Permutation& p) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      sum += affinity(p(i), p(j), i, j);
    }
  }
  return 2.0 * sum;
}

AffinityMatrix build_affinity(const EdgePairTable& table) {
  const std::size_t n = table.size();
  const auto dim = static_cast<Eigen::Index>(n * n);
  AffinityMatrix out{Eigen::MatrixXd::Zero(dim, dim), n};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          out.k(static_cast<Eigen::Index>(a * n + i),
                static_cast<Eigen::Index>(b * n + j)) =
              table.affinity(a, b, i, j);
        }
      }
    }
  }
  return out;
}

AffinityMatrix build_affinity(const GraphShape& a1, const GraphShape& a2,
                              const AlignOptions& options) {
  return build_affinity(EdgePairTable(a1, a2, options));
}

double lawler_objective(const AffinityMatrix& k, const Permutation& p) {
  if (p.size() != k.n) {
    throw InvalidInput("permutation size does not match affinity matrix");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k.n; ++i) {
    for (std::size_t j = 0; j < k.n; ++j) sum += k(p(i), i, p(j), j);
  }
  return sum;
}

Permutation solve_lawler(const AffinityMatrix& k, Solver solver,
                         const MatchOptions& options) {
  if (k.k.rows() != static_cast<Eigen::Index>(k.n * k.n) ||
      k.k.cols() != k.k.rows()) {
    throw InvalidInput("affinity matrix must be n^2 x n^2");
  }
  if (k.n == 0) return Permutation::identity(0);
  switch (solver) {
    case Solver::exact:
      return exact_lawler(k);
    case Solver::spectral:
      return spectral_solve(k, options);
    case Solver::graduated:
      return graduated_solve(k, options);
  }
  throw UsageError("unknown solver");
}

MatchResult match_exact(const GraphShape& a1, const GraphShape& a2,
                        const MatchOptions& options) {
  require_equal_size(a1, a2);
  const std::size_t n = a1.size();
  if (n > kExactMax) {
    throw InvalidInput("exact matching enumerates n! permutations and is "
                       "limited to 8 nodes (got " + std::to_string(n) +
                       "); use the spectral or graduated solver");
  }
  const EdgePairTable table(a1, a2, options.align);

  // Squared d_s for every (slot of A1, slot of A2).
  const std::size_t slots = slot_count(n);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  Eigen::MatrixXd sq(static_cast<Eigen::Index>(slots),
                     static_cast<Eigen::Index>(slots));
  for (std::size_t u = 0; u < slots; ++u) {
    for (std::size_t v = 0; v < slots; ++v) {
      const double d = table.distance(pairs[u].first, pairs[u].second,
                                      pairs[v].first, pairs[v].second);
      sq(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = d * d;
    }
  }

  std::vector<std::size_t> mapping(n);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  auto cost = [&](const std::vector<std::size_t>& m) {
    double sum = 0.0;
    for (std::size_t v = 0; v < slots; ++v) {
      std::size_t a = m[pairs[v].first];
      std::size_t b = m[pairs[v].second];
      if (a > b) std::swap(a, b);
      sum += sq(static_cast<Eigen::Index>(GraphShape::pair_index(a, b, n)),
                static_cast<Eigen::Index>(v));
    }
    return sum;
  };
  std::vector<std::size_t> best = mapping;
  double best_cost = cost(mapping);
  while (std::next_permutation(mapping.begin(), mapping.end())) {
    const double c = cost(mapping);
    if (c < best_cost - 1e-12 * std::max(1.0, best_cost)) {
      best_cost = c;
      best = mapping;
    }
  }

  MatchResult result;
  result.permutation = Permutation(best);
  result.quotient_distance = table.preshape_distance(result.permutation);
  result.objective = table.lawler_objective(result.permutation);
  result.solver = Solver::exact;
  return result;
}

MatchResult match_approx(const GraphShape& a1, const GraphShape& a2,
                         Solver solver, const MatchOptions& options) {
  if (solver == Solver::exact) {
    throw UsageError("match_approx takes the spectral or graduated solver");
  }
  require_equal_size(a1, a2);
  if (a1.size() > kLawlerMax) {
    throw InvalidInput("graph matching supports at most " +
                       std::to_string(kLawlerMax) + " nodes after padding, got " +
                       std::to_string(a1.size()) +
                       "; simplify the graphs first");
  }
  const EdgePairTable table(a1, a2, options.align);
  const AffinityMatrix k = build_affinity(table);

  MatchResult result;
  result.permutation = solve_lawler(k, solver, options);
  result.quotient_distance = table.preshape_distance(result.permutation);
  result.objective = lawler_objective(k, result.permutation);
  result.solver = solver;
  return result;
}

Registration register_graphs(const GraphShape& a1, const GraphShape& a2,
                             const MatchOptions& options) {
  GraphShape p1 = a1;
  GraphShape p2 = a2;
  if (a1.size() != a2.size()) {
    p1 = pad(a1, a2.size());
    p2 = pad(a2, a1.size());
  }
  const std::size_t limit = std::min(options.exact_limit, kExactMax);
  MatchResult m = p1.size() <= limit
                      ? match_exact(p1, p2, options)
                      : match_approx(p1, p2, options.approximate_solver,
                                     options);
  GraphShape registered = permute(m.permutation, p2);
  return {std::move(p1), std::move(registered), std::move(m)};
}

double quotient_distance(const GraphShape& a1, const GraphShape& a2,
                         const MatchOptions& options) {
  return register_graphs(a1, a2, options).match.quotient_distance;
}

double trace_objective(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2,
                       const Permutation& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pm(static_cast<Eigen::Index>(p(static_cast<std::size_t>(i))), i) = 1.0;
  }
  return (w1 * pm * w2 * pm.transpose()).trace();
}

Permutation scalar_qap_oracle(const Eigen::MatrixXd& w1,
                              const Eigen::MatrixXd& w2) {
  if (w1.rows() != w1.cols() || w2.rows() != w2.cols() ||
      w1.rows() != w2.rows()) {
    throw InvalidInput("weight matrices must be square and equal-sized");
  }
  const auto n = static_cast<std::size_t>(w1.rows());
  if (n > kExactMax) {
    throw InvalidInput("scalar QAP brute force is limited to 8 nodes");
  }
  if (!w1.isApprox(w1.transpose()) || !w2.isApprox(w2.transpose())) {
    throw InvalidInput("weight matrices must be symmetric");
  }
  std::vector<std::size_t> mapping(n);
  std::iota(mapping.begin(), mapping.end(), std::size_t{0});
  Permutation best = Permutation::identity(n);
  double best_value = trace_objective(w1, w2, best);
  while (std::next_permutation(mapping.begin(), mapping.end())) {
    Permutation p(mapping);
    const double value = trace_objective(w1, w2, p);
    if (value > best_value + 1e-12 * std::max(1.0, std::abs(best_value))) {
      best_value = value;
      best = std::move(p);
    }
  }
  return best;
}

}  // namespace egraph
