#include "egraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "egraph/error.hpp"

namespace egraph {

Edge Edge::from_curve(Curve curve, std::size_t from) {
  Srvf q = srvf(curve);
  return {std::move(curve), std::move(q), from};
}

Edge Edge::from_srvf(Srvf q, const Eigen::RowVectorXd& start,
                     std::size_t from) {
  Curve curve = recover_curve(q, start);
  return {std::move(curve), std::move(q), from};
}

Permutation::Permutation(std::vector<std::size_t> mapping)
    : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (std::size_t v : mapping_) {
    if (v >= mapping_.size() || seen[v]) {
      throw InvalidInput("permutation mapping is not a bijection");
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation compose(const Permutation& outer, const Permutation& inner) {
  if (outer.size() != inner.size()) {
    throw InvalidInput("cannot compose permutations of different sizes");
  }
  std::vector<std::size_t> m(inner.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = outer(inner(i));
  return Permutation(std::move(m));
}

GraphShape::GraphShape(std::size_t nodes, Eigen::Index dim,
                       Eigen::Index samples)
    : dim_(dim),
      samples_(samples),
      labels_(nodes),
      upper_(nodes * (nodes > 0 ? nodes - 1 : 0) / 2) {
  if (dim < 1) throw InvalidInput("graph dimension must be positive");
  if (samples < 2) throw InvalidInput("edges need at least 2 samples");
  for (std::size_t i = 0; i < nodes; ++i) labels_[i] = std::to_string(i);
}

void GraphShape::set_label(std::size_t node, std::string label) {
  if (node >= size()) throw InvalidInput("node index out of range");
  labels_[node] = std::move(label);
}

void GraphShape::set_positions(Eigen::MatrixXd positions) {
  if (positions.rows() != static_cast<Eigen::Index>(size()) ||
      positions.cols() != dim_) {
    throw InvalidInput("node positions must be n x dim");
  }
  positions_ = std::move(positions);
}

std::size_t GraphShape::pair_index(std::size_t i, std::size_t j,
                                   std::size_t n) {
  // Row i of the strict upper triangle starts after i*(2n-i-1)/2 slots.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

void GraphShape::check_pair(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) {
    throw InvalidInput("node index out of range: (" + std::to_string(i) +
                       ", " + std::to_string(j) + ")");
  }
}

void GraphShape::check_edge(const Edge& edge) const {
  if (edge.q.samples() != samples_ || edge.q.dim() != dim_) {
    throw InvalidInput("edge grid " + std::to_string(edge.q.samples()) + "x" +
                       std::to_string(edge.q.dim()) +
                       " does not match graph grid " +
                       std::to_string(samples_) + "x" + std::to_string(dim_));
  }
}

const Edge* GraphShape::edge(std::size_t i, std::size_t j) const {
  check_pair(i, j);
  if (i == j) return nullptr;
  if (i > j) std::swap(i, j);
  const auto& slot = upper_[pair_index(i, j, size())];
  return slot ? &*slot : nullptr;
}

void GraphShape::add_edge(std::size_t i, std::size_t j, Edge edge) {
  check_pair(i, j);
  if (i == j) {
    throw InvalidInput("self-loop on node '" + labels_[i] + "'");
  }
  if (this->edge(i, j) != nullptr) {
    throw InvalidInput("duplicate edge between '" + labels_[i] + "' and '" +
                       labels_[j] + "'");
  }
  set_edge(i, j, std::move(edge));
}

void GraphShape::set_edge(std::size_t i, std::size_t j, Edge edge) {
  check_pair(i, j);
  if (i == j) throw InvalidInput("diagonal entries are always null");
  check_edge(edge);
  if (i > j) std::swap(i, j);
  upper_[pair_index(i, j, size())] = std::move(edge);
}

void GraphShape::clear_edge(std::size_t i, std::size_t j) {
  check_pair(i, j);
  if (i == j) return;
  if (i > j) std::swap(i, j);
  upper_[pair_index(i, j, size())].reset();
}

std::size_t GraphShape::edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(upper_.begin(), upper_.end(),
                    [](const auto& e) { return e.has_value(); }));
}

std::vector<std::pair<std::size_t, std::size_t>> GraphShape::edge_list()
    const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (upper_[pair_index(i, j, size())]) out.emplace_back(i, j);
    }
  }
  return out;
}

Srvf GraphShape::srvf_or_zero(std::size_t i, std::size_t j) const {
  const Edge* e = edge(i, j);
  return e ? e->q : Srvf::zero(samples_, dim_);
}

namespace {

void require_same_layout(const GraphShape& a1, const GraphShape& a2) {
  if (a1.size() != a2.size()) {
    throw InvalidInput("graphs have " + std::to_string(a1.size()) + " and " +
                       std::to_string(a2.size()) +
                       " nodes; pad them to a common size first");
  }
  if (a1.dim() != a2.dim() || a1.samples() != a2.samples()) {
    throw InvalidInput("graphs use different edge grids or dimensions");
  }
}

}  // namespace

double pre_shape_distance(const GraphShape& a1, const GraphShape& a2,
                          const AlignOptions& options) {
  require_same_layout(a1, a2);
  std::vector<double> terms;
  const std::size_t n = a1.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Edge* e1 = a1.edge(i, j);
      const Edge* e2 = a2.edge(i, j);
      if (!e1 && !e2) continue;
      const double ds = shape_distance(a1.srvf_or_zero(i, j),
                                       a2.srvf_or_zero(i, j), options);
      terms.push_back(ds * ds);
    }
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return std::sqrt(2.0 * sum);
}

GraphShape permute(const Permutation& p, const GraphShape& a) {
  if (p.size() != a.size()) {
    throw InvalidInput("permutation size " + std::to_string(p.size()) +
                       " does not match graph size " +
                       std::to_string(a.size()));
  }
  GraphShape out(a.size(), a.dim(), a.samples());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.set_label(p(i), a.labels()[i]);
  }
  if (a.positions()) {
    Eigen::MatrixXd pos(a.positions()->rows(), a.positions()->cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
      pos.row(static_cast<Eigen::Index>(p(i))) =
          a.positions()->row(static_cast<Eigen::Index>(i));
    }
    out.set_positions(std::move(pos));
  }
  for (const auto& [i, j] : a.edge_list()) {
    Edge e = *a.edge(i, j);
    e.from = p(e.from);
    out.set_edge(p(i), p(j), std::move(e));
  }
  return out;
}

GraphShape pad(const GraphShape& a, std::size_t extra) {
  if (extra == 0) return a;
  const std::size_t n = a.size();
  GraphShape out(n + extra, a.dim(), a.samples());
  for (std::size_t i = 0; i < n; ++i) out.set_label(i, a.labels()[i]);
  for (std::size_t k = 0; k < extra; ++k) {
    out.set_label(n + k, "null" + std::to_string(k));
  }
  if (a.positions()) {
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(n + extra), a.dim());
    pos.topRows(static_cast<Eigen::Index>(n)) = *a.positions();
    out.set_positions(std::move(pos));
  }
  for (const auto& [i, j] : a.edge_list()) out.set_edge(i, j, *a.edge(i, j));
  return out;
}

GraphGeodesic pre_shape_geodesic(const GraphShape& a1, const GraphShape& a2,
                                 std::size_t steps,
                                 const AlignOptions& options) {
  require_same_layout(a1, a2);
  if (steps < 2) throw InvalidInput("geodesic needs at least 2 steps");
  const std::size_t n = a1.size();

  GraphGeodesic path;
  path.steps.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    GraphShape g(n, a1.dim(), a1.samples());
    for (std::size_t i = 0; i < n; ++i) g.set_label(i, a1.labels()[i]);
    path.steps.push_back(std::move(g));
  }
  const double last = static_cast<double>(steps - 1);

  if (a1.positions() && a2.positions()) {
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) / last;
      path.steps[k].set_positions((1.0 - t) * *a1.positions() +
                                  t * *a2.positions());
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Edge* e1 = a1.edge(i, j);
      const Edge* e2 = a2.edge(i, j);
      if (!e1 && !e2) continue;
      if (e1) path.steps.front().set_edge(i, j, *e1);
      if (e2) path.steps.back().set_edge(i, j, *e2);

      Srvf target = e1 ? e1->q : Srvf::zero(a1.samples(), a1.dim());
      Srvf end = e2 ? e2->q : Srvf::zero(a1.samples(), a1.dim());
      Eigen::RowVectorXd start1 = e1 ? Eigen::RowVectorXd(e1->curve.points.row(0))
                                     : Eigen::RowVectorXd();
      Eigen::RowVectorXd start2;
      if (e1 && e2) {
        const Alignment al = align(target, end, options);
        end = al.aligned;
        const Eigen::MatrixXd& p2 = e2->curve.points;
        start2 = al.reversed ? p2.row(p2.rows() - 1) : p2.row(0);
      } else if (e2) {
        start2 = e2->curve.points.row(0);
        start1 = start2;
      } else {
        start2 = start1;
      }
      const std::size_t from = e1 ? e1->from : e2->from;

      for (std::size_t k = 1; k + 1 < steps; ++k) {
        const double t = static_cast<double>(k) / last;
        Srvf q{(1.0 - t) * target.values + t * end.values};
        path.steps[k].set_edge(
            i, j,
            Edge::from_srvf(std::move(q), (1.0 - t) * start1 + t * start2,
                            from));
      }
    }
  }
  return path;
}

double total_length(const GraphShape& a) {
  double length = 0.0;
  for (const auto& [i, j] : a.edge_list()) {
    length += curve_length(a.edge(i, j)->curve);
  }
  return length;
}

GraphShape total_length_normalize(const GraphShape& a) {
  const double length = total_length(a);
  if (a.edge_count() == 0 || !(length > 0.0)) {
    throw InvalidInput("cannot normalize a graph without edge length");
  }
  const double scale = 1.0 / length;
  const double root = std::sqrt(scale);

  GraphShape out(a.size(), a.dim(), a.samples());
  for (std::size_t i = 0; i < a.size(); ++i) out.set_label(i, a.labels()[i]);
  if (a.positions()) out.set_positions(*a.positions() * scale);
  for (const auto& [i, j] : a.edge_list()) {
    const Edge& e = *a.edge(i, j);
    out.set_edge(i, j,
                 Edge{Curve{e.curve.points * scale}, Srvf{e.q.values * root},
                      e.from});
  }
  return out;
}

}  // namespace egraph
