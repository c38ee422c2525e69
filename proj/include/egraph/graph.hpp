#pragma once

// Elastic graphs: undirected simple graphs whose edges carry curve shapes.
// Node order is arbitrary; permutations act by relabeling rows and columns
// of the shape-valued adjacency matrix.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "egraph/curve.hpp"

namespace egraph {

// A present edge. `q` is authoritative for every metric computation;
// `curve` is the geometric embedding kept for output, and starts at node
// `from`.
struct Edge {
  Curve curve;
  Srvf q;
  std::size_t from = 0;

  static Edge from_curve(Curve curve, std::size_t from);
  static Edge from_srvf(Srvf q, const Eigen::RowVectorXd& start,
                        std::size_t from);
};

class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> mapping);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return mapping_.size(); }
  std::size_t operator()(std::size_t i) const { return mapping_[i]; }
  const std::vector<std::size_t>& mapping() const { return mapping_; }

  Permutation inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> mapping_;
};

// (outer o inner)(i) = outer(inner(i)).
Permutation compose(const Permutation& outer, const Permutation& inner);

class GraphShape {
 public:
  GraphShape() = default;
  GraphShape(std::size_t nodes, Eigen::Index dim, Eigen::Index samples);

  std::size_t size() const { return labels_.size(); }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index samples() const { return samples_; }

  const std::vector<std::string>& labels() const { return labels_; }
  void set_label(std::size_t node, std::string label);

  // Display metadata only; never enters a metric.
  const std::optional<Eigen::MatrixXd>& positions() const {
    return positions_;
  }
  void set_positions(Eigen::MatrixXd positions);

  // Null edges (including the diagonal) return nullptr.
  const Edge* edge(std::size_t i, std::size_t j) const;
  // Rejects self-loops and a second edge on the same node pair.
  void add_edge(std::size_t i, std::size_t j, Edge edge);
  // Replaces whatever is stored on (i,j).
  void set_edge(std::size_t i, std::size_t j, Edge edge);
  void clear_edge(std::size_t i, std::size_t j);

  std::size_t edge_count() const;
  // Node pairs (i < j) with a present edge, row-major.
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;

  // Srvf of edge (i,j), or the zero Srvf for a null edge.
  Srvf srvf_or_zero(std::size_t i, std::size_t j) const;

  // Upper-triangle slot of the node pair i < j.
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);

 private:
  void check_pair(std::size_t i, std::size_t j) const;
  void check_edge(const Edge& edge) const;

  Eigen::Index dim_ = 0;
  Eigen::Index samples_ = 0;
  std::vector<std::string> labels_;
  std::optional<Eigen::MatrixXd> positions_;
  std::vector<std::optional<Edge>> upper_;
};

struct GraphGeodesic {
  std::vector<GraphShape> steps;
};

// sqrt of the sum over all ordered node pairs of d_s^2 (each unordered
// pair contributes twice). Terms are summed in sorted order so the value
// does not depend on node order.
double pre_shape_distance(const GraphShape& a1, const GraphShape& a2,
                          const AlignOptions& options = {});

// Edge (P(i), P(j)) of the result is edge (i, j) of the input.
GraphShape permute(const Permutation& p, const GraphShape& a);

// Appends `extra` isolated null nodes.
GraphShape pad(const GraphShape& a, std::size_t extra);

GraphGeodesic pre_shape_geodesic(const GraphShape& a1, const GraphShape& a2,
                                 std::size_t steps,
                                 const AlignOptions& options = {});

double total_length(const GraphShape& a);
// Scales every edge (and node positions) by 1 / total edge length.
GraphShape total_length_normalize(const GraphShape& a);

}  // namespace egraph
