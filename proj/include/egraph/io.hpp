#pragma once

// File formats: JSON graph documents, SWC neuron morphologies, and the JSON
// artifacts written by the command-line tool.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "egraph/graph.hpp"
#include "egraph/inference.hpp"

namespace egraph {

struct GraphRecord {
  GraphShape graph;
  // Free-form metadata object (subject id, age, sex, group, ...).
  nlohmann::json metadata = nlohmann::json::object();
};

// Graph documents:
//   {"dim": 2|3,
//    "nodes": [{"id": ..., "pos": [...]}, ...],
//    "edges": [{"source": id, "target": id, "points": [[...], ...]}, ...],
//    "metadata": {...},            optional
//    "samples_per_edge": T}        optional, written by save_graph
// Polylines are resampled by arc length to `samples_per_edge` points unless
// the document declares the same samples_per_edge, in which case the points
// are taken as they are. `source` prefixes diagnostics.
GraphRecord parse_graph(const nlohmann::json& doc, Eigen::Index samples_per_edge,
                        const std::string& source = "graph");
GraphRecord load_graph(const std::filesystem::path& path,
                       Eigen::Index samples_per_edge);

nlohmann::json graph_to_json(const GraphShape& graph,
                             const nlohmann::json& metadata =
                                 nlohmann::json::object());
void save_graph(const std::filesystem::path& path, const GraphShape& graph,
                const nlohmann::json& metadata = nlohmann::json::object());

// Deterministic pretty-printed JSON (shortest round-trip doubles).
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

// Unbranched sample chains between consecutive structural nodes of an SWC
// tree (root, branch points and tips), before resampling.
struct SwcBranch {
  std::size_t from = 0;
  std::size_t to = 0;
  Eigen::MatrixXd points;
};

struct SwcTree {
  // SWC sample ids of the structural nodes, in file order.
  std::vector<long long> node_ids;
  Eigen::MatrixXd positions;
  std::vector<SwcBranch> branches;
};

SwcTree parse_swc(std::istream& in, const std::string& source = "swc");
SwcTree read_swc(const std::filesystem::path& path);

// Raw polylines as a graph document (no resampling).
nlohmann::json swc_to_json(const SwcTree& tree,
                           const nlohmann::json& metadata =
                               nlohmann::json::object());
GraphRecord load_swc(const std::filesystem::path& path,
                     Eigen::Index samples_per_edge);

nlohmann::json distance_matrix_to_json(const DistanceMatrix& dist,
                                       const std::vector<nlohmann::json>&
                                           sample_metadata = {});
DistanceMatrix distance_matrix_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const TestReport& report);

// Schema checks for emitted artifacts; throw InvalidInput on violation.
enum class Artifact { graph, distance_matrix, report, dist, pca, mds, mean };

std::string to_string(Artifact artifact);
void validate_artifact(const nlohmann::json& doc, Artifact artifact);

}  // namespace egraph
