#include "egraph/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "egraph/error.hpp"

namespace egraph {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw InvalidInput(source + ": " + what);
}

std::string node_key(const json& id, const std::string& where,
                     const std::string& source) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  fail(source, where + ": node id must be a string or an integer");
}

Eigen::RowVectorXd read_point(const json& p, Eigen::Index dim,
                              const std::string& where,
                              const std::string& source) {
  if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != dim) {
    fail(source, where + ": expected " + std::to_string(dim) + " coordinates");
  }
  Eigen::RowVectorXd out(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const json& v = p[static_cast<std::size_t>(c)];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(source, where + ": coordinates must be finite numbers");
    }
    out(c) = v.get<double>();
  }
  return out;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void check(bool ok, const std::string& artifact, const std::string& what) {
  if (!ok) throw InvalidInput(artifact + " artifact: " + what);
}

bool is_probability(const json& v) {
  return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0;
}

// Rectangular array of numbers; returns the column count (or -1).
long long numeric_table(const json& v, std::size_t rows) {
  if (!v.is_array() || v.size() != rows) return -1;
  long long cols = -1;
  for (const json& row : v) {
    if (!row.is_array()) return -1;
    if (cols >= 0 && static_cast<long long>(row.size()) != cols) return -1;
    cols = static_cast<long long>(row.size());
    for (const json& x : row) {
      if (!x.is_number()) return -1;
    }
  }
  return rows == 0 ? 0 : cols;
}

}  // namespace

GraphRecord parse_graph(const json& doc, Eigen::Index samples_per_edge,
                        const std::string& source) {
  if (!doc.is_object()) fail(source, "graph document must be a JSON object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() ||
      (doc["dim"] != 2 && doc["dim"] != 3)) {
    fail(source, "\"dim\" must be 2 or 3");
  }
  const Eigen::Index dim = doc["dim"].get<Eigen::Index>();
  if (!doc.contains("nodes") || !doc["nodes"].is_array() ||
      doc["nodes"].empty()) {
    fail(source, "\"nodes\" must be a non-empty array");
  }
  if (doc.contains("edges") && !doc["edges"].is_array()) {
    fail(source, "\"edges\" must be an array");
  }
  const bool presampled = doc.contains("samples_per_edge") &&
                          doc["samples_per_edge"].is_number_integer() &&
                          doc["samples_per_edge"].get<Eigen::Index>() ==
                              samples_per_edge;

  const json& nodes = doc["nodes"];
  std::map<std::string, std::size_t> index;
  std::vector<std::string> labels;
  Eigen::MatrixXd positions(static_cast<Eigen::Index>(nodes.size()), dim);
  std::size_t with_pos = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    const json& node = nodes[k];
    if (!node.is_object() || !node.contains("id")) {
      fail(source, where + ": node needs an \"id\"");
    }
    std::string key = node_key(node["id"], where, source);
    if (!index.emplace(key, k).second) {
      fail(source, where + ": duplicate node id '" + key + "'");
    }
    labels.push_back(std::move(key));
    if (node.contains("pos")) {
      positions.row(static_cast<Eigen::Index>(k)) =
          read_point(node["pos"], dim, where + ".pos", source);
      ++with_pos;
    }
  }
  if (with_pos != 0 && with_pos != nodes.size()) {
    fail(source, "either every node or no node may carry \"pos\"");
  }

  GraphRecord record;
  record.graph = GraphShape(nodes.size(), dim, samples_per_edge);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    record.graph.set_label(k, labels[k]);
  }
  if (with_pos != 0) record.graph.set_positions(positions);

  const json edges = doc.value("edges", json::array());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    std::string where = "edges[" + std::to_string(k) + "]";
    const json& e = edges[k];
    if (!e.is_object() || !e.contains("source") || !e.contains("target") ||
        !e.contains("points")) {
      fail(source, where + ": edge needs \"source\", \"target\" and "
                           "\"points\"");
    }
    const std::string s = node_key(e["source"], where, source);
    const std::string t = node_key(e["target"], where, source);
    where += " (" + s + " -> " + t + ")";
    const auto si = index.find(s);
    const auto ti = index.find(t);
    if (si == index.end()) fail(source, where + ": unknown source node");
    if (ti == index.end()) fail(source, where + ": unknown target node");
    if (si->second == ti->second) fail(source, where + ": self-loop");
    const auto key = std::minmax(si->second, ti->second);
    if (!seen.insert(key).second) {
      fail(source, where + ": duplicate edge between these nodes");
    }
    const json& pts = e["points"];
    if (!pts.is_array() || pts.size() < 2) {
      fail(source, where + ": \"points\" needs at least 2 entries");
    }
    Curve curve{Eigen::MatrixXd(static_cast<Eigen::Index>(pts.size()), dim)};
    for (std::size_t p = 0; p < pts.size(); ++p) {
      curve.points.row(static_cast<Eigen::Index>(p)) = read_point(
          pts[p], dim, where + ".points[" + std::to_string(p) + "]", source);
    }
    if (curve_length(curve) <= 0.0) fail(source, where + ": zero-length edge");
    if (!(presampled && curve.samples() == samples_per_edge)) {
      curve = resample_arc_length(curve, samples_per_edge);
    }
    record.graph.add_edge(si->second, ti->second,
                          Edge::from_curve(std::move(curve), si->second));
  }

  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) {
      fail(source, "\"metadata\" must be an object");
    }
    record.metadata = doc["metadata"];
  }
  return record;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw UsageError("failed writing " + path.string());
}

GraphRecord load_graph(const std::filesystem::path& path,
                       Eigen::Index samples_per_edge) {
  return parse_graph(read_json(path), samples_per_edge, path.string());
}

json graph_to_json(const GraphShape& graph, const json& metadata) {
  json nodes = json::array();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    json node = {{"id", graph.labels()[i]}};
    if (graph.positions()) {
      node["pos"] = matrix_rows(graph.positions()->row(
          static_cast<Eigen::Index>(i)))[0];
    }
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& [i, j] : graph.edge_list()) {
    const Edge* e = graph.edge(i, j);
    const std::size_t to = e->from == i ? j : i;
    edges.push_back({{"source", graph.labels()[e->from]},
                     {"target", graph.labels()[to]},
                     {"points", matrix_rows(e->curve.points)}});
  }
  json doc = {{"dim", graph.dim()},
              {"samples_per_edge", graph.samples()},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
  if (!metadata.empty()) doc["metadata"] = metadata;
  return doc;
}

void save_graph(const std::filesystem::path& path, const GraphShape& graph,
                const json& metadata) {
  write_json(path, graph_to_json(graph, metadata));
}

json distance_matrix_to_json(const DistanceMatrix& dist,
                             const std::vector<json>& sample_metadata) {
  json doc = {{"kind", "distance_matrix"},
              {"labels", dist.labels},
              {"d", matrix_rows(dist.d)}};
  if (dist.covariate) doc["covariate"] = *dist.covariate;
  if (!sample_metadata.empty()) doc["metadata"] = sample_metadata;
  return doc;
}

DistanceMatrix distance_matrix_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("kind", "") != "distance_matrix") {
    throw InvalidInput("not a distance matrix document");
  }
  DistanceMatrix dist;
  const json& d = doc.value("d", json());
  const std::size_t m = d.is_array() ? d.size() : 0;
  if (numeric_table(d, m) != static_cast<long long>(m)) {
    throw InvalidInput("distance matrix \"d\" must be a square numeric array");
  }
  dist.d.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      dist.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          d[i][j].get<double>();
    }
  }
  try {
    if (doc.contains("labels")) {
      dist.labels = doc["labels"].get<std::vector<std::string>>();
    }
    if (doc.contains("covariate")) {
      dist.covariate = doc["covariate"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("distance matrix: ") + e.what());
  }
  dist.validate();
  return dist;
}

json report_to_json(const TestReport& report) {
  json doc = {{"kind", "test_report"},
              {"method", report.method},
              {"statistic", report.statistic},
              {"p_value", report.p_value}};
  if (report.permutations > 0) {
    doc["permutations"] = report.permutations;
    doc["seed"] = report.seed;
  } else {
    json dof = json::array({report.dof1});
    if (report.dof2 > 0.0) dof.push_back(report.dof2);
    doc["dof"] = dof;
  }
  return doc;
}

std::string to_string(Artifact artifact) {
  switch (artifact) {
    case Artifact::graph: return "graph";
    case Artifact::distance_matrix: return "distance_matrix";
    case Artifact::report: return "test_report";
    case Artifact::dist: return "dist";
    case Artifact::pca: return "pca";
    case Artifact::mds: return "mds";
    case Artifact::mean: return "mean_summary";
  }
  return "unknown";
}

void validate_artifact(const json& doc, Artifact artifact) {
  const std::string name = to_string(artifact);
  check(doc.is_object(), name, "not a JSON object");
  if (artifact == Artifact::graph) {
    const Eigen::Index t =
        doc.contains("samples_per_edge") &&
                doc["samples_per_edge"].is_number_integer()
            ? doc["samples_per_edge"].get<Eigen::Index>()
            : 50;
    check(t >= 2, name, "samples_per_edge must be at least 2");
    parse_graph(doc, t, name);
    return;
  }
  check(doc.value("kind", "") == name, name, "missing or wrong \"kind\"");
  switch (artifact) {
    case Artifact::distance_matrix:
      distance_matrix_from_json(doc);
      return;
    case Artifact::report:
      check(doc.contains("method") && doc["method"].is_string(), name,
            "\"method\" must be a string");
      check(doc.contains("statistic") && doc["statistic"].is_number(), name,
            "\"statistic\" must be a number");
      check(doc.contains("p_value") && is_probability(doc["p_value"]), name,
            "\"p_value\" must lie in [0, 1]");
      return;
    case Artifact::dist: {
      check(doc.contains("d_g") && doc["d_g"].is_number() &&
                doc["d_g"].get<double>() >= 0.0,
            name, "\"d_g\" must be a non-negative number");
      check(doc.contains("permutation") && doc["permutation"].is_array(), name,
            "\"permutation\" must be an array");
      try {
        Permutation(doc["permutation"].get<std::vector<std::size_t>>());
      } catch (const std::exception& e) {
        check(false, name, std::string("invalid permutation: ") + e.what());
      }
      check(doc.contains("matched_edges") && doc["matched_edges"].is_array(),
            name, "\"matched_edges\" must be an array");
      return;
    }
    case Artifact::pca: {
      check(doc.contains("samples") && doc["samples"].is_array(), name,
            "\"samples\" must be an array");
      const std::size_t m = doc["samples"].size();
      check(doc.contains("singular_values") &&
                doc["singular_values"].is_array(),
            name, "\"singular_values\" must be an array");
      double prev = INFINITY;
      for (const json& s : doc["singular_values"]) {
        check(s.is_number() && s.get<double>() >= 0.0 &&
                  s.get<double>() <= prev * (1.0 + 1e-12),
              name, "singular values must be non-negative and non-increasing");
        prev = s.get<double>();
      }
      check(doc["singular_values"].size() + 1 <= std::max<std::size_t>(m, 1),
            name, "more singular values than samples - 1");
      check(numeric_table(doc.value("scores", json()), m) >= 0, name,
            "\"scores\" must be an m-row numeric table");
      check(doc.contains("variance_explained") &&
                doc["variance_explained"].is_array(),
            name, "\"variance_explained\" must be an array");
      for (const json& v : doc["variance_explained"]) {
        check(is_probability(v), name, "variance_explained outside [0, 1]");
      }
      return;
    }
    case Artifact::mds: {
      check(doc.contains("labels") && doc["labels"].is_array(), name,
            "\"labels\" must be an array");
      const long long cols =
          numeric_table(doc.value("coordinates", json()), doc["labels"].size());
      check(cols >= 0, name, "\"coordinates\" must be an m-row numeric table");
      check(doc.contains("eigenvalues") && doc["eigenvalues"].is_array() &&
                static_cast<long long>(doc["eigenvalues"].size()) == cols,
            name, "one eigenvalue per coordinate column required");
      return;
    }
    case Artifact::mean: {
      check(doc.contains("iterations") &&
                doc["iterations"].is_number_unsigned(),
            name, "\"iterations\" must be a count");
      check(doc.contains("variance_history") &&
                doc["variance_history"].is_array() &&
                !doc["variance_history"].empty(),
            name, "\"variance_history\" must be a non-empty array");
      double prev = INFINITY;
      for (const json& v : doc["variance_history"]) {
        check(v.is_number() && v.get<double>() >= 0.0 &&
                  v.get<double>() <= prev,
              name, "variance history must be non-negative and non-increasing");
        prev = v.get<double>();
      }
      check(doc.contains("presence") && doc["presence"].is_array(), name,
            "\"presence\" must be an array");
      for (const json& v : doc["presence"]) {
        check(is_probability(v), name, "presence outside [0, 1]");
      }
      return;
    }
    case Artifact::graph:
      return;
  }
}

}  // namespace egraph
