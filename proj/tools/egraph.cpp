// egraph: command-line front end for elastic graph shape analysis.
//
// Exit codes: 0 success, 1 usage error, 2 invalid input data, 3 numeric
// failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "egraph/config.hpp"
#include "egraph/error.hpp"
#include "egraph/graph.hpp"
#include "egraph/inference.hpp"
#include "egraph/io.hpp"
#include "egraph/matching.hpp"
#include "egraph/statistics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace egraph;

namespace {

struct Sample {
  std::string name;
  GraphShape graph;
  json metadata;
};

json rows(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json values(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json provenance(const RunConfig& config) {
  json c = config.to_json();
  c.erase("output_dir");
  return c;
}

class Emitter {
 public:
  explicit Emitter(const RunConfig& config) : dir_(config.output_dir) {}

  fs::path path(const std::string& name) const { return dir_ / name; }

  void json_file(const std::string& name, const json& doc) {
    write_json(path(name), doc);
    std::cout << path(name).string() << '\n';
  }

  void graph_file(const std::string& name, const GraphShape& g,
                  const json& metadata) {
    save_graph(path(name), g, metadata);
    std::cout << path(name).string() << '\n';
  }

 private:
  fs::path dir_;
};

std::string sample_name(const fs::path& path, const json& metadata) {
  if (metadata.contains("subject") && metadata["subject"].is_string()) {
    return metadata["subject"].get<std::string>();
  }
  return path.stem().string();
}

std::vector<Sample> load_samples(const std::vector<std::string>& paths,
                                 const RunConfig& config) {
  std::vector<Sample> out;
  for (const std::string& p : paths) {
    GraphRecord r =
        load_graph(p, static_cast<Eigen::Index>(config.samples_per_edge));
    if (config.normalization == Normalization::total_length) {
      r.graph = total_length_normalize(r.graph);
    }
    out.push_back({sample_name(p, r.metadata), std::move(r.graph),
                   std::move(r.metadata)});
  }
  return out;
}

std::vector<GraphShape> graphs_of(const std::vector<Sample>& samples) {
  std::vector<GraphShape> out;
  for (const Sample& s : samples) out.push_back(s.graph);
  return out;
}

std::string numbered(const std::string& stem, std::size_t k,
                     std::size_t count) {
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  std::string digits = std::to_string(k);
  digits.insert(0, width - std::min(width, digits.size()), '0');
  return stem + "_" + digits + ".json";
}

// ---------------------------------------------------------------- dist

void run_dist(const RunConfig& config, const std::string& a,
              const std::string& b) {
  const auto samples = load_samples({a, b}, config);
  const Registration r = register_graphs(samples[0].graph, samples[1].graph,
                                         config.match_options());
  const GraphShape& ref = r.reference;
  const GraphShape& reg = r.registered;
  const std::size_t n = ref.size();

  json nodes = json::array();
  const Permutation& p = r.match.permutation;
  const GraphShape padded_b =
      samples[1].graph.size() == n
          ? samples[1].graph
          : pad(samples[1].graph, n - samples[1].graph.size());
  for (std::size_t k = 0; k < n; ++k) {
    nodes.push_back({{"b", padded_b.labels()[k]}, {"a", ref.labels()[p(k)]}});
  }
  json edges = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!ref.edge(i, j) && !reg.edge(i, j)) continue;
      edges.push_back(
          {{"a", {ref.labels()[i], ref.labels()[j]}},
           {"b", {reg.labels()[i], reg.labels()[j]}},
           {"a_present", ref.edge(i, j) != nullptr},
           {"b_present", reg.edge(i, j) != nullptr},
           {"d_s", shape_distance(ref.srvf_or_zero(i, j),
                                  reg.srvf_or_zero(i, j),
                                  config.match_options().align)}});
    }
  }
  const json doc = {
      {"kind", "dist"},
      {"a", samples[0].name},
      {"b", samples[1].name},
      {"d_g", r.match.quotient_distance},
      {"d_a_identity", pre_shape_distance(ref, padded_b)},
      {"solver", to_string(r.match.solver)},
      {"nodes_a", samples[0].graph.size()},
      {"nodes_b", samples[1].graph.size()},
      {"padded_nodes", n},
      {"permutation", p.mapping()},
      {"node_matches", nodes},
      {"matched_edges", edges},
      {"config", provenance(config)},
  };
  Emitter(config).json_file("dist.json", doc);
  std::cout << doc.dump(2) << '\n';
}

// ------------------------------------------------------------ geodesic

void run_geodesic(const RunConfig& config, const std::string& a,
                  const std::string& b, std::size_t steps,
                  const std::string& space) {
  if (steps < 2) throw UsageError("--steps must be at least 2");
  if (space != "preshape" && space != "quotient") {
    throw UsageError("--space must be preshape or quotient");
  }
  const auto samples = load_samples({a, b}, config);
  GraphShape g1 = samples[0].graph;
  GraphShape g2 = samples[1].graph;
  std::optional<Permutation> match;
  if (space == "quotient") {
    Registration r = register_graphs(g1, g2, config.match_options());
    g1 = std::move(r.reference);
    g2 = std::move(r.registered);
    match = r.match.permutation;
  } else {
    const std::size_t n = std::max(g1.size(), g2.size());
    g1 = pad(g1, n - g1.size());
    g2 = pad(g2, n - g2.size());
  }
  const GraphGeodesic path =
      pre_shape_geodesic(g1, g2, steps, config.match_options().align);
  Emitter out(config);
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    json meta = {{"space", space},
                 {"step", k},
                 {"t", static_cast<double>(k) /
                           static_cast<double>(steps - 1)},
                 {"from", samples[0].name},
                 {"to", samples[1].name}};
    if (match) meta["permutation"] = match->mapping();
    out.graph_file(numbered("geodesic", k, steps), path.steps[k], meta);
  }
}

// ---------------------------------------------------------------- mean

json presence_json(const MeanResult& m) {
  json out = json::array();
  const std::size_t n = m.mean.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = m.presence[GraphShape::pair_index(i, j, n)];
      if (p > 0.0) {
        out.push_back({{"pair", {m.mean.labels()[i], m.mean.labels()[j]}},
                       {"presence", p}});
      }
    }
  }
  return out;
}

void run_mean(const RunConfig& config, const std::vector<std::string>& files) {
  if (files.empty()) throw UsageError("mean needs at least one graph file");
  const auto samples = load_samples(files, config);
  const auto graphs = graphs_of(samples);
  const MeanResult m = karcher_mean(graphs, config.mean_options());

  std::vector<std::string> names;
  for (const Sample& s : samples) names.push_back(s.name);
  Emitter out(config);
  out.graph_file("mean.json", display_mean(m, config.presence_threshold),
                 {{"role", "mean"},
                  {"presence_threshold", config.presence_threshold}});
  out.graph_file("mean_full.json", m.mean, {{"role", "mean_full"}});
  for (std::size_t k = 0; k < samples.size(); ++k) {
    json meta = samples[k].metadata;
    meta["registered_to"] = "mean";
    meta["sample"] = samples[k].name;
    out.graph_file(numbered("registered", k, samples.size()), m.registered[k],
                   meta);
  }
  json perms = json::array();
  for (const Permutation& p : m.permutations) perms.push_back(p.mapping());
  std::vector<double> presence_values;
  for (const json& p : presence_json(m)) {
    presence_values.push_back(p["presence"].get<double>());
  }
  out.json_file("mean_summary.json",
                {{"kind", "mean_summary"},
                 {"samples", names},
                 {"template", names[template_index(graphs)]},
                 {"mode", to_string(config.mean_mode)},
                 {"iterations", m.iterations},
                 {"final_variance", m.final_variance},
                 {"variance_history", m.variance_history},
                 {"presence", presence_values},
                 {"edge_presence", presence_json(m)},
                 {"permutations", perms},
                 {"config", provenance(config)}});
}

// ----------------------------------------------------------------- pca

void run_pca(const RunConfig& config, const std::vector<std::string>& files,
             std::size_t components) {
  if (files.size() < 2) throw UsageError("pca needs at least two graph files");
  if (components < 1) throw UsageError("--components must be at least 1");
  const auto samples = load_samples(files, config);
  const TangentModel tm = tangent_pca(graphs_of(samples), config.mean_options());

  const std::size_t rank = tm.rank();
  const std::size_t r = std::min(components, rank);
  if (r < components) {
    std::cerr << "warning: only " << rank
              << " principal components have nonzero variance\n";
  }
  const std::size_t kept = std::min<std::size_t>(
      samples.size() - 1, static_cast<std::size_t>(tm.singular_values.size()));

  json names = json::array();
  json meta = json::array();
  for (const Sample& s : samples) {
    names.push_back(s.name);
    meta.push_back(s.metadata);
  }
  std::vector<double> explained;
  for (std::size_t k = 1; k <= r; ++k) {
    explained.push_back(variance_explained(tm, k));
  }
  Emitter out(config);
  out.json_file(
      "pca.json",
      {{"kind", "pca"},
       {"samples", names},
       {"metadata", meta},
       {"components", r},
       {"rank", rank},
       {"singular_values", values(tm.singular_values.head(
                               static_cast<Eigen::Index>(kept)))},
       {"variance_explained", explained},
       {"scores", rows(tm.scores.leftCols(static_cast<Eigen::Index>(r)))},
       {"mean_iterations", tm.mean_result.iterations},
       {"config", provenance(config)}});
  out.graph_file("pca_mean.json", tm.mean, {{"role", "mean"}});
  for (std::size_t k = 0; k < r; ++k) {
    for (int t = -2; t <= 2; ++t) {
      const std::string name = "path_pc" + std::to_string(k + 1) + "_t" +
                               (t < 0 ? "m" : "p") +
                               std::to_string(std::abs(t)) + ".json";
      out.graph_file(name, principal_path(tm, k, t),
                     {{"component", k + 1}, {"t", t}});
    }
  }
}

// ------------------------------------------------------------- distmat

void run_distmat(const RunConfig& config,
                 const std::vector<std::string>& files,
                 const std::string& order_by) {
  if (files.size() < 2) {
    throw UsageError("distmat needs at least two graph files");
  }
  auto samples = load_samples(files, config);
  std::optional<std::vector<double>> covariate;
  if (!order_by.empty()) {
    std::vector<double> key;
    for (const Sample& s : samples) {
      if (!s.metadata.contains(order_by) ||
          !s.metadata[order_by].is_number()) {
        throw InvalidInput(s.name + ": metadata field '" + order_by +
                           "' missing or not numeric");
      }
      key.push_back(s.metadata[order_by].get<double>());
    }
    std::vector<std::size_t> order(samples.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return key[x] < key[y]; });
    std::vector<Sample> sorted;
    std::vector<double> cov;
    for (std::size_t k : order) {
      sorted.push_back(std::move(samples[k]));
      cov.push_back(key[k]);
    }
    samples = std::move(sorted);
    covariate = std::move(cov);
  }

  const auto m = static_cast<Eigen::Index>(samples.size());
  DistanceMatrix dist;
  dist.d = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    dist.labels.push_back(samples[static_cast<std::size_t>(i)].name);
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = quotient_distance(samples[static_cast<std::size_t>(i)].graph,
                                         samples[static_cast<std::size_t>(j)].graph,
                                         config.match_options());
      dist.d(i, j) = dist.d(j, i) = d;
    }
  }
  dist.covariate = covariate;
  std::vector<json> meta;
  for (const Sample& s : samples) meta.push_back(s.metadata);
  json doc = distance_matrix_to_json(dist, meta);
  if (!order_by.empty()) doc["order_by"] = order_by;
  doc["config"] = provenance(config);
  Emitter(config).json_file("distmat.json", doc);
}

// ----------------------------------------------------------------- mds

void run_mds(const RunConfig& config, const std::string& file, std::size_t k) {
  const json doc = read_json(file);
  const DistanceMatrix dist = distance_matrix_from_json(doc);
  const MdsResult r = classical_mds(dist, k);
  if (r.truncated) {
    std::cerr << "warning: only " << r.coordinates.cols()
              << " positive eigenvalues; embedding truncated\n";
  }
  json out = {{"kind", "mds"},
              {"labels", dist.labels},
              {"coordinates", rows(r.coordinates)},
              {"eigenvalues", values(r.eigenvalues)},
              {"requested_dimension", k},
              {"truncated", r.truncated}};
  if (doc.contains("metadata")) out["metadata"] = doc["metadata"];
  if (dist.covariate) out["covariate"] = *dist.covariate;
  Emitter(config).json_file("mds.json", out);
}

// ---------------------------------------------------------------- test

struct Groups {
  std::vector<int> labels;
  std::vector<std::string> names;
};

Groups split_groups(const json& metadata, const std::string& key,
                    std::optional<double> threshold) {
  if (key.empty()) throw UsageError("--group-by is required");
  if (!metadata.is_array()) {
    throw InvalidInput("input has no per-sample metadata to group by");
  }
  Groups g;
  std::vector<std::string> raw;
  for (std::size_t i = 0; i < metadata.size(); ++i) {
    const json& m = metadata[i];
    if (!m.is_object() || !m.contains(key)) {
      throw InvalidInput("sample " + std::to_string(i) +
                         " lacks metadata field '" + key + "'");
    }
    if (threshold) {
      if (!m[key].is_number()) {
        throw InvalidInput("metadata field '" + key + "' is not numeric");
      }
      g.labels.push_back(m[key].get<double>() >= *threshold ? 1 : 0);
    } else {
      raw.push_back(m[key].is_string() ? m[key].get<std::string>()
                                       : m[key].dump());
    }
  }
  if (threshold) {
    const std::string t = json(*threshold).dump();
    g.names = {key + " < " + t, key + " >= " + t};
    return g;
  }
  const std::set<std::string> distinct(raw.begin(), raw.end());
  if (distinct.size() != 2) {
    throw InvalidInput("metadata field '" + key + "' takes " +
                       std::to_string(distinct.size()) +
                       " distinct values; need exactly 2 (or use --threshold)");
  }
  g.names.assign(distinct.begin(), distinct.end());
  for (const std::string& v : raw) g.labels.push_back(v == g.names[0] ? 0 : 1);
  return g;
}

Eigen::MatrixXd scores_of(const json& pca) {
  validate_artifact(pca, Artifact::pca);
  const json& s = pca["scores"];
  const auto m = static_cast<Eigen::Index>(s.size());
  const auto k = m > 0 ? static_cast<Eigen::Index>(s[0].size()) : 0;
  Eigen::MatrixXd out(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      out(i, c) = s[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]
                      .get<double>();
    }
  }
  return out;
}

Eigen::Index component_column(const Eigen::MatrixXd& scores,
                              std::size_t component) {
  if (component < 1 || component > static_cast<std::size_t>(scores.cols())) {
    throw UsageError("--component must be between 1 and " +
                     std::to_string(scores.cols()));
  }
  return static_cast<Eigen::Index>(component - 1);
}

struct TestArgs {
  std::string kind;
  std::string input;
  std::string group_by;
  std::optional<double> threshold;
  std::string covariate;
  std::size_t component = 1;
  std::size_t components = 2;
  bool pooled = false;
  std::string statistic = "between_minus_within";
};

void run_test(const RunConfig& config, const TestArgs& args) {
  const json doc = read_json(args.input);
  json extra;
  TestReport report;
  if (args.kind == "perm") {
    const PermutationStatistic stat =
        parse_permutation_statistic(args.statistic);
    const DistanceMatrix dist = distance_matrix_from_json(doc);
    const Groups g = split_groups(doc.value("metadata", json()), args.group_by,
                                  args.threshold);
    report = permutation_test(dist, g.labels, config.n_perm, config.seed, stat);
    extra = {{"group_by", args.group_by}, {"groups", g.names}};
  } else if (args.kind == "t" || args.kind == "hotelling") {
    const Eigen::MatrixXd scores = scores_of(doc);
    const Groups g = split_groups(doc.value("metadata", json()), args.group_by,
                                  args.threshold);
    if (g.labels.size() != static_cast<std::size_t>(scores.rows())) {
      throw InvalidInput("metadata and scores disagree on sample count");
    }
    Eigen::Index cols = 1;
    Eigen::Index first = 0;
    if (args.kind == "t") {
      first = component_column(scores, args.component);
    } else {
      if (args.components < 1 ||
          args.components > static_cast<std::size_t>(scores.cols())) {
        throw UsageError("--components must be between 1 and " +
                         std::to_string(scores.cols()));
      }
      cols = static_cast<Eigen::Index>(args.components);
    }
    std::vector<Eigen::Index> rows0, rows1;
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
      (g.labels[i] == 0 ? rows0 : rows1).push_back(static_cast<Eigen::Index>(i));
    }
    const Eigen::MatrixXd a = scores(rows0, Eigen::seqN(first, cols));
    const Eigen::MatrixXd b = scores(rows1, Eigen::seqN(first, cols));
    if (args.kind == "t") {
      const std::vector<double> va(a.data(), a.data() + a.size());
      const std::vector<double> vb(b.data(), b.data() + b.size());
      report = two_sample_t(va, vb, args.pooled ? TTestVariance::pooled
                                                : TTestVariance::welch);
      extra = {{"component", args.component}};
    } else {
      report = hotelling_t2(a, b);
      extra = {{"components", args.components}};
    }
    extra["group_by"] = args.group_by;
    extra["groups"] = g.names;
    extra["sizes"] = {rows0.size(), rows1.size()};
  } else if (args.kind == "corr") {
    if (args.covariate.empty()) throw UsageError("--covariate is required");
    const Eigen::MatrixXd scores = scores_of(doc);
    const Eigen::Index c = component_column(scores, args.component);
    const json& meta = doc.value("metadata", json());
    std::vector<double> cov;
    for (std::size_t i = 0; i < static_cast<std::size_t>(scores.rows()); ++i) {
      if (!meta.is_array() || i >= meta.size() ||
          !meta[i].contains(args.covariate) ||
          !meta[i][args.covariate].is_number()) {
        throw InvalidInput("sample " + std::to_string(i) +
                           " lacks numeric metadata field '" + args.covariate +
                           "'");
      }
      cov.push_back(meta[i][args.covariate].get<double>());
    }
    const std::vector<double> s(scores.col(c).data(),
                                scores.col(c).data() + scores.rows());
    report = covariate_correlation(s, cov);
    extra = {{"component", args.component}, {"covariate", args.covariate}};
  } else {
    throw UsageError("unknown test '" + args.kind +
                     "' (expected t, hotelling, perm or corr)");
  }
  json out = report_to_json(report);
  out["input"] = fs::path(args.input).filename().string();
  for (const auto& [k, v] : extra.items()) out[k] = v;
  Emitter(config).json_file("test_" + args.kind + ".json", out);
  std::cout << out.dump(2) << '\n';
}

// ---------------------------------------------------------- ingest-swc

void run_ingest(const RunConfig& config, const std::string& in,
                const std::string& out) {
  const SwcTree tree = read_swc(in);
  const json doc =
      swc_to_json(tree, {{"subject", fs::path(in).stem().string()},
                         {"source", fs::path(in).filename().string()}});
  parse_graph(doc, static_cast<Eigen::Index>(config.samples_per_edge), in);
  write_json(out, doc);
  std::cout << out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic graph shape analysis: distances, geodesics, means, "
               "tangent PCA and hypothesis tests"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::size_t samples = 0;
  std::string solver, mean_mode, normalize, out_dir;
  std::size_t exact_limit = 0, max_iterations = 0, n_perm = 0;
  double presence = 0.0;
  std::uint64_t seed = 0;
  auto* o_samples = app.add_option("--samples", samples,
                                   "Points per edge after resampling (50)");
  auto* o_solver = app.add_option("--solver", solver,
                                  "Matching solver: exact|spectral|graduated");
  auto* o_exact = app.add_option("--exact-limit", exact_limit,
                                 "Largest padded size matched exactly (8)");
  auto* o_mode = app.add_option("--mean-mode", mean_mode,
                                "Mean algorithm: full|template");
  auto* o_iter = app.add_option("--max-iterations", max_iterations,
                                "Mean iterations (20)");
  auto* o_presence = app.add_option("--presence-threshold", presence,
                                    "Edge presence needed in the shown mean");
  auto* o_norm = app.add_option("--normalize", normalize,
                                "Graph scaling: none|total_length");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_perm = app.add_option("--n-perm", n_perm,
                                "Permutation replicates (30000)");
  auto* o_out = app.add_option("--out-dir", out_dir, "Output directory (.)");
  app.add_option("--config", config_file, "JSON run configuration")
      ->check(CLI::ExistingFile);

  std::string a, b;
  std::vector<std::string> files;

  auto* dist = app.add_subcommand("dist", "Quotient distance between graphs");
  dist->add_option("a", a)->required();
  dist->add_option("b", b)->required();

  std::size_t steps = 5;
  std::string space = "quotient";
  auto* geo = app.add_subcommand("geodesic", "Geodesic path between graphs");
  geo->add_option("a", a)->required();
  geo->add_option("b", b)->required();
  geo->add_option("--steps", steps, "Number of graphs on the path");
  geo->add_option("--space", space, "preshape|quotient");

  auto* mean = app.add_subcommand("mean", "Karcher mean of graphs");
  mean->add_option("files", files)->required();

  std::size_t components = 3;
  auto* pca = app.add_subcommand("pca", "Tangent PCA at the mean");
  pca->add_option("files", files)->required();
  pca->add_option("--components", components, "Components to report");

  std::string order_by;
  auto* distmat = app.add_subcommand("distmat", "Pairwise distance matrix");
  distmat->add_option("files", files)->required();
  distmat->add_option("--order-by", order_by, "Numeric metadata sort key");

  std::size_t dims = 2;
  std::string mds_input;
  auto* mds = app.add_subcommand("mds", "Classical MDS of a distance matrix");
  mds->add_option("distmat", mds_input)->required();
  mds->add_option("-k", dims, "Embedding dimension");

  TestArgs targs;
  double threshold = 0.0;
  auto* test = app.add_subcommand("test", "Hypothesis tests");
  test->add_option("kind", targs.kind, "t|hotelling|perm|corr")->required();
  test->add_option("input", targs.input,
                   "pca.json (t, hotelling, corr) or distmat.json (perm)")
      ->required();
  test->add_option("--group-by", targs.group_by, "Metadata field for groups");
  auto* o_threshold = test->add_option(
      "--threshold", threshold, "Split a numeric group field at this value");
  test->add_option("--covariate", targs.covariate, "Metadata field (corr)");
  test->add_option("--component", targs.component, "Score column, from 1");
  test->add_option("--components", targs.components,
                   "Leading score columns (hotelling)");
  test->add_flag("--pooled", targs.pooled, "Pooled-variance t-test");
  test->add_option("--statistic", targs.statistic,
                   "between_minus_within|pseudo_f (perm)");

  std::string swc_in, swc_out;
  auto* ingest = app.add_subcommand("ingest-swc", "Convert SWC to a graph file");
  ingest->add_option("input", swc_in)->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", swc_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config = config_file.empty()
                           ? RunConfig{}
                           : RunConfig::from_json(read_json(config_file));
    if (*o_samples) config.samples_per_edge = samples;
    if (*o_solver) config.solver = parse_solver(solver);
    if (*o_exact) config.exact_limit = exact_limit;
    if (*o_mode) config.mean_mode = parse_mean_mode(mean_mode);
    if (*o_iter) config.max_iterations = max_iterations;
    if (*o_presence) config.presence_threshold = presence;
    if (*o_norm) config.normalization = parse_normalization(normalize);
    if (*o_seed) config.seed = seed;
    if (*o_perm) config.n_perm = n_perm;
    if (*o_out) config.output_dir = out_dir;
    config.validate();
    if (*o_threshold) targs.threshold = threshold;

    if (*dist) run_dist(config, a, b);
    if (*geo) run_geodesic(config, a, b, steps, space);
    if (*mean) run_mean(config, files);
    if (*pca) run_pca(config, files, components);
    if (*distmat) run_distmat(config, files, order_by);
    if (*mds) run_mds(config, mds_input, dims);
    if (*test) run_test(config, targs);
    if (*ingest) run_ingest(config, swc_in, swc_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
