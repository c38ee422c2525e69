#include <fstream>
#include <sstream>
#include <unordered_map>

#include "egraph/error.hpp"
#include "egraph/io.hpp"

namespace egraph {
namespace {

struct Sample {
  long long id = 0;
  long long parent = -1;
  Eigen::RowVector3d xyz;
  std::size_t line = 0;
};

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw InvalidInput(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

SwcTree parse_swc(std::istream& in, const std::string& source) {
  std::vector<Sample> samples;
  std::unordered_map<long long, std::size_t> index;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.erase(hash);
    std::istringstream fields(text);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 7) {
      fail(source, line_no, "expected 7 fields (id type x y z radius parent)");
    }
    Sample s;
    s.line = line_no;
    try {
      std::size_t used = 0;
      s.id = std::stoll(tok[0], &used);
      if (used != tok[0].size()) throw std::invalid_argument(tok[0]);
      for (int c = 0; c < 3; ++c) s.xyz(c) = std::stod(tok[2 + c]);
      s.parent = std::stoll(tok[6], &used);
      if (used != tok[6].size()) throw std::invalid_argument(tok[6]);
    } catch (const std::logic_error&) {
      fail(source, line_no, "malformed number");
    }
    if (!s.xyz.allFinite()) fail(source, line_no, "non-finite coordinate");
    if (s.parent < 0) s.parent = -1;
    if (!index.emplace(s.id, samples.size()).second) {
      fail(source, line_no, "duplicate sample id " + std::to_string(s.id));
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw InvalidInput(source + ": no samples");

  const std::size_t m = samples.size();
  std::vector<std::size_t> parent(m, m);
  std::vector<std::vector<std::size_t>> children(m);
  std::size_t root = m;
  for (std::size_t k = 0; k < m; ++k) {
    const Sample& s = samples[k];
    if (s.parent == -1) {
      if (root != m) {
        fail(source, s.line, "second root (first root on line " +
                                 std::to_string(samples[root].line) + ")");
      }
      root = k;
      continue;
    }
    const auto p = index.find(s.parent);
    if (p == index.end()) {
      fail(source, s.line, "parent " + std::to_string(s.parent) +
                               " of sample " + std::to_string(s.id) +
                               " does not exist");
    }
    if (p->second == k) fail(source, s.line, "sample is its own parent");
    parent[k] = p->second;
    children[p->second].push_back(k);
  }
  if (root == m) throw InvalidInput(source + ": no root (parent -1) sample");

  std::vector<bool> reached(m, false);
  std::vector<std::size_t> stack = {root};
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    reached[k] = true;
    for (std::size_t c : children[k]) stack.push_back(c);
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!reached[k]) {
      fail(source, samples[k].line,
           "sample " + std::to_string(samples[k].id) + " lies on a cycle");
    }
  }

  SwcTree tree;
  std::vector<std::size_t> node_of(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    if (k == root || children[k].size() != 1) {
      node_of[k] = tree.node_ids.size();
      tree.node_ids.push_back(samples[k].id);
    }
  }
  tree.positions.resize(static_cast<Eigen::Index>(tree.node_ids.size()), 3);
  for (std::size_t k = 0; k < m; ++k) {
    if (node_of[k] == m) continue;
    tree.positions.row(static_cast<Eigen::Index>(node_of[k])) = samples[k].xyz;
    if (k == root) continue;
    std::vector<std::size_t> chain = {k};
    std::size_t p = parent[k];
    while (node_of[p] == m) {
      chain.push_back(p);
      p = parent[p];
    }
    chain.push_back(p);
    SwcBranch branch;
    branch.from = node_of[p];
    branch.to = node_of[k];
    branch.points.resize(static_cast<Eigen::Index>(chain.size()), 3);
    for (std::size_t r = 0; r < chain.size(); ++r) {
      branch.points.row(static_cast<Eigen::Index>(r)) =
          samples[chain[chain.size() - 1 - r]].xyz;
    }
    tree.branches.push_back(std::move(branch));
  }
  return tree;
}

SwcTree read_swc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  return parse_swc(in, path.string());
}

nlohmann::json swc_to_json(const SwcTree& tree,
                           const nlohmann::json& metadata) {
  using nlohmann::json;
  json nodes = json::array();
  for (std::size_t k = 0; k < tree.node_ids.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    nodes.push_back({{"id", std::to_string(tree.node_ids[k])},
                     {"pos",
                      {tree.positions(r, 0), tree.positions(r, 1),
                       tree.positions(r, 2)}}});
  }
  json edges = json::array();
  for (const SwcBranch& b : tree.branches) {
    json points = json::array();
    for (Eigen::Index r = 0; r < b.points.rows(); ++r) {
      points.push_back({b.points(r, 0), b.points(r, 1), b.points(r, 2)});
    }
    edges.push_back({{"source", std::to_string(tree.node_ids[b.from])},
                     {"target", std::to_string(tree.node_ids[b.to])},
                     {"points", std::move(points)}});
  }
  json doc = {{"dim", 3}, {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
  if (!metadata.empty()) doc["metadata"] = metadata;
  return doc;
}

GraphRecord load_swc(const std::filesystem::path& path,
                     Eigen::Index samples_per_edge) {
  const SwcTree tree = read_swc(path);
  return parse_graph(
      swc_to_json(tree, {{"subject", path.stem().string()}}),
      samples_per_edge, path.string());
}

}  // namespace egraph
