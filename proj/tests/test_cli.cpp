#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "egraph/io.hpp"
#include "support/synth.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "egraph_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(EGRAPH_CLI) + " " + args + " > " +
                          (kWork / "stdout.txt").string() + " 2> " +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Four simulated trees written as graph files; returns their paths.
std::vector<std::string> tree_files() {
  static std::vector<std::string> paths;
  if (!paths.empty()) return paths;
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  synth::Rng rng(71);
  const synth::TreeFamily fam = synth::tree_family(rng, 4, 40);
  for (std::size_t k = 0; k < fam.trees.size(); ++k) {
    const fs::path p = kWork / ("tree" + std::to_string(k) + ".json");
    egraph::save_graph(p, fam.trees[k].graph,
                       {{"subject", "tree" + std::to_string(k)},
                        {"age", 20.0 + 15.0 * static_cast<double>(k)},
                        {"sex", k % 2 ? "F" : "M"}});
    paths.push_back(p.string());
  }
  return paths;
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + " ";
  return out;
}

}  // namespace

TEST_CASE("dist of a graph with itself is zero") {
  const auto files = tree_files();
  const fs::path out = kWork / "dist_self";
  REQUIRE(run("dist " + files[0] + " " + files[0] + " --out-dir " +
              out.string()) == 0);
  const json doc = egraph::read_json(out / "dist.json");
  egraph::validate_artifact(doc, egraph::Artifact::dist);
  CHECK(doc["d_g"].get<double>() == 0.0);
}

TEST_CASE("geodesic with two steps emits only the endpoints") {
  const auto files = tree_files();
  const fs::path out = kWork / "geo2";
  REQUIRE(run("geodesic " + files[0] + " " + files[1] +
              " --steps 2 --out-dir " + out.string()) == 0);
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    ++count;
    egraph::validate_artifact(egraph::read_json(e.path()),
                              egraph::Artifact::graph);
  }
  CHECK(count == 2);
}

TEST_CASE("pca of four trees has at most three nonzero singular values") {
  const auto files = tree_files();
  const fs::path out = kWork / "pca";
  REQUIRE(run("pca " + joined(files) + "--components 3 --out-dir " +
              out.string()) == 0);
  const json doc = egraph::read_json(out / "pca.json");
  egraph::validate_artifact(doc, egraph::Artifact::pca);
  const auto sv = doc["singular_values"].get<std::vector<double>>();
  std::size_t nonzero = 0;
  for (double s : sv) nonzero += s > 1e-10 * sv.front() ? 1 : 0;
  CHECK(nonzero <= 3);
  CHECK(fs::exists(out / "path_pc1_tm2.json"));
  CHECK(fs::exists(out / "path_pc1_tp2.json"));
}

TEST_CASE("outputs are byte-identical across reruns") {
  const auto files = tree_files();
  const fs::path a = kWork / "rerun_a";
  const fs::path b = kWork / "rerun_b";
  for (const fs::path& dir : {a, b}) {
    REQUIRE(run("mean " + joined(files) + "--out-dir " + dir.string()) == 0);
    REQUIRE(run("distmat " + joined(files) + "--order-by age --out-dir " +
                dir.string()) == 0);
    REQUIRE(run("test perm " + (dir / "distmat.json").string() +
                " --group-by age --threshold 40 --n-perm 500 --seed 3"
                " --out-dir " + dir.string()) == 0);
  }
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  egraph::validate_artifact(egraph::read_json(a / "mean_summary.json"),
                            egraph::Artifact::mean);
  egraph::validate_artifact(egraph::read_json(a / "test_perm.json"),
                            egraph::Artifact::report);
}

TEST_CASE("mds and the score-based tests run from emitted files") {
  const auto files = tree_files();
  const fs::path out = kWork / "chain";
  REQUIRE(run("distmat " + joined(files) + "--out-dir " + out.string()) == 0);
  REQUIRE(run("mds " + (out / "distmat.json").string() + " -k 2 --out-dir " +
              out.string()) == 0);
  egraph::validate_artifact(egraph::read_json(out / "mds.json"),
                            egraph::Artifact::mds);
  REQUIRE(run("pca " + joined(files) + "--components 2 --out-dir " +
              out.string()) == 0);
  const std::string pca = (out / "pca.json").string();
  CHECK(run("test t " + pca + " --group-by sex --out-dir " + out.string()) ==
        0);
  CHECK(run("test corr " + pca + " --covariate age --out-dir " +
            out.string()) == 0);
  for (const char* name : {"test_t.json", "test_corr.json"}) {
    egraph::validate_artifact(egraph::read_json(out / name),
                              egraph::Artifact::report);
  }
}

TEST_CASE("exit codes distinguish usage, data and numeric failures") {
  const auto files = tree_files();
  CHECK(run("dist " + files[0]) == 1);
  CHECK(run("--no-such-flag dist " + files[0] + " " + files[1]) == 1);
  CHECK(run("dist " + files[0] + " " + files[1] + " --samples 1") == 1);
  CHECK(run("dist " + files[0] + " " + (kWork / "missing.json").string()) ==
        2);
  const fs::path bad = kWork / "loop.json";
  std::ofstream(bad) << R"({"dim": 2, "nodes": [{"id": 0}],
    "edges": [{"source": 0, "target": 0, "points": [[0, 0], [1, 1]]}]})";
  CHECK(run("dist " + bad.string() + " " + files[0]) == 2);
  CHECK(slurp(kWork / "stderr.txt").find("self-loop") != std::string::npos);

  // Identical scores in both groups: zero variance.
  const fs::path flat = kWork / "flat_pca.json";
  std::ofstream(flat) << R"({"kind": "pca", "samples": ["a", "b", "c", "d"],
    "metadata": [{"g": 0}, {"g": 0}, {"g": 1}, {"g": 1}],
    "singular_values": [1.0], "variance_explained": [1.0],
    "scores": [[1.0], [1.0], [1.0], [1.0]]})";
  CHECK(run("test t " + flat.string() + " --group-by g --out-dir " +
            kWork.string()) == 3);
}

TEST_CASE("ingest-swc converts a real morphology") {
  tree_files();
  const fs::path swc =
      fs::path(EGRAPH_TEST_DATA) / "swc" / "sharkviewer_test.swc";
  const fs::path out = kWork / "neuron.json";
  REQUIRE(run("ingest-swc " + swc.string() + " -o " + out.string()) == 0);
  const json doc = egraph::read_json(out);
  egraph::validate_artifact(doc, egraph::Artifact::graph);
  CHECK(doc["nodes"].size() == 4);
  CHECK(doc["edges"].size() == 3);
}
