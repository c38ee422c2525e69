#include "egraph/config.hpp"

#include <set>

#include "egraph/error.hpp"

namespace egraph {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError("invalid configuration: " + message);
}

}  // namespace

std::string to_string(Normalization normalization) {
  return normalization == Normalization::total_length ? "total_length"
                                                      : "none";
}

Normalization parse_normalization(const std::string& tag) {
  if (tag == "none") return Normalization::none;
  if (tag == "total_length") return Normalization::total_length;
  throw UsageError("unknown normalization '" + tag + "'");
}

void RunConfig::validate() const {
  require(samples_per_edge >= 3 && samples_per_edge <= 2000,
          "samples_per_edge must be in [3, 2000]");
  require(exact_limit <= 8, "exact_limit must be at most 8");
  require(schedule.beta_start > 0.0, "beta_start must be positive");
  require(schedule.beta_max >= schedule.beta_start,
          "beta_max must be at least beta_start");
  require(schedule.beta_rate > 1.0, "beta_rate must exceed 1");
  require(schedule.sinkhorn_sweeps >= 1, "sinkhorn_sweeps must be >= 1");
  require(schedule.inner_iterations >= 1, "inner_iterations must be >= 1");
  require(max_iterations >= 1, "max_iterations must be >= 1");
  require(presence_threshold >= 0.0 && presence_threshold <= 1.0,
          "presence_threshold must be in [0, 1]");
  require(n_perm >= 100, "n_perm must be at least 100");
  require(!output_dir.empty(), "output_dir must not be empty");
}

MatchOptions RunConfig::match_options() const {
  MatchOptions m;
  m.approximate_solver = solver == Solver::exact ? Solver::graduated : solver;
  m.exact_limit = exact_limit;
  m.schedule = schedule;
  return m;
}

MeanOptions RunConfig::mean_options() const {
  MeanOptions m;
  m.mode = mean_mode;
  m.max_iterations = max_iterations;
  m.presence_threshold = presence_threshold;
  m.match = match_options();
  return m;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"samples_per_edge", samples_per_edge},
      {"solver", to_string(solver)},
      {"exact_limit", exact_limit},
      {"schedule",
       {{"beta_start", schedule.beta_start},
        {"beta_max", schedule.beta_max},
        {"beta_rate", schedule.beta_rate},
        {"sinkhorn_sweeps", schedule.sinkhorn_sweeps},
        {"inner_iterations", schedule.inner_iterations}}},
      {"mean_mode", to_string(mean_mode)},
      {"max_iterations", max_iterations},
      {"presence_threshold", presence_threshold},
      {"normalization", to_string(normalization)},
      {"seed", seed},
      {"n_perm", n_perm},
      {"output_dir", output_dir},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("configuration must be a JSON object");
  static const std::set<std::string> known = {
      "samples_per_edge", "solver",         "exact_limit",
      "schedule",         "mean_mode",      "max_iterations",
      "presence_threshold", "normalization", "seed",
      "n_perm",           "output_dir"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw UsageError("unknown configuration key '" + key + "'");
    }
  }
  RunConfig c;
  try {
    if (doc.contains("samples_per_edge")) {
      c.samples_per_edge = doc["samples_per_edge"].get<std::size_t>();
    }
    if (doc.contains("solver")) c.solver = parse_solver(doc["solver"].get<std::string>());
    if (doc.contains("exact_limit")) {
      c.exact_limit = doc["exact_limit"].get<std::size_t>();
    }
    if (doc.contains("schedule")) {
      const auto& s = doc["schedule"];
      c.schedule.beta_start = s.value("beta_start", c.schedule.beta_start);
      c.schedule.beta_max = s.value("beta_max", c.schedule.beta_max);
      c.schedule.beta_rate = s.value("beta_rate", c.schedule.beta_rate);
      c.schedule.sinkhorn_sweeps =
          s.value("sinkhorn_sweeps", c.schedule.sinkhorn_sweeps);
      c.schedule.inner_iterations =
          s.value("inner_iterations", c.schedule.inner_iterations);
    }
    if (doc.contains("mean_mode")) {
      c.mean_mode = parse_mean_mode(doc["mean_mode"].get<std::string>());
    }
    if (doc.contains("max_iterations")) {
      c.max_iterations = doc["max_iterations"].get<std::size_t>();
    }
    if (doc.contains("presence_threshold")) {
      c.presence_threshold = doc["presence_threshold"].get<double>();
    }
    if (doc.contains("normalization")) {
      c.normalization = parse_normalization(doc["normalization"].get<std::string>());
    }
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n_perm")) c.n_perm = doc["n_perm"].get<std::size_t>();
    if (doc.contains("output_dir")) {
      c.output_dir = doc["output_dir"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid configuration value: ") + e.what());
  }
  return c;
}

}  // namespace egraph
