#pragma once

// Run configuration shared by every command-line entry point.

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

#include "egraph/matching.hpp"
#include "egraph/statistics.hpp"

namespace egraph {

enum class Normalization { none, total_length };

std::string to_string(Normalization normalization);
Normalization parse_normalization(const std::string& tag);

struct RunConfig {
  std::size_t samples_per_edge = 50;
  Solver solver = Solver::graduated;
  std::size_t exact_limit = 8;
  GraduatedSchedule schedule;
  MeanMode mean_mode = MeanMode::full;
  std::size_t max_iterations = 20;
  double presence_threshold = 0.5;
  Normalization normalization = Normalization::none;
  std::uint64_t seed = 0;
  std::size_t n_perm = 30000;
  std::string output_dir = ".";

  // Throws UsageError naming the first field out of range.
  void validate() const;

  MatchOptions match_options() const;
  MeanOptions mean_options() const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& doc);
};

}  // namespace egraph
