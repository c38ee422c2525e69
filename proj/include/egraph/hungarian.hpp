#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace egraph {

// Maximum-weight perfect assignment on a square matrix (Hungarian method,
// O(n^3)). Returns, for every column, the row assigned to it.
std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& weight);

}  // namespace egraph
