#include "egraph/hungarian.hpp"

#include <limits>

#include "egraph/error.hpp"

namespace egraph {

std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& weight) {
  if (weight.rows() != weight.cols()) {
    throw InvalidInput("assignment needs a square weight matrix");
  }
  if (!weight.allFinite()) {
    throw NumericError("assignment weights are not finite");
  }
  const auto n = static_cast<std::size_t>(weight.rows());
  if (n == 0) return {};

  // Shortest augmenting path with potentials, 1-based with a virtual
  // column 0. Rows are inserted in increasing order; among equal reduced
  // costs the lowest column index wins.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) {
    return -weight(static_cast<Eigen::Index>(i - 1),
                   static_cast<Eigen::Index>(j - 1));
  };

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[j - 1] = row_of[j] - 1;
  return out;
}

}  // namespace egraph
