#include "smot/assignment.hpp"

#include <algorithm>
#include <limits>

namespace smot {

namespace {

// Requires rows <= cols. 1-based internal indexing with a virtual column 0.
std::vector<int> solve_wide(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (owner[j] != 0) row_to_col[owner[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<int> solve_min_cost_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return std::vector<int>(cost.rows(), -1);
  if (cost.rows() <= cost.cols()) return solve_wide(cost);

  const Eigen::MatrixXd transposed = cost.transpose();
  const auto col_to_row = solve_wide(transposed);
  std::vector<int> row_to_col(cost.rows(), -1);
  for (int j = 0; j < static_cast<int>(col_to_row.size()); ++j) {
    if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = j;
  }
  return row_to_col;
}

std::vector<int> solve_max_score_assignment(const Eigen::MatrixXd& score) {
  return solve_min_cost_assignment(-score);
}

}  // namespace smot
