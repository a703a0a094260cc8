#pragma once

#include <vector>

#include <Eigen/Core>

namespace smot {

/// Minimum-cost rectangular assignment (shortest augmenting path with dual
/// potentials). Every row is assigned when rows <= cols, every column
/// otherwise. Returns the column assigned to each row, or -1.
std::vector<int> solve_min_cost_assignment(const Eigen::MatrixXd& cost);

/// Same as above, maximizing the total of `score`.
std::vector<int> solve_max_score_assignment(const Eigen::MatrixXd& score);

}  // namespace smot
