#pragma once

#include <Eigen/Dense>

namespace otgk::detail {

// Balanced transportation problem: supply and demand are nonnegative and sum
// to the same total. Returns the optimal cost and writes the plan.
double solve_transportation(const Eigen::VectorXd& supply,
                            const Eigen::VectorXd& demand,
                            const Eigen::MatrixXd& cost,
                            Eigen::MatrixXd* plan);

}  // namespace otgk::detail
