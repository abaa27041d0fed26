#pragma once

#include <Eigen/Dense>

#include <vector>

namespace gapdecomp::detail {

// R^2 at or above this counts as exact collinearity (infinite VIF).
inline constexpr double kCollinearR2 = 1.0 - 1e-12;

// VIF of every column from the covariance matrix of the non-intercept
// columns. Regressing column j on the others plus an intercept gives
// R^2_j = r_j' R_oo^+ r_j on the correlation scale, where R_oo is the
// correlation block of the other columns. Throws DegeneracyError for a
// zero-variance column.
std::vector<double> vif_from_covariance(const Eigen::MatrixXd& cov);

}  // namespace gapdecomp::detail
