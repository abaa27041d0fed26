#include "vif_core.hpp"

#include "gapdecomp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gapdecomp::detail {

std::vector<double> vif_from_covariance(const Eigen::MatrixXd& cov) {
  const Eigen::Index k = cov.rows();
  std::vector<double> out(static_cast<std::size_t>(k), 1.0);
  if (k == 0) return out;

  Eigen::VectorXd sd = cov.diagonal();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(sd(j) > 0.0)) {
      throw DegeneracyError("VIF undefined for a zero-variance column (index " +
                            std::to_string(j) + ")");
    }
    sd(j) = std::sqrt(sd(j));
  }
  const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  if (k == 1) return out;

  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<Eigen::Index> others;
    others.reserve(static_cast<std::size_t>(k - 1));
    for (Eigen::Index i = 0; i < k; ++i)
      if (i != j) others.push_back(i);

    const auto m = static_cast<Eigen::Index>(others.size());
    Eigen::MatrixXd block(m, m);
    Eigen::VectorXd r(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      r(a) = corr(others[a], j);
      for (Eigen::Index b = 0; b < m; ++b) block(a, b) = corr(others[a], others[b]);
    }
    const Eigen::VectorXd coef = block.completeOrthogonalDecomposition().solve(r);
    double r2 = r.dot(coef);
    r2 = std::clamp(r2, 0.0, 1.0);
    out[static_cast<std::size_t>(j)] =
        r2 >= kCollinearR2 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

}  // namespace gapdecomp::detail
