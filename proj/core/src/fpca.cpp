#include "rfc/fpca.hpp"

#include <cmath>
#include <stdexcept>

namespace rfc {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> weighted_center(
    const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau) {
  if (tau.size() != gamma.rows())
    throw std::invalid_argument("weighted_center: weight length != row count");
  const double n_g = tau.sum();
  if (!(n_g > 0.0))
    throw degenerate_group_error("weighted_center: group weight sum is zero");
  const Eigen::VectorXd mean = gamma.transpose() * (tau / n_g);
  Eigen::MatrixXd centered = gamma.rowwise() - mean.transpose();
  return {std::move(centered), mean};
}

FpcaResult weighted_fpca(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau,
                         const GramMatrix& gram) {
  return weighted_fpca(gamma, tau, gram, half_powers(gram));
}

FpcaResult weighted_fpca(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau,
                         const GramMatrix& gram, const GramHalfPowers& hp) {
  const Eigen::Index p = gamma.cols();
  if (gram.w.rows() != p)
    throw std::invalid_argument("weighted_fpca: Gram dimension mismatch");

  auto [centered, mean] = weighted_center(gamma, tau);
  const double n_g = tau.sum();

  // M = (1/n_g) W^{1/2} Gamma_c^T T Gamma_c W^{1/2}, forced symmetric.
  const Eigen::MatrixXd cw = centered * hp.half;
  Eigen::MatrixXd m = cw.transpose() * tau.asDiagonal() * cw / n_g;
  m = 0.5 * (m + m.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("weighted_fpca: eigendecomposition failed");

  FpcaResult res;
  res.mean = std::move(mean);
  res.eigenvalues.resize(p);
  Eigen::MatrixXd u(p, p);
  // Eigen returns ascending order; flip to descending and clamp round-off.
  for (Eigen::Index j = 0; j < p; ++j) {
    res.eigenvalues(j) = std::max(eig.eigenvalues()(p - 1 - j), 0.0);
    u.col(j) = eig.eigenvectors().col(p - 1 - j);
  }
  // Sign convention: largest-magnitude entry of each u_j positive.
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::Index imax;
    u.col(j).cwiseAbs().maxCoeff(&imax);
    if (u(imax, j) < 0.0) u.col(j) = -u.col(j);
  }
  res.beta = hp.neg_half * u;
  res.scores = centered * gram.w * res.beta;
  return res;
}

}  // namespace rfc
