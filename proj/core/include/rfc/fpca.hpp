// Weighted functional principal component analysis through the basis
// coefficients: weighted centering, the W^{1/2}-symmetrized eigenproblem,
// eigenfunction coefficients and principal component scores.

#ifndef RFC_FPCA_HPP
#define RFC_FPCA_HPP

#include <Eigen/Dense>

#include "rfc/basis.hpp"

namespace rfc {

/// Thrown when a group carries (numerically) no weight, so its weighted
/// statistics are undefined.  The EM driver abandons the current start.
struct degenerate_group_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FpcaResult {
  Eigen::VectorXd eigenvalues;  // descending, clamped at 0
  Eigen::MatrixXd beta;         // p x p, column j = coefficients of eigenfunction j
  Eigen::MatrixXd scores;       // n x p, row i = scores of curve i
  Eigen::VectorXd mean;         // weighted mean coefficient vector
};

/// Weighted mean and row-centered coefficients.  All n rows are centered,
/// zero-weight rows included.  Throws degenerate_group_error when the
/// weights sum to zero.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> weighted_center(
    const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau);

/// Weighted FPCA of the coefficient rows, weights tau, inner product W.
///
/// Solves the symmetric eigenproblem of
///   M = (1/n_g) W^{1/2} Gamma_c^T diag(tau) Gamma_c W^{1/2},
/// n_g = sum(tau), returning eigenvalues in descending order, eigenfunction
/// coefficients beta_j = W^{-1/2} u_j (sign-fixed so the largest-magnitude
/// entry of each u_j is positive) and scores C = Gamma_c W beta.
FpcaResult weighted_fpca(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau,
                         const GramMatrix& gram);

/// Same, with the half powers of W already factored out.
FpcaResult weighted_fpca(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& tau,
                         const GramMatrix& gram, const GramHalfPowers& hp);

}  // namespace rfc

#endif  // RFC_FPCA_HPP
