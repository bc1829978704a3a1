// Functional bases (Fourier, B-spline): evaluation, Gram matrix of the
// basis inner products, its symmetric half powers, and least-squares
// expansion of discretely sampled curves into basis coefficients.

#ifndef RFC_BASIS_HPP
#define RFC_BASIS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rfc {

enum class BasisKind { fourier, bspline };

/// Definition of a functional basis on the interval [0, T].
///
/// Fourier uses the indexed scheme phi_1(t) = 1,
/// phi_{2j}(t) = sqrt(2) sin(2 pi j t / T), phi_{2j+1}(t) = sqrt(2) cos(2 pi j t / T).
/// B-splines are clamped, with p = interior knot count + order
/// (order = degree + 1) and equispaced interior knots.
struct BasisSpec {
  BasisKind kind = BasisKind::fourier;
  int p = 1;            // number of basis functions
  double domain_t = 1.0;  // right endpoint T of the domain [0, T]
  int order = 4;          // B-spline only
  std::vector<double> interior_knots;  // B-spline only, strictly inside (0, T)

  static BasisSpec fourier(int p, double domain_t = 1.0);
  /// Equispaced interior knots; interior knot count = p - order.
  static BasisSpec bspline(int p, int order, double domain_t = 1.0);

  bool operator==(const BasisSpec&) const = default;
};

/// p x p matrix W of basis inner products W_jl = \int_0^T phi_j phi_l.
struct GramMatrix {
  Eigen::MatrixXd w;
};

/// Symmetric square root of W and its inverse.
struct GramHalfPowers {
  Eigen::MatrixXd half;      // W^{1/2}
  Eigen::MatrixXd neg_half;  // W^{-1/2}
};

/// Raw curves observed on a shared grid: values(i, l) = x_i(grid(l)).
struct GridSamples {
  Eigen::VectorXd grid;   // strictly increasing, inside [0, T]
  Eigen::MatrixXd values; // n x m
  std::vector<std::string> ids;  // one per row; defaults to row numbers
};

/// n x p coefficient matrix of curves expanded in a common basis.
struct CurveSet {
  Eigen::MatrixXd gamma;  // n x p
  BasisSpec basis;
  std::vector<std::string> ids;
};

/// Evaluate all p basis functions at t.  Throws std::domain_error if t
/// lies outside [0, T].
Eigen::VectorXd evaluate_basis(const BasisSpec& spec, double t);

/// Evaluation matrix B with B(l, j) = phi_j(grid(l)).
Eigen::MatrixXd evaluation_matrix(const BasisSpec& spec, const Eigen::VectorXd& grid);

/// Gram matrix of the basis.  Fourier is computed in closed form (T * I);
/// B-spline by composite Gauss-Legendre quadrature, exact for the
/// piecewise-polynomial integrand.
GramMatrix gram_matrix(const BasisSpec& spec);

/// Symmetric eigendecomposition-based W^{1/2} and W^{-1/2}.
/// Throws std::runtime_error when W is not positive definite.
GramHalfPowers half_powers(const GramMatrix& gram);

/// Least-squares fit of each sampled curve to basis coefficients, via
/// column-pivoted QR.  Requires m >= p; throws std::runtime_error naming
/// the deficient column count when the evaluation matrix is rank deficient.
CurveSet fit_coefficients(const GridSamples& samples, const BasisSpec& spec);

}  // namespace rfc

#endif  // RFC_BASIS_HPP
