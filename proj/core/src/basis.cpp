#include "rfc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace rfc {

namespace {

// Clamped knot vector: order copies of 0, the interior knots, order copies of T.
std::vector<double> clamped_knots(const BasisSpec& spec) {
  std::vector<double> knots;
  knots.reserve(spec.p + spec.order);
  knots.insert(knots.end(), spec.order, 0.0);
  knots.insert(knots.end(), spec.interior_knots.begin(), spec.interior_knots.end());
  knots.insert(knots.end(), spec.order, spec.domain_t);
  return knots;
}

// Index mu of the knot span containing t, i.e. knots[mu] <= t < knots[mu+1],
// with t == T mapped to the last non-empty span.
int find_span(const std::vector<double>& knots, int p, int order, double t) {
  const int last = p - 1;  // function index of the last B-spline
  if (t >= knots[p]) return last;
  int lo = order - 1, hi = p;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (t < knots[mid]) hi = mid; else lo = mid;
  }
  return lo;
}

// Cox-de Boor triangle: values of the `order` B-splines that are non-zero
// on span mu, in function order mu-order+1 .. mu.
void bspline_nonzero(const std::vector<double>& knots, int order, int mu, double t,
                     std::vector<double>& out) {
  out.assign(order, 0.0);
  out[0] = 1.0;
  std::vector<double> left(order), right(order);
  for (int j = 1; j < order; ++j) {
    left[j] = t - knots[mu + 1 - j];
    right[j] = knots[mu + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double tmp = denom > 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out[j] = saved;
  }
}

Eigen::VectorXd evaluate_bspline(const BasisSpec& spec, double t) {
  const auto knots = clamped_knots(spec);
  const int mu = find_span(knots, spec.p, spec.order, t);
  std::vector<double> vals;
  bspline_nonzero(knots, spec.order, mu, t, vals);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(spec.p);
  for (int r = 0; r < spec.order; ++r) {
    const int j = mu - spec.order + 1 + r;
    if (j >= 0 && j < spec.p) phi(j) = vals[r];
  }
  return phi;
}

Eigen::VectorXd evaluate_fourier(const BasisSpec& spec, double t) {
  Eigen::VectorXd phi(spec.p);
  const double sqrt2 = std::numbers::sqrt2;
  const double omega = 2.0 * std::numbers::pi / spec.domain_t;
  phi(0) = 1.0;
  for (int j = 1; 2 * j - 1 < spec.p || 2 * j < spec.p; ++j) {
    const double arg = omega * j * t;
    if (2 * j - 1 < spec.p) phi(2 * j - 1) = sqrt2 * std::sin(arg);
    if (2 * j < spec.p) phi(2 * j) = sqrt2 * std::cos(arg);
  }
  return phi;
}

}  // namespace

BasisSpec BasisSpec::fourier(int p, double domain_t) {
  if (p < 1) throw std::invalid_argument("fourier basis needs p >= 1");
  if (domain_t <= 0.0) throw std::invalid_argument("basis domain needs T > 0");
  BasisSpec spec;
  spec.kind = BasisKind::fourier;
  spec.p = p;
  spec.domain_t = domain_t;
  return spec;
}

BasisSpec BasisSpec::bspline(int p, int order, double domain_t) {
  if (order < 1) throw std::invalid_argument("bspline order must be >= 1");
  if (p < order) throw std::invalid_argument("bspline needs p >= order");
  if (domain_t <= 0.0) throw std::invalid_argument("basis domain needs T > 0");
  BasisSpec spec;
  spec.kind = BasisKind::bspline;
  spec.p = p;
  spec.order = order;
  spec.domain_t = domain_t;
  const int n_interior = p - order;
  spec.interior_knots.resize(n_interior);
  for (int i = 0; i < n_interior; ++i)
    spec.interior_knots[i] = domain_t * (i + 1) / (n_interior + 1);
  return spec;
}

Eigen::VectorXd evaluate_basis(const BasisSpec& spec, double t) {
  if (t < 0.0 || t > spec.domain_t)
    throw std::domain_error("evaluate_basis: t outside the basis domain [0, T]");
  return spec.kind == BasisKind::fourier ? evaluate_fourier(spec, t)
                                         : evaluate_bspline(spec, t);
}

Eigen::MatrixXd evaluation_matrix(const BasisSpec& spec, const Eigen::VectorXd& grid) {
  Eigen::MatrixXd b(grid.size(), spec.p);
  for (Eigen::Index l = 0; l < grid.size(); ++l)
    b.row(l) = evaluate_basis(spec, grid(l)).transpose();
  return b;
}

GramMatrix gram_matrix(const BasisSpec& spec) {
  if (spec.kind == BasisKind::fourier) {
    // The scheme is orthogonal on [0, T] with every diagonal entry T.
    return {spec.domain_t * Eigen::MatrixXd::Identity(spec.p, spec.p)};
  }

  // Composite Gauss-Legendre over the knot spans; 16 nodes are exact for
  // products of splines up to order 16.
  using quad = boost::math::quadrature::gauss<double, 16>;
  std::vector<double> breaks{0.0};
  breaks.insert(breaks.end(), spec.interior_knots.begin(), spec.interior_knots.end());
  breaks.push_back(spec.domain_t);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(spec.p, spec.p);
  const auto& xs = quad::abscissa();  // non-negative half, xs[0] == 0 for odd counts
  const auto& ws = quad::weights();
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    if (b <= a) continue;
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      for (const double sign : {-1.0, 1.0}) {
        if (xs[k] == 0.0 && sign < 0.0) continue;
        const Eigen::VectorXd phi = evaluate_basis(spec, mid + sign * hw * xs[k]);
        w.selfadjointView<Eigen::Lower>().rankUpdate(phi, hw * ws[k]);
      }
    }
  }
  // Mirror the accumulated lower triangle; symmetry is then exact.
  Eigen::MatrixXd full = w.selfadjointView<Eigen::Lower>();
  return {std::move(full)};
}

GramHalfPowers half_powers(const GramMatrix& gram) {
  const Eigen::MatrixXd& w = gram.w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("half_powers: eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double tol = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
  if (lambda.minCoeff() <= tol)
    throw std::runtime_error("half_powers: Gram matrix is not positive definite");
  const Eigen::VectorXd sqrt_l = lambda.cwiseSqrt();
  GramHalfPowers hp;
  hp.half = eig.eigenvectors() * sqrt_l.asDiagonal() * eig.eigenvectors().transpose();
  hp.neg_half = eig.eigenvectors() * sqrt_l.cwiseInverse().asDiagonal() *
                eig.eigenvectors().transpose();
  return hp;
}

CurveSet fit_coefficients(const GridSamples& samples, const BasisSpec& spec) {
  const Eigen::Index m = samples.grid.size();
  if (samples.values.cols() != m)
    throw std::invalid_argument("fit_coefficients: grid length != value columns");
  if (m < spec.p)
    throw std::invalid_argument("fit_coefficients: need at least p sample points");

  const Eigen::MatrixXd b = evaluation_matrix(spec, samples.grid);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
  if (qr.rank() < spec.p)
    throw std::runtime_error("fit_coefficients: evaluation matrix rank deficient (" +
                             std::to_string(spec.p - qr.rank()) + " of " +
                             std::to_string(spec.p) + " columns dependent)");

  CurveSet curves;
  curves.basis = spec;
  curves.ids = samples.ids;
  curves.gamma = qr.solve(samples.values.transpose()).transpose();
  if (curves.ids.empty()) {
    curves.ids.resize(samples.values.rows());
    for (Eigen::Index i = 0; i < samples.values.rows(); ++i)
      curves.ids[i] = std::to_string(i);
  }
  return curves;
}

}  // namespace rfc
