// Eigenvalue-ratio constraints on the scatter parameters: the truncation
// family, the one-dimensional truncated-likelihood threshold optimizers,
// and joint enforcement over all groups.

#ifndef RFC_CONSTRAINTS_HPP
#define RFC_CONSTRAINTS_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rfc {

/// Per-group scatter parameters of the score model: main variances a_jg
/// (j = 1..q_g) and the common residual variance b_g.
struct ScatterSet {
  std::vector<Eigen::VectorXd> a;  // a[g] has length dims[g]
  Eigen::VectorXd b;               // one per group
  Eigen::VectorXd counts;          // n_g = sum of responsibilities
  std::vector<int> dims;           // q_g
  int p = 0;                       // total score dimension
};

/// Project v onto [m, d*m].  Throws std::domain_error for m <= 0 or d < 1.
double truncate_value(double v, double m, double d);

/// Threshold minimizing  sum_g n_g sum_{j<=q_g} [log a_jg^m + a_jg / a_jg^m]
/// over m > 0, where a^m is the truncation of a at (m, d1).  The objective
/// is piecewise smooth in m, so the minimum is found over the breakpoints
/// {a, a/d1} plus the per-piece interior stationary points.
double optimal_threshold_a(const ScatterSet& scatter, double d1);

/// Same for the noise variances with weights n_g (p - q_g).  Returns
/// std::nullopt when every group has q_g = p (no noise dimensions).
std::optional<double> optimal_threshold_b(const ScatterSet& scatter, double d2);

/// Truncate every a_jg at the optimal m1 and every b_g at the optimal m2.
/// Output satisfies max/min <= d1 (resp. d2); inputs already satisfying the
/// ratios are returned unchanged.  Idempotent.
ScatterSet enforce(const ScatterSet& scatter, double d1, double d2);

/// True when a_jg > b_g holds for every group (the model ordering).  The
/// truncation does not re-impose it, so callers may want to report it.
bool satisfies_model_order(const ScatterSet& scatter);

}  // namespace rfc

#endif  // RFC_CONSTRAINTS_HPP
