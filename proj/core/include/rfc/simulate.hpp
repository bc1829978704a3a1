// Synthetic curve generators: K-L expansion sampling in a Fourier basis
// for the clean scenarios, plus level-shift and heavy-tail contamination
// schemes with ground-truth labels.

#ifndef RFC_SIMULATE_HPP
#define RFC_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfc/basis.hpp"

namespace rfc {

/// Label value marking a contaminating curve.
inline constexpr int kOutlierLabel = 0;

struct LabeledDataset {
  CurveSet curves;
  std::vector<int> labels;  // 1..K, or kOutlierLabel
};

/// K-L generator for one scenario: group means (closed form), per-group
/// unconstrained dimensions and variances, sampled in a Fourier basis of
/// size p on [0, 1].
struct ScenarioSpec {
  std::vector<std::function<double(double)>> means;  // mu_g(t)
  std::vector<int> dims;                             // q_g
  std::vector<Eigen::VectorXd> main_variances;       // a_jg, length q_g
  Eigen::VectorXd noise_variances;                   // b_g
  std::vector<int> n_per_group;
  int p = 21;

  int n_groups() const { return static_cast<int>(dims.size()); }
};

enum class ContaminationScheme { none, far_level, inrange_level, cauchy };

struct ContaminationSpec {
  ContaminationScheme scheme = ContaminationScheme::none;
  int count = 22;
  double level_lo = 150.0, level_hi = 180.0;  // far_level only
  // Pointwise noise variance on the level schemes.  The default (sd 10)
  // is what makes level outliers diffuse enough in coefficient space to be
  // rejected rather than absorbed as an extra tight cluster.
  double noise_variance = 100.0;
  int grid_size = 21;
};

/// Equal-mean scenario: mu_1 = mu_2 = cos(t), q = (2, 3),
/// a_1 = (60, 30), b_1 = 0.5, a_2 = (170, 140, 120), b_2 = 1.
ScenarioSpec scenario1(int n_per_group = 100);

/// Unequal-mean scenario: mu_1 = cos(t) + 3, mu_2 = cos(t) + 1, q = (2, 3),
/// a_g = (60, 30, 30), b = (0.5, 1).
ScenarioSpec scenario2(int n_per_group = 100);

ContaminationSpec contamination_scheme(ContaminationScheme scheme, int count = 22);

/// Group mean functions projected onto the Fourier basis by least squares
/// on a dense grid (the closed forms are not in the basis span exactly).
Eigen::MatrixXd project_means(const ScenarioSpec& spec, const BasisSpec& basis);

/// Sample the clean groups.  Curve i of group g gets coefficients
/// mu_g + sum_{j<=q_g} a_jg^{1/2} z_ij e_j + sum_{j>q_g} b_g^{1/2} z_ij e_j
/// with independent standard normal z_ij.  Deterministic given seed.
LabeledDataset generate_clean(const ScenarioSpec& spec, std::uint64_t seed);

/// Pointwise [min, max] of the dataset's curves on a 201-point equispaced
/// grid; the inrange_level scheme draws its levels from this interval.
std::pair<double, double> clean_value_range(const LabeledDataset& data);

/// Append `count` contaminating curves to a copy of `clean`.
/// Level schemes draw a level u ~ U[a, b], add N(0, sigma^2) noise on an
/// equispaced grid and interpolate with the full Fourier system (the
/// constant term carries the global level); inrange_level takes [a, b]
/// from the min/max of the clean curves on a 201-point grid; cauchy
/// re-runs the K-L scheme with Cauchy-distributed z_ij.
LabeledDataset generate_contaminated(const ContaminationSpec& spec,
                                     const LabeledDataset& clean,
                                     const ScenarioSpec& scenario,
                                     std::uint64_t seed);

/// Clean generation followed by contamination, with derived sub-seeds.
LabeledDataset make_dataset(const ScenarioSpec& scenario,
                            const ContaminationSpec& contamination,
                            std::uint64_t seed);

/// splitmix64 step; used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rfc

#endif  // RFC_SIMULATE_HPP
