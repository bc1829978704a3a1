#include "rfc/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rfc {

namespace {

constexpr int kMeanProjectionGrid = 201;  // also the min/max evaluation grid

Eigen::VectorXd dense_grid(int n, double t_max) {
  return Eigen::VectorXd::LinSpaced(n, 0.0, t_max);
}

std::string outlier_id(int index) { return "out" + std::to_string(index); }

// Level-shift contamination: u_i + N(0, sigma^2) observed on a grid of
// grid_size points, interpolated exactly by the full Fourier system.  The
// grid is periodic-equispaced (t_l = l/grid_size) so the system stays
// nonsingular; the constant basis element absorbs the global level.
void append_level_outliers(LabeledDataset& data, const ContaminationSpec& spec,
                           double lo, double hi, std::mt19937_64& rng) {
  const BasisSpec& basis = data.curves.basis;
  if (spec.grid_size < basis.p)
    throw std::invalid_argument("contamination grid smaller than basis size");
  Eigen::VectorXd grid(spec.grid_size);
  for (int l = 0; l < spec.grid_size; ++l)
    grid(l) = basis.domain_t * l / spec.grid_size;

  std::uniform_real_distribution<double> level(lo, hi);
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_variance));

  GridSamples samples;
  samples.grid = grid;
  samples.values.resize(spec.count, spec.grid_size);
  for (int i = 0; i < spec.count; ++i) {
    const double u = level(rng);
    for (int l = 0; l < spec.grid_size; ++l) samples.values(i, l) = u + noise(rng);
    samples.ids.push_back(outlier_id(i));
  }
  const CurveSet fitted = fit_coefficients(samples, basis);

  const Eigen::Index n0 = data.curves.gamma.rows();
  data.curves.gamma.conservativeResize(n0 + spec.count, Eigen::NoChange);
  data.curves.gamma.bottomRows(spec.count) = fitted.gamma;
  for (int i = 0; i < spec.count; ++i) {
    data.curves.ids.push_back(fitted.ids[i]);
    data.labels.push_back(kOutlierLabel);
  }
}

void append_cauchy_outliers(LabeledDataset& data, const ContaminationSpec& spec,
                            const ScenarioSpec& scenario, std::mt19937_64& rng) {
  const Eigen::MatrixXd means = project_means(scenario, data.curves.basis);
  std::uniform_int_distribution<int> pick_group(0, scenario.n_groups() - 1);
  std::cauchy_distribution<double> z(0.0, 1.0);
  const int p = scenario.p;

  const Eigen::Index n0 = data.curves.gamma.rows();
  data.curves.gamma.conservativeResize(n0 + spec.count, Eigen::NoChange);
  for (int i = 0; i < spec.count; ++i) {
    const int g = pick_group(rng);
    const int q = scenario.dims[g];
    Eigen::VectorXd gamma = means.row(g);
    for (int j = 0; j < p; ++j) {
      const double var = j < q ? scenario.main_variances[g](j) : scenario.noise_variances(g);
      gamma(j) += std::sqrt(var) * z(rng);
    }
    data.curves.gamma.row(n0 + i) = gamma;
    data.curves.ids.push_back(outlier_id(i));
    data.labels.push_back(kOutlierLabel);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ScenarioSpec scenario1(int n_per_group) {
  ScenarioSpec spec;
  spec.means = {[](double t) { return std::cos(t); },
                [](double t) { return std::cos(t); }};
  spec.dims = {2, 3};
  spec.main_variances = {Eigen::Vector2d(60.0, 30.0),
                         Eigen::Vector3d(170.0, 140.0, 120.0)};
  spec.noise_variances = Eigen::Vector2d(0.5, 1.0);
  spec.n_per_group = {n_per_group, n_per_group};
  spec.p = 21;
  return spec;
}

ScenarioSpec scenario2(int n_per_group) {
  ScenarioSpec spec;
  spec.means = {[](double t) { return std::cos(t) + 3.0; },
                [](double t) { return std::cos(t) + 1.0; }};
  spec.dims = {2, 3};
  spec.main_variances = {Eigen::Vector2d(60.0, 30.0),
                         Eigen::Vector3d(60.0, 30.0, 30.0)};
  spec.noise_variances = Eigen::Vector2d(0.5, 1.0);
  spec.n_per_group = {n_per_group, n_per_group};
  spec.p = 21;
  return spec;
}

ContaminationSpec contamination_scheme(ContaminationScheme scheme, int count) {
  ContaminationSpec spec;
  spec.scheme = scheme;
  spec.count = scheme == ContaminationScheme::none ? 0 : count;
  return spec;
}

Eigen::MatrixXd project_means(const ScenarioSpec& spec, const BasisSpec& basis) {
  GridSamples samples;
  samples.grid = dense_grid(kMeanProjectionGrid, basis.domain_t);
  samples.values.resize(spec.n_groups(), samples.grid.size());
  for (int g = 0; g < spec.n_groups(); ++g)
    for (Eigen::Index l = 0; l < samples.grid.size(); ++l)
      samples.values(g, l) = spec.means[g](samples.grid(l));
  return fit_coefficients(samples, basis).gamma;
}

LabeledDataset generate_clean(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.n_groups() == 0) throw std::invalid_argument("scenario has no groups");
  for (int g = 0; g < spec.n_groups(); ++g) {
    if (spec.dims[g] > spec.p)
      throw std::invalid_argument("scenario dims exceed basis size");
    // Degenerate all-zero variances are allowed (curves collapse to the mean).
    if (!(spec.noise_variances(g) >= 0.0))
      throw std::invalid_argument("scenario requires b_g >= 0");
    for (Eigen::Index j = 0; j < spec.main_variances[g].size(); ++j)
      if (!(spec.main_variances[g](j) >= spec.noise_variances(g)))
        throw std::invalid_argument("scenario requires a_jg >= b_g");
  }

  LabeledDataset data;
  data.curves.basis = BasisSpec::fourier(spec.p, 1.0);
  const Eigen::MatrixXd means = project_means(spec, data.curves.basis);

  int n_total = 0;
  for (int g = 0; g < spec.n_groups(); ++g) n_total += spec.n_per_group[g];
  data.curves.gamma.resize(n_total, spec.p);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  int row = 0;
  for (int g = 0; g < spec.n_groups(); ++g) {
    const int q = spec.dims[g];
    for (int i = 0; i < spec.n_per_group[g]; ++i, ++row) {
      Eigen::VectorXd gamma = means.row(g);
      for (int j = 0; j < spec.p; ++j) {
        const double var = j < q ? spec.main_variances[g](j) : spec.noise_variances(g);
        gamma(j) += std::sqrt(var) * z(rng);
      }
      data.curves.gamma.row(row) = gamma;
      data.curves.ids.push_back(std::to_string(row));
      data.labels.push_back(g + 1);
    }
  }
  return data;
}

std::pair<double, double> clean_value_range(const LabeledDataset& data) {
  const Eigen::MatrixXd b = evaluation_matrix(
      data.curves.basis, dense_grid(kMeanProjectionGrid, data.curves.basis.domain_t));
  const Eigen::MatrixXd values = data.curves.gamma * b.transpose();
  return {values.minCoeff(), values.maxCoeff()};
}

LabeledDataset generate_contaminated(const ContaminationSpec& spec,
                                     const LabeledDataset& clean,
                                     const ScenarioSpec& scenario,
                                     std::uint64_t seed) {
  if (spec.scheme == ContaminationScheme::none) {
    if (spec.count > 0)
      throw std::invalid_argument("contamination scheme 'none' with count > 0");
    return clean;
  }
  if (spec.count == 0) return clean;

  LabeledDataset data = clean;
  std::mt19937_64 rng(seed);
  switch (spec.scheme) {
    case ContaminationScheme::far_level:
      append_level_outliers(data, spec, spec.level_lo, spec.level_hi, rng);
      break;
    case ContaminationScheme::inrange_level: {
      const auto [lo, hi] = clean_value_range(clean);
      append_level_outliers(data, spec, lo, hi, rng);
      break;
    }
    case ContaminationScheme::cauchy:
      append_cauchy_outliers(data, spec, scenario, rng);
      break;
    case ContaminationScheme::none:
      break;
  }
  return data;
}

LabeledDataset make_dataset(const ScenarioSpec& scenario,
                            const ContaminationSpec& contamination,
                            std::uint64_t seed) {
  const LabeledDataset clean = generate_clean(scenario, derive_seed(seed, 0));
  return generate_contaminated(contamination, clean, scenario, derive_seed(seed, 1));
}

}  // namespace rfc
