// Trimmed, constrained EM for functional clustering: random subset
// initialization, joint trimming/E-step, M-step (weights, per-group
// weighted FPCA, scatter truncation) and the multi-start driver.

#ifndef RFC_EM_HPP
#define RFC_EM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rfc/basis.hpp"
#include "rfc/constraints.hpp"
#include "rfc/fpca.hpp"

namespace rfc {

/// Thrown when every group density vanishes for some retained observation;
/// like degenerate_group_error, it abandons the current start.
struct degenerate_model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelParams {
  int K = 0;
  int p = 0;
  std::vector<int> dims;             // q_g
  Eigen::VectorXd pi;                // mixture weights
  Eigen::MatrixXd means;             // K x p group mean coefficients
  std::vector<Eigen::MatrixXd> eigen;  // per group, p x p, column j = beta_j
  ScatterSet scatter;
};

struct Posteriors {
  Eigen::MatrixXd tau;  // n x K; trimmed rows are exactly zero
};

struct TrimSet {
  std::vector<int> indices;  // ascending
  bool contains(int i) const;
};

struct FitResult {
  ModelParams params;
  Posteriors posteriors;
  TrimSet trimmed;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;

  // Diagnostics aggregated over every start of the fit.
  int start_index = -1;
  int monotone_violations = 0;      // target decreases > 1e-8 between iterations
  double max_loglik_decrease = 0.0;
  int degenerate_starts = 0;
  int model_order_warnings = 0;     // enforced scatter with some a_jg <= b_g
};

struct FitConfig {
  int K = 2;
  std::vector<int> dims;  // length K
  double alpha = 0.0;
  double d1 = 10.0;
  double d2 = 10.0;
  int nstart = 100;
  int iter_max = 20;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

/// Number of observations kept by the trimming rule, floor(n (1 - alpha)).
int untrimmed_count(int n, double alpha);

/// Number of trimmed observations, n - floor(n (1 - alpha)).
int trim_count(int n, double alpha);

/// log D_g(x; theta): log pi_g plus the Gaussian score log-densities, with
/// scores c_j = (x - mean_g)^T W beta_j, variances a_jg (j <= q_g) / b_g.
double log_group_density(const Eigen::VectorXd& x_coeffs, int g,
                         const ModelParams& params, const GramMatrix& gram);

/// n x K matrix of log D_g(x_i; theta).
Eigen::MatrixXd log_density_matrix(const Eigen::MatrixXd& gamma,
                                   const ModelParams& params, const GramMatrix& gram);

/// log D(x_i; theta) = log sum_g D_g(x_i; theta), stabilized.
Eigen::VectorXd log_total_density(const Eigen::MatrixXd& gamma,
                                  const ModelParams& params, const GramMatrix& gram);

struct TEStepResult {
  Posteriors posteriors;
  TrimSet trimmed;
  double loglik = 0.0;  // trimmed loglikelihood at the input parameters
};

/// Trimming + E-step: discard the trim_count(n, alpha) observations with
/// smallest total density D (ties trim the lower index first), zero their
/// posterior rows, and fill the rest by Bayes' rule.
TEStepResult t_and_e_step(const Eigen::MatrixXd& gamma, const ModelParams& params,
                          double alpha, const GramMatrix& gram);

/// pi_g = sum_i tau_ig / floor(n (1 - alpha)).
Eigen::VectorXd update_weights(const Posteriors& posteriors, int n, double alpha);

struct GroupModelUpdate {
  Eigen::MatrixXd means;
  std::vector<Eigen::MatrixXd> eigen;
  ScatterSet scatter;
  int model_order_warnings = 0;
};

/// Per-group weighted FPCA followed by scatter truncation: raw a_jg are the
/// top-q_g eigenvalues, raw b_g averages the residual eigenvalues, then the
/// ratio constraints (d1, d2) are enforced jointly across groups.  Throws
/// degenerate_group_error when a group's mass falls below 1e-6 n.
GroupModelUpdate update_group_model(const Eigen::MatrixXd& gamma,
                                    const Posteriors& posteriors,
                                    const GramMatrix& gram, const GramHalfPowers& hp,
                                    const std::vector<int>& dims, double d1, double d2);

/// Trimmed loglikelihood: sum over untrimmed i of log sum_g D_g(x_i),
/// evaluated with log-sum-exp stabilization.
double trimmed_loglik(const Eigen::MatrixXd& gamma, const ModelParams& params,
                      const TrimSet& trimset, const GramMatrix& gram);

/// K disjoint index subsets of size h drawn without replacement from 0..n-1.
std::vector<std::vector<int>> draw_init_subsets(int n, int K, int h,
                                                std::uint64_t seed);

/// Random initialization: K disjoint subsets of size h = max_g q_g + 2 give
/// indicator weights for one update_group_model pass; pi_g = 1/K.
ModelParams random_init(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
                        const GramHalfPowers& hp, int K, const std::vector<int>& dims,
                        double d1, double d2, std::uint64_t seed);

/// Multi-start trimmed EM.  Starts run independently (concurrently when
/// threads permit) with per-start RNG seed ^ start_index; the best final
/// target wins, ties resolved by lower start index.  Throws
/// std::runtime_error when every start degenerates.
FitResult fit(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
              const FitConfig& config);

}  // namespace rfc

#endif  // RFC_EM_HPP
