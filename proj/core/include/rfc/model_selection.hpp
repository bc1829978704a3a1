// BIC with the score-model free-parameter count and grid search over the
// per-group dimensions (q_1, ..., q_K).

#ifndef RFC_MODEL_SELECTION_HPP
#define RFC_MODEL_SELECTION_HPP

#include <cstdint>
#include <vector>

#include "rfc/em.hpp"

namespace rfc {

struct DimGrid {
  std::vector<std::vector<int>> candidates;  // each of length K

  /// Full product grid {q_min..q_max}^K.
  static DimGrid full(int K, int q_min, int q_max);
};

struct BicRow {
  std::vector<int> dims;
  double loglik = 0.0;
  long long kappa = 0;
  double bic = 0.0;
  bool failed = false;  // every start degenerated for this candidate
};

struct SelectionResult {
  FitResult best;
  std::vector<int> best_dims;
  std::vector<BicRow> table;  // one row per candidate, grid order
};

/// Free parameters: kappa = rho + nu + 2K + Q with rho = Kp + K - 1,
/// nu = sum_g q_g (2p - q_g - 1) / 2 (exact integer arithmetic), Q = sum q_g.
long long count_free_params(int K, int p, const std::vector<int>& dims);

/// BIC = -2 loglik + kappa log(n).
double bic_score(double loglik, int n, long long kappa);

/// Fit every candidate with identical (alpha, d1, d2) and per-candidate
/// derived seeds; return the BIC minimizer (ties: smaller total dimension,
/// then lexicographic dims) plus the full table.
SelectionResult select_dimensions(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
                                  const DimGrid& grid, FitConfig config);

}  // namespace rfc

#endif  // RFC_MODEL_SELECTION_HPP
