#include "rfc/model_selection.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rfc/simulate.hpp"

namespace rfc {

DimGrid DimGrid::full(int K, int q_min, int q_max) {
  if (q_min < 1 || q_max < q_min)
    throw std::invalid_argument("DimGrid: need 1 <= q_min <= q_max");
  DimGrid grid;
  std::vector<int> dims(K, q_min);
  while (true) {
    grid.candidates.push_back(dims);
    int g = K - 1;
    while (g >= 0 && dims[g] == q_max) dims[g--] = q_min;
    if (g < 0) break;
    ++dims[g];
  }
  return grid;
}

long long count_free_params(int K, int p, const std::vector<int>& dims) {
  const long long rho = static_cast<long long>(K) * p + K - 1;
  long long nu = 0, big_q = 0;
  for (int q : dims) {
    // q (2p - q - 1) is even, so the division is exact.
    nu += static_cast<long long>(q) * (2LL * p - q - 1) / 2;
    big_q += q;
  }
  return rho + nu + 2LL * K + big_q;
}

double bic_score(double loglik, int n, long long kappa) {
  return -2.0 * loglik + static_cast<double>(kappa) * std::log(static_cast<double>(n));
}

SelectionResult select_dimensions(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
                                  const DimGrid& grid, FitConfig config) {
  if (grid.candidates.empty())
    throw std::invalid_argument("select_dimensions: empty candidate grid");
  const int n = static_cast<int>(gamma.rows());
  const int p = static_cast<int>(gamma.cols());

  SelectionResult sel;
  sel.table.resize(grid.candidates.size());

  double best_bic = std::numeric_limits<double>::infinity();
  long long best_q = 0;
  int best_index = -1;
  std::vector<FitResult> fits(grid.candidates.size());

  const std::uint64_t base_seed = config.seed;
  for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
    const std::vector<int>& dims = grid.candidates[c];
    if (static_cast<int>(dims.size()) != config.K)
      throw std::invalid_argument("select_dimensions: candidate arity != K");
    BicRow& row = sel.table[c];
    row.dims = dims;
    row.kappa = count_free_params(config.K, p, dims);

    FitConfig fc = config;
    fc.dims = dims;
    fc.seed = derive_seed(base_seed, 0x5e1ec7 + c);
    try {
      fits[c] = fit(gamma, gram, fc);
    } catch (const std::runtime_error&) {
      row.failed = true;
      row.loglik = -std::numeric_limits<double>::infinity();
      row.bic = std::numeric_limits<double>::infinity();
      continue;
    }
    row.loglik = fits[c].loglik;
    row.bic = bic_score(row.loglik, n, row.kappa);

    const long long q_total = std::accumulate(dims.begin(), dims.end(), 0LL);
    const bool better =
        row.bic < best_bic ||
        (row.bic == best_bic &&
         (q_total < best_q || (q_total == best_q && best_index >= 0 &&
                               dims < grid.candidates[static_cast<std::size_t>(best_index)])));
    if (better) {
      best_bic = row.bic;
      best_q = q_total;
      best_index = static_cast<int>(c);
    }
  }

  if (best_index < 0)
    throw std::runtime_error("select_dimensions: every candidate fit failed");
  sel.best = std::move(fits[static_cast<std::size_t>(best_index)]);
  sel.best_dims = grid.candidates[static_cast<std::size_t>(best_index)];
  return sel;
}

}  // namespace rfc
