#include "rfc/em.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

namespace rfc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinGroupMassFraction = 1e-6;
constexpr double kMonotoneSlack = 1e-8;
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// Per-group Gaussian score log-density for all rows.
Eigen::VectorXd group_log_density_column(const Eigen::MatrixXd& gamma,
                                         const ModelParams& params,
                                         const GramMatrix& gram, int g) {
  const int p = params.p;
  const int q = params.dims[static_cast<std::size_t>(g)];
  Eigen::VectorXd variances(p);
  variances.head(q) = params.scatter.a[static_cast<std::size_t>(g)];
  variances.tail(p - q).setConstant(params.scatter.b(g));
  if (!(variances.minCoeff() > 0.0))
    throw std::runtime_error("log density: nonpositive scatter variance");

  const Eigen::MatrixXd centered = gamma.rowwise() - params.means.row(g);
  const Eigen::MatrixXd scores =
      centered * gram.w * params.eigen[static_cast<std::size_t>(g)];

  const double log_pi_g = std::log(params.pi(g));  // -inf for an empty group
  const double const_term =
      log_pi_g - 0.5 * (p * kLog2Pi + variances.array().log().sum());
  return (const_term -
          0.5 * (scores.array().square().rowwise() *
                 variances.cwiseInverse().transpose().array())
                    .rowwise()
                    .sum())
      .matrix();
}

Eigen::VectorXd row_log_sum_exp(const Eigen::MatrixXd& ld) {
  Eigen::VectorXd out(ld.rows());
  for (Eigen::Index i = 0; i < ld.rows(); ++i) {
    const double m = ld.row(i).maxCoeff();
    if (m == kNegInf) {
      out(i) = kNegInf;
      continue;
    }
    out(i) = m + std::log((ld.row(i).array() - m).exp().sum());
  }
  return out;
}

struct StartOutcome {
  ModelParams params;
  double loglik = kNegInf;
  int iterations = 0;
  bool converged = false;
  int monotone_violations = 0;
  double max_loglik_decrease = 0.0;
  int model_order_warnings = 0;
};

}  // namespace

bool TrimSet::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

int untrimmed_count(int n, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::invalid_argument("trimming level must satisfy 0 <= alpha < 1");
  // Small slack keeps floor(n (1 - alpha)) at the intended integer when the
  // product lands a few ulps under it.
  return static_cast<int>(std::floor(n * (1.0 - alpha) + 1e-9));
}

int trim_count(int n, double alpha) { return n - untrimmed_count(n, alpha); }

double log_group_density(const Eigen::VectorXd& x_coeffs, int g,
                         const ModelParams& params, const GramMatrix& gram) {
  return group_log_density_column(x_coeffs.transpose(), params, gram, g)(0);
}

Eigen::MatrixXd log_density_matrix(const Eigen::MatrixXd& gamma,
                                   const ModelParams& params, const GramMatrix& gram) {
  Eigen::MatrixXd ld(gamma.rows(), params.K);
  for (int g = 0; g < params.K; ++g)
    ld.col(g) = group_log_density_column(gamma, params, gram, g);
  return ld;
}

Eigen::VectorXd log_total_density(const Eigen::MatrixXd& gamma,
                                  const ModelParams& params, const GramMatrix& gram) {
  return row_log_sum_exp(log_density_matrix(gamma, params, gram));
}

TEStepResult t_and_e_step(const Eigen::MatrixXd& gamma, const ModelParams& params,
                          double alpha, const GramMatrix& gram) {
  const int n = static_cast<int>(gamma.rows());
  const Eigen::MatrixXd ld = log_density_matrix(gamma, params, gram);
  const Eigen::VectorXd log_total = row_log_sum_exp(ld);

  // Order by density, lowest first; ties trim the lower index first.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return log_total(a) < log_total(b); });
  const int n_trim = trim_count(n, alpha);

  TEStepResult res;
  res.trimmed.indices.assign(order.begin(), order.begin() + n_trim);
  std::sort(res.trimmed.indices.begin(), res.trimmed.indices.end());

  res.posteriors.tau = Eigen::MatrixXd::Zero(n, params.K);
  res.loglik = 0.0;
  for (int k = n_trim; k < n; ++k) {
    const int i = order[k];
    if (log_total(i) == kNegInf)
      throw degenerate_model_error("t_and_e_step: density vanished for a retained curve");
    res.posteriors.tau.row(i) = (ld.row(i).array() - log_total(i)).exp();
    res.loglik += log_total(i);
  }
  return res;
}

Eigen::VectorXd update_weights(const Posteriors& posteriors, int n, double alpha) {
  return posteriors.tau.colwise().sum().transpose() / untrimmed_count(n, alpha);
}

GroupModelUpdate update_group_model(const Eigen::MatrixXd& gamma,
                                    const Posteriors& posteriors,
                                    const GramMatrix& gram, const GramHalfPowers& hp,
                                    const std::vector<int>& dims, double d1, double d2) {
  const int n = static_cast<int>(gamma.rows());
  const int p = static_cast<int>(gamma.cols());
  const int K = static_cast<int>(posteriors.tau.cols());

  GroupModelUpdate upd;
  upd.means.resize(K, p);
  upd.eigen.resize(K);
  ScatterSet raw;
  raw.p = p;
  raw.dims = dims;
  raw.counts.resize(K);
  raw.b.resize(K);
  raw.a.resize(K);

  for (int g = 0; g < K; ++g) {
    const Eigen::VectorXd tau = posteriors.tau.col(g);
    const double n_g = tau.sum();
    if (!(n_g >= kMinGroupMassFraction * n))
      throw degenerate_group_error("update_group_model: group " + std::to_string(g) +
                                   " carries negligible mass");
    const FpcaResult fpca = weighted_fpca(gamma, tau, gram, hp);
    upd.means.row(g) = fpca.mean.transpose();
    upd.eigen[g] = fpca.beta;
    const int q = dims[static_cast<std::size_t>(g)];
    raw.counts(g) = n_g;
    raw.a[g] = fpca.eigenvalues.head(q);
    raw.b(g) = q < p ? fpca.eigenvalues.tail(p - q).sum() / (p - q) : 0.0;
  }

  upd.scatter = enforce(raw, d1, d2);
  upd.model_order_warnings = satisfies_model_order(upd.scatter) ? 0 : 1;
  return upd;
}

double trimmed_loglik(const Eigen::MatrixXd& gamma, const ModelParams& params,
                      const TrimSet& trimset, const GramMatrix& gram) {
  const Eigen::VectorXd log_total =
      row_log_sum_exp(log_density_matrix(gamma, params, gram));
  double ll = 0.0;
  for (int i = 0; i < log_total.size(); ++i)
    if (!trimset.contains(i)) ll += log_total(i);
  return ll;
}

std::vector<std::vector<int>> draw_init_subsets(int n, int K, int h,
                                                std::uint64_t seed) {
  if (n < K * h)
    throw std::invalid_argument("random_init: need at least K * h curves");
  std::mt19937_64 rng(seed);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<int>> subsets(K);
  for (int g = 0; g < K; ++g)
    subsets[g].assign(idx.begin() + g * h, idx.begin() + (g + 1) * h);
  return subsets;
}

ModelParams random_init(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
                        const GramHalfPowers& hp, int K, const std::vector<int>& dims,
                        double d1, double d2, std::uint64_t seed) {
  const int n = static_cast<int>(gamma.rows());
  const int q_max = *std::max_element(dims.begin(), dims.end());
  const int h = q_max + 2;  // one d.o.f. for centering, one residual direction
  const auto subsets = draw_init_subsets(n, K, h, seed);

  Posteriors post;
  post.tau = Eigen::MatrixXd::Zero(n, K);
  for (int g = 0; g < K; ++g)
    for (int i : subsets[static_cast<std::size_t>(g)]) post.tau(i, g) = 1.0;

  GroupModelUpdate upd = update_group_model(gamma, post, gram, hp, dims, d1, d2);
  ModelParams params;
  params.K = K;
  params.p = static_cast<int>(gamma.cols());
  params.dims = dims;
  params.pi = Eigen::VectorXd::Constant(K, 1.0 / K);
  params.means = std::move(upd.means);
  params.eigen = std::move(upd.eigen);
  params.scatter = std::move(upd.scatter);
  return params;
}

namespace {

std::optional<StartOutcome> run_one_start(const Eigen::MatrixXd& gamma,
                                          const GramMatrix& gram,
                                          const GramHalfPowers& hp,
                                          const FitConfig& config,
                                          std::uint64_t start_seed) {
  const int n = static_cast<int>(gamma.rows());
  StartOutcome out;
  try {
    ModelParams params = random_init(gamma, gram, hp, config.K, config.dims,
                                     config.d1, config.d2, start_seed);
    double prev_ll = kNegInf;
    bool evaluated_current = false;  // params already scored by the loop's T/E
    for (int it = 1; it <= config.iter_max; ++it) {
      const TEStepResult te = t_and_e_step(gamma, params, config.alpha, gram);
      if (prev_ll != kNegInf && te.loglik < prev_ll) {
        const double drop = prev_ll - te.loglik;
        out.max_loglik_decrease = std::max(out.max_loglik_decrease, drop);
        if (drop > kMonotoneSlack) ++out.monotone_violations;
      }
      if (prev_ll != kNegInf &&
          std::abs(te.loglik - prev_ll) <= config.tol * (1.0 + std::abs(te.loglik))) {
        out.converged = true;
        evaluated_current = true;
        prev_ll = te.loglik;
        break;
      }
      prev_ll = te.loglik;

      const Eigen::VectorXd pi = update_weights(te.posteriors, n, config.alpha);
      GroupModelUpdate upd = update_group_model(gamma, te.posteriors, gram, hp,
                                                config.dims, config.d1, config.d2);
      out.model_order_warnings += upd.model_order_warnings;
      params.pi = pi;
      params.means = std::move(upd.means);
      params.eigen = std::move(upd.eigen);
      params.scatter = std::move(upd.scatter);
      out.iterations = it;
    }

    // Comparable target: one T/E evaluation after the last full M-step.
    // When the loop broke on convergence this re-scores the same params the
    // loop already monitored, so it is excluded from the monitor.
    const TEStepResult final_te = t_and_e_step(gamma, params, config.alpha, gram);
    if (!evaluated_current && prev_ll != kNegInf && final_te.loglik < prev_ll) {
      const double drop = prev_ll - final_te.loglik;
      out.max_loglik_decrease = std::max(out.max_loglik_decrease, drop);
      if (drop > kMonotoneSlack) ++out.monotone_violations;
    }
    out.loglik = final_te.loglik;
    out.params = std::move(params);
    return out;
  } catch (const degenerate_group_error&) {
    return std::nullopt;
  } catch (const degenerate_model_error&) {
    return std::nullopt;
  }
}

}  // namespace

FitResult fit(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
              const FitConfig& config) {
  if (config.K < 1) throw std::invalid_argument("fit: K must be >= 1");
  if (static_cast<int>(config.dims.size()) != config.K)
    throw std::invalid_argument("fit: dims must list one q_g per group");
  for (int q : config.dims)
    if (q < 1 || q >= gamma.cols())
      throw std::invalid_argument("fit: dimensions must satisfy 1 <= q_g < p");
  if (config.nstart < 1) throw std::invalid_argument("fit: nstart must be >= 1");

  const GramHalfPowers hp = half_powers(gram);

  std::vector<std::optional<StartOutcome>> outcomes(config.nstart);
  std::vector<std::exception_ptr> errors(config.nstart);

  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = config.threads > 0 ? config.threads : static_cast<int>(hw ? hw : 1);
  n_threads = std::min(n_threads, config.nstart);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int s; (s = next.fetch_add(1)) < config.nstart;) {
      try {
        outcomes[s] = run_one_start(gamma, gram, hp, config,
                                    config.seed ^ static_cast<std::uint64_t>(s));
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  FitResult res;
  res.loglik = kNegInf;
  for (int s = 0; s < config.nstart; ++s) {
    if (!outcomes[s]) {
      ++res.degenerate_starts;
      continue;
    }
    const StartOutcome& o = *outcomes[s];
    res.monotone_violations += o.monotone_violations;
    res.max_loglik_decrease = std::max(res.max_loglik_decrease, o.max_loglik_decrease);
    res.model_order_warnings += o.model_order_warnings;
    if (o.loglik > res.loglik) {
      res.loglik = o.loglik;
      res.start_index = s;
    }
  }
  if (res.start_index < 0)
    throw std::runtime_error("fit: all " + std::to_string(config.nstart) +
                             " starts degenerated (" +
                             std::to_string(res.degenerate_starts) + " abandoned)");

  StartOutcome& best = *outcomes[res.start_index];
  res.params = std::move(best.params);
  res.iterations = best.iterations;
  res.converged = best.converged;

  // Final partition: re-run the T/E rule at the returned parameters.
  TEStepResult te = t_and_e_step(gamma, res.params, config.alpha, gram);
  res.posteriors = std::move(te.posteriors);
  res.trimmed = std::move(te.trimmed);
  res.loglik = te.loglik;
  return res;
}

}  // namespace rfc
