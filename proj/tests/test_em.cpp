#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "rfc/em.hpp"
#include "rfc/simulate.hpp"

using namespace rfc;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

GramMatrix identity_gram(int p) { return {Eigen::MatrixXd::Identity(p, p)}; }

// Minimal params: K groups with given means (rows), unit main variances.
ModelParams simple_params(const Eigen::MatrixXd& means, const std::vector<int>& dims,
                          double a = 1.0, double b = 1.0) {
  ModelParams params;
  params.K = static_cast<int>(means.rows());
  params.p = static_cast<int>(means.cols());
  params.dims = dims;
  params.pi = Eigen::VectorXd::Constant(params.K, 1.0 / params.K);
  params.means = means;
  params.eigen.assign(params.K, Eigen::MatrixXd::Identity(params.p, params.p));
  params.scatter.p = params.p;
  params.scatter.dims = dims;
  params.scatter.counts = Eigen::VectorXd::Ones(params.K);
  params.scatter.b = Eigen::VectorXd::Constant(params.K, b);
  for (int q : dims) params.scatter.a.push_back(Eigen::VectorXd::Constant(q, a));
  return params;
}

}  // namespace

TEST_CASE("trim counts follow n - floor(n (1 - alpha))") {
  // Rational alphas allow an exact integer oracle.
  struct Case { int num, den; };
  for (const Case c : {Case{0, 1}, Case{1, 20}, Case{1, 10}, Case{1, 7}, Case{3, 20},
                       Case{1, 5}, Case{1, 4}, Case{1, 3}, Case{9, 20}}) {
    const double alpha = static_cast<double>(c.num) / c.den;
    for (int n : {1, 2, 3, 5, 7, 10, 50, 100, 115, 222, 1000}) {
      const int expected_kept = n * (c.den - c.num) / c.den;  // floor, exact
      CHECK(untrimmed_count(n, alpha) == expected_kept);
      CHECK(trim_count(n, alpha) == n - expected_kept);
    }
  }
  CHECK(trim_count(115, 0.1) == 12);  // floor(103.5) = 103 kept
  CHECK(trim_count(10, 0.2) == 2);
  CHECK(trim_count(200, 0.0) == 0);
}

TEST_CASE("log_group_density matches the gaussian arithmetic") {
  const int p = 4;
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, p), {p});
  params.pi(0) = 1.0;
  const double ld =
      log_group_density(Eigen::VectorXd::Zero(p), 0, params, identity_gram(p));
  CHECK(ld == doctest::Approx(-0.5 * p * kLog2Pi).epsilon(1e-12));
}

TEST_CASE("identical groups split posteriors evenly") {
  const int p = 3;
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(2, p), {1, 1});
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Random(6, p);
  const TEStepResult te = t_and_e_step(gamma, params, 0.0, identity_gram(p));
  for (int i = 0; i < 6; ++i) {
    CHECK(te.posteriors.tau(i, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(te.posteriors.tau(i, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("density decreases as the score grows") {
  const int p = 2;
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, p), {1});
  params.pi(0) = 1.0;
  Eigen::VectorXd x(p);
  x << 1.0, 0.0;
  const double d1 = log_group_density(x, 0, params, identity_gram(p));
  x(0) = 2.0;
  const double d2 = log_group_density(x, 0, params, identity_gram(p));
  CHECK(d2 < d1);
}

TEST_CASE("t/e step trims exactly the prescribed count, zeroing those rows") {
  const int p = 2, n = 10;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) gamma(i, j) = z(rng);

  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, p), {1});
  params.pi(0) = 1.0;
  const TEStepResult te = t_and_e_step(gamma, params, 0.2, identity_gram(p));
  CHECK(te.trimmed.indices.size() == 2);
  for (int i : te.trimmed.indices)
    CHECK(te.posteriors.tau.row(i).cwiseAbs().maxCoeff() == 0.0);

  const TEStepResult all_in = t_and_e_step(gamma, params, 0.0, identity_gram(p));
  CHECK(all_in.trimmed.indices.empty());
  for (int i = 0; i < n; ++i)
    CHECK(all_in.posteriors.tau.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a far-translated curve is the one trimmed") {
  const int p = 3, n = 10;
  Eigen::MatrixXd gamma = 0.5 * Eigen::MatrixXd::Random(n, p);
  gamma(4, 0) += 1000.0;
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, p), {1});
  params.pi(0) = 1.0;
  const TEStepResult te = t_and_e_step(gamma, params, 0.1, identity_gram(p));
  REQUIRE(te.trimmed.indices.size() == 1);
  CHECK(te.trimmed.indices[0] == 4);
}

TEST_CASE("weight update divides column sums by the kept count") {
  Posteriors post;
  post.tau = Eigen::MatrixXd::Zero(5, 2);
  post.tau.row(0) << 1.0, 0.0;
  post.tau.row(1) << 1.0, 0.0;
  post.tau.row(2) << 0.75, 0.25;
  post.tau.row(3) << 0.25, 0.75;
  // row 4 trimmed
  const Eigen::VectorXd pi = update_weights(post, 5, 0.2);
  CHECK(pi(0) == doctest::Approx(0.75));
  CHECK(pi(1) == doctest::Approx(0.25));

  Posteriors single;
  single.tau = Eigen::MatrixXd::Ones(4, 1);
  CHECK(update_weights(single, 4, 0.0)(0) == doctest::Approx(1.0));
}

TEST_CASE("group model update recovers eigenvalues and the residual average") {
  // Rows engineered so the weighted covariance is diag(4, 1.5, 0.5).
  const double c1 = std::sqrt(12.0), c2 = std::sqrt(4.5), c3 = std::sqrt(1.5);
  Eigen::MatrixXd gamma(6, 3);
  gamma << c1, 0, 0, -c1, 0, 0, 0, c2, 0, 0, -c2, 0, 0, 0, c3, 0, 0, -c3;
  Posteriors post;
  post.tau = Eigen::MatrixXd::Ones(6, 1);
  const GramMatrix gram = identity_gram(3);
  const GroupModelUpdate upd =
      update_group_model(gamma, post, gram, half_powers(gram), {1}, 1e12, 1e12);
  CHECK(upd.scatter.a[0](0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(upd.scatter.b(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("with unit weights and loose constraints the a's are PCA eigenvalues") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(40, 5);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 5; ++j) gamma(i, j) = (5 - j) * z(rng);
  Posteriors post;
  post.tau = Eigen::MatrixXd::Ones(40, 1);
  const GramMatrix gram = identity_gram(5);
  const GroupModelUpdate upd =
      update_group_model(gamma, post, gram, half_powers(gram), {2}, 1e12, 1e12);

  const Eigen::RowVectorXd mean = gamma.colwise().mean();
  const Eigen::MatrixXd centered = gamma.rowwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered /
                                                     40.0);
  CHECK(upd.scatter.a[0](0) == doctest::Approx(eig.eigenvalues()(4)).epsilon(1e-10));
  CHECK(upd.scatter.a[0](1) == doctest::Approx(eig.eigenvalues()(3)).epsilon(1e-10));
}

TEST_CASE("empty groups abandon the start") {
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Random(6, 3);
  Posteriors post;
  post.tau = Eigen::MatrixXd::Zero(6, 2);
  post.tau.col(0).setOnes();
  const GramMatrix gram = identity_gram(3);
  CHECK_THROWS_AS(
      update_group_model(gamma, post, gram, half_powers(gram), {1, 1}, 10, 10),
      degenerate_group_error);
}

TEST_CASE("trimmed loglik: single kept curve at the mode of a unit gaussian") {
  Eigen::MatrixXd gamma(2, 1);
  gamma << 0.0, 50.0;
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, 1), {1});
  params.pi(0) = 1.0;
  TrimSet trim;
  trim.indices = {1};
  const double ll = trimmed_loglik(gamma, params, trim, identity_gram(1));
  CHECK(ll == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-12));
}

TEST_CASE("with alpha = 0 the trimmed loglik is the full mixture loglik") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(12, 2);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 2; ++j) gamma(i, j) = z(rng);
  Eigen::MatrixXd means(2, 2);
  means << 0, 0, 1, 1;
  ModelParams params = simple_params(means, {1, 1});
  const GramMatrix gram = identity_gram(2);

  const double ll = trimmed_loglik(gamma, params, TrimSet{}, gram);
  const Eigen::VectorXd lt = log_total_density(gamma, params, gram);
  CHECK(ll == doctest::Approx(lt.sum()).epsilon(1e-12));
}

TEST_CASE("enlarging the trim budget cannot lower the best achievable target") {
  // All per-curve terms are negative here (unit variances), so the optimal
  // trimmed sum is monotone in the trim size; verified against exhaustive
  // enumeration of every subset, and the greedy T-step matches the optimum.
  const int n = 8;
  std::mt19937_64 rng(41);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(n, 1);
  for (int i = 0; i < n; ++i) gamma(i, 0) = 2.0 * z(rng);
  ModelParams params = simple_params(Eigen::MatrixXd::Zero(1, 1), {1});
  params.pi(0) = 1.0;
  const GramMatrix gram = identity_gram(1);
  const Eigen::VectorXd lt = log_total_density(gamma, params, gram);

  std::vector<double> best_by_size(n + 1, -1e300);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) ++size;
      else sum += lt(i);
    }
    best_by_size[size] = std::max(best_by_size[size], sum);
  }
  for (int s = 0; s + 1 < n; ++s) CHECK(best_by_size[s + 1] >= best_by_size[s]);

  // T-step greedy choice attains the enumerated optimum at its trim size.
  const double alpha = 0.25;
  const TEStepResult te = t_and_e_step(gamma, params, alpha, gram);
  const int s = trim_count(n, alpha);
  CHECK(te.loglik == doctest::Approx(best_by_size[s]).epsilon(1e-12));
}

TEST_CASE("init subsets are disjoint with exact sizes and h = max q + 2") {
  const auto subsets = draw_init_subsets(40, 3, 5, 77);
  REQUIRE(subsets.size() == 3);
  std::vector<int> all;
  for (const auto& s : subsets) {
    CHECK(s.size() == 5);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());

  // dims (2, 3) need h = 5 per group; 9 curves cannot host 2 groups.
  const Eigen::MatrixXd gamma = Eigen::MatrixXd::Random(9, 4);
  const GramMatrix gram = identity_gram(4);
  CHECK_THROWS_AS(
      random_init(gamma, gram, half_powers(gram), 2, {2, 3}, 10, 10, 1),
      std::invalid_argument);
}

TEST_CASE("random_init is reproducible given the seed") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) gamma(i, j) = z(rng);
  const GramMatrix gram = identity_gram(4);
  const GramHalfPowers hp = half_powers(gram);
  const ModelParams a = random_init(gamma, gram, hp, 2, {1, 1}, 10, 10, 99);
  const ModelParams b = random_init(gamma, gram, hp, 2, {1, 1}, 10, 10, 99);
  CHECK(a.means == b.means);
  CHECK(a.scatter.b == b.scatter.b);
}

TEST_CASE("fit separates two well-separated groups exactly") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> z;
  const int n = 40, p = 4;
  Eigen::MatrixXd gamma(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      gamma(i, j) = (i < n / 2 ? 0.0 : 10.0) + 0.1 * z(rng);

  FitConfig fc;
  fc.K = 2;
  fc.dims = {1, 1};
  fc.alpha = 0.0;
  fc.d1 = fc.d2 = 1.0;
  fc.nstart = 20;
  fc.iter_max = 20;
  fc.seed = 5;
  const FitResult res = fit(gamma, identity_gram(p), fc);

  int flips = 0;
  for (int i = 0; i < n; ++i) {
    int label;
    res.posteriors.tau.row(i).maxCoeff(&label);
    const int expected = i < n / 2 ? 0 : 1;
    int first_label;
    res.posteriors.tau.row(0).maxCoeff(&first_label);
    flips += (label == first_label) != (expected == 0);
  }
  CHECK((flips == 0 || flips == n));  // permutation-equivalent exact split
  CHECK(res.params.pi(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("single-group fit is the single-model loglik with pi = 1") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> z;
  Eigen::MatrixXd gamma(25, 3);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 3; ++j) gamma(i, j) = z(rng);

  FitConfig fc;
  fc.K = 1;
  fc.dims = {1};
  fc.alpha = 0.0;
  fc.d1 = fc.d2 = 1e10;
  fc.nstart = 4;
  fc.iter_max = 15;
  fc.seed = 9;
  const GramMatrix gram = identity_gram(3);
  const FitResult res = fit(gamma, gram, fc);
  CHECK(res.params.pi(0) == doctest::Approx(1.0));
  CHECK(res.loglik ==
        doctest::Approx(trimmed_loglik(gamma, res.params, res.trimmed, gram))
            .epsilon(1e-12));
}

TEST_CASE("fit is bit-deterministic given the seed, threads notwithstanding") {
  const LabeledDataset data =
      make_dataset(scenario1(5), contamination_scheme(ContaminationScheme::none), 303);
  const GramMatrix gram = gram_matrix(data.curves.basis);

  FitConfig fc;
  fc.K = 2;
  fc.dims = {2, 3};
  fc.alpha = 0.1;
  fc.d1 = fc.d2 = 10.0;
  fc.nstart = 8;
  fc.iter_max = 10;
  fc.seed = 404;
  fc.threads = 1;
  const FitResult a = fit(data.curves.gamma, gram, fc);
  fc.threads = 2;
  const FitResult b = fit(data.curves.gamma, gram, fc);
  CHECK(a.loglik == b.loglik);
  CHECK(a.start_index == b.start_index);
  CHECK(a.params.means == b.params.means);
  CHECK(a.posteriors.tau == b.posteriors.tau);
  CHECK(a.trimmed.indices == b.trimmed.indices);
}

TEST_CASE("fit invariants: row stochasticity, trim size, reported target") {
  const LabeledDataset data = make_dataset(
      scenario2(50), contamination_scheme(ContaminationScheme::inrange_level, 10), 7);
  const GramMatrix gram = gram_matrix(data.curves.basis);
  const int n = static_cast<int>(data.curves.gamma.rows());

  FitConfig fc;
  fc.K = 2;
  fc.dims = {2, 3};
  fc.alpha = 0.1;
  fc.d1 = fc.d2 = 10.0;
  fc.nstart = 10;
  fc.iter_max = 15;
  fc.seed = 1;
  const FitResult res = fit(data.curves.gamma, gram, fc);

  CHECK(static_cast<int>(res.trimmed.indices.size()) == trim_count(n, fc.alpha));
  for (int i = 0; i < n; ++i) {
    if (res.trimmed.contains(i))
      CHECK(res.posteriors.tau.row(i).cwiseAbs().maxCoeff() == 0.0);
    else
      CHECK(res.posteriors.tau.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(res.loglik ==
        doctest::Approx(trimmed_loglik(data.curves.gamma, res.params, res.trimmed, gram))
            .epsilon(1e-9));
  CHECK(res.params.pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.monotone_violations == 0);
}

TEST_CASE("unconstrained fit agrees with an independent diagonal-gaussian EM") {
  // Well-separated case; the reference EM is coded directly on the
  // coefficients (W = I) with per-group diagonal covariances.
  std::mt19937_64 rng(81);
  std::normal_distribution<double> z;
  const int n = 60, p = 3;
  Eigen::MatrixXd gamma(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      gamma(i, j) = (i < n / 2 ? 0.0 : 8.0) + (j == 0 ? 1.0 : 0.5) * z(rng);

  FitConfig fc;
  fc.K = 2;
  fc.dims = {1, 1};
  fc.alpha = 0.0;
  fc.d1 = fc.d2 = 1e10;
  fc.nstart = 15;
  fc.iter_max = 25;
  fc.seed = 3;
  const FitResult res = fit(gamma, identity_gram(p), fc);

  // Reference EM.
  Eigen::MatrixXd mu(2, p);
  mu.row(0) = gamma.row(0);
  mu.row(1) = gamma.row(n - 1);
  Eigen::MatrixXd var = Eigen::MatrixXd::Ones(2, p);
  Eigen::Vector2d pi(0.5, 0.5);
  Eigen::MatrixXd resp(n, 2);
  for (int it = 0; it < 50; ++it) {
    for (int i = 0; i < n; ++i) {
      Eigen::Vector2d logd;
      for (int g = 0; g < 2; ++g) {
        double s = std::log(pi(g));
        for (int j = 0; j < p; ++j) {
          const double diff = gamma(i, j) - mu(g, j);
          s += -0.5 * (std::log(2.0 * std::numbers::pi * var(g, j)) +
                       diff * diff / var(g, j));
        }
        logd(g) = s;
      }
      const double m = logd.maxCoeff();
      const Eigen::Vector2d w = (logd.array() - m).exp();
      resp.row(i) = w.transpose() / w.sum();
    }
    for (int g = 0; g < 2; ++g) {
      const double ng = resp.col(g).sum();
      pi(g) = ng / n;
      for (int j = 0; j < p; ++j) {
        mu(g, j) = resp.col(g).dot(gamma.col(j)) / ng;
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += resp(i, g) * (gamma(i, j) - mu(g, j)) * (gamma(i, j) - mu(g, j));
        var(g, j) = std::max(acc / ng, 1e-8);
      }
    }
  }

  int agree = 0;
  int ours0, ref0;
  res.posteriors.tau.row(0).maxCoeff(&ours0);
  resp.row(0).maxCoeff(&ref0);
  for (int i = 0; i < n; ++i) {
    int a, b;
    res.posteriors.tau.row(i).maxCoeff(&a);
    resp.row(i).maxCoeff(&b);
    agree += ((a == ours0) == (b == ref0));
  }
  CHECK(agree >= static_cast<int>(0.99 * n));
}
