#include <random>

#include <doctest.h>

#include "rfc/metrics.hpp"
#include "rfc/simulate.hpp"

using namespace rfc;

namespace {

GramMatrix identity_gram(int p) { return {Eigen::MatrixXd::Identity(p, p)}; }

ModelParams two_group_params(const Eigen::MatrixXd& means) {
  ModelParams params;
  params.K = 2;
  params.p = static_cast<int>(means.cols());
  params.dims = {1, 1};
  params.pi = Eigen::Vector2d(0.5, 0.5);
  params.means = means;
  params.eigen.assign(2, Eigen::MatrixXd::Identity(params.p, params.p));
  params.scatter.p = params.p;
  params.scatter.dims = params.dims;
  params.scatter.counts = Eigen::Vector2d(1.0, 1.0);
  params.scatter.b = Eigen::Vector2d(1.0, 1.0);
  params.scatter.a = {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
  return params;
}

Labeling as_truth(std::vector<int> labels) {
  Labeling l;
  l.source = LabelSource::truth;
  l.labels = std::move(labels);
  return l;
}

Labeling as_pred(std::vector<int> labels) {
  Labeling l;
  l.labels = std::move(labels);
  return l;
}

}  // namespace

TEST_CASE("without trimming the labels are the posterior argmax") {
  FitResult fit;
  fit.posteriors.tau.resize(3, 2);
  fit.posteriors.tau << 0.9, 0.1, 0.2, 0.8, 0.5, 0.5;  // tie -> group 1
  const Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(3, 2);
  const Labeling lab = reassign_trimmed(fit, gamma, identity_gram(2));
  CHECK(lab.labels == std::vector<int>{1, 2, 1});
  CHECK(lab.source == LabelSource::predicted_with_reassigned);
}

TEST_CASE("a trimmed curve lands on the group with the larger density") {
  Eigen::MatrixXd means(2, 2);
  means << 0.0, 0.0, 10.0, 0.0;
  FitResult fit;
  fit.params = two_group_params(means);
  fit.posteriors.tau = Eigen::MatrixXd::Zero(3, 2);
  fit.posteriors.tau(0, 0) = 1.0;
  fit.posteriors.tau(1, 1) = 1.0;
  fit.trimmed.indices = {2};

  Eigen::MatrixXd gamma(3, 2);
  gamma << 0.0, 0.0, 10.0, 0.0, 9.0, 0.5;  // trimmed row near group 2
  const Labeling lab = reassign_trimmed(fit, gamma, identity_gram(2));
  CHECK(lab.labels[2] == 2);
}

TEST_CASE("identical groups resolve ties to group 1") {
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(2, 2);
  FitResult fit;
  fit.params = two_group_params(means);
  fit.posteriors.tau = Eigen::MatrixXd::Zero(2, 2);
  fit.trimmed.indices = {0, 1};
  const Eigen::MatrixXd gamma = Eigen::MatrixXd::Random(2, 2);
  const Labeling lab = reassign_trimmed(fit, gamma, identity_gram(2));
  CHECK(lab.labels == std::vector<int>{1, 1});
}

TEST_CASE("ccr basics") {
  CHECK(ccr(as_pred({1, 1, 2, 2}), as_truth({1, 1, 2, 2})) == doctest::Approx(1.0));
  CHECK(ccr(as_pred({2, 2, 1, 1}), as_truth({1, 1, 2, 2})) == doctest::Approx(1.0));
  CHECK(ccr(as_pred({1, 2, 2, 2}), as_truth({1, 1, 2, 2})) == doctest::Approx(0.75));
}

TEST_CASE("ccr excludes outlier-truth rows from the denominator") {
  const double rate =
      ccr(as_pred({1, 1, 2, 2, 1}), as_truth({1, 1, 2, 2, kOutlierLabel}));
  CHECK(rate == doctest::Approx(1.0));
  const double rate2 =
      ccr(as_pred({1, 2, 2, 2, 1}), as_truth({1, 1, 2, 2, kOutlierLabel}));
  CHECK(rate2 == doctest::Approx(0.75));
}

TEST_CASE("ccr is invariant under any relabeling of the prediction") {
  std::mt19937_64 rng(23);
  std::vector<int> truth(30), pred(30);
  for (int i = 0; i < 30; ++i) {
    truth[i] = 1 + static_cast<int>(rng() % 3);
    pred[i] = 1 + static_cast<int>(rng() % 3);
  }
  const double base = ccr(as_pred(pred), as_truth(truth));
  CHECK(ccr(as_pred(pred), as_pred(pred)) == doctest::Approx(1.0));

  const int perm[4] = {0, 3, 1, 2};  // relabel 1->3, 2->1, 3->2
  std::vector<int> relabeled(30);
  for (int i = 0; i < 30; ++i) relabeled[i] = perm[pred[i]];
  CHECK(ccr(as_pred(relabeled), as_truth(truth)) == doctest::Approx(base));
}

TEST_CASE("ccr rejects malformed labels") {
  CHECK_THROWS_AS(ccr(as_pred({1, 2}), as_truth({1})), std::invalid_argument);
  CHECK_THROWS_AS(ccr(as_pred({0, 1}), as_truth({1, 1})), std::invalid_argument);
}

TEST_CASE("outlier report lists trimmed ids, most extreme first") {
  Eigen::MatrixXd means(2, 2);
  means << 0.0, 0.0, 5.0, 0.0;
  FitResult fit;
  fit.params = two_group_params(means);
  Eigen::MatrixXd gamma(4, 2);
  gamma << 0.1, 0.0, 5.0, 0.1, 100.0, 0.0, 20.0, 0.0;
  fit.posteriors.tau = Eigen::MatrixXd::Zero(4, 2);
  fit.trimmed.indices = {2, 3};
  const std::vector<std::string> ids{"a", "b", "way-out", "mid"};
  const auto report = outlier_report(fit, gamma, identity_gram(2), ids);
  REQUIRE(report.size() == 2);
  CHECK(report[0] == "way-out");
  CHECK(report[1] == "mid");

  FitResult none = fit;
  none.trimmed.indices.clear();
  CHECK(outlier_report(none, gamma, identity_gram(2), ids).empty());
}
