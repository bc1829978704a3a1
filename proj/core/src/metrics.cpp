#include "rfc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rfc/simulate.hpp"

namespace rfc {

namespace {

int argmax_lower_tie(const Eigen::RowVectorXd& row) {
  int best = 0;
  for (int g = 1; g < row.size(); ++g)
    if (row(g) > row(best)) best = g;
  return best;
}

}  // namespace

Labeling reassign_trimmed(const FitResult& fit, const Eigen::MatrixXd& gamma,
                          const GramMatrix& gram) {
  const int n = static_cast<int>(gamma.rows());
  Labeling out;
  out.source = LabelSource::predicted_with_reassigned;
  out.labels.resize(n);

  Eigen::MatrixXd ld;  // computed only if something was trimmed
  if (!fit.trimmed.indices.empty())
    ld = log_density_matrix(gamma, fit.params, gram);

  for (int i = 0; i < n; ++i) {
    if (fit.trimmed.contains(i))
      out.labels[i] = argmax_lower_tie(ld.row(i)) + 1;
    else
      out.labels[i] = argmax_lower_tie(fit.posteriors.tau.row(i)) + 1;
  }
  return out;
}

double ccr(const Labeling& predicted, const Labeling& truth) {
  if (predicted.labels.size() != truth.labels.size())
    throw std::invalid_argument("ccr: label vectors differ in length");

  int k = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (truth.labels[i] != kOutlierLabel && truth.labels[i] < 1)
      throw std::invalid_argument("ccr: truth label out of range");
    if (predicted.labels[i] < 1)
      throw std::invalid_argument("ccr: predicted label out of range");
    k = std::max({k, truth.labels[i], predicted.labels[i]});
  }

  int n_eval = 0;
  for (int t : truth.labels)
    if (t != kOutlierLabel) ++n_eval;
  if (n_eval == 0) throw std::invalid_argument("ccr: no evaluable rows");

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 1);
  int best_hits = 0;
  do {
    int hits = 0;
    for (std::size_t i = 0; i < truth.labels.size(); ++i) {
      if (truth.labels[i] == kOutlierLabel) continue;
      if (perm[static_cast<std::size_t>(predicted.labels[i] - 1)] == truth.labels[i])
        ++hits;
    }
    best_hits = std::max(best_hits, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));

  return static_cast<double>(best_hits) / n_eval;
}

std::vector<std::string> outlier_report(const FitResult& fit,
                                        const Eigen::MatrixXd& gamma,
                                        const GramMatrix& gram,
                                        const std::vector<std::string>& ids) {
  if (static_cast<int>(ids.size()) != gamma.rows())
    throw std::invalid_argument("outlier_report: one id per curve required");
  if (fit.trimmed.indices.empty()) return {};

  const Eigen::VectorXd log_total = log_total_density(gamma, fit.params, gram);

  std::vector<int> order = fit.trimmed.indices;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return log_total(a) < log_total(b); });
  std::vector<std::string> report;
  report.reserve(order.size());
  for (int i : order) report.push_back(ids[static_cast<std::size_t>(i)]);
  return report;
}

}  // namespace rfc
