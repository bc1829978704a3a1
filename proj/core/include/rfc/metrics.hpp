// Evaluation: label-permutation-matched correct classification rate,
// posterior reassignment of trimmed curves, and outlier reporting.

#ifndef RFC_METRICS_HPP
#define RFC_METRICS_HPP

#include <string>
#include <vector>

#include "rfc/em.hpp"

namespace rfc {

enum class LabelSource { truth, predicted, predicted_with_reassigned };

struct Labeling {
  std::vector<int> labels;  // 1..K; truth may carry kOutlierLabel rows
  LabelSource source = LabelSource::predicted;
};

/// Label every curve: untrimmed by argmax posterior, trimmed by argmax
/// group density at the fitted parameters.  Ties pick the lower group.
Labeling reassign_trimmed(const FitResult& fit, const Eigen::MatrixXd& gamma,
                          const GramMatrix& gram);

/// Correct classification rate, maximized over the K! relabelings of the
/// predicted groups.  Rows whose truth label is kOutlierLabel are excluded
/// from the denominator.
double ccr(const Labeling& predicted, const Labeling& truth);

/// Identifiers of the trimmed curves, most extreme (lowest density) first.
std::vector<std::string> outlier_report(const FitResult& fit,
                                        const Eigen::MatrixXd& gamma,
                                        const GramMatrix& gram,
                                        const std::vector<std::string>& ids);

}  // namespace rfc

#endif  // RFC_METRICS_HPP
