#include "rfc/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfc {

namespace {

struct WeightedValue {
  double v;
  double w;
};

double objective(const std::vector<WeightedValue>& vals, double m, double d) {
  double f = 0.0;
  for (const auto& [v, w] : vals) {
    const double t = truncate_value(v, m, d);
    f += w * (std::log(t) + v / t);
  }
  return f;
}

// Minimize sum_i w_i (log v_i^m + v_i / v_i^m) over m > 0.  On each
// interval between consecutive breakpoints {v, v/d} the truncation
// pattern is fixed and the objective is c1 log m + c2/m + const, so the
// candidate set of breakpoints plus clipped stationary points is exact.
double minimize_threshold(std::vector<WeightedValue> vals, double d) {
  if (vals.empty())
    throw std::invalid_argument("constraints: empty scatter value set");

  std::vector<double> breaks;
  breaks.reserve(2 * vals.size());
  for (const auto& [v, w] : vals) {
    breaks.push_back(v);
    breaks.push_back(v / d);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<double> candidates = breaks;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= breaks.size(); ++k) {
    const double lo = k == 0 ? 0.0 : breaks[k - 1];
    const double hi = k == breaks.size() ? inf : breaks[k];
    const double mid = k == 0 ? 0.5 * breaks.front()
                     : k == breaks.size() ? 2.0 * breaks.back()
                                          : 0.5 * (lo + hi);
    // Truncation pattern at the interval midpoint.
    double c1 = 0.0, c2 = 0.0;
    for (const auto& [v, w] : vals) {
      if (v < mid) {           // lower clamp: w (log m + v/m)
        c1 += w;
        c2 += w * v;
      } else if (v > d * mid) {  // upper clamp: w (log dm + v/(dm))
        c1 += w;
        c2 += w * v / d;
      }
    }
    if (c1 <= 0.0) continue;  // objective constant here; endpoints suffice
    const double stat = c2 / c1;
    if (stat > lo && stat < hi) candidates.push_back(stat);
  }

  std::sort(candidates.begin(), candidates.end());
  double best_m = candidates.front();
  double best_f = objective(vals, best_m, d);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i] <= 0.0) continue;
    const double f = objective(vals, candidates[i], d);
    if (f < best_f) {
      best_f = f;
      best_m = candidates[i];
    }
  }
  return best_m;
}

std::vector<WeightedValue> main_variance_values(const ScatterSet& s) {
  std::vector<WeightedValue> vals;
  for (std::size_t g = 0; g < s.a.size(); ++g)
    for (Eigen::Index j = 0; j < s.a[g].size(); ++j)
      vals.push_back({s.a[g](j), s.counts(static_cast<Eigen::Index>(g))});
  return vals;
}

std::vector<WeightedValue> noise_variance_values(const ScatterSet& s) {
  std::vector<WeightedValue> vals;
  for (Eigen::Index g = 0; g < s.b.size(); ++g) {
    const double w = s.counts(g) * (s.p - s.dims[static_cast<std::size_t>(g)]);
    if (w > 0.0) vals.push_back({s.b(g), w});
  }
  return vals;
}

}  // namespace

double truncate_value(double v, double m, double d) {
  if (!(m > 0.0)) throw std::domain_error("truncate_value: threshold must be > 0");
  if (d < 1.0) throw std::domain_error("truncate_value: ratio must be >= 1");
  if (v < m) return m;
  if (v > d * m) return d * m;
  return v;
}

double optimal_threshold_a(const ScatterSet& scatter, double d1) {
  return minimize_threshold(main_variance_values(scatter), d1);
}

std::optional<double> optimal_threshold_b(const ScatterSet& scatter, double d2) {
  auto vals = noise_variance_values(scatter);
  if (vals.empty()) return std::nullopt;
  return minimize_threshold(std::move(vals), d2);
}

ScatterSet enforce(const ScatterSet& scatter, double d1, double d2) {
  if (d1 < 1.0 || d2 < 1.0)
    throw std::domain_error("enforce: ratio constraints must be >= 1");

  ScatterSet out = scatter;

  // Degenerate clusters can produce exact zeros; floor them so the log
  // objective stays finite.  The truncation then lifts them to m.
  double vmax = 0.0;
  for (const auto& ag : out.a)
    if (ag.size() > 0) vmax = std::max(vmax, ag.maxCoeff());
  if (out.b.size() > 0) vmax = std::max(vmax, out.b.maxCoeff());
  if (!(vmax > 0.0))
    throw std::runtime_error("enforce: all scatter values are zero");
  const double floor_v = 1e-12 * vmax;
  for (auto& ag : out.a) ag = ag.cwiseMax(floor_v);
  out.b = out.b.cwiseMax(floor_v);

  const double m1 = optimal_threshold_a(out, d1);
  for (auto& ag : out.a)
    for (Eigen::Index j = 0; j < ag.size(); ++j) ag(j) = truncate_value(ag(j), m1, d1);

  if (const auto m2 = optimal_threshold_b(out, d2)) {
    for (Eigen::Index g = 0; g < out.b.size(); ++g)
      out.b(g) = truncate_value(out.b(g), *m2, d2);
  }
  return out;
}

bool satisfies_model_order(const ScatterSet& scatter) {
  for (std::size_t g = 0; g < scatter.a.size(); ++g) {
    const double b = scatter.b(static_cast<Eigen::Index>(g));
    for (Eigen::Index j = 0; j < scatter.a[g].size(); ++j)
      if (!(scatter.a[g](j) > b)) return false;
  }
  return true;
}

}  // namespace rfc
