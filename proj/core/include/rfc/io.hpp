// Dataset CSV ingestion/serialization, run configuration (JSON document
// with CLI overrides) and result records.

#ifndef RFC_IO_HPP
#define RFC_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfc/basis.hpp"
#include "rfc/metrics.hpp"
#include "rfc/model_selection.hpp"

namespace rfc {

/// Everything a run needs; parsed from a JSON document, with individual
/// CLI flags overriding fields.
struct RunConfig {
  std::string command;  // simulate | fit | select | bench | nox

  int K = 2;
  double alpha = 0.0;
  double d1 = 10.0, d2 = 10.0;
  std::vector<int> dims;  // empty: select over the {q_min..q_max}^K grid
  int q_min = 1, q_max = 6;

  std::string basis_kind = "fourier";  // fourier | bspline
  int basis_p = 21;
  int basis_order = 4;     // bspline only
  double domain_t = 0.0;   // 0: infer T from the data grid

  int nstart = 100;
  int iter_max = 20;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  int threads = 0;
  bool timing = false;  // wall-clock in result.json (breaks byte determinism)

  // simulate / bench
  std::string scenario = "scenario1";
  std::string contamination = "cont-i";  // cont-i .. cont-iv
  int replicates = 10;
  std::vector<double> bench_alphas{0.0, 0.1};
  std::vector<double> bench_ds{1.0, 10.0, 1e10};

  std::string input;       // dataset CSV for fit/select/nox
  std::string out = ".";   // output directory
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// FNV-1a of the canonical JSON serialization, excluding the output path.
std::string config_hash(const RunConfig& config);

/// A dataset read back from CSV: raw samples plus labels when present.
struct LoadedData {
  GridSamples samples;
  std::vector<int> labels;  // empty when the file has no label column
};

/// Read the GridSamples CSV (`t,<t_1>,...,<t_m>[,label]` header; rows
/// `<id>,<v_1>,...,<v_m>[,<label>]`; `#` lines skipped).  Malformed rows
/// raise std::runtime_error naming the row.
LoadedData load_grid_samples(const std::string& path);

/// Expand a loaded dataset into basis coefficients.  When spec.domain_t
/// is 0 the domain endpoint is taken from the last grid point.
CurveSet load_dataset(const std::string& path, BasisSpec spec,
                      std::vector<int>* labels_out = nullptr);

void write_grid_samples(const std::string& path, const GridSamples& samples,
                        const std::vector<int>& labels, const std::string& provenance);

void write_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                      const std::vector<int>& labels, const std::string& provenance);

void write_bic_table(const std::string& path, const std::vector<BicRow>& table,
                     const std::string& provenance);

/// Summary of one fit/select/nox run; serializes losslessly to JSON.
struct RunResult {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;

  int K = 0;
  std::vector<int> dims;
  double alpha = 0.0, d1 = 1.0, d2 = 1.0;
  double loglik = 0.0;
  long long kappa = 0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  int monotone_violations = 0;
  double max_loglik_decrease = 0.0;
  std::vector<double> pi;
  std::vector<std::vector<double>> scatter_a;  // per group main variances
  std::vector<double> scatter_b;               // per group noise variance
  std::vector<int> labels;  // reassigned, 1..K
  std::vector<std::string> trimmed_ids;
  std::optional<double> ccr;      // present when truth labels were given
  std::optional<double> wall_ms;  // present only with timing enabled

  bool operator==(const RunResult&) const = default;
};

nlohmann::json result_to_json(const RunResult& result);
RunResult result_from_json(const nlohmann::json& j);

}  // namespace rfc

#endif  // RFC_IO_HPP
