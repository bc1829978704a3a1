// Experiment orchestration behind the CLI subcommands: dataset emission,
// single fits, BIC grid selection, replicated benchmark sweeps and the
// NOx-style workflow.

#ifndef RFC_EXPERIMENT_HPP
#define RFC_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "rfc/io.hpp"
#include "rfc/simulate.hpp"

namespace rfc {

ScenarioSpec scenario_by_name(const std::string& name);
ContaminationSpec contamination_by_name(const std::string& name);

struct ExperimentOutput {
  std::vector<std::string> files_written;
  std::optional<RunResult> result;
};

/// Dispatch on config.command; writes result files under config.out.
/// Identical config + seed produce byte-identical files.
ExperimentOutput run_experiment(const RunConfig& config);

}  // namespace rfc

#endif  // RFC_EXPERIMENT_HPP
