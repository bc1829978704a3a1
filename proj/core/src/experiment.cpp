#include "rfc/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace rfc {

namespace {

namespace fs = std::filesystem;

constexpr int kEmissionGridSize = 101;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string provenance(const RunConfig& config) {
  return "config=" + config_hash(config) + " seed=" + std::to_string(config.seed);
}

std::string out_path(const RunConfig& config, const std::string& name) {
  fs::create_directories(config.out);
  return (fs::path(config.out) / name).string();
}

// When the config leaves T unset (0), the returned spec carries the 0
// sentinel and load_dataset completes it from the data grid.
BasisSpec basis_from_config(const RunConfig& config) {
  if (config.basis_kind != "fourier" && config.basis_kind != "bspline")
    throw std::invalid_argument("unknown basis kind: " + config.basis_kind);
  const bool fourier = config.basis_kind == "fourier";
  if (config.domain_t > 0.0)
    return fourier ? BasisSpec::fourier(config.basis_p, config.domain_t)
                   : BasisSpec::bspline(config.basis_p, config.basis_order,
                                        config.domain_t);
  BasisSpec spec;
  spec.kind = fourier ? BasisKind::fourier : BasisKind::bspline;
  spec.p = config.basis_p;
  spec.order = config.basis_order;
  spec.domain_t = 0.0;
  return spec;
}

FitConfig fit_config_from(const RunConfig& config) {
  FitConfig fc;
  fc.K = config.K;
  fc.dims = config.dims;
  fc.alpha = config.alpha;
  fc.d1 = config.d1;
  fc.d2 = config.d2;
  fc.nstart = config.nstart;
  fc.iter_max = config.iter_max;
  fc.tol = config.tol;
  fc.seed = config.seed;
  fc.threads = config.threads;
  return fc;
}

void validate(const RunConfig& config) {
  if (config.alpha < 0.0 || config.alpha >= 0.5)
    throw std::invalid_argument("config: alpha must satisfy 0 <= alpha < 0.5");
  if (config.d1 < 1.0 || config.d2 < 1.0)
    throw std::invalid_argument("config: d1 and d2 must be >= 1");
  if (config.nstart < 1) throw std::invalid_argument("config: nstart must be >= 1");
  if (config.K < 1) throw std::invalid_argument("config: k must be >= 1");
}

GridSamples curves_to_grid(const CurveSet& curves, int n_points) {
  GridSamples samples;
  samples.grid = Eigen::VectorXd::LinSpaced(n_points, 0.0, curves.basis.domain_t);
  const Eigen::MatrixXd b = evaluation_matrix(curves.basis, samples.grid);
  samples.values = curves.gamma * b.transpose();
  samples.ids = curves.ids;
  return samples;
}

// A fit (fixed dims) or BIC selection (empty dims) on prepared coefficients.
struct FittedModel {
  FitResult fit;
  std::vector<int> dims;
  long long kappa = 0;
  double bic = 0.0;
  std::vector<BicRow> table;  // empty for fixed dims
};

FittedModel fit_or_select(const Eigen::MatrixXd& gamma, const GramMatrix& gram,
                          const RunConfig& config) {
  const int n = static_cast<int>(gamma.rows());
  const int p = static_cast<int>(gamma.cols());
  FittedModel model;
  FitConfig fc = fit_config_from(config);
  if (!config.dims.empty()) {
    if (static_cast<int>(config.dims.size()) != config.K)
      throw std::invalid_argument("config: dims must list one entry per group");
    model.fit = fit(gamma, gram, fc);
    model.dims = config.dims;
  } else {
    const int q_hi = std::min(config.q_max, p - 1);
    SelectionResult sel =
        select_dimensions(gamma, gram, DimGrid::full(config.K, config.q_min, q_hi), fc);
    model.fit = std::move(sel.best);
    model.dims = sel.best_dims;
    model.table = std::move(sel.table);
  }
  model.kappa = count_free_params(config.K, p, model.dims);
  model.bic = bic_score(model.fit.loglik, n, model.kappa);
  return model;
}

RunResult summarize(const RunConfig& config, const FittedModel& model,
                    const CurveSet& curves, const GramMatrix& gram,
                    const std::vector<int>& truth, const Labeling& predicted) {
  RunResult r;
  r.command = config.command;
  r.config_digest = config_hash(config);
  r.seed = config.seed;
  r.K = config.K;
  r.dims = model.dims;
  r.alpha = config.alpha;
  r.d1 = config.d1;
  r.d2 = config.d2;
  r.loglik = model.fit.loglik;
  r.kappa = model.kappa;
  r.bic = model.bic;
  r.converged = model.fit.converged;
  r.iterations = model.fit.iterations;
  r.monotone_violations = model.fit.monotone_violations;
  r.max_loglik_decrease = model.fit.max_loglik_decrease;
  r.pi.assign(model.fit.params.pi.data(), model.fit.params.pi.data() + config.K);
  for (const auto& ag : model.fit.params.scatter.a)
    r.scatter_a.emplace_back(ag.data(), ag.data() + ag.size());
  r.scatter_b.assign(model.fit.params.scatter.b.data(),
                     model.fit.params.scatter.b.data() + config.K);
  r.labels = predicted.labels;
  r.trimmed_ids = outlier_report(model.fit, curves.gamma, gram, curves.ids);
  if (!truth.empty()) {
    Labeling t;
    t.source = LabelSource::truth;
    t.labels = truth;
    r.ccr = ccr(predicted, t);
  }
  return r;
}

void write_result_files(const RunConfig& config, const RunResult& result,
                        const CurveSet& curves, const std::vector<BicRow>& table,
                        ExperimentOutput& output) {
  const std::string res_path = out_path(config, "result.json");
  std::ofstream res(res_path);
  res << result_to_json(result).dump(2) << "\n";
  output.files_written.push_back(res_path);

  const std::string lab_path = out_path(config, "labels.csv");
  write_labels_csv(lab_path, curves.ids, result.labels, provenance(config));
  output.files_written.push_back(lab_path);

  if (!table.empty()) {
    const std::string bic_path = out_path(config, "bic_table.csv");
    write_bic_table(bic_path, table, provenance(config));
    output.files_written.push_back(bic_path);
  }
}

ExperimentOutput run_simulate(const RunConfig& config) {
  const ScenarioSpec scenario = scenario_by_name(config.scenario);
  const ContaminationSpec cont = contamination_by_name(config.contamination);
  const LabeledDataset data = make_dataset(scenario, cont, config.seed);

  ExperimentOutput output;
  const GridSamples samples = curves_to_grid(data.curves, kEmissionGridSize);
  const std::string data_path = out_path(config, "dataset.csv");
  write_grid_samples(data_path, samples, data.labels, provenance(config));
  output.files_written.push_back(data_path);

  const std::string lab_path = out_path(config, "labels.csv");
  write_labels_csv(lab_path, data.curves.ids, data.labels, provenance(config));
  output.files_written.push_back(lab_path);
  return output;
}

ExperimentOutput run_fit_like(const RunConfig& config) {
  if (config.input.empty())
    throw std::invalid_argument("config: '" + config.command + "' needs an input CSV");
  if (config.command == "fit" && config.dims.empty())
    throw std::invalid_argument("config: 'fit' needs dims (use 'select' to search)");

  std::vector<int> truth;
  const CurveSet curves = load_dataset(config.input, basis_from_config(config), &truth);
  const GramMatrix gram = gram_matrix(curves.basis);

  const auto t0 = std::chrono::steady_clock::now();
  RunConfig effective = config;
  if (config.command == "fit") effective.dims = config.dims;
  const FittedModel model = fit_or_select(curves.gamma, gram, effective);
  const auto t1 = std::chrono::steady_clock::now();

  const Labeling predicted = reassign_trimmed(model.fit, curves.gamma, gram);
  RunResult result = summarize(config, model, curves, gram, truth, predicted);
  if (config.timing)
    result.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  ExperimentOutput output;
  output.result = result;
  write_result_files(config, result, curves, model.table, output);
  return output;
}

ExperimentOutput run_bench(const RunConfig& config) {
  const ScenarioSpec scenario = scenario_by_name(config.scenario);
  const ContaminationSpec cont = contamination_by_name(config.contamination);
  if (config.replicates < 1)
    throw std::invalid_argument("config: replicates must be >= 1");

  ExperimentOutput output;
  const std::string bench_path = out_path(config, "ccr_bench.csv");
  std::ofstream out(bench_path);
  if (!out) throw std::runtime_error("cannot write file: " + bench_path);
  out << "# " << provenance(config) << "\n";
  out << "scenario,contamination,replicate,alpha,d,dims,loglik,bic,ccr\n";

  for (int rep = 0; rep < config.replicates; ++rep) {
    const LabeledDataset data =
        make_dataset(scenario, cont, derive_seed(config.seed, 1000 + rep));
    const GramMatrix gram = gram_matrix(data.curves.basis);
    int setting = 0;
    for (double alpha : config.bench_alphas) {
      for (double d : config.bench_ds) {
        RunConfig rc = config;
        rc.alpha = alpha;
        rc.d1 = rc.d2 = d;
        rc.seed = derive_seed(config.seed, (rep + 1) * 4096 + setting);
        const FittedModel model = fit_or_select(data.curves.gamma, gram, rc);
        const Labeling predicted = reassign_trimmed(model.fit, data.curves.gamma, gram);
        Labeling truth;
        truth.source = LabelSource::truth;
        truth.labels = data.labels;
        const double rate = ccr(predicted, truth);

        out << config.scenario << "," << config.contamination << "," << rep << ","
            << fmt_double(alpha) << "," << fmt_double(d) << ",";
        for (std::size_t g = 0; g < model.dims.size(); ++g)
          out << (g ? ";" : "") << model.dims[g];
        out << "," << fmt_double(model.fit.loglik) << "," << fmt_double(model.bic)
            << "," << fmt_double(rate) << "\n";
        ++setting;
      }
    }
  }
  output.files_written.push_back(bench_path);
  return output;
}

}  // namespace

ScenarioSpec scenario_by_name(const std::string& name) {
  if (name == "scenario1") return scenario1();
  if (name == "scenario2") return scenario2();
  throw std::invalid_argument("unknown scenario: " + name +
                              " (expected scenario1 or scenario2)");
}

ContaminationSpec contamination_by_name(const std::string& name) {
  if (name == "cont-i" || name == "none")
    return contamination_scheme(ContaminationScheme::none);
  if (name == "cont-ii") return contamination_scheme(ContaminationScheme::far_level);
  if (name == "cont-iii")
    return contamination_scheme(ContaminationScheme::inrange_level);
  if (name == "cont-iv") return contamination_scheme(ContaminationScheme::cauchy);
  throw std::invalid_argument("unknown contamination scheme: " + name +
                              " (expected cont-i .. cont-iv)");
}

ExperimentOutput run_experiment(const RunConfig& config) {
  validate(config);
  if (config.command == "simulate") return run_simulate(config);
  if (config.command == "fit" || config.command == "select" || config.command == "nox")
    return run_fit_like(config);
  if (config.command == "bench") return run_bench(config);
  throw std::invalid_argument("unknown command: " + config.command);
}

}  // namespace rfc
