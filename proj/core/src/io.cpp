#include "rfc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rfc/simulate.hpp"

namespace rfc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, int row, const std::string& path) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": row " + std::to_string(row) +
                             ": non-numeric field '" + s + "'");
  }
  if (pos != s.size())
    throw std::runtime_error(path + ": row " + std::to_string(row) +
                             ": non-numeric field '" + s + "'");
  return v;
}

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  get_if_present(j, "command", c.command);
  get_if_present(j, "k", c.K);
  get_if_present(j, "alpha", c.alpha);
  get_if_present(j, "d1", c.d1);
  get_if_present(j, "d2", c.d2);
  get_if_present(j, "dims", c.dims);
  get_if_present(j, "q_min", c.q_min);
  get_if_present(j, "q_max", c.q_max);
  if (auto it = j.find("basis"); it != j.end() && !it->is_null()) {
    get_if_present(*it, "kind", c.basis_kind);
    get_if_present(*it, "p", c.basis_p);
    get_if_present(*it, "order", c.basis_order);
    get_if_present(*it, "T", c.domain_t);
  }
  get_if_present(j, "nstart", c.nstart);
  get_if_present(j, "iter_max", c.iter_max);
  get_if_present(j, "tol", c.tol);
  get_if_present(j, "seed", c.seed);
  get_if_present(j, "threads", c.threads);
  get_if_present(j, "timing", c.timing);
  get_if_present(j, "scenario", c.scenario);
  get_if_present(j, "contamination", c.contamination);
  get_if_present(j, "replicates", c.replicates);
  get_if_present(j, "bench_alphas", c.bench_alphas);
  get_if_present(j, "bench_ds", c.bench_ds);
  get_if_present(j, "input", c.input);
  get_if_present(j, "out", c.out);
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["k"] = c.K;
  j["alpha"] = c.alpha;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["dims"] = c.dims;
  j["q_min"] = c.q_min;
  j["q_max"] = c.q_max;
  j["basis"] = {{"kind", c.basis_kind},
                {"p", c.basis_p},
                {"order", c.basis_order},
                {"T", c.domain_t}};
  j["nstart"] = c.nstart;
  j["iter_max"] = c.iter_max;
  j["tol"] = c.tol;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["timing"] = c.timing;
  j["scenario"] = c.scenario;
  j["contamination"] = c.contamination;
  j["replicates"] = c.replicates;
  j["bench_alphas"] = c.bench_alphas;
  j["bench_ds"] = c.bench_ds;
  j["input"] = c.input;
  j["out"] = c.out;
  return j;
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json j = config_to_json(config);
  // Where results land and how many workers computed them do not change
  // what they contain.
  j.erase("out");
  j.erase("threads");
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LoadedData load_grid_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  LoadedData data;
  std::string line;
  int row = 0;
  bool have_header = false;
  bool has_label = false;
  std::size_t m = 0;
  std::vector<std::vector<double>> values;

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);

    if (!have_header) {
      if (fields.empty() || fields[0] != "t")
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ": header must start with 't'");
      has_label = fields.size() > 1 && fields.back() == "label";
      m = fields.size() - 1 - (has_label ? 1 : 0);
      if (m == 0)
        throw std::runtime_error(path + ": header lists no grid points");
      data.samples.grid.resize(static_cast<Eigen::Index>(m));
      for (std::size_t l = 0; l < m; ++l)
        data.samples.grid(static_cast<Eigen::Index>(l)) =
            parse_double(fields[l + 1], row, path);
      for (std::size_t l = 1; l < m; ++l)
        if (!(data.samples.grid(static_cast<Eigen::Index>(l)) >
              data.samples.grid(static_cast<Eigen::Index>(l - 1))))
          throw std::runtime_error(path + ": grid must be strictly increasing");
      have_header = true;
      continue;
    }

    const std::size_t expected = 1 + m + (has_label ? 1 : 0);
    if (fields.size() != expected)
      throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                               std::to_string(expected) + " fields, got " +
                               std::to_string(fields.size()));
    data.samples.ids.push_back(fields[0]);
    std::vector<double> rowvals(m);
    for (std::size_t l = 0; l < m; ++l)
      rowvals[l] = parse_double(fields[l + 1], row, path);
    values.push_back(std::move(rowvals));
    if (has_label)
      data.labels.push_back(static_cast<int>(parse_double(fields.back(), row, path)));
  }
  if (!have_header) throw std::runtime_error(path + ": missing header row");

  data.samples.values.resize(static_cast<Eigen::Index>(values.size()),
                             static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t l = 0; l < m; ++l)
      data.samples.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
          values[i][l];
  return data;
}

CurveSet load_dataset(const std::string& path, BasisSpec spec,
                      std::vector<int>* labels_out) {
  LoadedData data = load_grid_samples(path);
  if (spec.domain_t == 0.0) {
    const double t_max = data.samples.grid(data.samples.grid.size() - 1);
    spec = spec.kind == BasisKind::fourier
               ? BasisSpec::fourier(spec.p, t_max)
               : BasisSpec::bspline(spec.p, spec.order, t_max);
  }
  if (labels_out) *labels_out = data.labels;
  return fit_coefficients(data.samples, spec);
}

void write_grid_samples(const std::string& path, const GridSamples& samples,
                        const std::vector<int>& labels, const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "# " << provenance << "\n";
  out << "t";
  for (Eigen::Index l = 0; l < samples.grid.size(); ++l)
    out << "," << fmt_double(samples.grid(l));
  if (!labels.empty()) out << ",label";
  out << "\n";
  for (Eigen::Index i = 0; i < samples.values.rows(); ++i) {
    out << samples.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index l = 0; l < samples.values.cols(); ++l)
      out << "," << fmt_double(samples.values(i, l));
    if (!labels.empty()) out << "," << labels[static_cast<std::size_t>(i)];
    out << "\n";
  }
}

void write_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                      const std::vector<int>& labels, const std::string& provenance) {
  if (ids.size() != labels.size())
    throw std::invalid_argument("write_labels_csv: ids/labels length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "# " << provenance << "\n";
  out << "id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << ids[i] << "," << labels[i] << "\n";
}

void write_bic_table(const std::string& path, const std::vector<BicRow>& table,
                     const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "# " << provenance << "\n";
  if (table.empty()) return;
  const std::size_t K = table.front().dims.size();
  for (std::size_t g = 1; g <= K; ++g) out << "q_" << g << ",";
  out << "loglik,kappa,bic\n";
  for (const BicRow& row : table) {
    for (int q : row.dims) out << q << ",";
    out << fmt_double(row.loglik) << "," << row.kappa << "," << fmt_double(row.bic)
        << "\n";
  }
}

nlohmann::json result_to_json(const RunResult& r) {
  nlohmann::json j;
  j["command"] = r.command;
  j["config"] = r.config_digest;
  j["seed"] = r.seed;
  j["k"] = r.K;
  j["dims"] = r.dims;
  j["alpha"] = r.alpha;
  j["d1"] = r.d1;
  j["d2"] = r.d2;
  j["loglik"] = r.loglik;
  j["kappa"] = r.kappa;
  j["bic"] = r.bic;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["monotone_violations"] = r.monotone_violations;
  j["max_loglik_decrease"] = r.max_loglik_decrease;
  j["pi"] = r.pi;
  j["scatter_a"] = r.scatter_a;
  j["scatter_b"] = r.scatter_b;
  j["labels"] = r.labels;
  j["trimmed_ids"] = r.trimmed_ids;
  if (r.ccr) j["ccr"] = *r.ccr;
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j;
}

RunResult result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.command = j.at("command").get<std::string>();
  r.config_digest = j.at("config").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.K = j.at("k").get<int>();
  r.dims = j.at("dims").get<std::vector<int>>();
  r.alpha = j.at("alpha").get<double>();
  r.d1 = j.at("d1").get<double>();
  r.d2 = j.at("d2").get<double>();
  r.loglik = j.at("loglik").get<double>();
  r.kappa = j.at("kappa").get<long long>();
  r.bic = j.at("bic").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.monotone_violations = j.at("monotone_violations").get<int>();
  r.max_loglik_decrease = j.at("max_loglik_decrease").get<double>();
  r.pi = j.at("pi").get<std::vector<double>>();
  r.scatter_a = j.at("scatter_a").get<std::vector<std::vector<double>>>();
  r.scatter_b = j.at("scatter_b").get<std::vector<double>>();
  r.labels = j.at("labels").get<std::vector<int>>();
  r.trimmed_ids = j.at("trimmed_ids").get<std::vector<std::string>>();
  if (j.contains("ccr")) r.ccr = j.at("ccr").get<double>();
  if (j.contains("wall_ms")) r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

}  // namespace rfc
