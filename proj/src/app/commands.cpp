#include "qhsim/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "qhsim/biortho.hpp"
#include "qhsim/errors.hpp"
#include "qhsim/metric.hpp"
#include "qhsim/twolevel.hpp"

namespace qhsim::app {

namespace {

using ojson = nlohmann::ordered_json;

double start_time(const ExperimentConfig& config) {
  return config.schedule ? config.schedule->t0 : 0.0;
}

ExperimentConfig load_with_overrides(const std::filesystem::path& path, const CommandOptions& options) {
  ExperimentConfig config = load_config(path);
  if (options.dt && config.schedule) config.schedule->dt = *options.dt;
  if (options.format && *options.format != "csv" && *options.format != "json") {
    throw ConfigError(fmt::format("--format must be csv or json, not '{}'", *options.format));
  }
  return config;
}

ojson real_list(const std::vector<double>& values) {
  auto out = ojson::array();
  for (double v : values) out.push_back(v);
  return out;
}

ojson complex_list(const std::vector<Complex>& values) {
  auto out = ojson::array();
  for (const auto& v : values) out.push_back(ojson{{"re", v.real()}, {"im", v.imag()}});
  return out;
}

ojson matrix_json(const Matrix& m) {
  auto rows = ojson::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    auto row = ojson::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(ojson{{"re", m(i, j).real()}, {"im", m(i, j).imag()}});
    rows.push_back(std::move(row));
  }
  return rows;
}

double square_root_residual(const Matrix& omega, const Matrix& theta) {
  return frob_norm(omega * omega - theta);
}

/// Static diagnostics of a reduced model at one instant.
struct ReducedStatic {
  double alpha;
  double gamma;
  double Z;
  double R;
  std::vector<Complex> spectrum;
  DiagnosticsReport biortho;
  double qh_residual;
  std::vector<double> metric_eigenvalues;
  double omega_sq_residual;
  double omega_closed_vs_sqrt;
  double hermitized_defect;
};

ReducedStatic reduced_static(const ReducedModel& model, double t) {
  ReducedStatic out{};
  out.alpha = model.alpha(t);
  out.gamma = model.gamma(t);
  out.Z = model.Z(t);
  out.R = twolevel::metric_radius(out.alpha, out.gamma);
  const MetricSnapshot snap = model.at(t);
  const BiorthogonalSystem system = decompose(snap.hamiltonian);
  out.spectrum = system.eigenvalues;
  out.biortho = verify(system, snap.hamiltonian);
  out.qh_residual = qh_residual(snap.hamiltonian, snap.theta);
  out.metric_eigenvalues = herm_eig(snap.theta).eigenvalues;
  out.omega_sq_residual = square_root_residual(snap.omega, snap.theta);
  out.omega_closed_vs_sqrt = frob_norm(snap.omega - sqrt_metric(snap.theta).omega);
  const MetricOperator metric{snap.theta, snap.omega, snap.omega_inv, {}};
  out.hermitized_defect = hermiticity_defect(hermitize(snap.hamiltonian, metric));
  return out;
}

std::vector<std::vector<std::pair<std::string, double>>> grid_points(const std::vector<GridAxis>& axes) {
  std::vector<std::vector<std::pair<std::string, double>>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& prefix : points) {
      for (double v : axis.values) {
        auto p = prefix;
        p.emplace_back(axis.name, v);
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

void write_outputs(const Table& table, const ExperimentConfig& config, const CommandOptions& options,
                   const std::string& command, const std::string& default_stem,
                   const ojson& extra_metadata, std::ostream& out) {
  std::vector<OutputSpec> outputs = config.outputs;
  if (outputs.empty()) outputs.push_back(OutputSpec{default_stem, std::nullopt, {}});

  ojson metadata;
  metadata["schema_version"] = kSchemaVersion;
  metadata["command"] = command;
  metadata["config_hash"] = fnv1a_hex(config.source);
  for (const auto& [key, value] : extra_metadata.items()) metadata[key] = value;

  for (const auto& spec : outputs) {
    const std::string format = options.format.value_or(spec.format.value_or("csv"));
    std::filesystem::path path = spec.path;
    if (!path.has_extension()) path += "." + format;
    if (path.is_relative()) path = options.output_dir / path;

    const std::string content = format == "json" ? table_to_json(table, metadata) : table_to_csv(table);
    write_file(path, content);
    out << "wrote " << path.string() << "\n";
  }
}

}  // namespace

RunResult execute_run(const ExperimentConfig& config) {
  if (!config.schedule) throw ConfigError("field 'schedule': is required for run");
  const Schedule& schedule = *config.schedule;
  schedule.validate();
  const auto model = build_model(config);
  model->validate(schedule);
  const Vector phi0 = resolve_initial_state(config, *model, schedule.t0);

  EvolveOptions options;
  options.propagation.method = config.method;
  options.propagation.sample_stride = config.sample_stride;
  options.propagation.abort_defect = config.abort_defect;
  spdlog::debug("evolving {} steps with {}", schedule.steps(), integrator_name(config.method));

  RunResult result{evolve_state(phi0, schedule, *model, options), {}};
  result.summary = drift_report(result.record);
  return result;
}

Table run_table(const RunResult& result, const std::vector<std::string>& quantities) {
  auto wanted = [&](const std::string& name) {
    return name == "t" || quantities.empty() ||
           std::find(quantities.begin(), quantities.end(), name) != quantities.end();
  };
  const std::size_t dim = result.record.samples.empty()
                              ? 0
                              : static_cast<std::size_t>(result.record.samples.front().right.size());
  Table table;
  for (const auto& name : run_quantities()) {
    if (!wanted(name)) continue;
    if (name == "state") {
      for (std::size_t i = 0; i < dim; ++i) {
        table.columns.push_back(fmt::format("psi_{}_re", i));
        table.columns.push_back(fmt::format("psi_{}_im", i));
      }
    } else {
      table.columns.push_back(name);
    }
  }
  for (const auto& s : result.record.samples) {
    std::vector<Cell> row;
    for (const auto& name : run_quantities()) {
      if (!wanted(name)) continue;
      if (name == "t") row.emplace_back(s.t);
      if (name == "physical_norm") row.emplace_back(s.physical_norm);
      if (name == "naive_norm") row.emplace_back(s.naive_norm);
      if (name == "unitarity_defect") row.emplace_back(s.unitarity_defect);
      if (name == "ansatz_defect") row.emplace_back(s.ansatz_defect);
      if (name == "qh_residual") row.emplace_back(s.qh_residual);
      if (name == "state") {
        for (Eigen::Index i = 0; i < s.right.size(); ++i) {
          row.emplace_back(s.right(i).real());
          row.emplace_back(s.right(i).imag());
        }
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ojson check_report(const ExperimentConfig& config) {
  const double t0 = start_time(config);
  ojson report;
  report["model"] = config.model_kind;
  report["t"] = t0;

  if (const auto* spec = std::get_if<ReducedSpec>(&config.model)) {
    const auto model = make_reduced_model(*spec);
    const auto& reduced = static_cast<const ReducedModel&>(*model);
    if (config.schedule) model->validate(*config.schedule);
    const ReducedStatic s = reduced_static(reduced, t0);
    report["alpha"] = s.alpha;
    report["gamma"] = s.gamma;
    report["Z"] = s.Z;
    report["R"] = s.R;
    report["spectrum"] = complex_list(s.spectrum);
    report["biorthonormality"] = s.biortho.biorthonormality;
    report["completeness"] = s.biortho.completeness;
    report["right_residual"] = s.biortho.right_residual;
    report["left_residual"] = s.biortho.left_residual;
    report["qh_residual"] = s.qh_residual;
    report["metric_eigenvalues"] = real_list(s.metric_eigenvalues);
    report["omega_sq_residual"] = s.omega_sq_residual;
    report["omega_closed_vs_sqrt"] = s.omega_closed_vs_sqrt;
    report["hermitized_defect"] = s.hermitized_defect;
    return report;
  }

  const auto& spec = std::get<StaticSpec>(config.model);
  const BiorthogonalSystem system = decompose(spec.hamiltonian);
  MetricWeights weights = MetricWeights::uniform(system.dim());
  if (spec.weights) {
    weights = MetricWeights(*spec.weights);
  } else if (!spec.observables.empty()) {
    weights = solve_weights(system, spec.observables);
  }
  const MetricOperator metric = metric_from_system(system, weights);
  const DiagnosticsReport diag = verify(system, spec.hamiltonian);
  report["spectrum"] = complex_list(system.eigenvalues);
  report["biorthonormality"] = diag.biorthonormality;
  report["completeness"] = diag.completeness;
  report["right_residual"] = diag.right_residual;
  report["left_residual"] = diag.left_residual;
  report["weights"] = real_list(metric.weights);
  report["qh_residual"] = qh_residual(spec.hamiltonian, metric.theta);
  report["metric_eigenvalues"] = real_list(herm_eig(metric.theta).eigenvalues);
  report["omega_sq_residual"] = square_root_residual(metric.omega, metric.theta);
  report["theta_identity_defect"] = identity_defect(metric.theta);
  report["hermitized_defect"] = hermiticity_defect(hermitize(spec.hamiltonian, metric));
  report["theta"] = matrix_json(metric.theta);
  return report;
}

Table sweep_table(const ExperimentConfig& config, unsigned jobs) {
  const auto* base = std::get_if<ReducedSpec>(&config.model);
  if (!base) throw ConfigError("field 'grid': parameter grids require a reduced model");
  if (config.grid.empty()) throw ConfigError("field 'grid': is required for sweep");
  if (config.schedule) config.schedule->validate();

  const auto points = grid_points(config.grid);
  Table table;
  table.columns.push_back("index");
  for (const auto& axis : config.grid) table.columns.push_back(axis.name);
  for (const char* c : {"status", "error", "qh_residual", "omega_sq_residual", "omega_closed_vs_sqrt",
                        "biorthonormality", "completeness"}) {
    table.columns.push_back(c);
  }
  const bool dynamic = config.schedule.has_value();
  if (dynamic) {
    for (const char* c : {"max_physical_drift", "max_naive_drift", "max_unitarity_defect",
                          "max_ansatz_defect"}) {
      table.columns.push_back(c);
    }
  }
  const std::size_t metric_cols = dynamic ? 9 : 5;

  auto evaluate = [&](std::size_t index) {
    const auto& point = points[index];
    std::vector<Cell> row;
    row.emplace_back(static_cast<double>(index));
    for (const auto& [name, value] : point) row.emplace_back(value);
    try {
      ExperimentConfig local = config;
      local.model = apply_grid_point(*base, point);
      const auto model = make_reduced_model(std::get<ReducedSpec>(local.model));
      if (dynamic) model->validate(*local.schedule);
      const ReducedStatic s =
          reduced_static(static_cast<const ReducedModel&>(*model), start_time(local));
      std::vector<Cell> values{s.qh_residual, s.omega_sq_residual, s.omega_closed_vs_sqrt,
                               s.biortho.biorthonormality, s.biortho.completeness};
      if (dynamic) {
        const RunResult run = execute_run(local);
        values.insert(values.end(), {run.summary.max_physical_drift, run.summary.max_naive_drift,
                                     run.summary.max_unitarity_defect, run.summary.max_ansatz_defect});
      }
      row.emplace_back(std::string("ok"));
      row.emplace_back(std::string());
      row.insert(row.end(), values.begin(), values.end());
    } catch (const Error& e) {
      spdlog::info("grid point {} failed: {}: {}", index, e.kind(), e.what());
      row.emplace_back(std::string("failed"));
      row.emplace_back(std::string(e.kind()));
      for (std::size_t i = 0; i < metric_cols; ++i) row.emplace_back(std::nan(""));
    }
    return row;
  };

  std::vector<std::vector<Cell>> rows(points.size());
  unsigned workers = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, points.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = evaluate(i);
      });
    }
  }
  table.rows = std::move(rows);
  return table;
}

int run_command(const std::filesystem::path& config_path, const CommandOptions& options,
                std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const ExperimentConfig config = load_with_overrides(config_path, options);
  const RunResult result = execute_run(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const auto& s = result.summary;
  spdlog::info("run: {} samples, max physical drift {:.3e}, max naive drift {:.3e}",
               result.record.samples.size(), s.max_physical_drift, s.max_naive_drift);
  out << "max_physical_drift: " << format_number(s.max_physical_drift) << "\n"
      << "max_naive_drift: " << format_number(s.max_naive_drift) << "\n"
      << "max_unitarity_defect: " << format_number(s.max_unitarity_defect) << "\n"
      << "max_ansatz_defect: " << format_number(s.max_ansatz_defect) << "\n";

  ojson metadata;
  metadata["integrator"] = integrator_name(config.method);
  metadata["dt"] = config.schedule->dt;
  metadata["wall_time_s"] = wall;

  std::vector<OutputSpec> outputs = config.outputs;
  if (outputs.empty()) outputs.push_back(OutputSpec{"run", std::nullopt, {}});
  for (const auto& spec : outputs) {
    ExperimentConfig single = config;
    single.outputs = {spec};
    write_outputs(run_table(result, spec.quantities), single, options, "run", "run", metadata, out);
  }
  return 0;
}

int check_command(const std::filesystem::path& config_path, const CommandOptions& options,
                  std::ostream& out) {
  const ExperimentConfig config = load_with_overrides(config_path, options);
  const ojson report = check_report(config);
  if (options.format && *options.format == "json") {
    out << report.dump(2) << "\n";
    return 0;
  }
  for (const auto& [key, value] : report.items()) {
    out << key << ":";
    if (value.is_number()) {
      out << " " << format_number(value.get<double>());
    } else if (value.is_string()) {
      out << " " << value.get<std::string>();
    } else if (value.is_array() && !value.empty() && value.front().is_number()) {
      for (const auto& v : value) out << " " << format_number(v.get<double>());
    } else {
      out << " " << value.dump();
    }
    out << "\n";
  }
  return 0;
}

int sweep_command(const std::filesystem::path& config_path, const CommandOptions& options,
                  std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const ExperimentConfig config = load_with_overrides(config_path, options);
  const Table table = sweep_table(config, options.jobs);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::size_t failed = 0;
  const auto status_col = 1 + config.grid.size();
  for (const auto& row : table.rows) {
    if (std::get<std::string>(row[status_col]) != "ok") ++failed;
  }
  ojson metadata;
  metadata["integrator"] = integrator_name(config.method);
  metadata["grid_points"] = table.rows.size();
  metadata["failed_points"] = failed;
  metadata["wall_time_s"] = wall;
  write_outputs(table, config, options, "sweep", "sweep", metadata, out);
  out << "grid points: " << table.rows.size() << ", failed: " << failed << "\n";
  return failed ? kSweepPartialFailure : 0;
}

}  // namespace qhsim::app
