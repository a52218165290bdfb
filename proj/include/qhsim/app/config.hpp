#pragma once

// Experiment configuration documents (JSON, "schema_version": 1).
// See configs/README.md for the schema.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qhsim/cmatrix.hpp"
#include "qhsim/evolve.hpp"

namespace qhsim::app {

inline constexpr int kSchemaVersion = 1;

struct ReducedSpec {
  TimeProfile alpha;
  std::optional<TimeProfile> rho;
  std::optional<double> gamma;
  TimeProfile Z = TimeProfile::constant(1.0);
};

/// A time-independent Hamiltonian (from "general" parameters or explicit
/// entries) together with how its metric is selected.
struct StaticSpec {
  Matrix hamiltonian;
  std::optional<std::vector<double>> weights;
  std::vector<Matrix> observables;
};

struct EigenvectorIndex {
  std::size_t index = 0;
};

using InitialState = std::variant<Vector, EigenvectorIndex>;

struct OutputSpec {
  std::string path;
  std::optional<std::string> format;   // "csv" | "json"
  std::vector<std::string> quantities;  // empty: everything
};

struct GridAxis {
  std::string name;  // alpha | gamma | rho | Z
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string model_kind;  // reduced | general | explicit
  std::variant<ReducedSpec, StaticSpec> model;
  std::optional<Schedule> schedule;
  std::size_t sample_stride = 1;
  InitialState initial_state = EigenvectorIndex{0};
  Integrator method = Integrator::rk4;
  double abort_defect = 1e-3;
  std::vector<OutputSpec> outputs;
  std::vector<GridAxis> grid;
  std::string source;  // raw document text, hashed into output metadata
};

/// Schema validation; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc, std::string source = {});

/// Reads and parses a configuration file.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Quantities a run can emit, in their fixed column order.
const std::vector<std::string>& run_quantities();

std::unique_ptr<Model> build_model(const ExperimentConfig& config);

/// Resolves the initial state against the model at time t.
Vector resolve_initial_state(const ExperimentConfig& config, const Model& model, double t);

/// Reduced model spec with a grid point applied (values override the profile base).
ReducedSpec apply_grid_point(const ReducedSpec& base,
                             const std::vector<std::pair<std::string, double>>& point);

std::unique_ptr<Model> make_reduced_model(const ReducedSpec& spec);

}  // namespace qhsim::app
