#include "qhsim/app/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qhsim/biortho.hpp"
#include "qhsim/errors.hpp"
#include "qhsim/metric.hpp"
#include "qhsim/twolevel.hpp"

namespace qhsim::app {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
  throw ConfigError(fmt::format("field '{}': {}", field, reason));
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) fail(where.empty() ? key : where + "." + key, "unknown field");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "is required");
  return *it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

Complex complex_value(const json& j, const std::string& field) {
  if (j.is_number()) return {number(j, field), 0.0};
  if (!j.is_object()) fail(field, "must be a {re, im} object");
  reject_unknown(j, field, {"re", "im"});
  return {number(require(j, "re", field), field + ".re"), number(require(j, "im", field), field + ".im")};
}

Matrix matrix_value(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a nonempty array of rows");
  const std::size_t n = j.size();
  Matrix::Storage data(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = j[i];
    const std::string row_field = fmt::format("{}[{}]", field, i);
    if (!row.is_array() || row.size() != n) fail(row_field, fmt::format("must hold {} entries", n));
    for (std::size_t k = 0; k < n; ++k) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          complex_value(row[k], fmt::format("{}[{}]", row_field, k));
    }
  }
  return Matrix(std::move(data));
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], fmt::format("{}[{}]", field, i)));
  return out;
}

TimeProfile profile_value(const json& j, const std::string& field) {
  if (j.is_number()) return TimeProfile::constant(number(j, field));
  if (!j.is_object()) fail(field, "must be a number or a profile object");
  const json& kind_j = require(j, "kind", field);
  if (!kind_j.is_string()) fail(field + ".kind", "must be a string");
  const auto kind = kind_j.get<std::string>();
  auto num = [&](const char* key) { return number(require(j, key, field), field + "." + key); };
  auto opt = [&](const char* key, double fallback) {
    return j.contains(key) ? number(j[key], field + "." + key) : fallback;
  };
  if (kind == "constant") {
    reject_unknown(j, field, {"kind", "value"});
    return TimeProfile::constant(num("value"));
  }
  if (kind == "linear") {
    reject_unknown(j, field, {"kind", "base", "slope"});
    return TimeProfile::linear(num("base"), num("slope"));
  }
  if (kind == "sinusoid") {
    reject_unknown(j, field, {"kind", "base", "amplitude", "angular_frequency", "phase"});
    return TimeProfile::sinusoid(num("base"), num("amplitude"), num("angular_frequency"),
                                 opt("phase", 0.0));
  }
  fail(field + ".kind", fmt::format("unknown profile kind '{}'", kind));
}

StaticSpec static_extras(const json& m, Matrix hamiltonian) {
  StaticSpec spec{std::move(hamiltonian), std::nullopt, {}};
  if (m.contains("weights")) {
    spec.weights = number_list(m["weights"], "model.weights");
    if (spec.weights->size() != spec.hamiltonian.dim()) {
      fail("model.weights", fmt::format("needs {} entries", spec.hamiltonian.dim()));
    }
  }
  if (m.contains("observables")) {
    const json& obs = m["observables"];
    if (!obs.is_array() || obs.empty()) fail("model.observables", "must be a nonempty array of matrices");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string field = fmt::format("model.observables[{}]", i);
      Matrix o = matrix_value(obs[i], field);
      if (o.dim() != spec.hamiltonian.dim()) fail(field, "dimension differs from the Hamiltonian");
      spec.observables.push_back(std::move(o));
    }
  }
  if (spec.weights && !spec.observables.empty()) {
    fail("model", "'weights' and 'observables' are mutually exclusive");
  }
  return spec;
}

}  // namespace

const std::vector<std::string>& run_quantities() {
  static const std::vector<std::string> names{"t",
                                              "physical_norm",
                                              "naive_norm",
                                              "unitarity_defect",
                                              "ansatz_defect",
                                              "qh_residual",
                                              "state"};
  return names;
}

ExperimentConfig parse_config(const json& doc, std::string source) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, "", {"schema_version", "model", "schedule", "initial_state", "integrator",
                           "outputs", "grid", "description"});

  const json& version = require(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    fail("schema_version", fmt::format("must be {}", kSchemaVersion));
  }

  ExperimentConfig cfg;
  cfg.source = std::move(source);

  const json& m = require(doc, "model", "");
  if (!m.is_object()) fail("model", "must be an object");
  const json& kind_j = require(m, "kind", "model");
  if (!kind_j.is_string()) fail("model.kind", "must be a string");
  cfg.model_kind = kind_j.get<std::string>();

  if (cfg.model_kind == "reduced") {
    reject_unknown(m, "model", {"kind", "alpha", "rho", "gamma", "Z"});
    ReducedSpec spec;
    spec.alpha = profile_value(require(m, "alpha", "model"), "model.alpha");
    const bool has_rho = m.contains("rho");
    const bool has_gamma = m.contains("gamma");
    if (has_rho == has_gamma) fail("model", "exactly one of 'rho' and 'gamma' is required");
    if (has_rho) spec.rho = profile_value(m["rho"], "model.rho");
    if (has_gamma) spec.gamma = number(m["gamma"], "model.gamma");
    if (m.contains("Z")) spec.Z = profile_value(m["Z"], "model.Z");
    cfg.model = spec;
  } else if (cfg.model_kind == "general") {
    reject_unknown(m, "model", {"kind", "E", "theta", "phi", "q", "weights", "observables"});
    twolevel::GeneralParams p;
    p.E = number(require(m, "E", "model"), "model.E");
    p.theta = complex_value(require(m, "theta", "model"), "model.theta");
    p.phi = complex_value(require(m, "phi", "model"), "model.phi");
    p.q = m.contains("q") ? number(m["q"], "model.q") : 0.0;
    try {
      cfg.model = static_extras(m, twolevel::h_general(p));
    } catch (const DomainError& e) {
      fail("model", e.what());
    }
  } else if (cfg.model_kind == "explicit") {
    reject_unknown(m, "model", {"kind", "hamiltonian", "weights", "observables"});
    cfg.model = static_extras(m, matrix_value(require(m, "hamiltonian", "model"), "model.hamiltonian"));
  } else {
    fail("model.kind", fmt::format("unknown model kind '{}' (expected reduced, general or explicit)",
                                   cfg.model_kind));
  }

  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    if (!s.is_object()) fail("schedule", "must be an object");
    reject_unknown(s, "schedule", {"t0", "t1", "dt", "sample_stride"});
    Schedule sched;
    sched.t0 = s.contains("t0") ? number(s["t0"], "schedule.t0") : 0.0;
    sched.t1 = number(require(s, "t1", "schedule"), "schedule.t1");
    sched.dt = number(require(s, "dt", "schedule"), "schedule.dt");
    cfg.schedule = sched;
    if (s.contains("sample_stride")) {
      const json& stride = s["sample_stride"];
      if (!stride.is_number_integer() || stride.get<long long>() < 1) {
        fail("schedule.sample_stride", "must be an integer >= 1");
      }
      cfg.sample_stride = stride.get<std::size_t>();
    }
  }

  if (doc.contains("initial_state")) {
    const json& st = doc["initial_state"];
    if (st.is_array()) {
      Vector v(static_cast<Eigen::Index>(st.size()));
      for (std::size_t i = 0; i < st.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = complex_value(st[i], fmt::format("initial_state[{}]", i));
      }
      cfg.initial_state = v;
    } else if (st.is_object()) {
      reject_unknown(st, "initial_state", {"eigenvector"});
      const json& k = require(st, "eigenvector", "initial_state");
      if (!k.is_number_integer() || k.get<long long>() < 0) {
        fail("initial_state.eigenvector", "must be a nonnegative integer");
      }
      cfg.initial_state = EigenvectorIndex{k.get<std::size_t>()};
    } else {
      fail("initial_state", "must be an array of {re, im} values or {\"eigenvector\": k}");
    }
  }

  if (doc.contains("integrator")) {
    const json& in = doc["integrator"];
    if (!in.is_object()) fail("integrator", "must be an object");
    reject_unknown(in, "integrator", {"method", "abort_defect"});
    if (in.contains("method")) {
      if (!in["method"].is_string()) fail("integrator.method", "must be a string");
      try {
        cfg.method = parse_integrator(in["method"].get<std::string>());
      } catch (const ConfigError& e) {
        fail("integrator.method", e.what());
      }
    }
    if (in.contains("abort_defect")) {
      cfg.abort_defect = number(in["abort_defect"], "integrator.abort_defect");
      if (!(cfg.abort_defect > 0.0)) fail("integrator.abort_defect", "must be positive");
    }
  }

  if (doc.contains("outputs")) {
    const json& outs = doc["outputs"];
    if (!outs.is_array()) fail("outputs", "must be an array");
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const std::string field = fmt::format("outputs[{}]", i);
      const json& o = outs[i];
      if (!o.is_object()) fail(field, "must be an object");
      reject_unknown(o, field, {"path", "format", "quantities"});
      OutputSpec spec;
      const json& path = require(o, "path", field);
      if (!path.is_string() || path.get<std::string>().empty()) fail(field + ".path", "must be a nonempty string");
      spec.path = path.get<std::string>();
      if (o.contains("format")) {
        const json& f = o["format"];
        if (!f.is_string() || (f.get<std::string>() != "csv" && f.get<std::string>() != "json")) {
          fail(field + ".format", "must be \"csv\" or \"json\"");
        }
        spec.format = f.get<std::string>();
      }
      if (o.contains("quantities")) {
        const json& q = o["quantities"];
        if (!q.is_array()) fail(field + ".quantities", "must be an array of names");
        for (const auto& name : q) {
          const std::string qf = field + ".quantities";
          if (!name.is_string()) fail(qf, "entries must be strings");
          const auto& known = run_quantities();
          if (std::find(known.begin(), known.end(), name.get<std::string>()) == known.end()) {
            fail(qf, fmt::format("unknown quantity '{}'", name.get<std::string>()));
          }
          spec.quantities.push_back(name.get<std::string>());
        }
      }
      cfg.outputs.push_back(std::move(spec));
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object() || g.empty()) fail("grid", "must be a nonempty object of value lists");
    if (cfg.model_kind != "reduced") fail("grid", "parameter grids require a reduced model");
    reject_unknown(g, "grid", {"alpha", "gamma", "rho", "Z"});
    if (g.contains("gamma") && g.contains("rho")) fail("grid", "'gamma' and 'rho' cannot both vary");
    for (const char* name : {"alpha", "gamma", "rho", "Z"}) {
      if (g.contains(name)) cfg.grid.push_back({name, number_list(g[name], fmt::format("grid.{}", name))});
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read configuration '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_config(doc, std::move(text));
}

std::unique_ptr<Model> make_reduced_model(const ReducedSpec& spec) {
  if (spec.rho) return std::make_unique<ReducedModel>(ReducedModel::with_rho(spec.alpha, *spec.rho, spec.Z));
  return std::make_unique<ReducedModel>(ReducedModel::with_gamma(spec.alpha, *spec.gamma, spec.Z));
}

std::unique_ptr<Model> build_model(const ExperimentConfig& config) {
  if (const auto* reduced = std::get_if<ReducedSpec>(&config.model)) return make_reduced_model(*reduced);

  const auto& spec = std::get<StaticSpec>(config.model);
  const BiorthogonalSystem system = decompose(spec.hamiltonian);
  MetricWeights weights = MetricWeights::uniform(system.dim());
  if (spec.weights) {
    weights = MetricWeights(*spec.weights);
  } else if (!spec.observables.empty()) {
    weights = solve_weights(system, spec.observables);
  }
  return std::make_unique<StaticModel>(spec.hamiltonian, metric_from_system(system, weights));
}

Vector resolve_initial_state(const ExperimentConfig& config, const Model& model, double t) {
  if (const auto* v = std::get_if<Vector>(&config.initial_state)) {
    if (static_cast<std::size_t>(v->size()) != model.dim()) {
      fail("initial_state", fmt::format("needs {} components", model.dim()));
    }
    if (v->norm() == 0.0) fail("initial_state", "must be nonzero");
    return *v;
  }
  const std::size_t k = std::get<EigenvectorIndex>(config.initial_state).index;
  if (k >= model.dim()) fail("initial_state.eigenvector", fmt::format("must be below {}", model.dim()));
  return decompose(model.hamiltonian(t)).right.column(k);
}

ReducedSpec apply_grid_point(const ReducedSpec& base,
                             const std::vector<std::pair<std::string, double>>& point) {
  ReducedSpec spec = base;
  auto set_base = [](TimeProfile& p, double v) {
    if (p.kind == TimeProfile::Kind::constant) {
      p = TimeProfile::constant(v);
    } else {
      p.base = v;
    }
  };
  for (const auto& [name, value] : point) {
    if (name == "alpha") {
      set_base(spec.alpha, value);
    } else if (name == "Z") {
      set_base(spec.Z, value);
    } else if (name == "gamma") {
      spec.gamma = value;
      spec.rho.reset();
    } else if (name == "rho") {
      if (spec.rho) {
        set_base(*spec.rho, value);
      } else {
        spec.rho = TimeProfile::constant(value);
      }
      spec.gamma.reset();
    }
  }
  return spec;
}

}  // namespace qhsim::app
