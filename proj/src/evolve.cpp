#include "qhsim/evolve.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qhsim/errors.hpp"
#include "qhsim/twolevel.hpp"

namespace qhsim {

namespace {

using Storage = Matrix::Storage;

const Complex kMinusI{0.0, -1.0};

double relative_drift(double value, double reference) { return std::abs(value / reference - 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// TimeProfile / Schedule

TimeProfile TimeProfile::constant(double value) {
  TimeProfile p;
  p.base = value;
  return p;
}

TimeProfile TimeProfile::linear(double base, double slope) {
  TimeProfile p;
  p.kind = Kind::linear;
  p.base = base;
  p.slope = slope;
  return p;
}

TimeProfile TimeProfile::sinusoid(double base, double amplitude, double angular_frequency,
                                  double phase) {
  TimeProfile p;
  p.kind = Kind::sinusoid;
  p.base = base;
  p.amplitude = amplitude;
  p.angular_frequency = angular_frequency;
  p.phase = phase;
  return p;
}

double TimeProfile::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return base;
    case Kind::linear:
      return base + slope * t;
    case Kind::sinusoid:
      return base + amplitude * std::sin(angular_frequency * t + phase);
  }
  return base;
}

bool TimeProfile::is_constant() const noexcept {
  switch (kind) {
    case Kind::constant:
      return true;
    case Kind::linear:
      return slope == 0.0;
    case Kind::sinusoid:
      return amplitude == 0.0 || angular_frequency == 0.0;
  }
  return false;
}

void Schedule::validate() const {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(dt)) {
    throw ScheduleError("schedule values must be finite");
  }
  if (!(t1 > t0)) throw ScheduleError(fmt::format("t1 = {} must exceed t0 = {}", t1, t0));
  if (!(dt > 0.0)) throw ScheduleError(fmt::format("dt = {} must be positive", dt));
  const double ratio = (t1 - t0) / dt;
  if (ratio > kMaxScheduleSteps) {
    throw ScheduleError(fmt::format("schedule needs {:.3e} steps; the limit is 1e7", ratio));
  }
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw ScheduleError(fmt::format("dt = {} does not divide t1 - t0 = {}", dt, t1 - t0));
  }
}

std::size_t Schedule::steps() const {
  validate();
  return static_cast<std::size_t>(std::llround((t1 - t0) / dt));
}

std::vector<std::size_t> sample_indices(const Schedule& schedule, std::size_t stride) {
  if (stride == 0) throw ScheduleError("sample_stride must be at least 1");
  const std::size_t steps = schedule.steps();
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= steps; k += stride) out.push_back(k);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

// ---------------------------------------------------------------------------
// Models

ReducedModel::ReducedModel(TimeProfile alpha, std::optional<TimeProfile> rho,
                           std::optional<double> gamma, TimeProfile Z)
    : alpha_(alpha), rho_(rho), gamma_(gamma), Z_(Z) {}

ReducedModel ReducedModel::with_rho(TimeProfile alpha, TimeProfile rho, TimeProfile Z) {
  return ReducedModel(alpha, rho, std::nullopt, Z);
}

ReducedModel ReducedModel::with_gamma(TimeProfile alpha, double gamma, TimeProfile Z) {
  return ReducedModel(alpha, std::nullopt, gamma, Z);
}

double ReducedModel::gamma(double t) const {
  if (gamma_) return *gamma_;
  return twolevel::gamma_from_rho(alpha_(t), (*rho_)(t));
}

bool ReducedModel::is_stationary() const {
  return alpha_.is_constant() && Z_.is_constant() && (!rho_ || rho_->is_constant());
}

Matrix ReducedModel::hamiltonian(double t) const { return twolevel::h_reduced(alpha_(t)); }

MetricSnapshot ReducedModel::at(double t) const {
  const double a = alpha_(t);
  const double g = gamma(t);
  const double z = Z_(t);
  Matrix omega = std::sqrt(z) * twolevel::omega_closed(a, g);
  Matrix omega_inv = inverse(omega);
  return MetricSnapshot{twolevel::h_reduced(a), twolevel::theta_reduced(a, g, z), std::move(omega),
                        std::move(omega_inv)};
}

void ReducedModel::validate(const Schedule& schedule) const {
  const std::size_t steps = schedule.steps();
  const std::size_t samples = is_stationary() ? 1 : 10 * steps + 1;
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = schedule.t0 + static_cast<double>(j) * schedule.dt / 10.0;
    try {
      const double a = alpha_(t);
      const double g = gamma(t);
      twolevel::theta_reduced(a, g, Z_(t));
      twolevel::metric_radius(a, g);
      twolevel::omega_closed(a, g);
    } catch (const Error& e) {
      throw DomainError(fmt::format("model leaves its domain at t = {}: {}", t, e.what()));
    }
  }
}

StaticModel::StaticModel(Matrix hamiltonian, MetricOperator metric)
    : h_(std::move(hamiltonian)), metric_(std::move(metric)) {
  if (h_.dim() != metric_.theta.dim()) throw DimensionError("model and metric dimensions differ");
  const double qh = qh_residual(h_, metric_.theta);
  if (qh > 1e-8) {
    throw IncompatibilityError(
        fmt::format("Hamiltonian is not quasi-Hermitian for the metric (residual {:.3e})", qh));
  }
}

MetricSnapshot StaticModel::at(double) const {
  return MetricSnapshot{h_, metric_.theta, metric_.omega, metric_.omega_inv};
}

void StaticModel::validate(const Schedule& schedule) const { schedule.validate(); }

Generator generator_at(double t, const Model& model) {
  MetricSnapshot snap = model.at(t);
  const MetricOperator metric{snap.theta, snap.omega, snap.omega_inv, {}};
  Matrix h = hermitize(snap.hamiltonian, metric);
  const double defect = hermiticity_defect(h);
  if (defect > 1e-10 * frob_norm(h)) {
    throw IncompatibilityError(
        fmt::format("generator at t = {} is not Hermitian (defect {:.3e})", t, defect));
  }
  return Generator{std::move(snap.hamiltonian), std::move(snap.theta), std::move(snap.omega),
                   std::move(snap.omega_inv), std::move(h)};
}

// ---------------------------------------------------------------------------
// Integration

Integrator parse_integrator(const std::string& name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "magnus2") return Integrator::magnus2;
  throw ConfigError(fmt::format("unknown integrator '{}' (expected rk4 or magnus2)", name));
}

const char* integrator_name(Integrator method) {
  return method == Integrator::rk4 ? "rk4" : "magnus2";
}

namespace {

Storage rk4_step(const Storage& u, double dt, const Storage& h0, const Storage& hm,
                 const Storage& h1) {
  const Storage k1 = kMinusI * (h0 * u);
  const Storage k2 = kMinusI * (hm * (u + 0.5 * dt * k1));
  const Storage k3 = kMinusI * (hm * (u + 0.5 * dt * k2));
  const Storage k4 = kMinusI * (h1 * (u + dt * k3));
  return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Storage magnus2_step(const Storage& u, double dt, const Matrix& hm) {
  const HermEig eig = herm_eig(hm);
  const auto n = static_cast<Eigen::Index>(hm.dim());
  Eigen::VectorXcd phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i) = std::exp(kMinusI * dt * eig.eigenvalues[static_cast<std::size_t>(i)]);
  }
  const auto& v = eig.eigenvectors.data();
  return v * phases.asDiagonal() * v.adjoint() * u;
}

double unitarity_defect(const Storage& u) {
  return (u.adjoint() * u - Storage::Identity(u.rows(), u.cols())).norm();
}

}  // namespace

USeries propagate_u(const Schedule& schedule, const HermitianGenerator& h,
                    const PropagationOptions& options) {
  const std::size_t steps = schedule.steps();
  const std::vector<std::size_t> samples = sample_indices(schedule, options.sample_stride);
  const double dt = schedule.dt;

  Matrix h_now = h(schedule.time(0));
  const auto n = static_cast<Eigen::Index>(h_now.dim());
  Storage u = Storage::Identity(n, n);

  USeries out;
  out.times.reserve(samples.size());
  out.u.reserve(samples.size());
  out.unitarity_defect.reserve(samples.size());
  std::size_t next_sample = 0;
  auto record = [&](std::size_t k, double defect) {
    if (next_sample < samples.size() && samples[next_sample] == k) {
      out.times.push_back(schedule.time(k));
      out.u.emplace_back(u);
      out.unitarity_defect.push_back(defect);
      ++next_sample;
    }
  };
  record(0, 0.0);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = schedule.time(k);
    const Matrix h_mid = h(t + 0.5 * dt);
    if (options.method == Integrator::rk4) {
      Matrix h_next = h(schedule.time(k + 1));
      u = rk4_step(u, dt, h_now.data(), h_mid.data(), h_next.data());
      h_now = std::move(h_next);
    } else {
      u = magnus2_step(u, dt, h_mid);
    }
    if (!u.allFinite()) throw IntegrationError(fmt::format("propagator became non-finite at t = {}", t));
    const double defect = unitarity_defect(u);
    if (defect > options.abort_defect) {
      throw IntegrationError(fmt::format(
          "unitarity defect {:.3e} at t = {} exceeds {:.1e}; reduce dt (currently {})", defect,
          schedule.time(k + 1), options.abort_defect, dt));
    }
    record(k + 1, defect);
  }
  return out;
}

Propagators build_propagators(std::span<const Matrix> u, std::span<const Matrix> omega,
                              std::span<const Matrix> omega_inv) {
  if (u.size() != omega.size() || u.size() != omega_inv.size() || u.empty()) {
    throw GridMismatchError(fmt::format("propagator series lengths differ (u {}, omega {}, omega^-1 {})",
                                        u.size(), omega.size(), omega_inv.size()));
  }
  const Matrix& omega0 = omega.front();
  const Matrix& omega0_inv = omega_inv.front();
  const Matrix omega0_inv_dag = adjoint(omega0_inv);

  Propagators out;
  out.right.reserve(u.size());
  out.left.reserve(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.right.push_back(omega_inv[k] * u[k] * omega0);
    const Matrix left_dag = adjoint(omega[k]) * u[k] * omega0_inv_dag;
    out.left.push_back(adjoint(left_dag));
  }
  return out;
}

NaiveSeries naive_propagate(const Vector& phi0, const Schedule& schedule, const Model& model,
                            std::size_t sample_stride, double divergence_cap) {
  model.validate(schedule);
  if (static_cast<std::size_t>(phi0.size()) != model.dim()) {
    throw DimensionError("initial state dimension does not match the model");
  }
  const std::size_t steps = schedule.steps();
  const std::vector<std::size_t> samples = sample_indices(schedule, sample_stride);
  const double dt = schedule.dt;

  NaiveSeries out;
  Vector psi = phi0;
  std::size_t next_sample = 0;
  auto record = [&](std::size_t k) {
    if (next_sample < samples.size() && samples[next_sample] == k) {
      const double t = schedule.time(k);
      const Matrix theta = model.at(t).theta;
      out.times.push_back(t);
      out.states.push_back(psi);
      out.theta_norms.push_back(psi.dot(theta.data() * psi).real());
      ++next_sample;
    }
  };
  record(0);

  Matrix h_now = model.hamiltonian(schedule.time(0));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = schedule.time(k);
    const Matrix h_mid = model.hamiltonian(t + 0.5 * dt);
    Matrix h_next = model.hamiltonian(schedule.time(k + 1));
    const Vector k1 = kMinusI * (h_now.data() * psi);
    const Vector k2 = kMinusI * (h_mid.data() * (psi + 0.5 * dt * k1));
    const Vector k3 = kMinusI * (h_mid.data() * (psi + 0.5 * dt * k2));
    const Vector k4 = kMinusI * (h_next.data() * (psi + dt * k3));
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    h_now = std::move(h_next);

    const double norm = psi.norm();
    if (!std::isfinite(norm) || norm > divergence_cap) {
      throw DivergenceError(fmt::format("naive state norm {:.3e} exceeds the cap {:.1e} at t = {}",
                                        norm, divergence_cap, schedule.time(k + 1)));
    }
    record(k + 1);
  }
  return out;
}

EvolutionRecord evolve_state(const Vector& phi0, const Schedule& schedule, const Model& model,
                             const EvolveOptions& options) {
  model.validate(schedule);
  if (static_cast<std::size_t>(phi0.size()) != model.dim()) {
    throw DimensionError("initial state dimension does not match the model");
  }
  if (phi0.norm() == 0.0 || !phi0.allFinite()) {
    throw DomainError("initial state must be finite and nonzero");
  }

  const USeries series = propagate_u(
      schedule, [&model](double t) { return generator_at(t, model).h; }, options.propagation);

  std::vector<MetricSnapshot> snapshots;
  std::vector<Matrix> omegas;
  std::vector<Matrix> omega_invs;
  snapshots.reserve(series.times.size());
  for (const double t : series.times) {
    snapshots.push_back(model.at(t));
    omegas.push_back(snapshots.back().omega);
    omega_invs.push_back(snapshots.back().omega_inv);
  }
  const Propagators props = build_propagators(series.u, omegas, omega_invs);

  std::optional<NaiveSeries> naive;
  if (options.with_naive) {
    naive = naive_propagate(phi0, schedule, model, options.propagation.sample_stride,
                            options.divergence_cap);
  }

  const Vector left0 = snapshots.front().theta * phi0;
  EvolutionRecord record;
  record.method = options.propagation.method;
  record.samples.reserve(series.times.size());
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const MetricSnapshot& snap = snapshots[k];
    EvolutionSample s{series.times[k],
                      series.u[k],
                      props.right[k],
                      props.left[k],
                      props.right[k] * phi0,
                      adjoint(props.left[k]) * left0,
                      {},
                      0.0,
                      0.0,
                      series.unitarity_defect[k],
                      identity_defect(props.left[k] * props.right[k]),
                      0.0,
                      qh_residual(snap.hamiltonian, snap.theta),
                      std::numeric_limits<double>::quiet_NaN(),
                      {}};
    s.aux = snap.omega * s.right;
    s.physical_norm = s.right.dot(snap.theta.data() * s.right).real();
    s.biorthogonal_norm = s.left.dot(s.right).real();
    s.left_defect = (s.left - snap.theta.data() * s.right).norm() / s.left.norm();
    if (naive) {
      s.naive_norm = naive->theta_norms[k];
      s.naive_state = naive->states[k];
    }
    record.samples.push_back(std::move(s));
  }
  return record;
}

DriftSummary drift_report(const EvolutionRecord& record) {
  if (record.samples.empty()) throw DomainError("drift_report: empty record");
  DriftSummary out;
  const double n0 = record.samples.front().physical_norm;
  const double naive0 = record.samples.front().naive_norm;
  double sum_phys = 0.0;
  double sum_naive = 0.0;
  for (const auto& s : record.samples) {
    const double phys = relative_drift(s.physical_norm, n0);
    const double naive = relative_drift(s.naive_norm, naive0);
    out.max_physical_drift = std::max(out.max_physical_drift, phys);
    out.max_naive_drift = std::max(out.max_naive_drift, naive);
    sum_phys += phys;
    sum_naive += naive;
    out.max_unitarity_defect = std::max(out.max_unitarity_defect, s.unitarity_defect);
    out.max_ansatz_defect = std::max(out.max_ansatz_defect, s.ansatz_defect);
    out.max_left_defect = std::max(out.max_left_defect, s.left_defect);
    out.max_qh_residual = std::max(out.max_qh_residual, s.qh_residual);
  }
  const auto count = static_cast<double>(record.samples.size());
  out.mean_physical_drift = sum_phys / count;
  out.mean_naive_drift = sum_naive / count;
  if (std::isnan(naive0)) {
    out.max_naive_drift = std::numeric_limits<double>::quiet_NaN();
    out.mean_naive_drift = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace qhsim
