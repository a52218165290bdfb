#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhsim/cmatrix.hpp"
#include "qhsim/metric.hpp"

namespace qhsim {

/// Scalar time dependence of a model parameter.
///   constant: base
///   linear:   base + slope t
///   sinusoid: base + amplitude sin(angular_frequency t + phase)
struct TimeProfile {
  enum class Kind { constant, linear, sinusoid };

  Kind kind = Kind::constant;
  double base = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  double angular_frequency = 0.0;
  double phase = 0.0;

  static TimeProfile constant(double value);
  static TimeProfile linear(double base, double slope);
  static TimeProfile sinusoid(double base, double amplitude, double angular_frequency,
                              double phase);

  double operator()(double t) const;
  bool is_constant() const noexcept;
};

/// Uniform grid t_k = t0 + k dt, k = 0..steps(). dt must divide t1 - t0.
struct Schedule {
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-3;

  void validate() const;
  std::size_t steps() const;
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
};

inline constexpr double kMaxScheduleSteps = 1e7;

/// H(t), Theta(t) and the Dyson map at one instant.
struct MetricSnapshot {
  Matrix hamiltonian;
  Matrix theta;
  Matrix omega;
  Matrix omega_inv;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual std::size_t dim() const = 0;
  virtual Matrix hamiltonian(double t) const = 0;
  virtual MetricSnapshot at(double t) const = 0;
  /// Throws DomainError if any parameter leaves its domain on the schedule
  /// (sampled every dt/10).
  virtual void validate(const Schedule& schedule) const = 0;
  /// True when H and Theta do not depend on time.
  virtual bool is_stationary() const = 0;
};

/// Two-level model H(alpha(t)) with metric Theta(alpha(t), gamma(t), Z(t)).
/// gamma is either fixed or tied to the observable O(rho(t)) through
/// tanh(rho) = sin(alpha) sin(gamma). The Dyson map comes from the closed form.
class ReducedModel final : public Model {
 public:
  static ReducedModel with_rho(TimeProfile alpha, TimeProfile rho,
                               TimeProfile Z = TimeProfile::constant(1.0));
  static ReducedModel with_gamma(TimeProfile alpha, double gamma,
                                 TimeProfile Z = TimeProfile::constant(1.0));

  std::size_t dim() const override { return 2; }
  Matrix hamiltonian(double t) const override;
  MetricSnapshot at(double t) const override;
  void validate(const Schedule& schedule) const override;
  bool is_stationary() const override;

  double alpha(double t) const { return alpha_(t); }
  double gamma(double t) const;
  double Z(double t) const { return Z_(t); }

  const TimeProfile& alpha_profile() const noexcept { return alpha_; }
  const std::optional<TimeProfile>& rho_profile() const noexcept { return rho_; }
  const std::optional<double>& fixed_gamma() const noexcept { return gamma_; }
  const TimeProfile& Z_profile() const noexcept { return Z_; }

 private:
  ReducedModel(TimeProfile alpha, std::optional<TimeProfile> rho, std::optional<double> gamma,
               TimeProfile Z);

  TimeProfile alpha_;
  std::optional<TimeProfile> rho_;
  std::optional<double> gamma_;
  TimeProfile Z_;
};

/// Time-independent H with a fixed metric.
class StaticModel final : public Model {
 public:
  StaticModel(Matrix hamiltonian, MetricOperator metric);

  std::size_t dim() const override { return h_.dim(); }
  Matrix hamiltonian(double) const override { return h_; }
  MetricSnapshot at(double t) const override;
  void validate(const Schedule& schedule) const override;
  bool is_stationary() const override { return true; }

  const MetricOperator& metric() const noexcept { return metric_; }

 private:
  Matrix h_;
  MetricOperator metric_;
};

/// Everything the corrected scheme needs at time t.
struct Generator {
  Matrix hamiltonian;
  Matrix theta;
  Matrix omega;
  Matrix omega_inv;
  Matrix h;  // omega H omega^-1, Hermitian
};

Generator generator_at(double t, const Model& model);

enum class Integrator { rk4, magnus2 };

Integrator parse_integrator(const std::string& name);
const char* integrator_name(Integrator method);

struct PropagationOptions {
  Integrator method = Integrator::rk4;
  std::size_t sample_stride = 1;  // also samples the final step
  double abort_defect = 1e-3;     // ||u^dag u - I||_F guard
};

/// Sample indices of a schedule: 0, stride, 2 stride, ..., and the last step.
std::vector<std::size_t> sample_indices(const Schedule& schedule, std::size_t stride);

struct USeries {
  std::vector<double> times;
  std::vector<Matrix> u;
  std::vector<double> unitarity_defect;  // ||u^dag u - I||_F per sample
};

using HermitianGenerator = std::function<Matrix(double)>;

/// Integrates i du/dt = h(t) u, u(t0) = I, on the schedule with fixed steps.
/// Throws IntegrationError once the unitarity defect exceeds
/// options.abort_defect.
USeries propagate_u(const Schedule& schedule, const HermitianGenerator& h,
                    const PropagationOptions& options = {});

struct Propagators {
  std::vector<Matrix> right;  // U_R(t) = omega^-1(t) u(t) omega(0)
  std::vector<Matrix> left;   // U_L(t), with U_L^dag(t) = omega^dag(t) u(t) [omega^-1(0)]^dag
};

/// Throws GridMismatchError unless the three series have equal length.
Propagators build_propagators(std::span<const Matrix> u, std::span<const Matrix> omega,
                              std::span<const Matrix> omega_inv);

struct EvolutionSample {
  double t = 0.0;
  Matrix u;
  Matrix U_R;
  Matrix U_L;
  Vector right;        // |Phi(t)>
  Vector left;         // |Phi(t)>>
  Vector aux;          // omega(t) |Phi(t)>, the auxiliary-space state
  double physical_norm = 0.0;      // <Phi(t)| Theta(t) |Phi(t)>
  double biorthogonal_norm = 0.0;  // Re <<Phi(t)|Phi(t)>
  double unitarity_defect = 0.0;   // ||u^dag u - I||_F
  double ansatz_defect = 0.0;      // ||U_L U_R - I||_F
  double left_defect = 0.0;        // ||left - Theta(t) right|| / ||left||
  double qh_residual = 0.0;        // qh_residual(H(t), Theta(t))
  double naive_norm = 0.0;         // Theta(t)-norm of the naive state (NaN when not run)
  Vector naive_state;
};

struct EvolutionRecord {
  Integrator method = Integrator::rk4;
  std::vector<EvolutionSample> samples;
};

struct EvolveOptions {
  PropagationOptions propagation;
  bool with_naive = true;
  double divergence_cap = 1e6;
};

/// Propagates |Phi(0)> = phi0 in the auxiliary Hermitian picture and pulls
/// the result back with U_R / U_L.
EvolutionRecord evolve_state(const Vector& phi0, const Schedule& schedule, const Model& model,
                             const EvolveOptions& options = {});

struct NaiveSeries {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> theta_norms;
};

/// Integrates i d psi/dt = H(t) psi directly with classical RK4. Throws
/// DivergenceError once the Theta(t)-norm exceeds `divergence_cap`.
NaiveSeries naive_propagate(const Vector& phi0, const Schedule& schedule, const Model& model,
                            std::size_t sample_stride = 1, double divergence_cap = 1e6);

struct DriftSummary {
  double max_physical_drift = 0.0;  // max |N(t)/N(0) - 1|
  double mean_physical_drift = 0.0;
  double max_naive_drift = 0.0;
  double mean_naive_drift = 0.0;
  double max_unitarity_defect = 0.0;
  double max_ansatz_defect = 0.0;
  double max_left_defect = 0.0;
  double max_qh_residual = 0.0;
};

DriftSummary drift_report(const EvolutionRecord& record);

}  // namespace qhsim
