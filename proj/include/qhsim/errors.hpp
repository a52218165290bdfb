#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qhsim {

/// Base of every error raised by the library. `kind()` names the error class
/// so front ends can report it without RTTI games.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define QHSIM_DECLARE_ERROR(Name)                                    \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

QHSIM_DECLARE_ERROR(DimensionError);
QHSIM_DECLARE_ERROR(NonFiniteError);
QHSIM_DECLARE_ERROR(SingularMatrixError);
QHSIM_DECLARE_ERROR(NonHermitianError);
QHSIM_DECLARE_ERROR(DegeneracyError);
QHSIM_DECLARE_ERROR(PairingError);
QHSIM_DECLARE_ERROR(SpectrumRealityError);
QHSIM_DECLARE_ERROR(PositivityError);
QHSIM_DECLARE_ERROR(WeightError);
QHSIM_DECLARE_ERROR(IncompatibilityError);
QHSIM_DECLARE_ERROR(NoCompatibleGammaError);
QHSIM_DECLARE_ERROR(DomainError);
QHSIM_DECLARE_ERROR(ScheduleError);
QHSIM_DECLARE_ERROR(IntegrationError);
QHSIM_DECLARE_ERROR(DivergenceError);
QHSIM_DECLARE_ERROR(GridMismatchError);
QHSIM_DECLARE_ERROR(ConfigError);
QHSIM_DECLARE_ERROR(IoError);

#undef QHSIM_DECLARE_ERROR

/// Raised when no positive metric weights make every observable
/// quasi-Hermitian. Carries the least-squares compromise so callers can
/// inspect it, but it is never returned as a valid metric.
class NoCompatibleMetricError : public Error {
 public:
  NoCompatibleMetricError(const std::string& what, double residual,
                          std::vector<double> fallback_weights)
      : Error(what), residual_(residual), fallback_(std::move(fallback_weights)) {}
  const char* kind() const noexcept override { return "NoCompatibleMetricError"; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& fallback_weights() const noexcept { return fallback_; }

 private:
  double residual_;
  std::vector<double> fallback_;
};

}  // namespace qhsim
