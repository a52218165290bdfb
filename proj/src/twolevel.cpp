#include "qhsim/twolevel.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qhsim/errors.hpp"

namespace qhsim::twolevel {

namespace {

using std::numbers::pi;

void require_alpha(double alpha) {
  if (!(alpha > kDomainMargin && alpha < pi / 2 - kDomainMargin)) {
    throw DomainError(fmt::format("alpha = {} lies outside (0, pi/2)", alpha));
  }
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < pi / 2 - kDomainMargin)) {
    throw DomainError(fmt::format("gamma = {} lies outside [0, pi/2)", gamma));
  }
}

void require_scale(double Z) {
  if (!(Z > 0.0) || !std::isfinite(Z)) throw DomainError(fmt::format("Z = {} must be positive", Z));
}

void require_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw DomainError(fmt::format("rho = {} lies outside (0, inf)", rho));
  }
}

struct MetricShape {
  double T;
  double C;
  double R;
};

MetricShape metric_shape(double alpha, double gamma) {
  require_alpha(alpha);
  require_gamma(gamma);
  const double T = std::sin(alpha) * std::sin(gamma);
  const double C = std::cos(alpha);
  const double R = std::hypot(T, C);
  if (!(R < 1.0 - kDomainMargin)) {
    throw PositivityError(
        fmt::format("metric loses positivity at alpha = {}, gamma = {} (R = {})", alpha, gamma, R));
  }
  return {T, C, R};
}

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void GeneralParams::validate() const {
  if (!std::isfinite(E) || !std::isfinite(q) || !is_finite(theta) || !is_finite(phi)) {
    throw DomainError("general parameters must be finite");
  }
  if (E < 0.0) throw DomainError(fmt::format("E = {} must be nonnegative", E));
  if (theta.real() < 0.0 || theta.real() > pi) {
    throw DomainError(fmt::format("Re(theta) = {} lies outside [0, pi]", theta.real()));
  }
  if (phi.real() < 0.0 || phi.real() >= 2 * pi) {
    throw DomainError(fmt::format("Re(phi) = {} lies outside [0, 2 pi)", phi.real()));
  }
}

Complex GeneralParams::a() const { return E * std::cos(theta); }

Complex GeneralParams::b() const {
  return E * std::exp(Complex(0.0, -1.0) * phi) * std::sin(theta);
}

Complex GeneralParams::c() const {
  return E * std::exp(Complex(0.0, 1.0) * phi) * std::sin(theta);
}

GeneralParams GeneralParams::from_entries(Complex a, Complex b, Complex c, double q) {
  if (!is_finite(a) || !is_finite(b) || !is_finite(c) || !std::isfinite(q)) {
    throw DomainError("matrix entries must be finite");
  }
  const Complex e2 = a * a + b * c;
  const double tol = 1e-12 * std::max(1.0, std::norm(a) + std::abs(b) * std::abs(c));
  if (std::abs(e2.imag()) > tol || e2.real() < -tol) {
    throw SpectrumRealityError(fmt::format(
        "a^2 + bc = ({}, {}) is not a nonnegative real; spectrum is not real", e2.real(), e2.imag()));
  }
  GeneralParams p;
  p.q = q;
  p.E = std::sqrt(std::max(0.0, e2.real()));
  if (p.E <= std::sqrt(tol)) {
    if (a == Complex{} && b == Complex{} && c == Complex{}) return p;
    throw DegeneracyError("a^2 + bc = 0 with a nonzero matrix is an exceptional point");
  }
  p.theta = std::acos(a / p.E);
  const Complex sin_theta = std::sin(p.theta);
  if (std::abs(sin_theta) <= 1e-15) {
    if (std::abs(b) > tol || std::abs(c) > tol) {
      throw DomainError("triangular matrix is not representable in the (E, theta, phi) family");
    }
    return p;
  }
  const Complex ratio = c / (p.E * sin_theta);  // e^{i phi}
  double arg = std::arg(ratio);
  if (arg < 0.0) arg += 2 * pi;
  if (arg >= 2 * pi) arg -= 2 * pi;
  p.phi = Complex(arg, -std::log(std::abs(ratio)));
  return p;
}

void ReducedParams::validate() const {
  require_alpha(alpha);
  require_gamma(gamma);
  require_scale(Z);
  if (rho) {
    require_rho(*rho);
    const double mismatch = std::abs(std::tanh(*rho) - std::sin(alpha) * std::sin(gamma));
    if (mismatch > 1e-12) {
      throw DomainError(
          fmt::format("tanh(rho) != sin(alpha) sin(gamma) (mismatch {:.3e})", mismatch));
    }
  }
}

ReducedParams ReducedParams::from_observable(double alpha, double rho, double Z) {
  ReducedParams p{alpha, gamma_from_rho(alpha, rho), Z, rho};
  p.validate();
  return p;
}

Matrix ObservableParams::matrix() const { return Matrix{{a, b}, {c, d}}; }

ObservableParams ObservableParams::from_matrix(const Matrix& m) {
  if (m.dim() != 2) throw DimensionError("two-level observable must be 2x2");
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      if (m(i, j).imag() != 0.0) throw DomainError("two-level observable must be real");
    }
  }
  return {m(0, 0).real(), m(0, 1).real(), m(1, 0).real(), m(1, 1).real()};
}

Matrix h_general(const GeneralParams& p) {
  p.validate();
  const Complex a = p.a();
  return Matrix{{p.q + a, p.b()}, {p.c(), p.q - a}};
}

Matrix h_reduced(double alpha) {
  require_alpha(alpha);
  const double C = std::cos(alpha);
  return Matrix{{1.0, -C}, {C, -1.0}};
}

Matrix theta_reduced(double alpha, double gamma, double Z) {
  require_alpha(alpha);
  require_gamma(gamma);
  require_scale(Z);
  const double T = std::sin(alpha) * std::sin(gamma);
  const double C = std::cos(alpha);
  return Matrix{{Z * (1.0 + T), -Z * C}, {-Z * C, Z * (1.0 - T)}};
}

Matrix o_reduced(double rho) {
  require_rho(rho);
  return Matrix{{0.0, 0.5 * std::exp(-rho)}, {0.5 * std::exp(rho), 0.0}};
}

double gamma_from_constraint(const ObservableParams& o, double alpha) {
  require_alpha(alpha);
  const double sum = o.b + o.c;
  if (std::abs(sum) <= 1e-14 * (std::abs(o.b) + std::abs(o.c)) || sum == 0.0) {
    throw DomainError("observable with b = -c does not fix gamma");
  }
  double sin_gamma = ((o.d - o.a) * std::cos(alpha) - (o.b - o.c)) / (sum * std::sin(alpha));
  if (std::abs(sin_gamma) <= 1e-15) sin_gamma = 0.0;
  if (!(sin_gamma >= 0.0 && sin_gamma < 1.0)) {
    throw NoCompatibleGammaError(fmt::format(
        "constraint requires sin(gamma) = {} outside [0, 1) at alpha = {}", sin_gamma, alpha));
  }
  const double gamma = std::asin(sin_gamma);
  if (!(gamma < pi / 2 - kDomainMargin)) {
    throw NoCompatibleGammaError(
        fmt::format("constraint drives gamma = {} onto the pi/2 boundary", gamma));
  }
  return gamma;
}

double gamma_from_rho(double alpha, double rho) {
  require_rho(rho);
  const double e = std::exp(rho);
  return gamma_from_constraint(ObservableParams{0.0, 0.5 / e, 0.5 * e, 0.0}, alpha);
}

double metric_radius(double alpha, double gamma) {
  require_alpha(alpha);
  require_gamma(gamma);
  return std::hypot(std::sin(alpha) * std::sin(gamma), std::cos(alpha));
}

Matrix omega_closed(double alpha, double gamma) {
  const auto [T, C, R] = metric_shape(alpha, gamma);
  const double lo = std::sqrt(1.0 - R);
  const double hi = std::sqrt(1.0 + R);
  const double TR = T + R;
  const double S = 2.0 * R / ((C * C + TR * TR) * (lo + hi));
  const double off = -S * C * TR;
  return Matrix{{lo + S * TR * TR, off}, {off, lo + S * C * C}};
}

Matrix eigvec_matrix_U(double alpha, double gamma) {
  const auto [T, C, R] = metric_shape(alpha, gamma);
  return Matrix{{T + R, C}, {-C, T + R}};
}

}  // namespace qhsim::twolevel
