#pragma once

// Closed-form two-level model: the general non-Hermitian 2x2 family, its
// one-parameter real reduction H(alpha), the two-parameter metric family
// Theta(alpha, gamma, Z), the auxiliary observable O(rho) and the closed-form
// square root of the metric.
//
// Conventions: quasi-Hermiticity is H^dag = Theta H Theta^-1, and
//   H(alpha)          = [[1, -cos a], [cos a, -1]]
//   Theta(a, g, Z)    = Z [[1 + T, -C], [-C, 1 - T]],  T = sin a sin g, C = cos a
//   O(rho)            = [[0, e^-rho / 2], [e^rho / 2, 0]]
// With these signs H(alpha) and O(rho) are both quasi-Hermitian with respect
// to Theta exactly when tanh rho = sin a sin g.

#include <optional>

#include "qhsim/cmatrix.hpp"

namespace qhsim::twolevel {

/// Margin keeping angles off the ends of their open domains.
inline constexpr double kDomainMargin = 1e-9;

struct GeneralParams {
  double E = 0.0;
  Complex theta{0.0, 0.0};
  Complex phi{0.0, 0.0};
  double q = 0.0;

  void validate() const;

  Complex a() const;  // E cos(theta)
  Complex b() const;  // E e^{-i phi} sin(theta)
  Complex c() const;  // E e^{i phi} sin(theta)

  /// Recovers (E, theta, phi) from q I + [[a, b], [c, -a]]. Requires
  /// a^2 + bc real and nonnegative (SpectrumRealityError otherwise) and
  /// rejects the nonzero nilpotent case a^2 + bc = 0 (DegeneracyError).
  static GeneralParams from_entries(Complex a, Complex b, Complex c, double q = 0.0);
};

struct ReducedParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double Z = 1.0;
  std::optional<double> rho;

  /// Domain checks; when rho is attached also tanh(rho) = sin a sin g.
  void validate() const;

  /// gamma fixed by the observable O(rho).
  static ReducedParams from_observable(double alpha, double rho, double Z = 1.0);
};

/// Real 2x2 observable [[a, b], [c, d]].
struct ObservableParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  Matrix matrix() const;
  /// Rejects matrices with non-real entries.
  static ObservableParams from_matrix(const Matrix& m);
};

Matrix h_general(const GeneralParams& p);

/// Throws DomainError unless alpha is inside (0, pi/2).
Matrix h_reduced(double alpha);

Matrix theta_reduced(double alpha, double gamma, double Z = 1.0);

/// Throws DomainError for rho <= 0.
Matrix o_reduced(double rho);

/// Solves (d - a) cos(alpha) = (b - c) + (b + c) sin(alpha) sin(gamma) for gamma.
/// Throws DomainError when b = -c and NoCompatibleGammaError when sin(gamma)
/// falls outside [0, 1).
double gamma_from_constraint(const ObservableParams& o, double alpha);

/// gamma_from_constraint specialised to O(rho): sin(gamma) = tanh(rho) / sin(alpha).
double gamma_from_rho(double alpha, double rho);

/// R = sqrt(T^2 + C^2); the metric eigenvalues are Z (1 +- R).
double metric_radius(double alpha, double gamma);

/// Closed-form principal square root of theta_reduced(alpha, gamma, 1).
/// Throws PositivityError when R >= 1 - 1e-9.
Matrix omega_closed(double alpha, double gamma);

/// Unnormalized eigenvectors of theta_reduced(alpha, gamma, Z):
/// column 0 has eigenvalue Z(1 + R), column 1 has Z(1 - R).
Matrix eigvec_matrix_U(double alpha, double gamma);

}  // namespace qhsim::twolevel
