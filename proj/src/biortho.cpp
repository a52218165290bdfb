#include "qhsim/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qhsim/errors.hpp"

namespace qhsim {

double DiagnosticsReport::max() const noexcept {
  return std::max({biorthonormality, completeness, right_residual, left_residual});
}

BiorthogonalSystem decompose(const Matrix& h) {
  const std::size_t n = h.dim();
  const GenEig right = gen_eig(h);
  const GenEig left = gen_eig(adjoint(h));
  const double tol = kDegeneracyThreshold * frob_norm(h);

  Matrix left_vectors(n);
  std::vector<bool> used(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex target = std::conj(right.eigenvalues[k]);
    std::size_t best = n;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < n; ++m) {
      if (used[m]) continue;
      const double gap = std::abs(left.eigenvalues[m] - target);
      if (gap < best_gap) {
        best_gap = gap;
        best = m;
      }
    }
    if (best == n || best_gap > tol) {
      throw PairingError(fmt::format(
          "decompose: no left eigenvalue within {:.3e} of conj(E_{}) (closest gap {:.3e})", tol, k,
          best_gap));
    }
    used[best] = true;

    Vector l = left.vectors.column(best);
    const Complex overlap = l.dot(right.vectors.column(k));  // l^dag r
    if (std::abs(overlap) == 0.0) {
      throw PairingError(fmt::format("decompose: left/right pair {} is orthogonal", k));
    }
    l /= std::conj(overlap);
    left_vectors.set_column(k, l);
  }

  return BiorthogonalSystem{right.eigenvalues, right.vectors, std::move(left_vectors),
                            std::vector<Complex>(n, Complex(1.0, 0.0))};
}

BiorthogonalSystem rescale(const BiorthogonalSystem& s, std::span<const Complex> kappas) {
  if (kappas.size() != s.dim()) {
    throw DimensionError(fmt::format("rescale: expected {} kappas, got {}", s.dim(), kappas.size()));
  }
  BiorthogonalSystem out = s;
  for (std::size_t n = 0; n < kappas.size(); ++n) {
    const Complex k = kappas[n];
    if (k == Complex(0.0, 0.0) || !std::isfinite(std::abs(k))) {
      throw WeightError(fmt::format("rescale: kappa_{} must be finite and nonzero", n));
    }
    out.right.set_column(n, s.right.column(n) * k);
    out.left.set_column(n, s.left.column(n) / std::conj(k));
    out.kappas[n] = s.kappas[n] * k;
  }
  return out;
}

DiagnosticsReport verify(const BiorthogonalSystem& s, const Matrix& h) {
  if (h.dim() != s.dim()) throw DimensionError("verify: system and matrix dimensions differ");
  const auto& r = s.right.data();
  const auto& l = s.left.data();
  const auto n = static_cast<Eigen::Index>(s.dim());
  const Matrix::Storage id = Matrix::Storage::Identity(n, n);

  Eigen::VectorXcd e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = s.eigenvalues[static_cast<std::size_t>(i)];

  DiagnosticsReport report;
  report.biorthonormality = (l.adjoint() * r - id).norm();
  report.completeness = (r * l.adjoint() - id).norm();
  report.right_residual = (h.data() * r - r * e.asDiagonal()).norm();
  report.left_residual = (h.data().adjoint() * l - l * e.conjugate().asDiagonal()).norm();
  return report;
}

}  // namespace qhsim
