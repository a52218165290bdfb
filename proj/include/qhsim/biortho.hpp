#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qhsim/cmatrix.hpp"

namespace qhsim {

/// Paired right eigenvectors |E_n> of H (columns of `right`) and left
/// eigenvectors |E_n>> of H^dag (columns of `left`) normalized so that
/// left^dag right = I. `kappas` tracks the accumulated per-column rescaling.
struct BiorthogonalSystem {
  std::vector<Complex> eigenvalues;
  Matrix right;
  Matrix left;
  std::vector<Complex> kappas;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
};

struct DiagnosticsReport {
  double biorthonormality = 0.0;  // ||left^dag right - I||_F
  double completeness = 0.0;      // ||right left^dag - I||_F
  double right_residual = 0.0;    // ||H right - right diag(E)||_F
  double left_residual = 0.0;     // ||H^dag left - left diag(E*)||_F

  double max() const noexcept;
};

/// Biorthogonal eigensystem of a diagonalizable matrix. Eigenvalues are
/// ordered real-part-major, right columns have unit Euclidean norm and all
/// kappas start at 1.
///
/// Left vectors come from a separate eigendecomposition of H^dag, paired to
/// the right ones by nearest conjugate eigenvalue and rescaled column by
/// column to <<E_n|E_n> = 1. Throws DegeneracyError (from gen_eig) or
/// PairingError when the two spectra disagree beyond 1e-8 ||H||_F.
BiorthogonalSystem decompose(const Matrix& h);

/// Multiplies right column n by kappa_n and left column n by 1/conj(kappa_n).
BiorthogonalSystem rescale(const BiorthogonalSystem& s, std::span<const Complex> kappas);

DiagnosticsReport verify(const BiorthogonalSystem& s, const Matrix& h);

}  // namespace qhsim
