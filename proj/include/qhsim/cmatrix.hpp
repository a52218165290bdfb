#pragma once

// Dense complex linear algebra for small square matrices (2 <= N <~ 64).
// Storage and the heavy kernels are Eigen's; this layer fixes the value
// type, the finiteness invariant and the error contract.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qhsim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;

class Matrix {
 public:
  using Storage = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Zero matrix of the given dimension.
  explicit Matrix(std::size_t dim);
  Matrix(std::initializer_list<std::initializer_list<Complex>> rows);
  /// Takes ownership of dense storage; rejects non-square or non-finite data.
  explicit Matrix(Storage data);

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const Complex> values);
  static Matrix diagonal(std::span<const double> values);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }

  Complex operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
  void set(std::size_t i, std::size_t j, Complex value);

  Vector column(std::size_t j) const { return data_.col(j); }
  void set_column(std::size_t j, const Vector& v);

  const Storage& data() const noexcept { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(Complex s);

  friend bool operator==(const Matrix& a, const Matrix& b) { return a.data_ == b.data_; }

 private:
  Storage data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Complex s, Matrix a);
Matrix operator*(Matrix a, Complex s);
Vector operator*(const Matrix& a, const Vector& v);

/// Matrix product; throws DimensionError on mismatched sizes.
Matrix mat_mul(const Matrix& a, const Matrix& b);

/// Conjugate transpose.
Matrix adjoint(const Matrix& a);

/// LU inverse with partial pivoting. Throws SingularMatrixError when the
/// reciprocal condition estimate drops below 1e-12.
Matrix inverse(const Matrix& a);

double frob_norm(const Matrix& a);

/// ||A - A^dag||_F
double hermiticity_defect(const Matrix& a);

/// ||A - I||_F
double identity_defect(const Matrix& a);

struct HermEig {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix. Rejects inputs with
/// ||A - A^dag||_F > 1e-10 ||A||_F.
HermEig herm_eig(const Matrix& a);

struct GenEig {
  std::vector<Complex> eigenvalues;  // sorted by real part, then imaginary part
  Matrix vectors;                    // unit-norm right eigenvectors as columns
};

/// Right eigenpairs of a general diagonalizable matrix.
///
/// Eigenvalues closer than 1e-8 ||A||_F to each other are treated as a
/// degeneracy (possibly a Jordan block) and rejected with DegeneracyError.
/// Each column is scaled to unit Euclidean norm with its largest component
/// made real and positive, so repeated calls are reproducible.
GenEig gen_eig(const Matrix& a);

/// Degeneracy threshold factor used by gen_eig.
inline constexpr double kDegeneracyThreshold = 1e-8;

}  // namespace qhsim
