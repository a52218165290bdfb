#include "qhsim/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "qhsim/errors.hpp"

namespace qhsim {

namespace {

void require_finite(const Matrix::Storage& data) {
  if (!data.allFinite()) throw NonFiniteError("matrix entries must be finite");
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimensionError(fmt::format("{}: dimension mismatch ({} vs {})", op, a.dim(), b.dim()));
  }
}

bool eigen_less(const Complex& x, const Complex& y) {
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

}  // namespace

Matrix::Matrix(std::size_t dim) : data_(Storage::Zero(dim, dim)) {
  if (dim == 0) throw DimensionError("matrix dimension must be positive");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto n = rows.size();
  if (n == 0) throw DimensionError("matrix dimension must be positive");
  data_.resize(n, n);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != n) throw DimensionError("matrix must be square");
    std::size_t j = 0;
    for (const auto& v : row) data_(i, j++) = v;
    ++i;
  }
  require_finite(data_);
}

Matrix::Matrix(Storage data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.rows() != data_.cols()) {
    throw DimensionError("matrix must be square and nonempty");
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t dim) {
  if (dim == 0) throw DimensionError("matrix dimension must be positive");
  return Matrix(Storage::Identity(dim, dim));
}

Matrix Matrix::diagonal(std::span<const Complex> values) {
  Matrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.set(i, i, values[i]);
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.set(i, i, values[i]);
  return m;
}

void Matrix::set(std::size_t i, std::size_t j, Complex value) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw NonFiniteError("matrix entries must be finite");
  }
  data_(i, j) = value;
}

void Matrix::set_column(std::size_t j, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != dim()) throw DimensionError("column length mismatch");
  if (!v.allFinite()) throw NonFiniteError("matrix entries must be finite");
  data_.col(j) = v;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_dim(*this, other, "operator+");
  data_ += other.data_;
  require_finite(data_);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_dim(*this, other, "operator-");
  data_ -= other.data_;
  require_finite(data_);
  return *this;
}

Matrix& Matrix::operator*=(Complex s) {
  data_ *= s;
  require_finite(data_);
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }
Matrix operator*(Complex s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, Complex s) { return a *= s; }

Vector operator*(const Matrix& a, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != a.dim()) {
    throw DimensionError("matrix-vector dimension mismatch");
  }
  return a.data() * v;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "mat_mul");
  Matrix::Storage out = a.data() * b.data();
  return Matrix(std::move(out));
}

Matrix adjoint(const Matrix& a) { return Matrix(Matrix::Storage(a.data().adjoint())); }

Matrix inverse(const Matrix& a) {
  const Eigen::PartialPivLU<Matrix::Storage> lu(a.data());
  const double rcond = lu.rcond();
  if (!(rcond >= 1e-12)) {
    throw SingularMatrixError(
        fmt::format("matrix is numerically singular (reciprocal condition {:.3e})", rcond));
  }
  Matrix::Storage inv = lu.inverse();
  if (!inv.allFinite()) throw SingularMatrixError("matrix inverse is not finite");
  return Matrix(std::move(inv));
}

double frob_norm(const Matrix& a) { return a.data().norm(); }

double hermiticity_defect(const Matrix& a) {
  return (a.data() - a.data().adjoint()).norm();
}

double identity_defect(const Matrix& a) {
  return (a.data() - Matrix::Storage::Identity(a.dim(), a.dim())).norm();
}

HermEig herm_eig(const Matrix& a) {
  const double scale = frob_norm(a);
  const double defect = hermiticity_defect(a);
  if (defect > 1e-10 * scale) {
    throw NonHermitianError(
        fmt::format("herm_eig: ||A - A^dag||_F = {:.3e} exceeds 1e-10 ||A||_F", defect));
  }
  // Eigen reads only the lower triangle; average first so both halves count.
  const Matrix::Storage sym = 0.5 * (a.data() + a.data().adjoint());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) throw NonHermitianError("herm_eig did not converge");
  HermEig out{{}, Matrix(Matrix::Storage(solver.eigenvectors()))};
  const auto& values = solver.eigenvalues();
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  return out;
}

GenEig gen_eig(const Matrix& a) {
  const std::size_t n = a.dim();
  const double scale = frob_norm(a);
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a.data(), true);
  if (solver.info() != Eigen::Success) throw DegeneracyError("gen_eig did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return eigen_less(values(i), values(j));
  });

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(values(i) - values(j));
      if (!(gap > kDegeneracyThreshold * scale)) {
        throw DegeneracyError(fmt::format(
            "gen_eig: eigenvalues ({}, {}) and ({}, {}) are separated by {:.3e}, below 1e-8 ||A||_F",
            values(i).real(), values(i).imag(), values(j).real(), values(j).imag(), gap));
      }
    }
  }

  GenEig out{{}, Matrix(n)};
  out.eigenvalues.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues.push_back(values(src));
    Vector v = solver.eigenvectors().col(src);
    v /= v.norm();
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
    v(pivot) = Complex(v(pivot).real(), 0.0);
    out.vectors.set_column(k, v);

    const double residual = (a.data() * v - values(src) * v).norm();
    if (residual > 1e-10 * std::max(scale, 1e-300)) {
      throw DegeneracyError(fmt::format(
          "gen_eig: eigenvector residual {:.3e} exceeds 1e-10 ||A||_F (ill-conditioned input)",
          residual));
    }
  }
  return out;
}

}  // namespace qhsim
