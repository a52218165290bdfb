#include "qhsim/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "qhsim/errors.hpp"

namespace qhsim {

namespace {

constexpr double kFeasibleObjective = 1e-16;

Matrix::Storage projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace

MetricWeights::MetricWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw WeightError("metric weights must not be empty");
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i])) {
      throw WeightError(fmt::format("metric weight w_{} = {} must be positive and finite", i, w_[i]));
    }
  }
}

MetricWeights MetricWeights::uniform(std::size_t n) { return MetricWeights(std::vector<double>(n, 1.0)); }

SquareRoot sqrt_metric(const Matrix& theta) {
  const HermEig eig = herm_eig(theta);
  const double floor = 1e-12 * frob_norm(theta);
  if (!(eig.eigenvalues.front() > floor)) {
    throw PositivityError(fmt::format(
        "metric is not positive definite: smallest eigenvalue {:.6e} (floor {:.3e})",
        eig.eigenvalues.front(), floor));
  }
  const auto n = static_cast<Eigen::Index>(theta.dim());
  Eigen::VectorXd root(n);
  for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(eig.eigenvalues[static_cast<std::size_t>(i)]);

  const auto& v = eig.eigenvectors.data();
  Matrix::Storage omega = v * root.cast<Complex>().asDiagonal() * v.adjoint();
  Matrix::Storage omega_inv = v * root.cwiseInverse().cast<Complex>().asDiagonal() * v.adjoint();
  omega = 0.5 * (omega + omega.adjoint()).eval();
  omega_inv = 0.5 * (omega_inv + omega_inv.adjoint()).eval();
  return SquareRoot{Matrix(std::move(omega)), Matrix(std::move(omega_inv))};
}

MetricOperator metric_from_theta(const Matrix& theta) {
  SquareRoot root = sqrt_metric(theta);
  return MetricOperator{theta, std::move(root.omega), std::move(root.omega_inv), {}};
}

MetricOperator metric_from_system(const BiorthogonalSystem& s, const MetricWeights& w) {
  if (w.size() != s.dim()) {
    throw DimensionError(fmt::format("metric_from_system: {} weights for a {}-dimensional system",
                                     w.size(), s.dim()));
  }
  for (std::size_t n = 0; n < s.dim(); ++n) {
    const Complex e = s.eigenvalues[n];
    if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e))) {
      throw SpectrumRealityError(fmt::format(
          "eigenvalue E_{} = ({}, {}) is not real; no positive-definite metric exists", n, e.real(),
          e.imag()));
    }
  }
  const auto dim = static_cast<Eigen::Index>(s.dim());
  Matrix::Storage theta = Matrix::Storage::Zero(dim, dim);
  for (std::size_t n = 0; n < s.dim(); ++n) theta += w[n] * projector(s.left.column(n));
  theta = 0.5 * (theta + theta.adjoint()).eval();

  Matrix theta_m(std::move(theta));
  SquareRoot root = sqrt_metric(theta_m);
  const auto wv = w.values();
  return MetricOperator{std::move(theta_m), std::move(root.omega), std::move(root.omega_inv),
                        std::vector<double>(wv.begin(), wv.end())};
}

double qh_residual(const Matrix& h, const Matrix& theta) {
  if (h.dim() != theta.dim()) throw DimensionError("qh_residual: dimension mismatch");
  const double raw = (h.data().adjoint() * theta.data() - theta.data() * h.data()).norm();
  const double scale = frob_norm(h) * frob_norm(theta);
  return scale > 0.0 ? raw / scale : raw;
}

Matrix hermitize(const Matrix& h, const MetricOperator& m) {
  const double qh = qh_residual(h, m.theta);
  if (qh > 1e-8) {
    throw IncompatibilityError(
        fmt::format("hermitize: H is not quasi-Hermitian for this metric (residual {:.3e})", qh));
  }
  Matrix out = m.omega * h * m.omega_inv;
  const double defect = hermiticity_defect(out);
  if (defect > 1e-8 * frob_norm(out)) {
    throw IncompatibilityError(
        fmt::format("hermitize: similarity transform is not Hermitian (defect {:.3e})", defect));
  }
  return out;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.norm() *
                     static_cast<double>(std::max(a.rows(), n));

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zs(static_cast<Eigen::Index>(k));
    return z;
  };

  for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
    const Eigen::VectorXd grad = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * static_cast<int>(n) + 10; ++inner) {
      const Eigen::VectorXd z = solve_passive();
      double step = 1.0;
      bool clipped = false;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double denom = x(j) - z(j);
          const double t = denom > 0.0 ? x(j) / denom : 0.0;
          if (t < step) step = t;
          clipped = true;
        }
      }
      if (!clipped) {
        x = z;
        break;
      }
      x += step * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x.cwiseMax(0.0);
}

WeightSolution find_weights(const BiorthogonalSystem& s, std::span<const Matrix> observables) {
  const std::size_t n = s.dim();
  const auto cols = static_cast<Eigen::Index>(n);

  std::vector<Matrix::Storage> projectors;
  double column_scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    projectors.push_back(projector(s.left.column(k)));
    column_scale = std::max(column_scale, projectors.back().norm());
  }

  std::vector<Matrix::Storage> normalized;
  for (const Matrix& o : observables) {
    if (o.dim() != n) throw DimensionError("solve_weights: observable dimension mismatch");
    const double norm = frob_norm(o);
    if (norm > 0.0) normalized.emplace_back(o.data() / norm);
  }

  WeightSolution out;
  if (normalized.empty()) {
    out.weights.assign(n, 1.0);
    out.feasible = true;
    return out;
  }

  // Each condition O^dag Theta(w) - Theta(w) O = 0 is linear in w; stack the
  // real and imaginary parts of every entry as rows.
  const auto block = static_cast<Eigen::Index>(2 * n * n);
  Eigen::MatrixXd a(block * static_cast<Eigen::Index>(normalized.size()), cols);
  for (std::size_t k = 0; k < normalized.size(); ++k) {
    const auto& o = normalized[k];
    for (std::size_t m = 0; m < n; ++m) {
      const Matrix::Storage c = o.adjoint() * projectors[m] - projectors[m] * o;
      Eigen::Index row = block * static_cast<Eigen::Index>(k);
      for (Eigen::Index i = 0; i < cols; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
          a(row++, static_cast<Eigen::Index>(m)) = c(i, j).real();
          a(row++, static_cast<Eigen::Index>(m)) = c(i, j).imag();
        }
      }
    }
  }

  const double threshold = kFeasibleObjective * static_cast<double>(normalized.size());
  const auto objective = [&](const Eigen::VectorXd& w) { return (a * w).squaredNorm(); };
  const auto normalize = [&](Eigen::VectorXd w) {
    const double sum = w.sum();
    if (sum > 0.0) w *= static_cast<double>(n) / sum;
    return w;
  };

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double null_tol = 1e-8 * column_scale;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (i >= sigma.size() || sigma(i) <= null_tol) null_cols.push_back(i);
  }

  Eigen::VectorXd w;
  bool positive = false;
  if (!null_cols.empty()) {
    // Point of the null space closest to the uniform weights.
    Eigen::MatrixXd basis(cols, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t k = 0; k < null_cols.size(); ++k) {
      basis.col(static_cast<Eigen::Index>(k)) = svd.matrixV().col(null_cols[k]);
    }
    w = basis * (basis.transpose() * Eigen::VectorXd::Ones(cols));
    positive = w.maxCoeff() > 0.0 && w.minCoeff() > 1e-12 * w.cwiseAbs().maxCoeff();
  }

  if (!positive) {
    Eigen::MatrixXd aug(a.rows() + 1, cols);
    aug << a, Eigen::RowVectorXd::Constant(cols, column_scale);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows() + 1);
    rhs(a.rows()) = column_scale * static_cast<double>(n);
    w = nnls(aug, rhs);
  }

  w = normalize(std::move(w));
  out.weights.assign(w.data(), w.data() + w.size());
  out.objective = objective(w);
  out.feasible = out.objective <= threshold && w.minCoeff() > 0.0;
  return out;
}

MetricWeights solve_weights(const BiorthogonalSystem& s, std::span<const Matrix> observables) {
  if (observables.empty()) throw WeightError("solve_weights: at least one observable is required");
  WeightSolution sol = find_weights(s, observables);
  if (!sol.feasible) {
    throw NoCompatibleMetricError(
        fmt::format("no positive metric in this family is compatible with the observables "
                    "(objective {:.3e})",
                    sol.objective),
        std::sqrt(sol.objective), std::move(sol.weights));
  }
  return MetricWeights(std::move(sol.weights));
}

}  // namespace qhsim
