#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qhsim/biortho.hpp"
#include "qhsim/cmatrix.hpp"

namespace qhsim {

/// Strictly positive weights w_n = 1 / |kappa_n|^2 selecting one metric out
/// of the family Theta = sum_n |E_n>> w_n <<E_n|.
class MetricWeights {
 public:
  explicit MetricWeights(std::vector<double> w);
  static MetricWeights uniform(std::size_t n);

  std::span<const double> values() const noexcept { return w_; }
  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

/// Positive-definite metric Theta with its principal square root.
/// `weights` is empty when Theta was not assembled from a biorthogonal system.
struct MetricOperator {
  Matrix theta;
  Matrix omega;
  Matrix omega_inv;
  std::vector<double> weights;
};

struct SquareRoot {
  Matrix omega;
  Matrix omega_inv;
};

/// Principal square root of a Hermitian positive-definite matrix,
/// omega = V diag(sqrt(lambda)) V^dag. Throws NonHermitianError or
/// PositivityError (some eigenvalue <= 1e-12 ||Theta||_F).
SquareRoot sqrt_metric(const Matrix& theta);

/// Wraps an externally built metric; validates it through sqrt_metric.
MetricOperator metric_from_theta(const Matrix& theta);

/// Theta = sum_n left_n w_n left_n^dag. Requires a real spectrum
/// (|Im E_n| <= 1e-10 max(1, |E_n|)), otherwise SpectrumRealityError.
MetricOperator metric_from_system(const BiorthogonalSystem& s, const MetricWeights& w);

/// ||H^dag Theta - Theta H||_F / (||H||_F ||Theta||_F); zero iff H is
/// quasi-Hermitian with respect to Theta.
double qh_residual(const Matrix& h, const Matrix& theta);

/// Isospectral Hermitian partner omega H omega^-1. Throws
/// IncompatibilityError when qh_residual(h, theta) > 1e-8.
Matrix hermitize(const Matrix& h, const MetricOperator& m);

struct WeightSolution {
  std::vector<double> weights;  // normalized to sum N
  double objective = 0.0;       // sum_k ||O_k^dag Theta - Theta O_k||_F^2, O_k scaled to unit norm
  bool feasible = false;
};

/// Searches the metric family of `s` for weights making every observable
/// quasi-Hermitian. Never throws on infeasibility; see solve_weights.
WeightSolution find_weights(const BiorthogonalSystem& s, std::span<const Matrix> observables);

/// As find_weights, but throws NoCompatibleMetricError (carrying the
/// achieved residual) unless the objective is at most 1e-16 per observable.
MetricWeights solve_weights(const BiorthogonalSystem& s, std::span<const Matrix> observables);

/// Nonnegative least squares min ||A x - b||_2 subject to x >= 0
/// (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace qhsim
