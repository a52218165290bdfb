#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qhsim/biortho.hpp"
#include "qhsim/errors.hpp"
#include "qhsim/metric.hpp"
#include "test_support.hpp"

using namespace qhsim;
using qhsim::testing::max_abs_diff;

namespace {

Matrix h00(double alpha) {
  const double c = std::cos(alpha);
  return Matrix{{1.0, -c}, {c, -1.0}};
}

Matrix theta00(double alpha, double gamma, double z = 1.0) {
  const double t = std::sin(alpha) * std::sin(gamma);
  const double c = std::cos(alpha);
  return Matrix{{z * (1.0 + t), -z * c}, {-z * c, z * (1.0 - t)}};
}

Matrix o00(double rho) {
  return Matrix{{0.0, std::exp(-rho) / 2.0}, {std::exp(rho) / 2.0, 0.0}};
}

Matrix random_positive_definite(std::mt19937_64& rng, std::size_t n) {
  const Matrix a = qhsim::testing::random_matrix(rng, n);
  return Matrix(Matrix::Storage(a.data() * a.data().adjoint() +
                                Matrix::Storage::Identity(static_cast<Eigen::Index>(n),
                                                          static_cast<Eigen::Index>(n))));
}

std::vector<double> sorted_real(const std::vector<Complex>& v) {
  std::vector<double> out;
  for (const Complex z : v) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("MetricWeights") {
  CHECK(MetricWeights::uniform(3).size() == 3);
  CHECK(MetricWeights::uniform(3)[1] == 1.0);
  CHECK_THROWS_AS(MetricWeights({1.0, 0.0}), WeightError);
  CHECK_THROWS_AS(MetricWeights({1.0, -2.0}), WeightError);
  CHECK_THROWS_AS(MetricWeights({1.0, std::nan("")}), WeightError);
}

TEST_CASE("sqrt_metric") {
  SUBCASE("identity") {
    const SquareRoot r = sqrt_metric(Matrix::identity(3));
    CHECK(max_abs_diff(r.omega, Matrix::identity(3)) < 1e-15);
    CHECK(max_abs_diff(r.omega_inv, Matrix::identity(3)) < 1e-15);
  }
  SUBCASE("diag(4, 9)") {
    const std::vector<double> d{4.0, 9.0};
    const SquareRoot r = sqrt_metric(Matrix::diagonal(std::span<const double>(d)));
    const std::vector<double> e{2.0, 3.0};
    CHECK(max_abs_diff(r.omega, Matrix::diagonal(std::span<const double>(e))) < 1e-15);
  }
  SUBCASE("[[1, -1/2], [-1/2, 1]]") {
    // Rotate to the eigenbasis (1, 1)/sqrt2, (1, -1)/sqrt2 with eigenvalues 1/2, 3/2.
    const double p = 0.5 * (std::sqrt(1.5) + std::sqrt(0.5));
    const double m = 0.5 * (std::sqrt(0.5) - std::sqrt(1.5));
    const SquareRoot r = sqrt_metric(Matrix{{1.0, -0.5}, {-0.5, 1.0}});
    CHECK(std::abs(r.omega(0, 0) - p) < 1e-15);
    CHECK(std::abs(r.omega(0, 1) - m) < 1e-15);
    CHECK(r.omega(0, 0).real() == doctest::Approx(0.96593).epsilon(1e-5));
    CHECK(r.omega(0, 1).real() == doctest::Approx(-0.25882).epsilon(1e-5));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sqrt_metric(Matrix{{1.0, 2.0}, {2.0, 1.0}}), PositivityError);
    CHECK_THROWS_AS(sqrt_metric(Matrix{{1.0, 1.0}, {0.0, 1.0}}), NonHermitianError);
    CHECK_THROWS_AS(sqrt_metric(Matrix{{1.0, 1.0}, {1.0, 1.0}}), PositivityError);
  }
}

TEST_CASE("sqrt_metric of omega^2 returns omega") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const Matrix theta = random_positive_definite(rng, n);
    const SquareRoot r = sqrt_metric(theta);
    CHECK(frob_norm(r.omega * r.omega - theta) <= 1e-10 * frob_norm(theta));
    CHECK(identity_defect(r.omega * r.omega_inv) <= 1e-10);
    CHECK(hermiticity_defect(r.omega) <= 1e-14 * frob_norm(r.omega));
    const SquareRoot again = sqrt_metric(r.omega * r.omega);
    CHECK(frob_norm(again.omega - r.omega) <= 1e-10 * frob_norm(r.omega));
  }
}

TEST_CASE("qh_residual") {
  std::mt19937_64 rng(43);
  const Matrix herm = qhsim::testing::random_hermitian(rng, 3);
  CHECK(qh_residual(herm, Matrix::identity(3)) < 1e-16);

  for (double alpha : {0.2, 0.7, 1.3}) {
    for (double gamma : {0.0, 0.6, 1.4}) {
      for (double z : {0.5, 1.0, 3.0}) {
        CHECK(qh_residual(h00(alpha), theta00(alpha, gamma, z)) <= 1e-14);
      }
    }
  }

  // ||H^dag - H||_F / ||H||_F = 2 sqrt2 C / sqrt(2 + 2 C^2).
  for (double alpha : {0.3, 0.9}) {
    const double c = std::cos(alpha);
    const double expected = 2.0 * std::sqrt(2.0) * c / (std::sqrt(2.0 + 2.0 * c * c) * std::sqrt(2.0));
    CHECK(qh_residual(h00(alpha), Matrix::identity(2)) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("metric_from_system") {
  SUBCASE("Hermitian source with unit weights gives the identity") {
    std::mt19937_64 rng(47);
    const Matrix h = qhsim::testing::random_hermitian(rng, 4);
    const MetricOperator m = metric_from_system(decompose(h), MetricWeights::uniform(4));
    CHECK(identity_defect(m.theta) <= 1e-12);
    CHECK(identity_defect(m.omega) <= 1e-12);
  }

  SUBCASE("linearity in the weights") {
    const BiorthogonalSystem s = decompose(h00(0.8));
    const MetricOperator a = metric_from_system(s, MetricWeights({1.0, 2.0}));
    const MetricOperator b = metric_from_system(s, MetricWeights({3.0, 6.0}));
    CHECK(max_abs_diff(b.theta, a.theta * Complex(3.0)) <= 1e-14);
    CHECK(frob_norm(b.omega - a.omega * Complex(std::sqrt(3.0))) <= 1e-12);
  }

  SUBCASE("matches the two-parameter family along the weight ray") {
    // Theta(alpha, gamma) has biorthogonal weights w_n = <E_n|Theta|E_n> for the
    // normalised right vectors; compare direction and absolute scale.
    for (double alpha : {0.4, 0.9, 1.3}) {
      for (double gamma : {0.0, 0.5, 1.1}) {
        const BiorthogonalSystem s = decompose(h00(alpha));
        const Matrix target = theta00(alpha, gamma);
        std::vector<double> w;
        for (std::size_t k = 0; k < 2; ++k) {
          const Vector r = s.right.column(k);
          w.push_back((r.adjoint() * target.data() * r)(0).real());
        }
        const MetricOperator m = metric_from_system(s, MetricWeights(w));
        CHECK(max_abs_diff(m.theta, target) <= 1e-12);
      }
    }
  }

  SUBCASE("errors") {
    const Matrix complex_spectrum{{0.0, 1.0}, {-1.0, 0.0}};
    CHECK_THROWS_AS(metric_from_system(decompose(complex_spectrum), MetricWeights::uniform(2)),
                    SpectrumRealityError);
    CHECK_THROWS_AS(metric_from_system(decompose(h00(0.5)), MetricWeights::uniform(3)),
                    DimensionError);
  }
}

TEST_CASE("metric_from_system quasi-Hermitizes for every positive weight") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Matrix h = qhsim::testing::random_real_spectrum(rng, n);
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    const MetricOperator m = metric_from_system(decompose(h), MetricWeights(w));
    CHECK(qh_residual(h, m.theta) <= 1e-12);
    CHECK(hermiticity_defect(m.theta) <= 1e-12 * frob_norm(m.theta));
    CHECK(herm_eig(m.theta).eigenvalues.front() > 0.0);
    CHECK(frob_norm(m.omega * m.omega - m.theta) <= 1e-10 * frob_norm(m.theta));
  }
}

TEST_CASE("hermitize") {
  SUBCASE("Hermitian input is unchanged by the trivial metric") {
    std::mt19937_64 rng(59);
    const Matrix h = qhsim::testing::random_hermitian(rng, 3);
    CHECK(max_abs_diff(hermitize(h, metric_from_theta(Matrix::identity(3))), h) <= 1e-14);
  }

  SUBCASE("two-level Hamiltonian at alpha = pi/6 has spectrum +-1/2") {
    const MetricOperator m = metric_from_theta(theta00(std::numbers::pi / 6, 0.4));
    const Matrix h = hermitize(h00(std::numbers::pi / 6), m);
    CHECK(hermiticity_defect(h) <= 1e-14);
    const HermEig e = herm_eig(h);
    CHECK(std::abs(e.eigenvalues[0] + 0.5) <= 1e-14);
    CHECK(std::abs(e.eigenvalues[1] - 0.5) <= 1e-14);
  }

  SUBCASE("alpha sweep") {
    for (int i = 1; i < 20; ++i) {
      const double alpha = i * std::numbers::pi / 40.0;
      const MetricOperator m = metric_from_theta(theta00(alpha, 0.7));
      const Matrix h = hermitize(h00(alpha), m);
      CHECK(hermiticity_defect(h) <= 1e-10);
      const HermEig e = herm_eig(h);
      CHECK(std::abs(e.eigenvalues[1] - std::sin(alpha)) <= 1e-10);
    }
  }

  SUBCASE("incompatible metric") {
    CHECK_THROWS_AS(hermitize(h00(0.5), metric_from_theta(Matrix::identity(2))), IncompatibilityError);
  }

  SUBCASE("Z-scaling covariance") {
    for (double c : {0.25, 4.0, 17.0}) {
      const MetricOperator m1 = metric_from_theta(theta00(0.9, 0.3));
      const MetricOperator mc = metric_from_theta(theta00(0.9, 0.3, c));
      CHECK(frob_norm(mc.omega - m1.omega * Complex(std::sqrt(c))) <= 1e-12 * frob_norm(mc.omega));
      CHECK(max_abs_diff(hermitize(h00(0.9), mc), hermitize(h00(0.9), m1)) <= 1e-12);
    }
  }
}

TEST_CASE("hermitize preserves spectra on random inputs") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> spectrum;
    const Matrix h = qhsim::testing::random_real_spectrum(rng, n, &spectrum);
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    const Matrix herm = hermitize(h, metric_from_system(decompose(h), MetricWeights(w)));
    const std::vector<double> in = sorted_real(gen_eig(h).eigenvalues);
    const std::vector<double> out = herm_eig(herm).eigenvalues;
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(in[k] - out[k]) <= 1e-10 * frob_norm(h));
  }
}

TEST_CASE("nnls against a hand-solved problem") {
  // min ||A x - b|| with x >= 0. Unconstrained optimum (1, -1) is infeasible;
  // the constrained optimum puts x2 = 0, x1 = (a1 . b) / (a1 . a1) = 1/2.
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b(3);
  b << 1.0, -1.0, 0.0;
  const Eigen::VectorXd x = nnls(a, b);
  CHECK(x(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(0.0));

  // Interior optimum matches ordinary least squares.
  Eigen::VectorXd b2(3);
  b2 << 1.0, 2.0, 3.0;
  const Eigen::VectorXd y = nnls(a, b2);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("solve_weights") {
  SUBCASE("H itself admits every weight; uniform is returned") {
    const BiorthogonalSystem s = decompose(h00(0.8));
    const std::vector<Matrix> obs{h00(0.8)};
    const MetricWeights w = solve_weights(s, obs);
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("O(rho) picks the metric ray satisfying tanh rho = sin a sin g") {
    for (double alpha : {0.6, 1.0, 1.4}) {
      for (double rho : {0.1, 0.3, 0.42775}) {
        if (std::tanh(rho) >= std::sin(alpha)) continue;
        const BiorthogonalSystem s = decompose(h00(alpha));
        const std::vector<Matrix> obs{o00(rho)};
        const MetricWeights w = solve_weights(s, obs);
        CHECK(w[0] + w[1] == doctest::Approx(2.0).epsilon(1e-12));
        const Matrix theta = metric_from_system(s, w).theta;
        const double gamma = std::asin(std::tanh(rho) / std::sin(alpha));
        const Matrix target = theta00(alpha, gamma);
        const Complex scale = theta(0, 1) / target(0, 1);
        CHECK(std::abs(scale.imag()) < 1e-12);
        CHECK(scale.real() > 0.0);
        CHECK(max_abs_diff(theta, target * scale) <= 1e-10 * std::abs(scale));
        CHECK(qh_residual(o00(rho), theta) <= 1e-12);
      }
    }
  }

  SUBCASE("scale invariance under observable rescaling") {
    const BiorthogonalSystem s = decompose(h00(1.0));
    const std::vector<Matrix> obs{o00(0.3)};
    const std::vector<Matrix> scaled{o00(0.3) * Complex(37.0)};
    const MetricWeights a = solve_weights(s, obs);
    const MetricWeights b = solve_weights(s, scaled);
    CHECK(std::abs(a[0] - b[0]) <= 1e-12);
    CHECK(std::abs(a[1] - b[1]) <= 1e-12);
  }

  SUBCASE("tanh rho > sin alpha is infeasible") {
    const BiorthogonalSystem s = decompose(h00(0.3));
    const std::vector<Matrix> obs{o00(0.7)};
    CHECK_THROWS_AS(solve_weights(s, obs), NoCompatibleMetricError);
    try {
      solve_weights(s, obs);
    } catch (const NoCompatibleMetricError& e) {
      CHECK(e.residual() > 0.0);
      CHECK(e.fallback_weights().size() == 2);
    }
    const WeightSolution sol = find_weights(s, obs);
    CHECK_FALSE(sol.feasible);
  }

  SUBCASE("two incompatible observables are infeasible") {
    const BiorthogonalSystem s = decompose(h00(1.0));
    const std::vector<Matrix> obs{o00(0.2), o00(0.5)};
    CHECK_THROWS_AS(solve_weights(s, obs), NoCompatibleMetricError);
  }

  SUBCASE("no observables") {
    const BiorthogonalSystem s = decompose(h00(1.0));
    CHECK_THROWS(solve_weights(s, std::span<const Matrix>{}));
  }
}
