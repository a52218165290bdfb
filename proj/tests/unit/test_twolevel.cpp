#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qhsim/errors.hpp"
#include "qhsim/metric.hpp"
#include "qhsim/twolevel.hpp"
#include "test_support.hpp"

using namespace qhsim;
using namespace qhsim::twolevel;
using qhsim::testing::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("h_general") {
  SUBCASE("theta = 0 gives diag(1, -1)") {
    const Matrix h = h_general({1.0, 0.0, 0.0, 0.0});
    CHECK(max_abs_diff(h, Matrix{{1.0, 0.0}, {0.0, -1.0}}) < 1e-15);
  }
  SUBCASE("theta = pi/2 gives Pauli X") {
    const Matrix h = h_general({1.0, kPi / 2, 0.0, 0.0});
    CHECK(max_abs_diff(h, Matrix{{0.0, 1.0}, {1.0, 0.0}}) < 1e-15);
    const auto [hi, lo] = qhsim::testing::eig2(h);
    CHECK(std::abs(hi - 1.0) < 1e-15);
    CHECK(std::abs(lo + 1.0) < 1e-15);
  }
  SUBCASE("spectrum q +- E") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      const GeneralParams p{0.1 + 3.0 * u(rng), Complex(kPi * u(rng), u(rng) - 0.5),
                            Complex(2.0 * kPi * u(rng) * 0.999, u(rng) - 0.5), 4.0 * u(rng) - 2.0};
      const auto [hi, lo] = qhsim::testing::eig2(h_general(p));
      CHECK(std::abs(hi - (p.q + p.E)) <= 1e-12 * (1.0 + p.E));
      CHECK(std::abs(lo - (p.q - p.E)) <= 1e-12 * (1.0 + p.E));
    }
  }
  SUBCASE("imaginary theta with phi = pi/2 reproduces H(alpha)") {
    // a = E cosh y, b = E sinh y, c = -E sinh y for theta = i y, phi = pi/2.
    for (double alpha : {0.3, 0.9, 1.4}) {
      const double y = -std::atanh(std::cos(alpha));
      const Matrix h = h_general({std::sin(alpha), Complex(0.0, y), kPi / 2, 0.0});
      CHECK(max_abs_diff(h, h_reduced(alpha)) <= 1e-14);
    }
  }
  SUBCASE("accessors and from_entries round trip") {
    const GeneralParams p{2.0, Complex(0.7, 0.2), Complex(1.1, -0.3), 0.5};
    const GeneralParams back = GeneralParams::from_entries(p.a(), p.b(), p.c(), p.q);
    CHECK(back.E == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(max_abs_diff(h_general(back), h_general(p)) <= 1e-13);
  }
  SUBCASE("from_entries guards") {
    CHECK_THROWS_AS(GeneralParams::from_entries(0.0, 1.0, -1.0), SpectrumRealityError);
    CHECK_THROWS_AS(GeneralParams::from_entries(0.0, 1.0, 0.0), DegeneracyError);
    CHECK_THROWS_AS(h_general({-1.0, 0.0, 0.0, 0.0}), DomainError);
  }
}

TEST_CASE("h_reduced") {
  SUBCASE("alpha = pi/6") {
    const Matrix h = h_reduced(kPi / 6);
    const double c = std::sqrt(3.0) / 2.0;
    CHECK(max_abs_diff(h, Matrix{{1.0, -c}, {c, -1.0}}) < 1e-15);
    const auto [hi, lo] = qhsim::testing::eig2(h);
    CHECK(std::abs(hi - 0.5) < 1e-14);
    CHECK(std::abs(lo + 0.5) < 1e-14);
  }
  SUBCASE("alpha = pi/3") {
    const auto [hi, lo] = qhsim::testing::eig2(h_reduced(kPi / 3));
    CHECK(hi.real() == doctest::Approx(0.86603).epsilon(1e-5));
    CHECK(std::abs(hi - std::sqrt(3.0) / 2.0) < 1e-14);
    CHECK(std::abs(lo + std::sqrt(3.0) / 2.0) < 1e-14);
  }
  SUBCASE("limit alpha -> pi/2") {
    const Matrix h = h_reduced(kPi / 2 - 2e-9);
    CHECK(max_abs_diff(h, Matrix{{1.0, 0.0}, {0.0, -1.0}}) < 1e-8);
  }
  SUBCASE("spectrum +- sin alpha") {
    for (double alpha : linspace(0.05, 1.52, 30)) {
      const auto [hi, lo] = qhsim::testing::eig2(h_reduced(alpha));
      CHECK(std::abs(hi - std::sin(alpha)) < 1e-14);
      CHECK(std::abs(lo + std::sin(alpha)) < 1e-14);
    }
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(h_reduced(0.0), DomainError);
    CHECK_THROWS_AS(h_reduced(kPi / 2), DomainError);
    CHECK_THROWS_AS(h_reduced(-0.3), DomainError);
  }
}

TEST_CASE("theta_reduced") {
  SUBCASE("gamma = 0") {
    for (double alpha : {0.4, 1.0}) {
      const double c = std::cos(alpha);
      CHECK(max_abs_diff(theta_reduced(alpha, 0.0), Matrix{{1.0, -c}, {-c, 1.0}}) < 1e-16);
    }
  }
  SUBCASE("alpha = 1, gamma = 1/2") {
    const Matrix t = theta_reduced(1.0, 0.5);
    CHECK(std::abs(t(0, 0) - 1.403422680111335) < 1e-15);
    CHECK(std::abs(t(0, 1) + 0.5403023058681398) < 1e-15);
    CHECK(std::abs(t(1, 0) + 0.5403023058681398) < 1e-15);
    CHECK(std::abs(t(1, 1) - 0.596577319888665) < 1e-15);
  }
  SUBCASE("eigenvalues Z (1 -+ R) and quasi-Hermiticity") {
    for (double alpha : linspace(0.1, 1.4, 7)) {
      for (double gamma : linspace(0.0, 1.4, 8)) {
        for (double z : {0.3, 1.0, 2.5}) {
          const Matrix t = theta_reduced(alpha, gamma, z);
          const double s = std::sin(alpha) * std::sin(gamma);
          const double r = std::sqrt(s * s + std::cos(alpha) * std::cos(alpha));
          CHECK(r == doctest::Approx(metric_radius(alpha, gamma)).epsilon(1e-15));
          const HermEig e = herm_eig(t);
          CHECK(std::abs(e.eigenvalues[0] - z * (1.0 - r)) <= 1e-14 * z);
          CHECK(std::abs(e.eigenvalues[1] - z * (1.0 + r)) <= 1e-14 * z);
          CHECK(frob_norm(adjoint(h_reduced(alpha)) * t - t * h_reduced(alpha)) <= 1e-14 * z);
        }
      }
    }
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(theta_reduced(1.0, 0.5, 0.0), DomainError);
    CHECK_THROWS_AS(theta_reduced(1.0, kPi / 2), DomainError);
    CHECK_THROWS_AS(theta_reduced(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(theta_reduced(0.0, 0.5), DomainError);
  }
}

TEST_CASE("o_reduced") {
  const Matrix o = o_reduced(1.0);
  CHECK(std::abs(o(0, 1) - 0.18393972058572117) < 1e-16);
  CHECK(std::abs(o(1, 0) - 1.3591409142295225) < 1e-15);
  CHECK(o(0, 0) == Complex(0.0));
  CHECK(max_abs_diff(o_reduced(1e-12), Matrix{{0.0, 0.5}, {0.5, 0.0}}) < 1e-11);
  for (double rho : {0.1, 0.7, 3.0}) {
    const auto [hi, lo] = qhsim::testing::eig2(o_reduced(rho));
    CHECK(std::abs(hi - 0.5) < 1e-14);
    CHECK(std::abs(lo + 0.5) < 1e-14);
  }
  CHECK_THROWS_AS(o_reduced(0.0), DomainError);
  CHECK_THROWS_AS(o_reduced(-1.0), DomainError);
}

TEST_CASE("gamma_from_constraint") {
  SUBCASE("symmetric observable gives gamma = 0") {
    CHECK(gamma_from_constraint({2.0, 0.7, 0.7, 2.0}, 0.9) == 0.0);
  }
  SUBCASE("O(rho) gives sin gamma = tanh rho / sin alpha") {
    for (double alpha : {0.6, 1.0, 1.4}) {
      for (double rho : {0.1, 0.3, 0.42775, 0.7}) {
        const ObservableParams o = ObservableParams::from_matrix(o_reduced(rho));
        if (std::tanh(rho) < std::sin(alpha)) {
          const double g = gamma_from_constraint(o, alpha);
          CHECK(std::abs(std::tanh(rho) - std::sin(alpha) * std::sin(g)) <= 1e-12);
          CHECK(std::abs(g - gamma_from_rho(alpha, rho)) <= 1e-15);
          CHECK(qh_residual(o_reduced(rho), theta_reduced(alpha, g)) <= 1e-12);
        } else {
          CHECK_THROWS_AS(gamma_from_constraint(o, alpha), NoCompatibleGammaError);
        }
      }
    }
  }
  SUBCASE("alpha = 1, rho = 0.42775 gives gamma close to 1/2") {
    const double g = gamma_from_rho(1.0, 0.42775);
    CHECK(g == doctest::Approx(0.5000224216870844).epsilon(1e-12));
    CHECK(std::abs(g - 0.5) < 1e-4);
  }
  SUBCASE("generic real observable closes the loop") {
    // Build an observable quasi-Hermitian for Theta(alpha, gamma): O = Theta^-1 K
    // with K real symmetric, then check that the solver returns gamma.
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double alpha = 0.3 + 1.1 * (u(rng) + 1.0) / 2.0;
      const double gamma = 1.3 * (u(rng) + 1.0) / 2.0;
      const Matrix k{{u(rng), u(rng) + 2.0}, {0.0, u(rng)}};
      Matrix ks = k;
      ks.set(1, 0, k(0, 1));
      const Matrix o = inverse(theta_reduced(alpha, gamma)) * ks;
      const ObservableParams p = ObservableParams::from_matrix(o);
      if (std::abs(p.b + p.c) < 1e-3) continue;
      CHECK(std::abs(gamma_from_constraint(p, alpha) - gamma) <= 1e-9);
    }
  }
  SUBCASE("degenerate and domain errors") {
    CHECK_THROWS_AS(gamma_from_constraint({0.0, 1.0, -1.0, 0.0}, 0.8), DomainError);
    CHECK_THROWS_AS(gamma_from_constraint({0.0, 0.5, 0.5, 0.0}, 0.0), DomainError);
    CHECK_THROWS_AS(ObservableParams::from_matrix(Matrix{{0.0, Complex(0.0, 1.0)}, {1.0, 0.0}}),
                    DomainError);
  }
}

TEST_CASE("ReducedParams") {
  const ReducedParams p = ReducedParams::from_observable(1.0, 0.3, 2.0);
  CHECK(std::tanh(0.3) == doctest::Approx(std::sin(1.0) * std::sin(p.gamma)).epsilon(1e-14));
  CHECK_NOTHROW(p.validate());
  ReducedParams bad = p;
  bad.gamma += 0.01;
  CHECK_THROWS(bad.validate());
  CHECK_THROWS_AS(ReducedParams::from_observable(0.3, 0.7), NoCompatibleGammaError);
}

TEST_CASE("omega_closed") {
  SUBCASE("alpha = pi/3, gamma = 0") {
    const Matrix w = omega_closed(kPi / 3, 0.0);
    CHECK(std::abs(w(0, 0) - 0.9659258262890684) < 1e-15);
    CHECK(std::abs(w(0, 1) + 0.2588190451025208) < 1e-15);
    CHECK(std::abs(w(1, 1) - 0.9659258262890684) < 1e-15);
    CHECK(max_abs_diff(w * w, Matrix{{1.0, -0.5}, {-0.5, 1.0}}) < 1e-15);
  }
  SUBCASE("frozen principal roots") {
    const Matrix a = omega_closed(1.0, 0.5);
    CHECK(std::abs(a(0, 0) - 1.1486781244031508) < 1e-14);
    CHECK(std::abs(a(0, 1) + 0.28976067129442545) < 1e-14);
    CHECK(std::abs(a(1, 1) - 0.7159721176551985) < 1e-14);
    const Matrix b = omega_closed(0.8, 1.2);
    CHECK(std::abs(b(0, 0) - 1.214897333158182) < 1e-14);
    CHECK(std::abs(b(0, 1) + 0.43889450345174197) < 1e-14);
    CHECK(std::abs(b(1, 1) - 0.37251536822637954) < 1e-14);
  }
  SUBCASE("limit alpha -> pi/2 with gamma = 0") {
    CHECK(identity_defect(omega_closed(kPi / 2 - 2e-9, 0.0)) < 1e-8);
  }
  SUBCASE("agreement with the numerical square root on a 13 x 15 grid") {
    for (double alpha : linspace(0.1, 1.4, 13)) {
      for (double gamma : linspace(0.0, 1.4, 15)) {
        const Matrix w = omega_closed(alpha, gamma);
        const Matrix t = theta_reduced(alpha, gamma);
        CHECK(frob_norm(w * w - t) <= 1e-10);
        CHECK(frob_norm(w - sqrt_metric(t).omega) <= 1e-10);
        CHECK(hermiticity_defect(w) == 0.0);
      }
    }
  }
  SUBCASE("loss of positivity") {
    CHECK_THROWS_AS(omega_closed(1e-6, 1.0), PositivityError);
  }
}

TEST_CASE("eigvec_matrix_U") {
  for (double alpha : linspace(0.2, 1.4, 7)) {
    for (double gamma : linspace(0.0, 1.4, 8)) {
      const Matrix u = eigvec_matrix_U(alpha, gamma);
      const double r = metric_radius(alpha, gamma);
      const Matrix t = theta_reduced(alpha, gamma);
      const Vector u0 = u.column(0);
      const Vector u1 = u.column(1);
      CHECK((t * u0 - (1.0 + r) * u0).norm() <= 1e-12 * u0.norm());
      CHECK((t * u1 - (1.0 - r) * u1).norm() <= 1e-12 * u1.norm());
      const Matrix g = adjoint(u) * u;
      CHECK(std::abs(g(0, 1)) <= 1e-15);
      CHECK(std::abs(g(0, 0) - g(1, 1)) <= 1e-14);
    }
  }
}
