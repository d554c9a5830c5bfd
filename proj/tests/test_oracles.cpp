#include <doctest.h>

#include <cmath>
#include <numbers>

#include "btl/analytic_oracles.hpp"
#include "btl/error.hpp"
#include "btl/quadrature.hpp"

using namespace btl;

TEST_CASE("tridiagonal QL matches a dense eigensolver") {
  std::vector<double> d{4, 1, -2, 3, 0.5}, e{1, 0.3, -0.7, 2, 0};
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    A(i, i) = d[static_cast<std::size_t>(i)];
    if (i < 4) A(i, i + 1) = A(i + 1, i) = e[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(5, 5);
  tridiagonal_ql(d, e, z);
  for (int k = 0; k < 5; ++k) {
    CHECK((A * z.col(k) - d[static_cast<std::size_t>(k)] * z.col(k)).norm() < 1e-13);
  }
  CHECK((z.transpose() * z - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-13);
}

TEST_CASE("Lorentzian roots") {
  SUBCASE("opening boundary at kT = pi/2") {
    const auto sys = lorentzian_eigenvalues(1.0, 1.0, std::numbers::pi / 2, 3);
    CHECK(sys.roots[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sys.lambdas[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sys.parity[0] == Parity::Even);
  }
  SUBCASE("kT = pi regression constant") {
    const auto sys = lorentzian_eigenvalues(1.0, 1.0, std::numbers::pi, 4);
    CHECK(sys.roots[0] > 0.5);
    CHECK(sys.roots[0] < 1.0);
    CHECK(sys.roots[0] == doctest::Approx(0.6383222623).epsilon(1e-9));
    CHECK(std::tan(sys.roots[0] * std::numbers::pi) ==
          doctest::Approx(2 * sys.roots[0] / (sys.roots[0] * sys.roots[0] - 1)).epsilon(1e-9));
  }
  SUBCASE("residuals and ordering") {
    for (double kT : {0.3, 1.0, 3.0, 10.0, 30.0, 100.0}) {
      const auto sys = lorentzian_eigenvalues(1.0, 1.0, kT, 12);
      for (std::size_t n = 0; n < sys.roots.size(); ++n) {
        CHECK(std::abs(lorentzian_root_function(kT, sys.roots[n])) < 1e-12 * (1 + sys.roots[n] * sys.roots[n]));
        if (n > 0) CHECK(sys.lambdas[n] < sys.lambdas[n - 1]);
        CHECK(sys.parity[n] == (n % 2 == 0 ? Parity::Even : Parity::Odd));
      }
    }
  }
  SUBCASE("linear in eta_max") {
    const auto a = lorentzian_eigenvalues(1.0, 1.0, 7.0, 6);
    const auto b = lorentzian_eigenvalues(0.9, 1.0, 7.0, 6);
    for (std::size_t n = 0; n < 6; ++n) CHECK(b.lambdas[n] == doctest::Approx(0.9 * a.lambdas[n]).epsilon(1e-14));
  }
  SUBCASE("open channels match the opening formula") {
    for (double kT : {2.0, 5.0, 9.0, 20.0}) {
      const auto sys = lorentzian_eigenvalues(1.0, 1.0, kT, 20);
      std::size_t open = 0;
      for (double C : sys.roots) open += C < 1.0;
      // channel n opens at kT = (2n - 1) pi / 2
      CHECK(open == static_cast<std::size_t>(std::floor(kT / std::numbers::pi + 0.5)));
    }
  }
}

TEST_CASE("Lorentzian eigenfunctions") {
  const auto sys = lorentzian_eigenvalues(1.0, 1.0, 6.0, 6);
  CHECK(lorentzian_eigenfunction(sys, 2, 0.0) == 0.0);
  CHECK(lorentzian_eigenfunction(sys, 1, 1.3) == lorentzian_eigenfunction(sys, 1, -1.3));
  CHECK_THROWS_AS(lorentzian_eigenfunction(sys, 1, 3.1), DomainError);
  const auto g = gauss_legendre(2000, -3.0, 3.0);
  for (std::size_t a = 1; a <= 6; ++a) {
    for (std::size_t b = 1; b <= 6; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        s += g.weights[i] * lorentzian_eigenfunction(sys, a, g.nodes[i]) * lorentzian_eigenfunction(sys, b, g.nodes[i]);
      }
      CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  }
  // Direct check of the integral equation at a few points.
  for (std::size_t n = 1; n <= 4; ++n) {
    for (double t : {-2.5, 0.1, 1.9}) {
      double s = 0.0;
      const auto left = gauss_legendre(400, -3.0, t), right = gauss_legendre(400, t, 3.0);
      for (const auto* r : {&left, &right}) {
        for (std::size_t i = 0; i < r->size(); ++i) {
          s += r->weights[i] * 0.5 * std::exp(-std::abs(t - r->nodes[i])) * lorentzian_eigenfunction(sys, n, r->nodes[i]);
        }
      }
      CHECK(s == doctest::Approx(sys.lambdas[n - 1] * lorentzian_eigenfunction(sys, n, t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Slepian eigensystem") {
  SUBCASE("small c") {
    const double c = 1e-3;
    const auto s = slepian_eigensystem(c, 6);
    CHECK(s.lambdas[0] == doctest::Approx(2 * c / std::numbers::pi).epsilon(1e-6));
    CHECK(s.lambdas[1] / s.lambdas[0] < 1e-4);
    double sum = 0.0;
    for (double l : s.lambdas) sum += l;
    CHECK(std::abs(sum - 2 * c / std::numbers::pi) < 1e-8);
    CHECK(s.mu[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
    CHECK(s.mu[1] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-5));
  }
  SUBCASE("trace, ordering and parity") {
    for (double c : {0.5, 2.0, 5.0, 10.0, 15.0}) {
      const std::size_t n_max = static_cast<std::size_t>(2 * c / std::numbers::pi) + 30;
      const auto s = slepian_eigensystem(c, n_max);
      double sum = 0.0;
      for (std::size_t n = 0; n < n_max; ++n) {
        sum += s.lambdas[n];
        CHECK(s.lambdas[n] < 1.0);
        if (n > 0 && s.lambdas[n - 1] > 1e-14) CHECK(s.lambdas[n] < s.lambdas[n - 1]);
      }
      CHECK(std::abs(sum - 2 * c / std::numbers::pi) < 1e-8);
      for (std::size_t n = 0; n < 6; ++n) {
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        CHECK(std::abs(slepian_function(s, n, -0.37) - sign * slepian_function(s, n, 0.37)) < 1e-12);
      }
    }
  }
  SUBCASE("known value") {
    // lambda_0(c = 1) of the prolate concentration problem.
    const auto s = slepian_eigensystem(1.0, 3);
    CHECK(s.lambdas[0] == doctest::Approx(0.5726).epsilon(1e-4));
  }
}
