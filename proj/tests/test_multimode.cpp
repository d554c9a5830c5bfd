#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/special_functions/bessel.hpp>
#include <json.hpp>

#include "btl/error.hpp"
#include "btl/fourier.hpp"
#include "btl/multimode.hpp"

using namespace btl;
using C = std::complex<double>;

namespace {

// Orthonormal smooth profiles (1 - x^2) x^k on a Gauss-Legendre grid.
ModeSet smooth_modes(double T, std::size_t n, std::size_t K) {
  ModeSet set;
  set.rule = gauss_legendre(n, -T / 2, T / 2);
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2 * set.rule.nodes[i] / T;
    for (std::size_t k = 0; k < K; ++k) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (1 - x * x) * std::pow(x, k);
  }
  Eigen::VectorXd sw(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) sw(static_cast<Eigen::Index>(i)) = std::sqrt(set.rule.weights[i]);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(sw.asDiagonal() * A);
  const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.rows(), A.cols());
  set.profiles = sw.cwiseInverse().asDiagonal() * Q;
  return set;
}

}  // namespace

TEST_CASE("spherical Bessel sequence") {
  std::vector<double> j;
  for (double x : {1e-3, 0.5, 3.0, 17.2, 99.0, 250.0, 1234.5}) {
    spherical_bessel_sequence(x, 300, j);
    for (unsigned l : {0u, 1u, 2u, 7u, 30u, 120u, 299u}) {
      const double ref = boost::math::sph_bessel(l, x);
      CHECK(std::abs(j[l] - ref) <= 1e-13 * std::max(1e-300, std::abs(ref)) + 1e-15);
    }
  }
}

TEST_CASE("time-to-frequency transform") {
  const double T = 3.0;
  const auto rule = gauss_legendre(60, -T / 2, T / 2);
  Eigen::MatrixXcd box = Eigen::MatrixXcd::Constant(60, 1, 1.0 / std::sqrt(T));
  const TimeToFrequency tf(rule);
  const std::vector<double> omega{-7.3, -1.0, 0.0, 0.4, 2.5, 40.0};
  const auto f = tf.apply(box, omega);
  for (std::size_t m = 0; m < omega.size(); ++m) {
    const double w = omega[m];
    const double ref = w == 0 ? T : 2 * std::sin(w * T / 2) / w;
    CHECK(std::abs(f(static_cast<Eigen::Index>(m), 0) - C(ref / std::sqrt(2 * std::numbers::pi * T))) < 1e-13);
  }
  // Shifted interval: an e^{-i w t0} phase.
  const auto shifted = gauss_legendre(60, 1.0, 4.0);
  Eigen::MatrixXcd ramp(60, 1);
  for (int i = 0; i < 60; ++i) ramp(i, 0) = shifted.nodes[static_cast<std::size_t>(i)];
  const auto g = TimeToFrequency(shifted).apply(ramp, {1.7});
  C ref = 0.0;
  const auto dense = gauss_legendre(400, 1.0, 4.0);
  for (std::size_t i = 0; i < dense.size(); ++i) ref += dense.weights[i] * dense.nodes[i] * std::polar(1.0, -1.7 * dense.nodes[i]);
  CHECK(std::abs(g(0, 0) - ref / std::sqrt(2 * std::numbers::pi)) < 1e-12);
}

TEST_CASE("scattering examples") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  const ModeSet one = smooth_modes(4.0, 80, 1);
  const auto grid = make_frequency_grid(spec, 4.0);
  const auto G = transmitted(to_frequency(one, grid), spec);
  const double gg = G.values.col(0).squaredNorm();
  FrequencyModes h{grid, G.values / std::sqrt(gg)};
  const auto S = scattering_matrix(G, h);
  CHECK(S.rows() == 1);
  CHECK(std::abs(S(0, 0) - std::sqrt(gg)) < 1e-12);
  const auto opt = optimal_readout(one, spec);
  CHECK(opt.lambdas[0] == doctest::Approx(gg).epsilon(1e-12));

  // Flat transmission over a band far wider than the profiles' spectra.
  const auto flat = SpectrumSpec::tabulated({-400, -200, 0, 200, 400}, std::vector<double>(5, 0.7));
  const ModeSet three = smooth_modes(2.0, 80, 3);
  const auto Sf = scattering_matrix(three, three, flat);
  CHECK((Sf - std::sqrt(0.7) * Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
  const auto of = optimal_readout(three, flat);
  for (double l : of.lambdas) CHECK(l == doctest::Approx(0.7).epsilon(1e-6));

  CHECK_THROWS_AS(scattering_matrix(three, smooth_modes(2.0, 60, 3), flat), DimensionError);
}

TEST_CASE("random readouts are contractions") {
  const auto spec = SpectrumSpec::transducer(1, 0.5, 7, 0.1);
  const double T = 6.0;
  const ModeSet base = smooth_modes(T, 120, 8);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd R(8, 6);
    for (int i = 0; i < 8; ++i) for (int j = 0; j < 6; ++j) R(i, j) = C(n(rng), n(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(R);
    const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(8, 6);
    ModeSet in{base.rule, base.profiles * Q.leftCols(3)};
    ModeSet out{base.rule, base.profiles * Q.rightCols(3)};
    const auto a = analyze_scattering(in, out, spec);
    for (double s : a.singular_values) CHECK(s <= 1 + 1e-10);
    for (double l : a.gram_eigenvalues) CHECK(l >= -1e-12);
  }
}

TEST_CASE("multimode capacity") {
  CHECK(multimode_capacity(std::vector<double>{1 / std::sqrt(2.0)}) == doctest::Approx(0.0));
  CHECK(multimode_capacity(std::vector<double>{0.9, 0.3}) == doctest::Approx(2.091922).epsilon(1e-6));
  CHECK_THROWS_AS(multimode_capacity(std::vector<double>{1.1}), DomainError);

  const auto spec = SpectrumSpec::lorentzian(0.95, 1.0);
  const ModeSet in = smooth_modes(8.0, 100, 3);
  const auto opt = optimal_readout(in, spec);
  ModeSet readout_time{in.rule, in.profiles};
  const auto a = analyze_scattering(in, readout_time, spec);
  // Unitary remixing of inputs and readouts leaves the capacity unchanged.
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(3, 3);
  U.topLeftCorner(2, 2) << C(0.6, 0), C(0, 0.8), C(0, 0.8), C(0.6, 0);
  const auto b = analyze_scattering(ModeSet{in.rule, in.profiles * U}, ModeSet{in.rule, in.profiles * U.adjoint()}, spec);
  CHECK(a.capacity == doctest::Approx(b.capacity).epsilon(1e-12));
  auto j = nlohmann::json::parse(a.to_json());
  CHECK(j["singular_values"].size() == 3);
  CHECK(j["S"]["re"].size() == 3);
  CHECK(opt.lambdas[0] >= a.singular_values[0] * a.singular_values[0] - 1e-12);
}

TEST_CASE("optimal readout reproduces the eigenmode transmissivities") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  DiscretizationConfig cfg;
  const auto basis = solve_modes(spec, 10.0, cfg);
  const auto opt = optimal_readout(ModeSet::from_basis(basis, 4), spec);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(opt.lambdas[k] - basis.lambdas[k]) < 1e-6);
  CHECK(opt.orthogonality_error < 1e-9);
  // Eigenmodes are already optimal: U is diagonal up to phases.
  CHECK((opt.U.cwiseAbs() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("interlacing property") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  DiscretizationConfig cfg;
  cfg.n_points = 200;
  const auto basis = solve_modes(spec, 10.0, cfg);
  const ModeSet in = ModeSet::from_basis(basis, 4);
  const auto r = interlacing_check(in, spec, 30, 42, 2);
  CHECK(r.violations == 0);
  CHECK(r.max_violation <= 1e-9);
  CHECK(r.optimal_equality_error < 1e-9);
  CHECK(r.orthogonal_readout_sigma < 1e-9);
  const auto again = interlacing_check(in, spec, 30, 42, 1);
  CHECK(again.max_violation == r.max_violation);
}
