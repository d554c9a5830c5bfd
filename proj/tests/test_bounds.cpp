#include <doctest.h>

#include <sstream>

#include "btl/bounds.hpp"
#include "btl/error.hpp"
#include "btl/modes.hpp"

using namespace btl;

TEST_CASE("bound brackets lambda_1 at long duration") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  const auto basis = solve_modes(spec, 50.0, {});
  const auto r = lambda1_bound_diagnostic(spec, 50.0, basis);
  CHECK(r.satisfied);
  CHECK(r.bound_value >= r.lambda1_numeric - 1e-9);
  CHECK(r.bound_value <= 0.9 + 1e-9);
  CHECK(r.bound_value > 0.8);
  CHECK(r.unmeasured_mass < 1e-3);
}

TEST_CASE("bound tightens toward eta_max as T grows") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  const auto short_run = lambda1_bound_diagnostic(spec, 5.0, solve_modes(spec, 5.0, {}));
  const auto long_run = lambda1_bound_diagnostic(spec, 50.0, solve_modes(spec, 50.0, {}));
  CHECK(0.9 - long_run.lambda1_numeric < 0.9 - short_run.lambda1_numeric);
  CHECK(long_run.satisfied);
  CHECK(short_run.satisfied);
}

TEST_CASE("short duration: bound below one half") {
  const auto spec = SpectrumSpec::lorentzian(1.0, 1.0);
  const auto basis = solve_modes(spec, 0.1, {});
  const auto r = lambda1_bound_diagnostic(spec, 0.1, basis);
  CHECK(r.lambda1_numeric < 0.5);
  CHECK(r.bound_value < 0.5);
  CHECK(r.satisfied);
}

TEST_CASE("zero spectrum gives a zero bound") {
  const auto spec = SpectrumSpec::tabulated({-2.0, -1.0, 0.0, 1.0, 2.0}, {0.0, 0.0, 0.0, 0.0, 0.0});
  const auto basis = solve_modes(spec, 1.0, {});
  const auto r = lambda1_bound_diagnostic(spec, 1.0, basis);
  CHECK(r.bound_value == 0.0);
  CHECK(std::abs(r.lambda1_numeric) < 1e-12);
  CHECK(r.satisfied);
}

TEST_CASE("bound is monotone in the second moment") {
  double prev = chebyshev_bound(0.9, 0.6, 0.3, 10.0, 2.0, 0.4, 0.01);
  for (double m2 = 9.0; m2 >= 0.0; m2 -= 0.5) {
    const double b = chebyshev_bound(0.9, 0.6, 0.3, m2, 2.0, 0.4, 0.01);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("bound rejects a non-monotone tail") {
  // Transmission dips and recovers beyond the peak.
  const auto spec = SpectrumSpec::tabulated({0.0, 1.0, 2.0, 3.0, 4.0}, {0.8, 0.2, 0.6, 0.1, 0.0}, true);
  const auto basis = solve_modes(spec, 2.0, {});
  CHECK_THROWS_AS(lambda1_bound_diagnostic(spec, 2.0, basis), BoundInapplicableError);
}

TEST_CASE("bound rejects a basis from another duration") {
  const auto spec = SpectrumSpec::lorentzian(0.9, 1.0);
  CHECK_THROWS_AS(lambda1_bound_diagnostic(spec, 3.0, solve_modes(spec, 2.0, {})), DomainError);
}

TEST_CASE("bound CSV row") {
  std::ostringstream out;
  write_bound_csv_header(out);
  BoundReport r;
  r.T = 1.5;
  r.bound_value = 0.25;
  write_bound_csv_row(out, r);
  CHECK(out.str() == "T,omega_star,bound_measured_sigma,bound_paper_form,lambda1\n1.5,0,0.25,0,0\n");
}
