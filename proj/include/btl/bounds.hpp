#pragma once

#include <iosfwd>

#include "btl/modes.hpp"
#include "btl/spectra.hpp"

namespace btl {

/// Upper bound on the top transmissivity from the spectral spread of the top mode.
struct BoundReport {
  double T = 0.0;
  double omega_star = 0.0;
  /// min over Omega of eta_max P_in + eta(Omega) [min(m2 / Omega^2, P_out) + P_unmeasured]
  double bound_value = 0.0;
  double lambda1_numeric = 0.0;
  bool satisfied = false;
  /// Same with the spread replaced by its time-limited lower bound, 4 pi^2 / T^2.
  /// Reported for comparison only: it is not a rigorous upper bound.
  double bound_paper_form = 0.0;
  double omega_star_paper = 0.0;
  /// int w^2 P(w) dw over the frequency grid
  double second_moment = 0.0;
  /// 1 - int P over the frequency grid
  double unmeasured_mass = 0.0;
};

/// B(Omega) for given pieces; exposed so its monotonicity can be checked directly.
double chebyshev_bound(double eta_max, double mass_inside, double eta_at_omega, double second_moment,
                       double omega, double mass_outside, double unmeasured_mass);

/// Throws BoundInapplicableError when eta is not even or not monotone
/// nonincreasing beyond its peak.
BoundReport lambda1_bound_diagnostic(const SpectrumSpec& spec, double T, const ModeBasis& basis);

/// Header: T,omega_star,bound_measured_sigma,bound_paper_form,lambda1
void write_bound_csv_header(std::ostream& out);
void write_bound_csv_row(std::ostream& out, const BoundReport& report);

}  // namespace btl
