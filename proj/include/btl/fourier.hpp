#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "btl/quadrature.hpp"

namespace btl {

/// j_0(x) .. j_{count-1}(x) for x >= 0: upward recurrence above the turning
/// point, Miller's downward recurrence below it.
void spherical_bessel_sequence(double x, std::size_t count, std::vector<double>& out);

/// Maps samples on a time rule to the unitary transform
/// f(w) = (2 pi)^{-1/2} int f(t) e^{-iwt} dt at the given frequencies.
///
/// On a Gauss-Legendre rule the transform is that of the degree n-1
/// polynomial interpolant, evaluated exactly through spherical Bessel
/// functions. On a trapezoid rule it is the discrete sum, which is only
/// meaningful below the grid's Nyquist frequency.
class TimeToFrequency {
 public:
  explicit TimeToFrequency(const QuadratureRule& rule);

  /// Rows: frequencies; columns: profiles. `samples` is n x K.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& samples, const std::vector<double>& omega) const;

  double nyquist() const noexcept { return nyquist_; }

 private:
  QuadratureRule rule_;
  double center_ = 0.0;
  double half_ = 0.0;
  double nyquist_ = 0.0;
  Eigen::MatrixXd analysis_;  // Legendre coefficients from samples (GL only)
};

}  // namespace btl
