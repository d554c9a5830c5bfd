#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "btl/spectra.hpp"

namespace btl {

/// Piecewise Chebyshev interpolant of a complex function on [0, t_max],
/// refined panel by panel until the trailing coefficients fall below tolerance.
class ChebyshevTable {
 public:
  ChebyshevTable() = default;

  static ChebyshevTable build(const std::function<std::complex<double>(double)>& f, double t_max,
                               double abs_tol);

  std::complex<double> value(double t) const;
  /// int_0^x of the interpolant, 0 <= x <= t_max.
  std::complex<double> integral(double x) const;

  double t_max() const noexcept { return t_max_; }
  std::size_t panel_count() const noexcept { return panels_.size(); }

  static constexpr std::size_t kDegree = 32;

 private:
  struct Panel {
    double a = 0.0;
    double b = 0.0;
    std::vector<std::complex<double>> coef;       // f on the panel
    std::vector<std::complex<double>> antideriv;  // zero at the left edge
    std::complex<double> before;                  // int_0^a
  };

  static bool fit(const std::vector<std::complex<double>>& samples, double abs_tol,
                  std::vector<std::complex<double>>& coef);
  void finish();
  const Panel& locate(double t) const;

  std::vector<Panel> panels_;
  double t_max_ = 0.0;
};

/// Time-domain kernel eta~(t) of a spectrum, valid for |t| <= t_max.
/// Closed forms are used for Lorentzian and Box; other kinds are sampled
/// once from the numerical Fourier route into a ChebyshevTable.
/// Immutable after construction and safe to share across threads.
class Kernel {
 public:
  Kernel(const SpectrumSpec& spec, double t_max);

  const SpectrumSpec& spectrum() const noexcept { return spec_; }
  double t_max() const noexcept { return t_max_; }

  /// Real for even spectra; eta~(-t) = conj(eta~(t)) otherwise.
  bool is_real() const noexcept { return spec_.is_even(); }

  std::complex<double> operator()(double t) const;
  double real(double t) const { return (*this)(t).real(); }

  /// int_0^x eta~(s) ds for |x| <= t_max.
  std::complex<double> integral(double x) const;

 private:
  SpectrumSpec spec_;
  double t_max_;
  ChebyshevTable table_;
  bool tabulated_ = false;
};

}  // namespace btl
