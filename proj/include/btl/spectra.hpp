#pragma once

#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace btl {

struct TableInterpolant;
struct FourierPlan;

enum class SpectrumKind { Lorentzian, Box, Transducer, Tabulated };

std::string to_string(SpectrumKind kind);

/// eta(w) = eta_max * kappa^2 / (w^2 + kappa^2)
struct LorentzianParams {
  double eta_max = 1.0;
  double kappa = 1.0;
};

/// eta(w) = eta_bar for |w| <= omega_half_width, 0 otherwise.
struct BoxParams {
  double eta_bar = 1.0;
  double omega_half_width = 1.0;
};

/// Optomechanical transducer a1 -> b -> a2 with coupling g and external
/// rates kappa_a1, kappa_a2 and mechanical loss kappa_b.
struct TransducerParams {
  double g = 1.0;
  double kappa_a1 = 0.5;
  double kappa_a2 = 7.0;
  double kappa_b = 0.1;
};

/// Sampled spectrum, interpolated with a monotone piecewise cubic and
/// clamped to [0, 1]. With `mirrored`, samples cover w >= 0 only and the
/// spectrum is extended evenly.
struct TabulatedParams {
  std::vector<double> omega;
  std::vector<double> eta;
  bool mirrored = false;
};

using SpectrumParams = std::variant<LorentzianParams, BoxParams, TransducerParams, TabulatedParams>;

/// A validated transmission spectrum eta(w). Immutable; cheap to copy.
class SpectrumSpec {
 public:
  static SpectrumSpec lorentzian(double eta_max, double kappa);
  static SpectrumSpec box(double eta_bar, double omega_half_width);
  static SpectrumSpec transducer(double g, double kappa_a1, double kappa_a2, double kappa_b);
  static SpectrumSpec tabulated(std::vector<double> omega, std::vector<double> eta,
                                bool mirrored = false);
  /// Two-column (w, eta) text, whitespace separated, '#' starts a comment.
  static SpectrumSpec tabulated_from_file(const std::string& path, bool mirrored = false);
  static SpectrumSpec from_params(const SpectrumParams& params);

  SpectrumKind kind() const noexcept;
  const SpectrumParams& params() const noexcept { return params_; }

  /// eta(w). Throws ExtrapolationError outside a tabulated band.
  double transmissivity(double omega) const;

  /// Transmission amplitude on the real nonnegative branch, sqrt(eta).
  double amplitude(double omega) const;

  /// eta(w) == eta(-w) for all w.
  bool is_even() const noexcept { return even_; }

  /// sup_w eta(w), measured on the validation probe grid (exact for closed forms).
  double peak() const noexcept { return peak_; }

  /// |w| at which the peak is attained (0 for single-peaked spectra).
  double peak_location() const noexcept { return peak_location_; }

  /// Characteristic rate of the spectrum: kappa, Omega, g, or the table's half-extent.
  double natural_rate() const noexcept;

  /// Half width at half maximum (|w| beyond the peak where eta drops to peak/2).
  double half_max_width() const;

  /// Frequency range over which eta may be nonzero; infinite for closed
  /// forms with unbounded support.
  std::pair<double, double> support() const noexcept;

  /// Points where eta is not smooth (box edges, table ends).
  std::vector<double> breakpoints() const;

  /// Smallest doubling of natural_rate() beyond which eta stays below `epsilon`.
  double cutoff(double epsilon) const;

 private:
  explicit SpectrumSpec(SpectrumParams params);
  void validate();

  SpectrumParams params_;
  friend std::complex<double> kernel_value_numeric(const SpectrumSpec&, double);

  std::shared_ptr<const TableInterpolant> table_;
  std::shared_ptr<const FourierPlan> plan_;
  bool even_ = true;
  double peak_ = 0.0;
  double peak_location_ = 0.0;
};

/// eta(w) for a validated spectrum.
double eval_transmissivity(const SpectrumSpec& spec, double omega);

/// Time-domain kernel eta~(t) = (1/2pi) int eta(w) e^{iwt} dw for an even
/// spectrum (closed form for Lorentzian and Box, numerical otherwise).
double kernel_value(const SpectrumSpec& spec, double t);

/// Complex kernel; differs from kernel_value only for non-even tabulated spectra.
std::complex<double> kernel_value_complex(const SpectrumSpec& spec, double t);

/// The kernel through the generic numerical Fourier route, whatever the kind.
std::complex<double> kernel_value_numeric(const SpectrumSpec& spec, double t);

}  // namespace btl
