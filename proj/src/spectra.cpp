#include "btl/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "btl/error.hpp"
#include "btl/quadrature.hpp"

namespace btl {

namespace {

constexpr double kProbeTolerance = 1e-12;
constexpr double kCutoffEpsilon = 1e-10;
constexpr double kTailFitLevel = 1e-6;
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double transducer_eta(const TransducerParams& p, double w) {
  using cd = std::complex<double>;
  const cd a1(0.5 * p.kappa_a1, w);
  const cd b(0.5 * p.kappa_b, w);
  const cd a2(0.5 * p.kappa_a2, w);
  const double g2 = p.g * p.g;
  // det [[a1, ig, 0], [ig, b, ig], [0, ig, a2]]
  const cd det = a1 * b * a2 + g2 * (a1 + a2);
  const double num = std::sqrt(p.kappa_a1 * p.kappa_a2) * g2;
  return num * num / std::norm(det);
}

std::vector<double> probe_grid(double scale) {
  std::vector<double> w;
  for (int i = 0; i <= 4000; ++i) w.push_back(20.0 * scale * i / 4000.0);
  for (int i = 1; i <= 200; ++i) w.push_back(20.0 * scale * std::pow(10.0, 6.0 * i / 200.0));
  return w;
}

}  // namespace

struct TableInterpolant {
  boost::math::interpolators::pchip<std::vector<double>> curve;
  double lo;
  double hi;
  bool mirrored;

  double operator()(double w) const {
    const double x = mirrored ? std::abs(w) : w;
    if (x < lo || x > hi) {
      std::ostringstream msg;
      msg << "tabulated spectrum evaluated at w=" << w << " outside [" << lo << ", " << hi << "]";
      throw ExtrapolationError(msg.str());
    }
    return std::clamp(curve(x), 0.0, 1.0);
  }
};

// Parameters of the numerical Fourier route: a fitted Lorentzian carries
// any 1/w^2 tail analytically, the remainder is integrated up to omega_cut.
struct FourierPlan {
  double omega_cut = 0.0;
  bool tail_active = false;
  double tail_amplitude = 0.0;
  double tail_rate = 1.0;
  double lo = 0.0;
  double hi = 0.0;
};

namespace {
FourierPlan make_plan(const SpectrumSpec& spec);
}  // namespace

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Lorentzian: return "lorentzian";
    case SpectrumKind::Box: return "box";
    case SpectrumKind::Transducer: return "transducer";
    case SpectrumKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

SpectrumSpec::SpectrumSpec(SpectrumParams params) : params_(std::move(params)) { validate(); }

SpectrumSpec SpectrumSpec::lorentzian(double eta_max, double kappa) {
  return SpectrumSpec(LorentzianParams{eta_max, kappa});
}

SpectrumSpec SpectrumSpec::box(double eta_bar, double omega_half_width) {
  return SpectrumSpec(BoxParams{eta_bar, omega_half_width});
}

SpectrumSpec SpectrumSpec::transducer(double g, double kappa_a1, double kappa_a2, double kappa_b) {
  return SpectrumSpec(TransducerParams{g, kappa_a1, kappa_a2, kappa_b});
}

SpectrumSpec SpectrumSpec::tabulated(std::vector<double> omega, std::vector<double> eta,
                                     bool mirrored) {
  return SpectrumSpec(TabulatedParams{std::move(omega), std::move(eta), mirrored});
}

SpectrumSpec SpectrumSpec::tabulated_from_file(const std::string& path, bool mirrored) {
  std::ifstream in(path);
  if (!in) throw SpecInvalidError("cannot open spectrum table '" + path + "'");
  std::vector<double> omega, eta;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double w = 0.0, e = 0.0;
    if (!(fields >> w)) continue;
    if (!(fields >> e)) {
      throw SpecInvalidError(path + ":" + std::to_string(line_no) + ": expected two columns");
    }
    omega.push_back(w);
    eta.push_back(e);
  }
  return tabulated(std::move(omega), std::move(eta), mirrored);
}

SpectrumSpec SpectrumSpec::from_params(const SpectrumParams& params) { return SpectrumSpec(params); }

SpectrumKind SpectrumSpec::kind() const noexcept {
  return static_cast<SpectrumKind>(params_.index());
}

double SpectrumSpec::transmissivity(double omega) const {
  return std::visit(
      overloaded{
          [&](const LorentzianParams& p) {
            return p.eta_max * p.kappa * p.kappa / (omega * omega + p.kappa * p.kappa);
          },
          [&](const BoxParams& p) {
            return std::abs(omega) <= p.omega_half_width ? p.eta_bar : 0.0;
          },
          [&](const TransducerParams& p) { return transducer_eta(p, omega); },
          [&](const TabulatedParams&) { return (*table_)(omega); },
      },
      params_);
}

double SpectrumSpec::amplitude(double omega) const { return std::sqrt(transmissivity(omega)); }

double SpectrumSpec::natural_rate() const noexcept {
  return std::visit(overloaded{
                        [](const LorentzianParams& p) { return p.kappa; },
                        [](const BoxParams& p) { return p.omega_half_width; },
                        [](const TransducerParams& p) { return p.g; },
                        [](const TabulatedParams& p) {
                          return std::max(std::abs(p.omega.front()), std::abs(p.omega.back()));
                        },
                    },
                    params_);
}

std::pair<double, double> SpectrumSpec::support() const noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind()) {
    case SpectrumKind::Box: {
      const double w = std::get<BoxParams>(params_).omega_half_width;
      return {-w, w};
    }
    case SpectrumKind::Tabulated:
      if (table_->mirrored) return {-table_->hi, table_->hi};
      return {table_->lo, table_->hi};
    default: return {-inf, inf};
  }
}

std::vector<double> SpectrumSpec::breakpoints() const {
  if (kind() == SpectrumKind::Box || kind() == SpectrumKind::Tabulated) {
    const auto [lo, hi] = support();
    return {lo, hi};
  }
  return {};
}

double SpectrumSpec::cutoff(double epsilon) const {
  if (kind() == SpectrumKind::Box || kind() == SpectrumKind::Tabulated) {
    const auto [lo, hi] = support();
    return std::max(std::abs(lo), std::abs(hi));
  }
  double w = natural_rate();
  for (int doubling = 0; doubling < 200; ++doubling, w *= 2.0) {
    if (w < peak_location_) continue;
    double sup = 0.0;
    for (int i = 0; i <= 64; ++i) {
      sup = std::max(sup, transmissivity(w * std::pow(4.0, i / 64.0)));
    }
    if (sup < epsilon) return w;
  }
  throw NumericalFailure("spectrum does not decay below the cutoff level");
}

double SpectrumSpec::half_max_width() const {
  switch (kind()) {
    case SpectrumKind::Lorentzian: return std::get<LorentzianParams>(params_).kappa;
    case SpectrumKind::Box: return std::get<BoxParams>(params_).omega_half_width;
    default: break;
  }
  const double half = 0.5 * peak_;
  const auto [lo, hi] = support();
  double step = natural_rate() / 64.0;
  double a = peak_location_;
  double b = a + step;
  while (b < hi && transmissivity(b) > half) {
    a = b;
    step *= 1.25;
    b = a + step;
  }
  if (b >= hi) return hi;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    (transmissivity(m) > half ? a : b) = m;
  }
  return 0.5 * (a + b);
}

void SpectrumSpec::validate() {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  std::visit(
      overloaded{
          [&](const LorentzianParams& p) {
            if (!in_unit(p.eta_max)) throw SpecInvalidError("lorentzian eta_max must lie in [0, 1]");
            if (!(p.kappa > 0.0)) throw SpecInvalidError("lorentzian kappa must be > 0");
          },
          [&](const BoxParams& p) {
            if (!in_unit(p.eta_bar)) throw SpecInvalidError("box eta_bar must lie in [0, 1]");
            if (!(p.omega_half_width > 0.0)) throw SpecInvalidError("box half width must be > 0");
          },
          [&](const TransducerParams& p) {
            if (!(p.g > 0.0)) throw SpecInvalidError("transducer g must be > 0");
            if (!(p.kappa_a1 >= 0.0 && p.kappa_a2 >= 0.0 && p.kappa_b >= 0.0)) {
              throw SpecInvalidError("transducer rates must be >= 0");
            }
            if (p.kappa_a1 + p.kappa_a2 + p.kappa_b == 0.0) {
              throw SpecInvalidError("transducer needs at least one nonzero rate");
            }
          },
          [&](const TabulatedParams& p) {
            if (p.omega.size() != p.eta.size() || p.omega.size() < 2) {
              throw SpecInvalidError("tabulated spectrum needs >= 2 (w, eta) pairs");
            }
            for (std::size_t i = 0; i < p.eta.size(); ++i) {
              if (!in_unit(p.eta[i])) throw SpecInvalidError("tabulated eta outside [0, 1]");
              if (i > 0 && !(p.omega[i] > p.omega[i - 1])) {
                throw SpecInvalidError("tabulated w must be strictly increasing");
              }
            }
            if (p.mirrored && p.omega.front() != 0.0) {
              throw SpecInvalidError("mirrored table must start at w = 0");
            }
            auto x = p.omega;
            auto y = p.eta;
            const double lo = x.front();
            const double hi = x.back();
            // pchip needs four points; pad short tables with midpoints of a linear fit.
            while (x.size() < 4) {
              std::vector<double> xx, yy;
              for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                xx.push_back(x[i]);
                yy.push_back(y[i]);
                xx.push_back(0.5 * (x[i] + x[i + 1]));
                yy.push_back(0.5 * (y[i] + y[i + 1]));
              }
              xx.push_back(x.back());
              yy.push_back(y.back());
              x = std::move(xx);
              y = std::move(yy);
            }
            table_ = std::make_shared<const TableInterpolant>(TableInterpolant{
                boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y)),
                lo, hi, p.mirrored});
          },
      },
      params_);

  // Probe for range, evenness and the peak.
  const auto [lo, hi] = support();
  std::vector<double> probes;
  if (kind() == SpectrumKind::Tabulated) {
    const double a = table_->mirrored ? 0.0 : lo;
    for (int i = 0; i <= 4000; ++i) probes.push_back(a + (hi - a) * i / 4000.0);
  } else {
    probes = probe_grid(natural_rate());
  }
  peak_ = 0.0;
  peak_location_ = 0.0;
  even_ = true;
  for (double w : probes) {
    const double e = transmissivity(w);
    if (!(e >= -kProbeTolerance && e <= 1.0 + kProbeTolerance)) {
      std::ostringstream msg;
      msg << "eta(" << w << ") = " << e << " outside [0, 1]";
      throw SpecInvalidError(msg.str());
    }
    if (e > peak_) {
      peak_ = e;
      peak_location_ = std::abs(w);
    }
    const double mirror = -w;
    if (mirror >= lo && mirror <= hi) {
      if (std::abs(transmissivity(mirror) - e) > kProbeTolerance) even_ = false;
    } else if (kind() == SpectrumKind::Tabulated && e != 0.0) {
      even_ = false;
    }
  }
  if (kind() == SpectrumKind::Tabulated && !table_->mirrored &&
      std::abs(lo + hi) > 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
    even_ = false;
  }
  if (kind() == SpectrumKind::Lorentzian) {
    peak_ = std::get<LorentzianParams>(params_).eta_max;
    peak_location_ = 0.0;
  } else if (kind() == SpectrumKind::Box) {
    peak_ = std::get<BoxParams>(params_).eta_bar;
    peak_location_ = 0.0;
  } else if (kind() == SpectrumKind::Transducer && peak_location_ > 0.0) {
    // Golden-section refinement of the probed maximum.
    const double step = 20.0 * natural_rate() / 4000.0;
    double a = std::max(0.0, peak_location_ - step);
    double b = peak_location_ + step;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double c = b - r * (b - a);
      const double d = a + r * (b - a);
      if (transmissivity(c) > transmissivity(d)) {
        b = d;
      } else {
        a = c;
      }
    }
    peak_location_ = 0.5 * (a + b);
    peak_ = std::max(peak_, transmissivity(peak_location_));
    if (peak_ > 1.0 + kProbeTolerance) throw SpecInvalidError("transducer peak exceeds 1");
  }
  plan_ = std::make_shared<const FourierPlan>(make_plan(*this));
}

double eval_transmissivity(const SpectrumSpec& spec, double omega) {
  if (!std::isfinite(omega)) throw DomainError("eval_transmissivity: non-finite frequency");
  const double e = spec.transmissivity(omega);
  if (e > 1.0 + kProbeTolerance || e < -kProbeTolerance) {
    throw SpecInvalidError("transmissivity outside [0, 1]");
  }
  return std::clamp(e, 0.0, 1.0);
}

namespace {

FourierPlan make_plan(const SpectrumSpec& spec) {
  FourierPlan plan;
  const auto [lo, hi] = spec.support();
  if (std::isfinite(lo) && std::isfinite(hi)) {
    plan.lo = lo;
    plan.hi = hi;
    plan.omega_cut = std::max(std::abs(lo), std::abs(hi));
    return plan;
  }
  const double raw_cut = spec.cutoff(kCutoffEpsilon);
  const double e1 = spec.transmissivity(raw_cut);
  const double e2 = spec.transmissivity(2.0 * raw_cut);
  plan.omega_cut = raw_cut;
  if (e1 > 0.0 && e2 > 0.0) {
    const double exponent = std::log2(e1 / e2);
    if (exponent < 1.2) {
      throw NumericalFailure("spectrum tail decays too slowly for a Fourier kernel", exponent);
    }
    if (exponent < 3.0) {
      // Fit A / (w^2 + b^2) where eta has dropped to kTailFitLevel of the peak.
      double w1 = spec.natural_rate();
      while (spec.transmissivity(w1) > kTailFitLevel * spec.peak() || w1 < spec.peak_location()) {
        w1 *= 2.0;
      }
      const double w2 = 2.0 * w1;
      const double n1 = spec.transmissivity(w1);
      const double n2 = spec.transmissivity(w2);
      double b2 = (n2 * w2 * w2 - n1 * w1 * w1) / (n1 - n2);
      if (!(b2 > 0.0) || !std::isfinite(b2)) b2 = spec.natural_rate() * spec.natural_rate();
      plan.tail_active = true;
      plan.tail_rate = std::sqrt(b2);
      plan.tail_amplitude = n1 * (w1 * w1 + b2);
      const double amp = plan.tail_amplitude;
      auto residual = [&](double w) { return std::abs(spec.transmissivity(w) - amp / (w * w + b2)); };
      double w = spec.natural_rate();
      for (int doubling = 0; doubling < 200; ++doubling, w *= 2.0) {
        double sup = 0.0;
        for (int i = 0; i <= 64; ++i) sup = std::max(sup, residual(w * std::pow(4.0, i / 64.0)));
        if (sup < kCutoffEpsilon && w >= spec.peak_location()) break;
      }
      plan.omega_cut = w;
    }
  }
  plan.lo = -plan.omega_cut;
  plan.hi = plan.omega_cut;
  return plan;
}

std::vector<double> oscillation_breaks(double a, double b, double t, const SpectrumSpec& spec) {
  std::vector<double> breaks{a};
  for (double bp : spec.breakpoints()) {
    if (bp > a && bp < b) breaks.push_back(bp);
  }
  const double at = std::abs(t);
  if (at > 0.0) {
    const double period = kPi / at;
    // Zeros of cos(w t) sit at (j + 1/2) pi / t.
    const double first = std::ceil(a / period - 0.5);
    for (double j = first;; j += 1.0) {
      const double z = (j + 0.5) * period;
      if (z >= b) break;
      if (z > a) breaks.push_back(z);
    }
  }
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

}  // namespace

std::complex<double> kernel_value_numeric(const SpectrumSpec& spec, double t) {
  const FourierPlan& plan = *spec.plan_;
  IntegrationResult re, im;
  double scale = 0.0;
  if (spec.is_even()) {
    const double b2 = plan.tail_rate * plan.tail_rate;
    auto residual = [&](double w) {
      double r = spec.transmissivity(w);
      if (plan.tail_active) r -= plan.tail_amplitude / (w * w + b2);
      return r;
    };
    const auto breaks = oscillation_breaks(0.0, plan.omega_cut, t, spec);
    re = integrate_panels([&](double w) { return residual(w) * std::cos(w * t); }, breaks);
    re.value /= kPi;
    re.error /= kPi;
    if (plan.tail_active) {
      re.value += plan.tail_amplitude / (2.0 * plan.tail_rate) * std::exp(-plan.tail_rate * std::abs(t));
    }
    scale = spec.peak() * plan.omega_cut / kPi;
  } else {
    const auto breaks = oscillation_breaks(plan.lo, plan.hi, t, spec);
    re = integrate_panels([&](double w) { return spec.transmissivity(w) * std::cos(w * t); }, breaks);
    im = integrate_panels([&](double w) { return spec.transmissivity(w) * std::sin(w * t); }, breaks);
    re.value /= 2.0 * kPi;
    im.value /= 2.0 * kPi;
    re.error /= 2.0 * kPi;
    im.error /= 2.0 * kPi;
    scale = spec.peak() * (plan.hi - plan.lo) / (2.0 * kPi);
  }
  const double err = re.error + im.error;
  if (err > 1e-9 * std::max(scale, 1e-300) && err > 1e-14) {
    std::ostringstream msg;
    msg << "kernel quadrature at t=" << t << " did not converge (error estimate " << err << ")";
    throw NumericalFailure(msg.str(), err);
  }
  return {re.value, im.value};
}

std::complex<double> kernel_value_complex(const SpectrumSpec& spec, double t) {
  switch (spec.kind()) {
    case SpectrumKind::Lorentzian: {
      const auto& p = std::get<LorentzianParams>(spec.params());
      return p.eta_max * 0.5 * p.kappa * std::exp(-p.kappa * std::abs(t));
    }
    case SpectrumKind::Box: {
      const auto& p = std::get<BoxParams>(spec.params());
      const double x = p.omega_half_width * t;
      if (std::abs(x) < 1e-8) return p.eta_bar * p.omega_half_width / kPi * (1.0 - x * x / 6.0);
      return p.eta_bar * std::sin(x) / (kPi * t);
    }
    default: return kernel_value_numeric(spec, t);
  }
}

double kernel_value(const SpectrumSpec& spec, double t) {
  if (!spec.is_even()) {
    throw DomainError("kernel_value: spectrum is not even, use kernel_value_complex");
  }
  return kernel_value_complex(spec, t).real();
}

}  // namespace btl
