#include "btl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>

#include "btl/error.hpp"
#include "btl/fourier.hpp"
#include "btl/multimode.hpp"
#include "btl/quadrature.hpp"

namespace btl {

namespace {

constexpr std::size_t kOmegaPoints = 200;
constexpr std::size_t kMonotoneProbes = 4000;
constexpr int kGoldenIterations = 80;

// Rejects spectra for which eta(w) <= eta(Omega) for |w| > Omega can fail.
void require_monotone_tail(const SpectrumSpec& spec, double lo, double hi) {
  if (!spec.is_even()) throw BoundInapplicableError("bound needs an even spectrum");
  const double slack = 1e-12 * std::max(spec.peak(), 1e-300);
  double prev = spec.transmissivity(lo);
  for (std::size_t i = 1; i <= kMonotoneProbes; ++i) {
    const double w = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kMonotoneProbes);
    const double eta = spec.transmissivity(w);
    if (eta > prev + slack) {
      throw BoundInapplicableError("spectrum is not monotone beyond its peak (rises near w = " +
                                   std::to_string(w) + ")");
    }
    prev = std::min(prev, eta);
  }
}

// Mass of P = |f_1|^2 inside [-Omega, Omega]: whole panels from the grid,
// the two partial panels by a fresh Gauss-Legendre rule.
class InsideMass {
 public:
  InsideMass(const FrequencyGrid& grid, const Eigen::VectorXd& mass, const TimeToFrequency& transform,
             const Eigen::MatrixXcd& profile)
      : edges_(grid.panel_edges), transform_(transform), profile_(profile) {
    const std::size_t panels = edges_.size() - 1;
    const std::size_t per_panel = grid.size() / panels;
    cumulative_.assign(edges_.size(), 0.0);
    for (std::size_t p = 0; p < panels; ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < per_panel; ++i) sum += mass[static_cast<Eigen::Index>(p * per_panel + i)];
      cumulative_[p + 1] = cumulative_[p] + sum;
    }
  }

  double operator()(double omega) const {
    const double lo = std::max(-omega, edges_.front());
    const double hi = std::min(omega, edges_.back());
    if (!(hi > lo)) return 0.0;
    const auto first = edge_index_at_or_above(lo);
    const auto last = edge_index_at_or_below(hi);
    if (first > last) return partial(lo, hi);
    return cumulative_[last] - cumulative_[first] + partial(lo, edges_[first]) + partial(edges_[last], hi);
  }

 private:
  std::size_t edge_index_at_or_above(double x) const {
    return static_cast<std::size_t>(std::lower_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
  }
  std::size_t edge_index_at_or_below(double x) const {
    return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin()) - 1;
  }
  double partial(double a, double b) const {
    if (!(b > a)) return 0.0;
    const QuadratureRule rule = gauss_legendre(16, a, b);
    const Eigen::MatrixXcd f = transform_.apply(profile_, rule.nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::norm(f(static_cast<Eigen::Index>(i), 0));
    return sum;
  }

  std::vector<double> edges_;
  std::vector<double> cumulative_;
  const TimeToFrequency& transform_;
  const Eigen::MatrixXcd& profile_;
};

template <class F>
std::pair<double, double> minimize_log_grid(const F& objective, double lo, double hi) {
  std::vector<double> omega(kOmegaPoints);
  std::vector<double> value(kOmegaPoints);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < kOmegaPoints; ++i) {
    omega[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(kOmegaPoints - 1));
    value[i] = objective(omega[i]);
  }
  const auto best = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  double a = omega[best == 0 ? 0 : best - 1];
  double b = omega[std::min(best + 1, kOmegaPoints - 1)];
  double arg = omega[best];
  double val = value[best];
  // Golden section on the bracketing cell; keeps the grid value if it wins.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < kGoldenIterations && b - a > 1e-12 * b; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d);
    }
  }
  for (auto [x, fx] : {std::pair{c, fc}, std::pair{d, fd}}) {
    if (fx < val) {
      val = fx;
      arg = x;
    }
  }
  return {arg, val};
}

}  // namespace

double chebyshev_bound(double eta_max, double mass_inside, double eta_at_omega, double second_moment,
                       double omega, double mass_outside, double unmeasured_mass) {
  const double tail = std::min(second_moment / (omega * omega), std::max(mass_outside, 0.0));
  return eta_max * mass_inside + eta_at_omega * (tail + std::max(unmeasured_mass, 0.0));
}

BoundReport lambda1_bound_diagnostic(const SpectrumSpec& spec, double T, const ModeBasis& basis) {
  if (!(T > 0.0)) throw DomainError("duration T must be > 0");
  if (basis.size() == 0) throw DomainError("empty mode basis");
  if (std::abs(basis.T - T) > 1e-12 * T) throw DomainError("mode basis was computed at a different T");

  BoundReport r;
  r.T = T;
  r.lambda1_numeric = basis.lambdas.front();

  const FrequencyGrid grid = make_frequency_grid(spec, T);
  const double w_hi = grid.panel_edges.back();
  const double w_lo = std::max(spec.peak_location(), 0.1 * spec.half_max_width());
  require_monotone_tail(spec, spec.peak_location(), w_hi);

  const ModeSet top = ModeSet::from_basis(basis, 1);
  const FrequencyModes freq = to_frequency(top, grid);
  const Eigen::VectorXd mass = freq.values.col(0).cwiseAbs2();
  double grid_mass = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) grid_mass += mass[static_cast<Eigen::Index>(m)];
  // Second moment about zero: the Chebyshev step is about w = 0, and for real
  // profiles P is even so this is the variance.
  double moment = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) moment += grid.omega[m] * grid.omega[m] * mass[static_cast<Eigen::Index>(m)];
  r.second_moment = moment;
  r.unmeasured_mass = std::max(0.0, 1.0 - grid_mass);

  const double eta_max = spec.peak();
  if (eta_max == 0.0) {
    r.omega_star = w_lo;
    r.omega_star_paper = w_lo;
    r.satisfied = r.lambda1_numeric <= 1e-9;
    return r;
  }

  const TimeToFrequency transform(top.rule);
  const InsideMass inside(grid, mass, transform, top.profiles);
  auto measured = [&](double omega) {
    const double p_in = inside(omega);
    return chebyshev_bound(eta_max, p_in, spec.transmissivity(omega), moment, omega, grid_mass - p_in,
                           r.unmeasured_mass);
  };
  const double spread = 4.0 * std::numbers::pi * std::numbers::pi / (T * T);
  auto paper = [&](double omega) {
    return eta_max * inside(omega) + spec.transmissivity(omega) * spread / (omega * omega);
  };

  if (w_hi > w_lo) {
    std::tie(r.omega_star, r.bound_value) = minimize_log_grid(measured, w_lo, w_hi);
    std::tie(r.omega_star_paper, r.bound_paper_form) = minimize_log_grid(paper, w_lo, w_hi);
  } else {
    r.omega_star = r.omega_star_paper = w_hi;
    r.bound_value = measured(w_hi);
    r.bound_paper_form = paper(w_hi);
  }
  r.bound_value = std::max(r.bound_value, 0.0);
  r.satisfied = r.lambda1_numeric <= r.bound_value + 1e-9;
  return r;
}

void write_bound_csv_header(std::ostream& out) { out << "T,omega_star,bound_measured_sigma,bound_paper_form,lambda1\n"; }

void write_bound_csv_row(std::ostream& out, const BoundReport& r) {
  const auto old = out.precision(17);
  out << r.T << ',' << r.omega_star << ',' << r.bound_value << ',' << r.bound_paper_form << ','
      << r.lambda1_numeric << '\n';
  out.precision(old);
}

}  // namespace btl
