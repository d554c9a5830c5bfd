#include "btl/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "btl/error.hpp"
#include "btl/parallel.hpp"
#include "btl/quadrature.hpp"

namespace btl {

double pure_loss_capacity(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("transmissivity outside [0, 1]");
  if (eta <= 0.5) return 0.0;
  if (eta == 1.0) return std::numeric_limits<double>::infinity();
  return std::log2(eta / (1.0 - eta));
}

double CapacityRate::top(std::size_t k) const {
  if (k == 0) throw DomainError("channel index k must be >= 1");
  if (prefix.empty()) return 0.0;
  return prefix[std::min(k, prefix.size()) - 1];
}

CapacityRate capacity_rate(const std::vector<double>& lambdas, double T, double eta_ceiling) {
  if (!(T > 0.0)) throw DomainError("duration T must be > 0");
  CapacityRate out;
  out.T = T;
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0;
  for (double l : sorted) {
    if (l <= 0.5) break;
    if (l > eta_ceiling) {
      l = eta_ceiling;
      out.clamped = true;
    }
    sum += pure_loss_capacity(l);
    out.prefix.push_back(sum / T);
  }
  out.Q = sum / T;
  return out;
}

CapacityRate capacity_rate(const ModeBasis& basis, double eta_ceiling) {
  return capacity_rate(basis.lambdas, basis.T, eta_ceiling);
}

namespace {

constexpr double kUnitEta = 1.0 - 1e-14;
constexpr double kModelLevel = 1e-6;

// Distance from s towards `other` at which 1 - eta reaches kModelLevel.
double singular_radius(const SpectrumSpec& spec, double s, double other) {
  const double dir = other > s ? 1.0 : -1.0;
  double lo = 0.0;
  double hi = 0.5 * std::abs(other - s);
  if (1.0 - spec.transmissivity(s + dir * hi) < kModelLevel) return hi;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    (1.0 - spec.transmissivity(s + dir * m) < kModelLevel ? lo : hi) = m;
  }
  return hi;
}

// int over [s, s + r] (r may be negative) of q with 1 - eta = c |w - s|^p.
double singular_piece(const SpectrumSpec& spec, double s, double r) {
  const double a = std::abs(r);
  const double d1 = 1.0 - spec.transmissivity(s + r);
  const double d2 = 1.0 - spec.transmissivity(s + 0.25 * r);
  const double p = std::log(d1 / d2) / std::log(4.0);
  const double c = d1 / std::pow(a, p);
  const double ln2 = std::log(2.0);
  // log2(eta) - log2(c) - p log2(u), with log(eta) ~ -c u^p.
  return -c * std::pow(a, p + 1.0) / ((p + 1.0) * ln2) - a * std::log2(c) - p * (a * std::log2(a) - a / ln2);
}

}  // namespace

double continuous_time_capacity(const SpectrumSpec& spec) {
  auto [lo, hi] = spec.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    const double w = spec.cutoff(0.25);
    lo = -w;
    hi = w;
  }
  std::vector<double> marks{lo, hi, 0.0, spec.peak_location(), -spec.peak_location()};
  for (double b : spec.breakpoints()) marks.push_back(b);
  const std::size_t scan = 4096;
  for (std::size_t i = 0; i <= scan; ++i) marks.push_back(lo + (hi - lo) * static_cast<double>(i) / scan);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  marks.erase(std::remove_if(marks.begin(), marks.end(), [&](double w) { return w < lo || w > hi; }),
              marks.end());

  std::vector<double> eta(marks.size());
  for (std::size_t i = 0; i < marks.size(); ++i) eta[i] = spec.transmissivity(marks[i]);
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    if (eta[i] >= 1.0 && eta[i + 1] >= 1.0) {
      throw DivergenceError("transmissivity equals 1 on an interval; capacity diverges");
    }
  }

  // Crossing of eta = 1/2 between two scan points.
  auto crossing = [&](double a, double b) {
    const bool a_open = spec.transmissivity(a) > 0.5;
    for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      ((spec.transmissivity(m) > 0.5) == a_open ? a : b) = m;
    }
    return 0.5 * (a + b);
  };

  // Integration panels: open regions split at every mark where eta is singular or kinked.
  std::vector<double> specials{0.0, spec.peak_location(), -spec.peak_location()};
  for (double b : spec.breakpoints()) specials.push_back(b);
  auto q_of = [&](double w) { return pure_loss_capacity(std::clamp(spec.transmissivity(w), 0.0, 1.0)); };

  double total = 0.0;
  double error = 0.0;
  std::size_t i = 0;
  while (i < marks.size()) {
    if (eta[i] <= 0.5) {
      ++i;
      continue;
    }
    const double start = i == 0 ? marks[0] : crossing(marks[i - 1], marks[i]);
    std::size_t j = i;
    while (j + 1 < marks.size() && eta[j + 1] > 0.5) ++j;
    const double end = j + 1 == marks.size() ? marks[j] : crossing(marks[j], marks[j + 1]);
    std::vector<double> breaks{start, end};
    for (double s : specials) {
      if (s > start && s < end) breaks.push_back(s);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
      double a = breaks[p];
      double b = breaks[p + 1];
      // q diverges logarithmically where eta touches 1; integrate a local
      // power-law model of 1 - eta there, the rest adaptively.
      if (spec.transmissivity(a) >= kUnitEta) {
        const double r = singular_radius(spec, a, b);
        total += singular_piece(spec, a, r);
        a += r;
      }
      if (spec.transmissivity(b) >= kUnitEta) {
        const double r = singular_radius(spec, b, a);
        total += singular_piece(spec, b, -r);
        b -= r;
      }
      const auto part = integrate_adaptive(q_of, a, b, 1e-12, 20);
      total += part.value;
      error += part.error;
    }
    i = j + 1;
  }
  if (!std::isfinite(total) || error > 1e-8 * std::max(1.0, std::abs(total))) {
    std::ostringstream msg;
    msg << "capacity integral did not converge (error estimate " << error << ")";
    throw NumericalFailure(msg.str(), error);
  }
  return total / (2.0 * std::numbers::pi);
}

std::vector<OpeningTime> find_opening_times(const SpectrumSpec& spec, std::pair<double, double> T_range,
                                            std::size_t k_max, const DiscretizationConfig& config,
                                            const OpeningSearch& search) {
  const auto [lo, hi] = T_range;
  if (!(lo > 0.0 && hi > lo)) throw DomainError("opening-time search needs 0 < T_min < T_max");
  if (k_max == 0) throw DomainError("k_max must be >= 1");
  const std::size_t m = std::max<std::size_t>(search.coarse_points, 2);
  const Kernel kernel(spec, hi);

  std::vector<double> grid(m);
  std::vector<std::vector<double>> lambdas(m);
  for (std::size_t i = 0; i < m; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
  parallel_for(m, search.threads, [&](std::size_t i) { lambdas[i] = solve_lambdas(kernel, grid[i], config, k_max); });

  auto is_open = [&](double T, std::size_t n) { return solve_lambdas(kernel, T, config, n)[n - 1] > 0.5; };

  std::vector<OpeningTime> out(k_max);
  parallel_for(k_max, search.threads, [&](std::size_t idx) {
    const std::size_t n = idx + 1;
    std::size_t first = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (lambdas[i].size() >= n && lambdas[i][n - 1] > 0.5) {
        first = i;
        break;
      }
    }
    if (first == 0 || first == m) return;
    double a = grid[first - 1];
    double b = grid[first];
    while (b - a > search.relative_tolerance * b) {
      const double mid = 0.5 * (a + b);
      (is_open(mid, n) ? b : a) = mid;
    }
    out[idx] = {n, 0.5 * (a + b)};
  });
  out.erase(std::remove_if(out.begin(), out.end(), [](const OpeningTime& o) { return o.n == 0; }), out.end());
  return out;
}

OptimalDuration optimal_duration(const SpectrumSpec& spec, std::size_t k, std::pair<double, double> T_bracket,
                                 const DiscretizationConfig& config, const DurationSearch& search) {
  const auto [lo, hi] = T_bracket;
  if (k == 0) throw DomainError("channel index k must be >= 1");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("duration bracket needs 0 < T_min < T_max");
  const Kernel kernel(spec, hi);
  auto Qk = [&](double T) { return capacity_rate(solve_lambdas(kernel, T, config), T).top(k); };

  const std::size_t m = std::max<std::size_t>(search.coarse_points, 3);
  std::vector<double> grid(m), values(m);
  for (std::size_t i = 0; i < m; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
  parallel_for(m, search.threads, [&](std::size_t i) { values[i] = Qk(grid[i]); });
  const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  if (!(values[best] > 0.0)) throw NoChannelOpenError("Q_k vanishes across the whole duration bracket");

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, m - 1)];
  OptimalDuration out{grid[best], values[best]};
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = Qk(x1), f2 = Qk(x2);
  while (b - a > search.relative_tolerance * 0.5 * (a + b)) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = Qk(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = Qk(x2);
    }
    for (const auto& [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f > out.Q) out = {x, f};
    }
  }
  return out;
}

CapacityCurve capacity_sweep(const SpectrumSpec& spec, double t_min, double t_max, std::size_t t_points,
                             std::vector<std::size_t> k_list, const DiscretizationConfig& config,
                             const SweepOptions& options) {
  if (!(t_min > 0.0 && t_max >= t_min)) throw DomainError("sweep needs 0 < t_min <= t_max");
  if (t_points < 2) throw DomainError("sweep needs at least two T points");
  CapacityCurve curve;
  curve.k_list = std::move(k_list);
  curve.T.resize(t_points);
  for (std::size_t i = 0; i < t_points; ++i) {
    curve.T[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(t_points - 1);
  }
  curve.lambdas.resize(t_points);
  curve.Q.resize(t_points);
  curve.Qk.resize(t_points);
  std::vector<char> clamped(t_points, 0);
  const Kernel kernel(spec, t_max);
  parallel_for(t_points, options.threads, [&](std::size_t i) {
    try {
      auto lambdas = solve_lambdas(kernel, curve.T[i], config);
      const CapacityRate rate = capacity_rate(lambdas, curve.T[i], options.eta_ceiling);
      curve.Q[i] = rate.Q;
      for (std::size_t k : curve.k_list) curve.Qk[i].push_back(rate.top(k));
      clamped[i] = rate.clamped;
      lambdas.resize(std::min(lambdas.size(), options.lambdas_kept));
      curve.lambdas[i] = std::move(lambdas);
    } catch (const NumericalFailure& e) {
      std::ostringstream msg;
      msg << "at T=" << curve.T[i] << ": " << e.what();
      throw NumericalFailure(msg.str(), e.estimate());
    }
  });
  curve.clamped_rows.assign(clamped.begin(), clamped.end());
  curve.clamped = std::any_of(clamped.begin(), clamped.end(), [](char c) { return c != 0; });
  return curve;
}

void write_capacity_csv(std::ostream& out, const CapacityCurve& curve) {
  const auto old = out.precision(17);
  out << "T,Q";
  for (std::size_t k : curve.k_list) out << ",Q_" << k;
  out << ",clamped\n";
  for (std::size_t i = 0; i < curve.T.size(); ++i) {
    out << curve.T[i] << "," << curve.Q[i];
    for (double v : curve.Qk[i]) out << "," << v;
    out << "," << (i < curve.clamped_rows.size() && curve.clamped_rows[i] ? 1 : 0) << "\n";
  }
  out.precision(old);
}

void write_eigenvalue_csv(std::ostream& out, const CapacityCurve& curve) {
  std::size_t K = 0;
  for (const auto& row : curve.lambdas) K = std::max(K, row.size());
  const auto old = out.precision(17);
  out << "T";
  for (std::size_t k = 1; k <= K; ++k) out << ",lambda_" << k;
  out << "\n";
  for (std::size_t i = 0; i < curve.T.size(); ++i) {
    out << curve.T[i];
    for (std::size_t k = 0; k < K; ++k) out << "," << (k < curve.lambdas[i].size() ? curve.lambdas[i][k] : 0.0);
    out << "\n";
  }
  out.precision(old);
}

void write_opening_csv(std::ostream& out, const std::vector<OpeningTime>& openings) {
  const auto old = out.precision(17);
  out << "n,T_n\n";
  for (const auto& o : openings) out << o.n << "," << o.T << "\n";
  out.precision(old);
}

}  // namespace btl
