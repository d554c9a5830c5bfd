#include "btl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "btl/error.hpp"
#include "btl/quadrature.hpp"

namespace btl {

namespace {

std::complex<double> clenshaw(const std::vector<std::complex<double>>& a, double u) {
  std::complex<double> b1 = 0.0, b2 = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) {
    const std::complex<double> b0 = 2.0 * u * b1 - b2 + a[k];
    b2 = b1;
    b1 = b0;
  }
  return u * b1 - b2 + a[0];
}

}  // namespace

ChebyshevTable ChebyshevTable::build(const std::function<std::complex<double>(double)>& f,
                                     double t_max, double abs_tol) {
  if (!(t_max > 0.0)) throw DomainError("ChebyshevTable: t_max must be > 0");
  ChebyshevTable table;
  table.t_max_ = t_max;
  const std::size_t n = kDegree + 1;
  std::vector<double> unit(n);
  for (std::size_t j = 0; j < n; ++j) {
    unit[j] = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
  }
  // Depth-first refinement keeps panels in ascending order.
  std::vector<std::pair<double, double>> pending{{0.0, t_max}};
  std::vector<std::complex<double>> samples(n);
  while (!pending.empty()) {
    const auto [a, b] = pending.back();
    pending.pop_back();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t j = 0; j < n; ++j) samples[j] = f(mid + half * unit[j]);
    Panel panel;
    panel.a = a;
    panel.b = b;
    if (fit(samples, abs_tol, panel.coef) || half < 1e-9 * t_max) {
      table.panels_.push_back(std::move(panel));
    } else {
      pending.emplace_back(mid, b);
      pending.emplace_back(a, mid);
    }
  }
  table.finish();
  return table;
}

bool ChebyshevTable::fit(const std::vector<std::complex<double>>& samples, double abs_tol,
                         std::vector<std::complex<double>>& coef) {
  const std::size_t n = samples.size();
  coef.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += samples[j] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                   (static_cast<double>(j) + 0.5) / static_cast<double>(n));
    }
    coef[k] = 2.0 * sum / static_cast<double>(n);
  }
  coef[0] *= 0.5;
  double tail = 0.0;
  for (std::size_t k = n - 3; k < n; ++k) tail = std::max(tail, std::abs(coef[k]));
  return tail <= abs_tol;
}

void ChebyshevTable::finish() {
  std::complex<double> running = 0.0;
  for (Panel& p : panels_) {
    const std::size_t n = p.coef.size();
    // Antiderivative in the unit variable u; A_0 makes it vanish at u = -1.
    std::vector<std::complex<double>> big(n + 1, 0.0);
    auto c = [&](std::size_t k) { return k < n ? p.coef[k] : std::complex<double>(0.0); };
    big[1] = c(0) - 0.5 * c(2);
    for (std::size_t k = 2; k <= n; ++k) {
      big[k] = (c(k - 1) - c(k + 1)) / (2.0 * static_cast<double>(k));
    }
    std::complex<double> at_left = 0.0;
    for (std::size_t k = 1; k <= n; ++k) at_left += (k % 2 == 0 ? 1.0 : -1.0) * big[k];
    big[0] = -at_left;
    const double half = 0.5 * (p.b - p.a);
    for (auto& v : big) v *= half;
    p.antideriv = std::move(big);
    p.before = running;
    running += clenshaw(p.antideriv, 1.0);
  }
}

const ChebyshevTable::Panel& ChebyshevTable::locate(double t) const {
  if (panels_.empty()) throw DomainError("ChebyshevTable: empty table");
  auto it = std::upper_bound(panels_.begin(), panels_.end(), t,
                             [](double v, const Panel& p) { return v < p.a; });
  if (it == panels_.begin()) return panels_.front();
  return *std::prev(it);
}

std::complex<double> ChebyshevTable::value(double t) const {
  const Panel& p = locate(t);
  const double u = std::clamp((2.0 * t - p.a - p.b) / (p.b - p.a), -1.0, 1.0);
  return clenshaw(p.coef, u);
}

std::complex<double> ChebyshevTable::integral(double x) const {
  const Panel& p = locate(x);
  const double u = std::clamp((2.0 * x - p.a - p.b) / (p.b - p.a), -1.0, 1.0);
  return p.before + clenshaw(p.antideriv, u);
}

Kernel::Kernel(const SpectrumSpec& spec, double t_max) : spec_(spec), t_max_(t_max) {
  if (!(t_max > 0.0)) throw DomainError("Kernel: t_max must be > 0");
  if (spec.kind() == SpectrumKind::Lorentzian || spec.kind() == SpectrumKind::Box) return;
  tabulated_ = true;
  const double scale = std::abs(kernel_value_numeric(spec_, 0.0));
  if (scale == 0.0) {
    table_ = ChebyshevTable::build([](double) { return std::complex<double>(0.0); }, t_max_, 1.0);
    return;
  }
  table_ = ChebyshevTable::build([this](double t) { return kernel_value_numeric(spec_, t); },
                                 t_max_ * (1.0 + 1e-12), 1e-13 * scale);
}

std::complex<double> Kernel::operator()(double t) const {
  if (!tabulated_) return kernel_value_complex(spec_, t);
  const double at = std::abs(t);
  if (at > table_.t_max()) throw DomainError("Kernel: |t| exceeds the tabulated range");
  const auto v = table_.value(at);
  return t < 0.0 ? std::conj(v) : v;
}

std::complex<double> Kernel::integral(double x) const {
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  switch (spec_.kind()) {
    case SpectrumKind::Lorentzian: {
      const auto& p = std::get<LorentzianParams>(spec_.params());
      return sign * 0.5 * p.eta_max * -std::expm1(-p.kappa * ax);
    }
    case SpectrumKind::Box: {
      const auto& p = std::get<BoxParams>(spec_.params());
      return p.eta_bar / std::numbers::pi * sine_integral(p.omega_half_width * x);
    }
    default: break;
  }
  if (ax > table_.t_max()) throw DomainError("Kernel: |x| exceeds the tabulated range");
  const auto v = table_.integral(ax);
  return x < 0.0 ? -std::conj(v) : v;
}

}  // namespace btl
