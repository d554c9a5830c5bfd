#include "btl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "btl/error.hpp"

namespace btl {

void legendre_with_derivative(std::size_t l, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (l == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (std::size_t k = 2; k <= l; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  // Derivative from the standard identity; the endpoints use the closed form.
  if (std::abs(x) == 1.0) {
    const double ll = static_cast<double>(l);
    dp = 0.5 * ll * (ll + 1.0) * (x > 0 ? 1.0 : (l % 2 == 0 ? -1.0 : 1.0));
  } else {
    dp = static_cast<double>(l) * (x * p1 - p0) / (x * x - 1.0);
  }
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  if (!(b > a)) throw DomainError("gauss_legendre: empty interval");
  std::vector<double> x(n), w(n);
  const std::size_t half = (n + 1) / 2;
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root, then Newton.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_with_derivative(n, z, p, dp);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    legendre_with_derivative(n, z, p, dp);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[n - 1 - i] = z;
    x[i] = -z;
    w[n - 1 - i] = weight;
    w[i] = weight;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.kind = QuadratureKind::GaussLegendre;
  rule.lower = a;
  rule.upper = b;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half_len = 0.5 * (b - a);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half_len * x[i];
    rule.weights[i] = half_len * w[i];
  }
  return rule;
}

QuadratureRule trapezoid(std::size_t n, double a, double b) {
  if (n < 2) throw DomainError("trapezoid: need at least two nodes");
  if (!(b > a)) throw DomainError("trapezoid: empty interval");
  QuadratureRule rule;
  rule.kind = QuadratureKind::Trapezoid;
  rule.lower = a;
  rule.upper = b;
  rule.nodes.resize(n);
  rule.weights.assign(n, (b - a) / static_cast<double>(n - 1));
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) rule.nodes[i] = a + h * static_cast<double>(i);
  rule.nodes.back() = b;
  rule.weights.front() *= 0.5;
  rule.weights.back() *= 0.5;
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breaks, double max_width,
                                        std::size_t order) {
  if (breaks.size() < 2) throw DomainError("composite_gauss_legendre: need two breakpoints");
  if (!(max_width > 0.0)) throw DomainError("composite_gauss_legendre: max_width must be > 0");
  const QuadratureRule ref = gauss_legendre(order, -1.0, 1.0);
  QuadratureRule rule;
  rule.kind = QuadratureKind::GaussLegendre;
  rule.lower = breaks.front();
  rule.upper = breaks.back();
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    if (!(b > a)) continue;
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / max_width));
    const double width = (b - a) / static_cast<double>(pieces);
    for (std::size_t s = 0; s < pieces; ++s) {
      const double lo = a + width * static_cast<double>(s);
      const double mid = lo + 0.5 * width;
      for (std::size_t i = 0; i < order; ++i) {
        rule.nodes.push_back(mid + 0.5 * width * ref.nodes[i]);
        rule.weights.push_back(0.5 * width * ref.weights[i]);
      }
    }
  }
  return rule;
}

namespace {

struct Panel {
  double a, b, value, error, l1;
  unsigned depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod_15(const std::function<double(double)>& f, double a, double b, unsigned depth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  static const auto& x = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  // Abscissae ascend from 0; Gauss nodes are the even-indexed Kronrod ones.
  const double f0 = f(mid);
  double kronrod = wk[0] * f0;
  double gauss = wg[0] * f0;
  double absolute = wk[0] * std::abs(f0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fl = f(mid - half * x[i]);
    const double fr = f(mid + half * x[i]);
    kronrod += wk[i] * (fl + fr);
    absolute += wk[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 0) gauss += wg[i / 2] * (fl + fr);
  }
  return {a, b, half * kronrod, std::abs(half * (kronrod - gauss)), std::abs(half) * absolute, depth};
}

}  // namespace

IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol, unsigned max_depth) {
  // Globally adaptive: always bisect the panel with the largest error estimate.
  IntegrationResult out;
  if (a == b) return out;
  std::priority_queue<Panel> heap;
  std::vector<Panel> done;
  heap.push(gauss_kronrod_15(f, a, b, 0));
  double error = heap.top().error;
  double l1 = heap.top().l1;
  const std::size_t max_panels = std::size_t{1} << std::min(max_depth, 16u);
  while (!heap.empty() && heap.size() + done.size() < max_panels) {
    if (error <= rel_tol * l1 || error <= 1e-300) break;
    Panel worst = heap.top();
    heap.pop();
    if (worst.depth >= 60 || !(worst.b - worst.a > 8.0 * std::numeric_limits<double>::epsilon() * std::abs(worst.a))) {
      done.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gauss_kronrod_15(f, worst.a, mid, worst.depth + 1);
    const Panel right = gauss_kronrod_15(f, mid, worst.b, worst.depth + 1);
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to avoid drift from the running updates.
  out.value = 0.0;
  out.error = 0.0;
  for (const auto& p : done) {
    out.value += p.value;
    out.error += p.error;
  }
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  return out;
}

IntegrationResult integrate_panels(const std::function<double(double)>& f,
                                   std::span<const double> breaks, double rel_tol) {
  IntegrationResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const auto part = integrate_adaptive(f, breaks[i], breaks[i + 1], rel_tol);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

namespace {

double sine_integral_series(double x) {
  // sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
  double term = x;
  double sum = x;
  const double x2 = x * x;
  for (int k = 1; k < 60; ++k) {
    term *= -x2 / (static_cast<double>(2 * k) * static_cast<double>(2 * k + 1));
    const double add = term / static_cast<double>(2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double sine_integral_asymptotic(double x) {
  // Si(x) = pi/2 - f(x) cos x - g(x) sin x with the usual auxiliary series.
  double f = 0.0, g = 0.0;
  double term_f = 1.0 / x;
  double term_g = 1.0 / (x * x);
  for (int k = 0; k < 40; ++k) {
    f += term_f;
    g += term_g;
    const double kk = static_cast<double>(2 * k);
    const double next_f = -term_f * (kk + 1.0) * (kk + 2.0) / (x * x);
    const double next_g = -term_g * (kk + 2.0) * (kk + 3.0) / (x * x);
    if (std::abs(next_f) > std::abs(term_f) || std::abs(next_f) < 1e-18) break;
    term_f = next_f;
    term_g = next_g;
  }
  return 0.5 * std::numbers::pi - f * std::cos(x) - g * std::sin(x);
}

}  // namespace

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x <= 4.0) return sine_integral_series(x);
  if (x >= 40.0) return sine_integral_asymptotic(x);
  // Si(4) plus a composite Gauss-Legendre integral of sin(s)/s on [4, x].
  static const QuadratureRule ref = gauss_legendre(20, -1.0, 1.0);
  double sum = sine_integral_series(4.0);
  const auto panels = static_cast<std::size_t>(std::ceil(x - 4.0));
  const double width = (x - 4.0) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = 4.0 + width * (static_cast<double>(p) + 0.5);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double s = mid + 0.5 * width * ref.nodes[i];
      sum += 0.5 * width * ref.weights[i] * std::sin(s) / s;
    }
  }
  return sum;
}

}  // namespace btl
