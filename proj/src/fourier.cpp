#include "btl/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "btl/error.hpp"

namespace btl {

void spherical_bessel_sequence(double x, std::size_t count, std::vector<double>& out) {
  out.assign(count, 0.0);
  if (count == 0) return;
  if (x < 1e-8) {
    out[0] = 1.0 - x * x / 6.0;
    if (count > 1) out[1] = x / 3.0;
    return;
  }
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  if (x > static_cast<double>(count)) {
    out[0] = j0;
    if (count > 1) out[1] = j1;
    for (std::size_t l = 1; l + 1 < count; ++l) {
      out[l + 1] = (2.0 * static_cast<double>(l) + 1.0) / x * out[l] - out[l - 1];
    }
    return;
  }
  // Downward recurrence from well above both count and x.
  const auto top = static_cast<std::size_t>(std::max(static_cast<double>(count), x) +
                                            std::sqrt(40.0 * std::max(static_cast<double>(count), x)) + 20.0);
  double above = 0.0;
  double current = 1e-300;
  for (std::size_t l = top; l > 0; --l) {
    const double below = (2.0 * static_cast<double>(l) + 1.0) / x * current - above;
    above = current;
    current = below;
    if (l - 1 < count) out[l - 1] = current;
    if (l < count) out[l] = above;
    if (std::abs(current) > 1e250) {
      // Rescale everything accumulated so far.
      above *= 1e-250;
      current *= 1e-250;
      for (std::size_t k = l - 1; k < count; ++k) out[k] *= 1e-250;
    }
  }
  // Normalize on whichever of j0, j1 is better conditioned.
  const double scale = std::abs(j0) >= std::abs(j1) || count < 2 ? j0 / out[0] : j1 / out[1];
  for (double& v : out) v *= scale;
}

TimeToFrequency::TimeToFrequency(const QuadratureRule& rule) : rule_(rule) {
  const std::size_t n = rule.size();
  if (n < 2) throw DimensionError("time rule needs at least two nodes");
  center_ = 0.5 * (rule.lower + rule.upper);
  half_ = 0.5 * (rule.upper - rule.lower);
  if (rule.kind == QuadratureKind::Trapezoid) {
    nyquist_ = std::numbers::pi / (rule.nodes[1] - rule.nodes[0]);
    return;
  }
  nyquist_ = std::numeric_limits<double>::infinity();
  // a_l = (2l+1)/2 sum_i wref_i P_l(x_i) f_i, exact for the interpolant.
  const auto N = static_cast<Eigen::Index>(n);
  analysis_.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double x = (rule.nodes[static_cast<std::size_t>(i)] - center_) / half_;
    const double wref = rule.weights[static_cast<std::size_t>(i)] / half_;
    double p0 = 1.0, p1 = x;
    for (Eigen::Index l = 0; l < N; ++l) {
      double pl;
      if (l == 0) {
        pl = p0;
      } else if (l == 1) {
        pl = p1;
      } else {
        const double ll = static_cast<double>(l);
        pl = ((2.0 * ll - 1.0) * x * p1 - (ll - 1.0) * p0) / ll;
        p0 = p1;
        p1 = pl;
      }
      analysis_(l, i) = 0.5 * (2.0 * static_cast<double>(l) + 1.0) * wref * pl;
    }
  }
}

Eigen::MatrixXcd TimeToFrequency::apply(const Eigen::MatrixXcd& samples, const std::vector<double>& omega) const {
  const auto n = static_cast<Eigen::Index>(rule_.size());
  if (samples.rows() != n) throw DimensionError("profile samples do not match the time grid");
  const auto M = static_cast<Eigen::Index>(omega.size());
  Eigen::MatrixXcd out(M, samples.cols());
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  constexpr Eigen::Index kChunk = 4096;
  using C = std::complex<double>;

  if (rule_.kind == QuadratureKind::Trapezoid) {
    for (Eigen::Index start = 0; start < M; start += kChunk) {
      const Eigen::Index rows = std::min(kChunk, M - start);
      Eigen::MatrixXcd E(rows, n);
      for (Eigen::Index m = 0; m < rows; ++m) {
        const double w = omega[static_cast<std::size_t>(start + m)];
        for (Eigen::Index i = 0; i < n; ++i) {
          const double t = rule_.nodes[static_cast<std::size_t>(i)];
          E(m, i) = norm * rule_.weights[static_cast<std::size_t>(i)] * std::polar(1.0, -w * t);
        }
      }
      out.middleRows(start, rows).noalias() = E * samples;
    }
    return out;
  }

  const Eigen::MatrixXcd coef = analysis_.cast<C>() * samples;
  std::vector<double> j;
  const C powers[4] = {C(1, 0), C(0, -1), C(-1, 0), C(0, 1)};
  for (Eigen::Index start = 0; start < M; start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, M - start);
    Eigen::MatrixXcd E(rows, n);
    for (Eigen::Index m = 0; m < rows; ++m) {
      const double w = omega[static_cast<std::size_t>(start + m)];
      const double k = std::abs(w) * half_;
      spherical_bessel_sequence(k, static_cast<std::size_t>(n), j);
      // j_l is even/odd in its argument like P_l; the shift to the interval center is a phase.
      const C shift = std::polar(1.0, -w * center_);
      for (Eigen::Index l = 0; l < n; ++l) {
        const double sign = (w < 0.0 && (l % 2 == 1)) ? -1.0 : 1.0;
        E(m, l) = shift * (norm * half_ * 2.0 * sign * j[static_cast<std::size_t>(l)]) * powers[l % 4];
      }
    }
    out.middleRows(start, rows).noalias() = E * coef;
  }
  return out;
}

}  // namespace btl
