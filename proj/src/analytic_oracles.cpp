#include "btl/analytic_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "btl/error.hpp"

namespace btl {

namespace {

constexpr double kPi = std::numbers::pi;

double bisect_root(double kappa_T, double lo, double hi) {
  double glo = lorentzian_root_function(kappa_T, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = lorentzian_root_function(kappa_T, mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Normalized Legendre values Pbar_k(x) = sqrt((2k+1)/2) P_k(x), k < m.
void normalized_legendre(double x, std::size_t m, std::vector<double>& out) {
  out.assign(m, 0.0);
  double p0 = 1.0, p1 = x;
  for (std::size_t k = 0; k < m; ++k) {
    double pk;
    if (k == 0) {
      pk = p0;
    } else if (k == 1) {
      pk = p1;
    } else {
      const double kk = static_cast<double>(k);
      pk = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = pk;
    }
    out[k] = std::sqrt((2.0 * static_cast<double>(k) + 1.0) / 2.0) * pk;
  }
}

struct SlepianAttempt {
  SlepianEigensystem system;
  double worst_residual = 0.0;
};

SlepianAttempt slepian_attempt(double c, std::size_t n_max, std::size_t m) {
  const double c2 = c * c;
  SlepianAttempt out;
  SlepianEigensystem& s = out.system;
  s.c = c;
  s.basis_size = m;
  s.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_max));
  s.chi.assign(n_max, 0.0);

  for (std::size_t parity = 0; parity < 2; ++parity) {
    std::vector<std::size_t> ks;
    for (std::size_t k = parity; k < m; k += 2) ks.push_back(k);
    const std::size_t nb = ks.size();
    std::vector<double> d(nb), e(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j) {
      const double k = static_cast<double>(ks[j]);
      d[j] = k * (k + 1.0) + c2 * (2.0 * k * k + 2.0 * k - 1.0) / ((2.0 * k - 1.0) * (2.0 * k + 3.0));
      if (j + 1 < nb) {
        e[j] = c2 * (k + 1.0) * (k + 2.0) / ((2.0 * k + 3.0) * std::sqrt((2.0 * k + 1.0) * (2.0 * k + 5.0)));
      }
    }
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    tridiagonal_ql(d, e, z);
    std::vector<std::size_t> order(nb);
    for (std::size_t j = 0; j < nb; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t n = 2 * j + parity;
      if (n >= n_max) break;
      s.chi[n] = d[order[j]];
      for (std::size_t r = 0; r < nb; ++r) {
        s.coefficients(static_cast<Eigen::Index>(ks[r]), static_cast<Eigen::Index>(n)) =
            z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(order[j]));
      }
    }
  }

  // Rayleigh quotients of the sinc kernel on a Gauss-Legendre grid.
  const std::size_t nq = m + static_cast<std::size_t>(std::ceil(c)) + 40;
  const QuadratureRule q = gauss_legendre(nq, -1.0, 1.0);
  const auto Q = static_cast<Eigen::Index>(nq);
  Eigen::MatrixXd P(Q, static_cast<Eigen::Index>(m));
  std::vector<double> row;
  for (Eigen::Index i = 0; i < Q; ++i) {
    normalized_legendre(q.nodes[static_cast<std::size_t>(i)], m, row);
    for (std::size_t k = 0; k < m; ++k) P(i, static_cast<Eigen::Index>(k)) = row[k];
  }
  Eigen::MatrixXd K(Q, Q);
  for (Eigen::Index i = 0; i < Q; ++i) {
    for (Eigen::Index j = 0; j < Q; ++j) {
      const double d = q.nodes[static_cast<std::size_t>(i)] - q.nodes[static_cast<std::size_t>(j)];
      K(i, j) = std::abs(c * d) < 1e-8 ? c / kPi * (1.0 - c * c * d * d / 6.0) : std::sin(c * d) / (kPi * d);
    }
  }
  Eigen::VectorXd w(Q);
  for (Eigen::Index i = 0; i < Q; ++i) w(i) = q.weights[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd phi = P * s.coefficients;  // values on the quadrature grid
  const Eigen::MatrixXd Kphi = K * w.asDiagonal() * phi;

  s.lambdas.assign(n_max, 0.0);
  s.residuals.assign(n_max, 0.0);
  s.mu.assign(n_max, 0.0);
  std::vector<double> at_one;
  normalized_legendre(1.0, m, at_one);
  for (std::size_t n = 0; n < n_max; ++n) {
    const auto N = static_cast<Eigen::Index>(n);
    const double norm2 = (w.array() * phi.col(N).array().square()).sum();
    const double lambda = (w.array() * phi.col(N).array() * Kphi.col(N).array()).sum() / norm2;
    const Eigen::VectorXd r = Kphi.col(N) - lambda * phi.col(N);
    const double residual = std::sqrt((w.array() * r.array().square()).sum() / norm2);
    s.lambdas[n] = lambda;
    s.residuals[n] = residual;
    out.worst_residual = std::max(out.worst_residual, residual);
    double end = 0.0;
    for (std::size_t k = 0; k < m; ++k) end += s.coefficients(static_cast<Eigen::Index>(k), N) * at_one[k];
    s.mu[n] = std::sqrt(norm2) / std::abs(end);
  }
  return out;
}

}  // namespace

void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e.resize(static_cast<std::size_t>(n), 0.0);
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  const auto at = [](std::vector<double>& v, int i) -> double& { return v[static_cast<std::size_t>(i)]; };
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(at(d, m)) + std::abs(at(d, m + 1));
        if (std::abs(at(e, m)) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericalFailure("tridiagonal QL did not converge", std::abs(at(e, l)));
        double g = (at(d, l + 1) - at(d, l)) / (2.0 * at(e, l));
        double r = std::hypot(g, 1.0);
        g = at(d, m) - at(d, l) + at(e, l) / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * at(e, i);
          const double b = c * at(e, i);
          r = std::hypot(f, g);
          at(e, i + 1) = r;
          if (r == 0.0) {
            at(d, i + 1) -= p;
            at(e, m) = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = at(d, i + 1) - p;
          r = (at(d, i) - g) * s + 2.0 * c * b;
          p = s * r;
          at(d, i + 1) = g + p;
          g = c * r - b;
          for (Eigen::Index k = 0; k < z.rows(); ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        at(d, l) -= p;
        at(e, l) = g;
        at(e, m) = 0.0;
      }
    } while (m != l);
  }
}

double lorentzian_root_function(double kappa_T, double C) {
  const double x = C * kappa_T;
  return std::sin(x) * (C * C - 1.0) - 2.0 * C * std::cos(x);
}

LorentzianEigensystem lorentzian_eigenvalues(double eta_max, double kappa, double T, std::size_t n_max) {
  if (!(eta_max > 0.0 && eta_max <= 1.0)) throw DomainError("eta_max must lie in (0, 1]");
  if (!(kappa > 0.0) || !(T > 0.0)) throw DomainError("kappa and T must be positive");
  if (n_max == 0) throw DomainError("n_max must be >= 1");
  LorentzianEigensystem sys;
  sys.eta_max = eta_max;
  sys.kappa = kappa;
  sys.T = T;
  sys.kappa_T = kappa * T;
  const double kT = sys.kappa_T;
  const double unit = kPi / kT;

  // Half-period n covers ((2n-1), (2n+1)) * pi / (2 kT): its left half holds a
  // root when it starts at or below C = 1, its right half when it ends at or above.
  auto try_bracket = [&](double lo, double hi, std::size_t n, bool left) {
    const double glo = lorentzian_root_function(kT, lo);
    const double ghi = lorentzian_root_function(kT, hi);
    double root;
    if (glo == 0.0) {
      root = lo;
    } else if (ghi == 0.0) {
      root = hi;
    } else if ((glo < 0.0) != (ghi < 0.0)) {
      root = bisect_root(kT, lo, hi);
    } else {
      return;
    }
    if (root <= 0.0) return;
    if (!sys.roots.empty() && std::abs(root - sys.roots.back()) < 1e-12 * std::max(1.0, root)) return;
    sys.roots.push_back(root);
    const bool cosine = left ? (n % 2 == 1) : (n % 2 == 0);
    sys.parity.push_back(cosine ? Parity::Even : Parity::Odd);
  };

  const auto last = static_cast<std::size_t>(kT / kPi) + 2 * n_max + 4;
  for (std::size_t n = 0; sys.roots.size() < n_max; ++n) {
    if (n > last) throw NumericalFailure("Lorentzian root bracketing missed a root", 0.0);
    const double nn = static_cast<double>(n);
    const double a = (2.0 * nn - 1.0) * 0.5 * unit;
    const double mid = nn * unit;
    const double b = (2.0 * nn + 1.0) * 0.5 * unit;
    if (n == 0) {
      if (b >= 1.0) try_bracket(1e-12 * b, b, 0, false);
      continue;
    }
    if (a <= 1.0) try_bracket(a, mid, n, true);
    if (sys.roots.size() < n_max && b >= 1.0) try_bracket(mid, b, n, false);
  }
  sys.roots.resize(n_max);
  sys.parity.resize(n_max);
  for (double C : sys.roots) sys.lambdas.push_back(eta_max / (1.0 + C * C));
  return sys;
}

double lorentzian_eigenfunction(const LorentzianEigensystem& system, std::size_t n, double t) {
  if (n == 0 || n > system.roots.size()) throw DomainError("mode index out of range");
  if (std::abs(t) > 0.5 * system.T * (1.0 + 1e-14)) throw DomainError("t outside [-T/2, T/2]");
  const double C = system.roots[n - 1];
  const double arg = C * system.kappa * t;
  const double spread = std::sin(C * system.kappa_T) / (2.0 * C * system.kappa);
  if (system.parity[n - 1] == Parity::Even) {
    return std::cos(arg) / std::sqrt(0.5 * system.T + spread);
  }
  return std::sin(arg) / std::sqrt(0.5 * system.T - spread);
}

ModeBasis lorentzian_mode_basis(const LorentzianEigensystem& system, const QuadratureRule& rule) {
  ModeBasis basis;
  basis.T = system.T;
  basis.rule = rule.kind;
  basis.grid = rule.nodes;
  basis.weights = rule.weights;
  basis.lambdas = system.lambdas;
  const auto n = static_cast<Eigen::Index>(rule.size());
  const auto K = static_cast<Eigen::Index>(system.roots.size());
  basis.profiles.resize(n, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double peak = 0.0, sign = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = lorentzian_eigenfunction(system, static_cast<std::size_t>(k) + 1,
                                                rule.nodes[static_cast<std::size_t>(i)]);
      basis.profiles(i, k) = v;
      if (std::abs(v) > (1.0 + 1e-9) * peak) {
        peak = std::abs(v);
        sign = v < 0.0 ? -1.0 : 1.0;
      }
    }
    basis.profiles.col(k) *= sign;
  }
  return basis;
}

SlepianEigensystem slepian_eigensystem(double c, std::size_t n_max, std::vector<double> grid) {
  if (!(c > 0.0)) throw DomainError("Slepian bandwidth c must be > 0");
  if (n_max == 0) throw DomainError("n_max must be >= 1");
  std::size_t m = std::max(2 * n_max + 30, static_cast<std::size_t>(std::ceil(2.0 * c)) + 40);
  SlepianAttempt attempt = slepian_attempt(c, n_max, m);
  for (int doubling = 0; doubling < 4 && attempt.worst_residual > 1e-8; ++doubling) {
    m *= 2;
    attempt = slepian_attempt(c, n_max, m);
  }
  if (attempt.worst_residual > 1e-8) {
    std::ostringstream msg;
    msg << "Slepian Rayleigh residual " << attempt.worst_residual << " with " << m
        << " Legendre terms; increase the basis";
    throw NumericalFailure(msg.str(), attempt.worst_residual);
  }
  SlepianEigensystem s = std::move(attempt.system);

  // Unit L2 norm, largest-magnitude sample positive.
  if (grid.empty()) grid = gauss_legendre(200, -1.0, 1.0).nodes;
  s.grid = std::move(grid);
  const auto G = static_cast<Eigen::Index>(s.grid.size());
  Eigen::MatrixXd P(G, static_cast<Eigen::Index>(m));
  std::vector<double> row;
  for (Eigen::Index i = 0; i < G; ++i) {
    const double x = s.grid[static_cast<std::size_t>(i)];
    if (std::abs(x) > 1.0 + 1e-14) throw DomainError("Slepian grid must lie in [-1, 1]");
    normalized_legendre(x, m, row);
    for (std::size_t k = 0; k < m; ++k) P(i, static_cast<Eigen::Index>(k)) = row[k];
  }
  s.psi = P * s.coefficients;
  for (Eigen::Index n = 0; n < s.psi.cols(); ++n) {
    // The coefficient vectors are already orthonormal in L2[-1, 1]; fix the sign only.
    double peak = 0.0, sign = 1.0;
    for (Eigen::Index i = 0; i < G; ++i) {
      const double v = s.psi(i, n);
      if (std::abs(v) > (1.0 + 1e-9) * peak) {
        peak = std::abs(v);
        sign = v < 0.0 ? -1.0 : 1.0;
      }
    }
    s.psi.col(n) *= sign;
    s.coefficients.col(n) *= sign;
  }
  return s;
}

double slepian_function(const SlepianEigensystem& system, std::size_t n, double x) {
  if (n >= static_cast<std::size_t>(system.coefficients.cols())) throw DomainError("mode index out of range");
  if (std::abs(x) > 1.0 + 1e-14) throw DomainError("x outside [-1, 1]");
  std::vector<double> row;
  normalized_legendre(x, system.basis_size, row);
  double v = 0.0;
  for (std::size_t k = 0; k < system.basis_size; ++k) {
    v += row[k] * system.coefficients(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  }
  return v;
}

ModeBasis slepian_mode_basis(const SlepianEigensystem& system, double eta_bar, double T,
                             const QuadratureRule& rule) {
  ModeBasis basis;
  basis.T = T;
  basis.rule = rule.kind;
  basis.grid = rule.nodes;
  basis.weights = rule.weights;
  for (double l : system.lambdas) basis.lambdas.push_back(eta_bar * l);
  const auto n = static_cast<Eigen::Index>(rule.size());
  const auto K = static_cast<Eigen::Index>(system.lambdas.size());
  basis.profiles.resize(n, K);
  const double scale = std::sqrt(2.0 / T);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = std::clamp(2.0 * rule.nodes[static_cast<std::size_t>(i)] / T, -1.0, 1.0);
      basis.profiles(i, k) = scale * slepian_function(system, static_cast<std::size_t>(k), x);
    }
  }
  return basis;
}

}  // namespace btl
