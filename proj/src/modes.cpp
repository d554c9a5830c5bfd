#include "btl/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "btl/error.hpp"

namespace btl {

namespace {

constexpr double kTieTolerance = 1e-12;

QuadratureRule make_rule(double T, const DiscretizationConfig& config) {
  return config.rule == QuadratureKind::Trapezoid ? trapezoid(config.n_points, -0.5 * T, 0.5 * T)
                                                  : gauss_legendre(config.n_points, -0.5 * T, 0.5 * T);
}

void check_range(const Kernel& kernel, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("duration T must be positive and finite");
  if (T > kernel.t_max() * (1.0 + 1e-12)) {
    throw DomainError("kernel was built for a shorter interval than T");
  }
}

// Scale so the first sample of (near-)largest magnitude is real and positive.
template <class Vec>
void apply_sign_convention(Vec&& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const std::complex<double> z = v(i);
    if (std::abs(z) >= (1.0 - 1e-9) * peak) {
      v *= std::conj(z) / std::abs(z);
      return;
    }
  }
}

bool first_component_before(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

// Descending eigenvalue order; near-ties ordered by the first profile sample.
std::vector<Eigen::Index> sort_order(const Eigen::VectorXd& values, const Eigen::MatrixXcd& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values(order[end - 1]) - values(order[end]) < kTieTolerance) ++end;
    if (end - start > 1 && vectors.rows() > 0) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return first_component_before(vectors(0, a), vectors(0, b));
                       });
    }
    start = end;
  }
  return order;
}

double checked_clamp(double lambda, double tol) {
  if (lambda < -tol) {
    std::ostringstream msg;
    msg << "kernel matrix has a negative eigenvalue " << lambda << " below -" << tol;
    throw NumericalFailure(msg.str(), -lambda);
  }
  return std::max(lambda, 0.0);
}

}  // namespace

void DiscretizationConfig::validate() const {
  if (n_points < 8) throw DomainError("discretization needs n_points >= 8");
  if (!(eigen_tolerance > 0.0)) throw DomainError("eigen_tolerance must be > 0");
}

const char* to_string(QuadratureKind kind) {
  return kind == QuadratureKind::Trapezoid ? "trapezoid" : "gauss-legendre";
}

std::complex<double> ModeBasis::inner(std::size_t j, std::size_t k) const {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    s += weights[i] * std::conj(profiles(ii, static_cast<Eigen::Index>(j))) *
         profiles(ii, static_cast<Eigen::Index>(k));
  }
  return s;
}

KernelMatrix build_kernel_matrix(const Kernel& kernel, double T, const DiscretizationConfig& config) {
  config.validate();
  check_range(kernel, T);
  KernelMatrix out;
  out.T = T;
  out.rule = make_rule(T, config);
  out.real = kernel.is_real();
  const std::size_t n = out.rule.size();
  const auto& t = out.rule.nodes;
  const auto& w = out.rule.weights;
  const auto N = static_cast<Eigen::Index>(n);

  Eigen::MatrixXcd K(N, N);
  if (config.rule == QuadratureKind::Trapezoid) {
    // Uniform grid: K depends on i - j only.
    const double h = (out.rule.upper - out.rule.lower) / static_cast<double>(n - 1);
    std::vector<std::complex<double>> diag(n);
    for (std::size_t d = 0; d < n; ++d) diag[d] = kernel(h * static_cast<double>(d));
    for (Eigen::Index i = 0; i < N; ++i) {
      for (Eigen::Index j = 0; j < N; ++j) {
        const auto d = static_cast<std::size_t>(std::abs(i - j));
        K(i, j) = i >= j ? diag[d] : std::conj(diag[d]);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < N; ++i) {
      K(i, i) = kernel(0.0);
      for (Eigen::Index j = 0; j < i; ++j) {
        K(i, j) = kernel(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]);
        K(j, i) = std::conj(K(i, j));
      }
    }
  }

  Eigen::VectorXd sw(N);
  for (Eigen::Index i = 0; i < N; ++i) sw(i) = std::sqrt(w[static_cast<std::size_t>(i)]);
  out.B = sw.asDiagonal() * K * sw.asDiagonal();

  // On a uniform grid the defect is dominated by the O(h^2) endpoint error of
  // the trapezoid rule, and moving it onto the diagonal breaks positivity.
  const bool subtract = config.singularity_subtraction && config.rule == QuadratureKind::GaussLegendre;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    const std::complex<double> exact = kernel.integral(ti + 0.5 * T) - kernel.integral(ti - 0.5 * T);
    std::complex<double> approx = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) approx += w[static_cast<std::size_t>(j)] * K(i, j);
    const std::complex<double> defect = exact - approx;
    out.quadrature_error += std::abs(defect);
    if (subtract) out.B(i, i) += defect.real();
  }
  out.B = 0.5 * (out.B + out.B.adjoint()).eval();
  if (out.real) out.B = out.B.real().cast<std::complex<double>>();
  return out;
}

KernelMatrix build_kernel_matrix(const SpectrumSpec& spec, double T, const DiscretizationConfig& config) {
  return build_kernel_matrix(Kernel(spec, T), T, config);
}

ModeBasis solve_modes(const Kernel& kernel, double T, const DiscretizationConfig& config) {
  const KernelMatrix km = build_kernel_matrix(kernel, T, config);
  const auto N = km.B.rows();
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  if (km.real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.B.real());
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 0.0);
    values = es.eigenvalues();
    vectors = es.eigenvectors().cast<std::complex<double>>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(km.B);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 0.0);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }

  ModeBasis basis;
  basis.T = T;
  basis.rule = km.rule.kind;
  basis.grid = km.rule.nodes;
  basis.weights = km.rule.weights;
  basis.real = km.real;
  basis.quadrature_error = km.quadrature_error;

  // Profiles f = v / sqrt(w), phase-fixed before ordering so ties sort reproducibly.
  Eigen::MatrixXcd profiles(N, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    for (Eigen::Index i = 0; i < N; ++i) {
      profiles(i, k) = vectors(i, k) / std::sqrt(km.rule.weights[static_cast<std::size_t>(i)]);
    }
    apply_sign_convention(profiles.col(k));
  }
  const auto order = sort_order(values, profiles);
  basis.profiles.resize(N, N);
  basis.lambdas.resize(static_cast<std::size_t>(N));
  for (Eigen::Index k = 0; k < N; ++k) {
    basis.lambdas[static_cast<std::size_t>(k)] = checked_clamp(values(order[static_cast<std::size_t>(k)]),
                                                               config.eigen_tolerance);
    basis.profiles.col(k) = profiles.col(order[static_cast<std::size_t>(k)]);
  }
  return basis;
}

ModeBasis solve_modes(const SpectrumSpec& spec, double T, const DiscretizationConfig& config) {
  return solve_modes(Kernel(spec, T), T, config);
}

std::vector<double> solve_lambdas(const Kernel& kernel, double T, const DiscretizationConfig& config,
                                  std::size_t count) {
  const KernelMatrix km = build_kernel_matrix(kernel, T, config);
  Eigen::VectorXd values;
  if (km.real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.B.real(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 0.0);
    values = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(km.B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 0.0);
    values = es.eigenvalues();
  }
  std::vector<double> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  for (double& v : out) v = checked_clamp(v, config.eigen_tolerance);
  if (count > 0 && count < out.size()) out.resize(count);
  return out;
}

ModeBasis refine_modes(const SpectrumSpec& spec, double T, const DiscretizationConfig& config) {
  const Kernel kernel(spec, T);
  const ModeBasis coarse = solve_modes(kernel, T, config);
  DiscretizationConfig fine_config = config;
  fine_config.n_points = 2 * config.n_points;
  ModeBasis fine = solve_modes(kernel, T, fine_config);
  fine.error_estimates.assign(fine.lambdas.size(), 0.0);
  for (std::size_t k = 0; k < coarse.lambdas.size(); ++k) {
    fine.error_estimates[k] = std::abs(fine.lambdas[k] - coarse.lambdas[k]);
  }
  return fine;
}

void write_mode_csv(std::ostream& out, const ModeBasis& basis, std::size_t max_modes) {
  const std::size_t n = basis.size();
  const std::size_t K = max_modes == 0 ? n : std::min(max_modes, n);
  const auto old_precision = out.precision(17);
  out << "# T=" << basis.T << "\n";
  out << "# n=" << n << " rule=" << to_string(basis.rule) << (basis.real ? "" : " complex") << "\n";
  out << "# lambdas=";
  for (std::size_t k = 0; k < K; ++k) out << (k ? " " : "") << basis.lambdas[k];
  out << "\n";
  out << "t,w";
  for (std::size_t k = 1; k <= K; ++k) {
    if (basis.real) {
      out << ",f_" << k;
    } else {
      out << ",re_f_" << k << ",im_f_" << k;
    }
  }
  out << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << basis.grid[i] << "," << basis.weights[i];
    for (std::size_t k = 0; k < K; ++k) {
      const auto z = basis.profiles(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      out << "," << z.real();
      if (!basis.real) out << "," << z.imag();
    }
    out << "\n";
  }
  out.precision(old_precision);
}

}  // namespace btl
