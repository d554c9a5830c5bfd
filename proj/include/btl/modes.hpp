#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "btl/kernel.hpp"
#include "btl/quadrature.hpp"
#include "btl/spectra.hpp"

namespace btl {

struct DiscretizationConfig {
  std::size_t n_points = 400;
  QuadratureKind rule = QuadratureKind::GaussLegendre;
  double eigen_tolerance = 1e-10;
  /// Add the quadrature defect of each row integral to the diagonal
  /// (corrects the kink of the kernel at t = t'). Gauss-Legendre only.
  bool singularity_subtraction = true;

  void validate() const;
};

/// Nystrom matrix B_ij = sqrt(w_i) K(t_i - t_j) sqrt(w_j) on [-T/2, T/2].
struct KernelMatrix {
  double T = 0.0;
  QuadratureRule rule;
  Eigen::MatrixXcd B;
  bool real = true;
  /// Sum over rows of |exact row integral - quadrature row integral|.
  double quadrature_error = 0.0;
};

struct ModeBasis {
  double T = 0.0;
  QuadratureKind rule = QuadratureKind::GaussLegendre;
  std::vector<double> grid;
  std::vector<double> weights;
  std::vector<double> lambdas;  // descending
  Eigen::MatrixXcd profiles;    // column k holds f_k(t_i)
  bool real = true;
  double quadrature_error = 0.0;
  /// |lambda_k(2n) - lambda_k(n)|, filled by refine_modes.
  std::vector<double> error_estimates;

  std::size_t size() const noexcept { return grid.size(); }
  /// Sum_i w_i conj(f_j(t_i)) f_k(t_i)
  std::complex<double> inner(std::size_t j, std::size_t k) const;
};

KernelMatrix build_kernel_matrix(const Kernel& kernel, double T, const DiscretizationConfig& config);
KernelMatrix build_kernel_matrix(const SpectrumSpec& spec, double T, const DiscretizationConfig& config);

ModeBasis solve_modes(const Kernel& kernel, double T, const DiscretizationConfig& config);
ModeBasis solve_modes(const SpectrumSpec& spec, double T, const DiscretizationConfig& config);

/// Solves at n and 2n points and returns the 2n basis with per-eigenvalue
/// differences as error estimates.
ModeBasis refine_modes(const SpectrumSpec& spec, double T, const DiscretizationConfig& config);

/// Only the top `count` eigenvalues (all if count == 0), cheaper than a full basis.
std::vector<double> solve_lambdas(const Kernel& kernel, double T, const DiscretizationConfig& config,
                                  std::size_t count = 0);

/// CSV: '#' header lines (T, n, rule, lambdas), then rows t, w, f_1, ..., f_K.
/// Complex profiles write re/im column pairs.
void write_mode_csv(std::ostream& out, const ModeBasis& basis, std::size_t max_modes = 0);

const char* to_string(QuadratureKind kind);

}  // namespace btl
