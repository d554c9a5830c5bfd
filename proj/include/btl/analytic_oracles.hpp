#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "btl/modes.hpp"
#include "btl/quadrature.hpp"

namespace btl {

enum class Parity { Even, Odd };

/// Eigensystem of the Lorentzian kernel (eta_max kappa/2) e^{-kappa|t-t'|} on
/// [-T/2, T/2]: lambda_n = eta_max / (1 + C_n^2), with f_n = cos(C_n kappa t)
/// or sin(C_n kappa t).
struct LorentzianEigensystem {
  double eta_max = 1.0;
  double kappa = 1.0;
  double T = 0.0;
  double kappa_T = 0.0;
  std::vector<double> roots;    // C_n, ascending
  std::vector<double> lambdas;  // descending
  std::vector<Parity> parity;
};

/// sin(C kT)(C^2 - 1) - 2C cos(C kT); zero exactly at the roots C_n.
double lorentzian_root_function(double kappa_T, double C);

LorentzianEigensystem lorentzian_eigenvalues(double eta_max, double kappa, double T, std::size_t n_max);

/// Unit-normalized f_n(t) on [-T/2, T/2], n = 1, 2, ...
double lorentzian_eigenfunction(const LorentzianEigensystem& system, std::size_t n, double t);

/// The analytic modes sampled on `rule` (which must span [-T/2, T/2]), in ModeBasis form.
ModeBasis lorentzian_mode_basis(const LorentzianEigensystem& system, const QuadratureRule& rule);

/// Eigenvalues and eigenfunctions of the sinc kernel sin(c(x-y))/(pi(x-y)) on [-1, 1].
struct SlepianEigensystem {
  double c = 0.0;
  std::vector<double> lambdas;  // lambda^s_n, n = 0, 1, ...
  std::vector<double> chi;      // eigenvalues of the prolate differential operator
  std::vector<double> mu;       // L2 norm on [-1, 1] of S_0n scaled to S_0n(c, 1) = 1
  std::vector<double> residuals;
  std::size_t basis_size = 0;
  Eigen::MatrixXd coefficients;  // normalized-Legendre coefficients, column n
  std::vector<double> grid;
  Eigen::MatrixXd psi;  // unit L2 norm on [-1, 1], column n sampled on `grid`
};

/// Commuting-operator (Legendre-Galerkin) solution; eigenvalues from Rayleigh
/// quotients of the sinc kernel. Throws NumericalFailure if the Rayleigh
/// residual stays above 1e-8.
SlepianEigensystem slepian_eigensystem(double c, std::size_t n_max, std::vector<double> grid = {});

/// Unit-L2 Slepian function phi_n(x) on [-1, 1].
double slepian_function(const SlepianEigensystem& system, std::size_t n, double x);

/// Box(eta_bar, Omega) modes at T = 2c/Omega on `rule`, in ModeBasis form.
ModeBasis slepian_mode_basis(const SlepianEigensystem& system, double eta_bar, double T,
                             const QuadratureRule& rule);

/// Implicit QL for a symmetric tridiagonal matrix (diag d, off-diagonal e with
/// e[i] coupling i and i+1). On return d holds eigenvalues (unsorted) and the
/// columns of z the eigenvectors, rotated from its initial contents.
void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, Eigen::MatrixXd& z);

}  // namespace btl
