#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace btl {

enum class QuadratureKind { GaussLegendre, Trapezoid };

/// Nodes and weights of a quadrature rule on a finite interval.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::GaussLegendre;
  double lower = -1.0;
  double upper = 1.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule mapped to [a, b]. Nodes ascend and are
/// symmetric about the midpoint (node i mirrors node n-1-i).
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// n-point composite trapezoid rule on [a, b] (uniform spacing, n >= 2).
QuadratureRule trapezoid(std::size_t n, double a, double b);

/// Composite Gauss-Legendre rule over the panels delimited by `breaks`
/// (ascending), each panel further split so no sub-panel exceeds
/// `max_width`, with `order` nodes per sub-panel.
QuadratureRule composite_gauss_legendre(std::span<const double> breaks, double max_width,
                                        std::size_t order);

/// Legendre polynomial P_l(x) and its derivative, by three-term recurrence.
void legendre_with_derivative(std::size_t l, double x, double& p, double& dp);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (7-15) quadrature of f over [a, b], with
/// at most 2^max_depth panels. Stops once the summed |K15 - G7| estimate is
/// below rel_tol times the L1 norm of f on [a, b].
IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol = 1e-12, unsigned max_depth = 12);

/// Sum of adaptive integrals over consecutive panels [breaks[i], breaks[i+1]].
IntegrationResult integrate_panels(const std::function<double(double)>& f,
                                   std::span<const double> breaks, double rel_tol = 1e-12);

/// Sine integral Si(x) = int_0^x sin(s)/s ds.
double sine_integral(double x);

}  // namespace btl
