#pragma once

#include <vector>

namespace wforge {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule (Newton iteration on Legendre polynomials);
/// cached per order.
const GaussRule& gauss_legendre(int n);

/// Composite rule: `cells` equal subintervals of [a, b], `pts` Gauss points each.
struct Composite1D {
  std::vector<double> x;
  std::vector<double> w;
};
Composite1D composite_gauss(double a, double b, int cells, int pts);

}  // namespace wforge
