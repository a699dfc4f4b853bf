#pragma once

#include <array>
#include <vector>

#include "wforge/domain.hpp"
#include "wforge/norms.hpp"
#include "wforge/oscillate.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Verification instruments: distributional Hessian-determinant residuals
// against test bumps, Brouwer degree of gradient maps by adaptive boundary
// winding, the degree change-of-variables residual, and developability
// indicators.
// ---------------------------------------------------------------------------

/// Compactly supported radial test bump  amplitude * exp(-1/(1 - |x-c|^2/r^2))
/// on the disk |x - c| < r, zero outside, with exact tree derivatives.
struct TestFunction {
  Vec2 center{0.5, 0.5};
  double radius = 0.25;
  double amplitude = 1.0;

  [[nodiscard]] Expr expr() const;
};

/// Degree query: counterclockwise simple polygon (boundary of U) and target y.
struct DegreeQuery {
  std::vector<Vec2> polygon;
  Vec2 y{0.0, 0.0};
  int refinement = 18;  // max adaptive subdivision depth
};

struct DegreeResult {
  int degree = 0;
  double clearance = 0.0;  // min distance of y to the sampled boundary image
};

/// Regular n-gon approximating a circle (counterclockwise).
std::vector<Vec2> circle_polygon(Vec2 center, double radius, int n = 64);

/// Defect of (v, w) against A (re-export of the assembly used by stages).
SymField defect(const Expr& v, const std::array<Expr, 2>& w, const SymField& a);

/// | -1/2 Int[(d1 v)^2 d22 phi + (d2 v)^2 d11 phi - 2 (d1 v)(d2 v) d12 phi]
///   - Int f phi |  over the bump's bounding box, by composite Gauss
/// quadrature with quad_resolution points per axis.
double weak_hessian_residual(const Expr& v, const Expr& f, const TestFunction& phi,
                             const Domain& domain, int quad_resolution);

/// det of the exact Hessian:  d11 v * d22 v - (d12 v)^2  as a tree.
Expr det_hessian(const Expr& v);

/// Brouwer degree of a planar map on the query polygon via winding number of
/// the boundary image, with adaptive subdivision (every angular increment
/// < pi/2, result stable under one further refinement) and a clearance
/// requirement of 3x the largest boundary-segment image diameter.
DegreeResult degree_detail(const std::array<Expr, 2>& map, const DegreeQuery& query);
int brouwer_degree(const std::array<Expr, 2>& grad_v, const DegreeQuery& query);

/// Degree of the perturbed map  u_delta = grad v + delta (-x2, x1).
int perturbed_degree(const Expr& v, double delta, const DegreeQuery& query);

/// | Int_U g(grad v) f - Int g(y) deg(grad v, U, y) dy |: left side by masked
/// composite Gauss over the polygon, right side by midpoint quadrature over
/// the support of g with one degree evaluation per cell center.
double degree_formula_residual(const Expr& v, const Expr& f, const DegreeQuery& query,
                               const TestFunction& g, int quad_resolution);

/// Occupied-cell count when grad v, sampled on a grid_n x grid_n lattice over
/// the domain, is binned into a grid_n x grid_n grid over its own bounding
/// box.  ~grid_n for developable maps, ~grid_n^2 for area-filling gradients.
int gradient_image_boxcount(const Expr& v, const Domain& domain, int grid_n);

}  // namespace wforge
