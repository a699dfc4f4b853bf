#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wforge/analysis.hpp"

using namespace wforge;

namespace {
const Domain kUnit({0.0, 0.0}, {1.0, 1.0}, 0.25);
const Domain kWide({-1.0, -1.0}, {1.0, 1.0}, 0.25);
const std::array<Expr, 2> kZeroW{constant(0.0), constant(0.0)};

Expr half_norm_sq() { return 0.5 * (pow_of(x1(), 2.0) + pow_of(x2(), 2.0)); }

std::array<Expr, 2> grad_of(const Expr& v) {
  return {differentiate(v, 1, 0), differentiate(v, 0, 1)};
}
}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("test bumps vanish outside their disk and peak at the center") {
  TestFunction phi{{0.5, 0.5}, 0.25, 2.0};
  const Expr e = phi.expr();
  CHECK(e(0.5, 0.5) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-13));
  CHECK(e(0.76, 0.5) == 0.0);
  CHECK(e(0.1, 0.9) == 0.0);
  CHECK(differentiate(e, 1, 0)(0.8, 0.5) == 0.0);
  CHECK(differentiate(e, 2, 0)(0.5, 0.5) < 0.0);  // concave at the peak
}

TEST_CASE("defect assembly matches its definition") {
  const SymField a = sym_const({0.3, 0.0, 0.3});
  const SymField d = defect(constant(0.0), kZeroW, a);
  CHECK(d.at({0.4, 0.8}).m11 == doctest::Approx(0.3).epsilon(1e-14));
  const Expr v = sin_of(x1()) * x2();
  const SymField dz = defect(v, kZeroW, induced_tensor(v, kZeroW));
  CHECK(sym_norm_sup(dz, kUnit, 24).value < 1e-12);
}

TEST_CASE("distributional determinant residuals on constant-Hessian examples") {
  TestFunction phi{{0.5, 0.5}, 0.3, 1.0};
  CHECK(weak_hessian_residual(half_norm_sq(), constant(1.0), phi, kUnit, 128) < 1e-10);
  const Expr saddle = 0.5 * (pow_of(x1(), 2.0) - pow_of(x2(), 2.0));
  CHECK(weak_hessian_residual(saddle, constant(-1.0), phi, kUnit, 128) < 1e-10);
  const Expr mixed = x1() * x2() + 0.5 * pow_of(x1(), 2.0);
  CHECK(weak_hessian_residual(mixed, constant(-1.0), phi, kUnit, 128) < 1e-10);
}

TEST_CASE("distributional determinant residual detects a wrong right-hand side") {
  TestFunction phi{{0.5, 0.5}, 0.3, 1.0};
  CHECK(weak_hessian_residual(half_norm_sq(), constant(0.0), phi, kUnit, 128) > 1e-3);
}

TEST_CASE("distributional residual vanishes for smooth pairs up to quadrature error") {
  // the identity holds exactly for twice-differentiable v, so the residual
  // measures only the quadrature error of the two integrals
  const Expr v = sin_of(2.0 * x1()) * cos_of(x2());
  TestFunction phi{{0.5, 0.5}, 0.3, 1.0};
  CHECK(weak_hessian_residual(v, det_hessian(v), phi, kUnit, 64) < 1e-8);
}

TEST_CASE("test bumps escaping the domain are refused") {
  TestFunction phi{{0.95, 0.5}, 0.3, 1.0};
  CHECK_THROWS_WITH_AS((void)weak_hessian_residual(half_norm_sq(), constant(1.0), phi, kUnit, 32),
                       doctest::Contains("support"), PreconditionError);
}

TEST_CASE("Hessian determinant trees") {
  CHECK(det_hessian(half_norm_sq())(0.3, 0.9) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(det_hessian(pow_of(x1(), 3.0))(0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-13));
  // hand check: for sin(x1)sin(x2) at the origin the Hessian is [[0,1],[1,0]],
  // so the determinant is -1 (off-diagonal entries dominate)
  const Expr v = sin_of(x1()) * sin_of(x2());
  CHECK(det_hessian(v)(0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("winding degree of model gradient maps") {
  DegreeQuery q;
  q.polygon = circle_polygon({0.0, 0.0}, 0.6);
  q.y = {0.0, 0.0};
  CHECK(brouwer_degree(grad_of(half_norm_sq()), q) == 1);
  const Expr saddle = 0.5 * (pow_of(x1(), 2.0) - pow_of(x2(), 2.0));
  CHECK(brouwer_degree(grad_of(saddle), q) == -1);
  // gradient constant along lines: image is a curve, off-curve targets get 0
  const Expr dev = sin_of(x1());
  DegreeQuery qd = q;
  qd.y = {0.5, 0.4};
  CHECK(brouwer_degree(grad_of(dev), qd) == 0);
}

TEST_CASE("degree is stable under boundary refinement and start rotation") {
  for (int n : {48, 96}) {
    DegreeQuery q;
    q.polygon = circle_polygon({0.0, 0.0}, 0.6, n);
    q.y = {0.1, -0.05};
    CHECK(brouwer_degree(grad_of(half_norm_sq()), q) == 1);
  }
  DegreeQuery q;
  q.polygon = circle_polygon({0.0, 0.0}, 0.6, 64);
  std::rotate(q.polygon.begin(), q.polygon.begin() + 17, q.polygon.end());
  q.y = {0.1, -0.05};
  CHECK(brouwer_degree(grad_of(half_norm_sq()), q) == 1);
}

TEST_CASE("degree additivity over a split square") {
  auto box = [](double x0, double x1c, double y0, double y1c) {
    return std::vector<Vec2>{{x0, y0}, {x1c, y0}, {x1c, y1c}, {x0, y1c}};
  };
  auto densify = [](std::vector<Vec2> poly) {
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
      for (int t = 0; t < 16; ++t)
        out.push_back(a + (t / 16.0) * (b - a));
    }
    return out;
  };
  DegreeQuery whole, left, right;
  whole.polygon = densify(box(-0.6, 0.6, -0.6, 0.6));
  left.polygon = densify(box(-0.6, 0.0, -0.6, 0.6));
  right.polygon = densify(box(0.0, 0.6, -0.6, 0.6));
  whole.y = left.y = right.y = {-0.3, 0.1};
  const auto g = grad_of(half_norm_sq());
  const int dw = brouwer_degree(g, whole);
  const int dl = brouwer_degree(g, left);
  const int dr = brouwer_degree(g, right);
  CHECK(dw == 1);
  CHECK(dl == 1);
  CHECK(dr == 0);
  CHECK(dw == dl + dr);
}

TEST_CASE("targets too close to the boundary image are refused with the clearance") {
  DegreeQuery q;
  q.polygon = circle_polygon({0.0, 0.0}, 0.6);
  q.y = {0.6, 0.0};  // exactly on the image circle of the identity gradient
  CHECK_THROWS_WITH_AS((void)brouwer_degree(grad_of(half_norm_sq()), q),
                       doctest::Contains("clearance"), PreconditionError);
}

TEST_CASE("rotational perturbation of model maps") {
  DegreeQuery q;
  q.polygon = circle_polygon({0.0, 0.0}, 0.6);
  q.y = {0.0, 0.0};
  CHECK(perturbed_degree(half_norm_sq(), 0.1, q) == 1);
  CHECK(perturbed_degree(half_norm_sq(), 0.0, q) == brouwer_degree(grad_of(half_norm_sq()), q));
  // a gradient constant along vertical lines becomes orientation-covering
  // once perturbed; target the perturbed image of the region center.  The
  // boundary image passes within ~0.012 of that target, so the clearance
  // check needs a dense polygon.
  const Expr dev = sin_of(x1());
  DegreeQuery qd;
  qd.polygon = circle_polygon({0.0, 0.0}, 0.6, 512);
  qd.y = {1.0, 0.0};  // u_delta(0, 0) for v = sin(x1)
  CHECK(perturbed_degree(dev, 0.05, qd) == 1);
}

TEST_CASE("degree change-of-variables residual") {
  DegreeQuery q;
  q.polygon = circle_polygon({0.0, 0.0}, 0.4);
  q.y = {0.0, 0.0};
  TestFunction g{{0.0, 0.0}, 0.15, 1.0};
  const double r =
      degree_formula_residual(half_norm_sq(), constant(1.0), q, g, 128);
  CHECK(r <= 1e-4);

  // both sides vanish for the degenerate example with zero right-hand side
  const Expr dev = sin_of(x1());
  TestFunction g2{{0.5, 0.4}, 0.1, 1.0};
  const double r2 = degree_formula_residual(dev, constant(0.0), q, g2, 64);
  CHECK(r2 <= 1e-10);

  // linearity in the weight
  TestFunction g3 = g;
  g3.amplitude = 2.0;
  const double r3 = degree_formula_residual(half_norm_sq(), constant(1.0), q, g3, 128);
  CHECK(r3 <= 2.0 * r + 1e-9);
}

TEST_CASE("gradient image box counts separate covering from degenerate maps") {
  const int n = 64;
  const int id_count = gradient_image_boxcount(half_norm_sq(), kWide, n);
  const int dev_count = gradient_image_boxcount(sin_of(x1()), kWide, n);
  const int const_count = gradient_image_boxcount(constant(1.0), kWide, n);
  CHECK(id_count >= (n * n) / 2);
  CHECK(dev_count <= 4 * n);
  CHECK(const_count == 1);
}

TEST_CASE("circle polygons are counterclockwise with the right radius") {
  const auto poly = circle_polygon({0.2, -0.1}, 0.5, 32);
  REQUIRE(poly.size() == 32);
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    area2 += a.x * b.y - b.x * a.y;
  }
  CHECK(area2 > 0.0);  // counterclockwise
  for (const Vec2& p : poly)
    CHECK(norm2(p - Vec2{0.2, -0.1}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_SUITE_END();
