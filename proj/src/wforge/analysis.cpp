#include "wforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "wforge/errors.hpp"
#include "wforge/parallel.hpp"
#include "wforge/quadrature.hpp"

namespace wforge {

namespace {
const double kPi = std::acos(-1.0);
}

Expr TestFunction::expr() const {
  if (!(radius > 0.0)) throw ConfigError("TestFunction: radius must be positive");
  const Expr dx = x1() - constant(center.x);
  const Expr dy = x2() - constant(center.y);
  const Expr q = (1.0 / (radius * radius)) * (dx * dx + dy * dy);
  return amplitude * bump_profile(q);
}

std::vector<Vec2> circle_polygon(Vec2 center, double radius, int n) {
  std::vector<Vec2> poly;
  poly.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    poly.push_back({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
  }
  return poly;
}

SymField defect(const Expr& v, const std::array<Expr, 2>& w, const SymField& a) {
  return defect_field(v, w, a);
}

namespace {

/// Deterministic 2D integral of a compiled tape over [ax,bx] x [ay,by]:
/// composite Gauss with `cells` cells of 16 points per axis, rows evaluated in
/// parallel, sums accumulated in fixed order.  High per-cell order matters:
/// the bump profile's flat edge dominates the error otherwise.
double integrate_box(const Expr& f, double ax, double bx, double ay, double by, int cells) {
  const int pts = 16;
  cells = std::max(1, cells);
  const Composite1D qx = composite_gauss(ax, bx, cells, pts);
  const Composite1D qy = composite_gauss(ay, by, cells, pts);
  const Evaluator tape(f);
  std::vector<double> row_sum(qy.x.size(), 0.0);
  parallel_for(qy.x.size(), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch scratch;
    for (std::size_t j = jb; j < je; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < qx.x.size(); ++i)
        s += qx.w[i] * tape.eval(Vec2{qx.x[i], qy.x[j]}, scratch);
      row_sum[j] = qy.w[j] * s;
    }
  });
  double total = 0.0;
  for (double s : row_sum) total += s;
  return total;
}

}  // namespace

double weak_hessian_residual(const Expr& v, const Expr& f, const TestFunction& phi,
                             const Domain& domain, int quad_resolution) {
  const double r = phi.radius;
  const Vec2 c = phi.center;
  if (c.x - r < domain.rect_min.x || c.x + r > domain.rect_max.x ||
      c.y - r < domain.rect_min.y || c.y + r > domain.rect_max.y)
    throw PreconditionError("weak_hessian_residual: test bump support escapes the domain");

  const Expr p = phi.expr();
  const Expr p11 = differentiate(p, 2, 0);
  const Expr p12 = differentiate(p, 1, 1);
  const Expr p22 = differentiate(p, 0, 2);
  const Expr v1 = differentiate(v, 1, 0);
  const Expr v2 = differentiate(v, 0, 1);
  // Pairing of -1/2 curl curl (grad v (x) grad v) with phi, both derivatives
  // moved onto the test function, minus the source pairing.
  const Expr integrand =
      (-0.5) * ((v1 * v1) * p22 + (v2 * v2) * p11 - 2.0 * ((v1 * v2) * p12)) - f * p;
  return std::abs(integrate_box(integrand, c.x - r, c.x + r, c.y - r, c.y + r, quad_resolution));
}

Expr det_hessian(const Expr& v) {
  const Expr v11 = differentiate(v, 2, 0);
  const Expr v12 = differentiate(v, 1, 1);
  const Expr v22 = differentiate(v, 0, 2);
  return v11 * v22 - v12 * v12;
}

namespace {

/// Point on the closed polygon at fractional edge coordinate: seg index i and
/// local parameter t in [0,1).
Vec2 polygon_point(const std::vector<Vec2>& poly, std::size_t i, double t) {
  const Vec2& a = poly[i];
  const Vec2& b = poly[(i + 1) % poly.size()];
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

struct BoundaryNode {
  std::size_t seg;
  double t;
  Vec2 image;  // map(point) - y
};

/// Signed angle from u to w in (-pi, pi].
double signed_angle(Vec2 u, Vec2 w) {
  return std::atan2(u.x * w.y - u.y * w.x, u.x * w.x + u.y * w.y);
}

int winding_pass(const std::array<Expr, 2>& map, const DegreeQuery& query, int initial_per_edge,
                 double* clearance_out) {
  const std::vector<Vec2>& poly = query.polygon;
  if (poly.size() < 3) throw ConfigError("brouwer_degree: polygon needs at least 3 vertices");

  const Evaluator tx(map[0]), ty(map[1]);
  thread_local EvalScratch sx, sy;
  auto eval_node = [&](std::size_t seg, double t) {
    const Vec2 p = polygon_point(poly, seg, t);
    return BoundaryNode{seg, t,
                        Vec2{tx.eval(p, sx) - query.y.x, ty.eval(p, sy) - query.y.y}};
  };

  std::vector<BoundaryNode> nodes;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (int k = 0; k < initial_per_edge; ++k)
      nodes.push_back(eval_node(i, static_cast<double>(k) / initial_per_edge));

  // Adaptive subdivision: split any arc whose image turns by >= pi/2, up to
  // the refinement depth.
  for (int depth = 0; depth < query.refinement; ++depth) {
    std::vector<BoundaryNode> next;
    next.reserve(nodes.size() * 2);
    bool split_any = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const BoundaryNode& a = nodes[i];
      const BoundaryNode& b = nodes[(i + 1) % nodes.size()];
      next.push_back(a);
      if (std::abs(signed_angle(a.image, b.image)) >= 0.5 * kPi) {
        // Midpoint in boundary arc-parameter space.
        double ga = static_cast<double>(a.seg) + a.t;
        double gb = static_cast<double>(b.seg) + b.t;
        if (gb <= ga) gb += static_cast<double>(poly.size());
        const double gm = std::fmod(0.5 * (ga + gb), static_cast<double>(poly.size()));
        const auto seg = static_cast<std::size_t>(gm);
        next.push_back(eval_node(seg, gm - static_cast<double>(seg)));
        split_any = true;
      }
    }
    nodes.swap(next);
    if (!split_any) break;
    if (nodes.size() > 2000000)
      throw NonConvergenceError("brouwer_degree: subdivision exceeded node budget");
  }

  double clearance = std::numeric_limits<double>::infinity();
  double max_seg = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec2 u = nodes[i].image;
    const Vec2 w = nodes[(i + 1) % nodes.size()].image;
    clearance = std::min(clearance, norm2(u));
    max_seg = std::max(max_seg, norm2(w - u));
    total += signed_angle(u, w);
  }
  if (clearance_out) *clearance_out = clearance;
  if (!(clearance > 3.0 * max_seg)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "brouwer_degree: degree-undefined, clearance %.6g not above 3x segment "
                  "diameter %.6g",
                  clearance, 3.0 * max_seg);
    throw PreconditionError(msg);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

}  // namespace

DegreeResult degree_detail(const std::array<Expr, 2>& map, const DegreeQuery& query) {
  DegreeResult r;
  const int d1 = winding_pass(map, query, 2, &r.clearance);
  // Stability check: one further refinement of the initial sampling.
  const int d2 = winding_pass(map, query, 4, &r.clearance);
  if (d1 != d2) {
    const int d3 = winding_pass(map, query, 8, &r.clearance);
    if (d3 != d2) throw NonConvergenceError("brouwer_degree: winding unstable under refinement");
    r.degree = d3;
    return r;
  }
  r.degree = d2;
  return r;
}

int brouwer_degree(const std::array<Expr, 2>& grad_v, const DegreeQuery& query) {
  return degree_detail(grad_v, query).degree;
}

int perturbed_degree(const Expr& v, double delta, const DegreeQuery& query) {
  const std::array<Expr, 2> map = {differentiate(v, 1, 0) - delta * x2(),
                                   differentiate(v, 0, 1) + delta * x1()};
  return brouwer_degree(map, query);
}

namespace {

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

}  // namespace

double degree_formula_residual(const Expr& v, const Expr& f, const DegreeQuery& query,
                               const TestFunction& g, int quad_resolution) {
  const std::array<Expr, 2> grad = {differentiate(v, 1, 0), differentiate(v, 0, 1)};

  // Left side: Int_U g(grad v) f by masked composite Gauss over the polygon's
  // bounding box.
  double bx0 = query.polygon[0].x, bx1 = bx0, by0 = query.polygon[0].y, by1 = by0;
  for (const Vec2& p : query.polygon) {
    bx0 = std::min(bx0, p.x);
    bx1 = std::max(bx1, p.x);
    by0 = std::min(by0, p.y);
    by1 = std::max(by1, p.y);
  }
  const int pts = 8;
  const int cells = std::max(1, quad_resolution / pts);
  const Composite1D qx = composite_gauss(bx0, bx1, cells, pts);
  const Composite1D qy = composite_gauss(by0, by1, cells, pts);
  const Expr gtree = g.expr();
  const Evaluator tgx(grad[0]), tgy(grad[1]), tg(gtree), tf(f);
  std::vector<double> row_sum(qy.x.size(), 0.0);
  parallel_for(qy.x.size(), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch s1, s2, s3, s4;
    for (std::size_t j = jb; j < je; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < qx.x.size(); ++i) {
        const Vec2 p{qx.x[i], qy.x[j]};
        if (!point_in_polygon(query.polygon, p)) continue;
        const Vec2 gv{tgx.eval(p, s1), tgy.eval(p, s2)};
        s += qx.w[i] * tg.eval(gv, s3) * tf.eval(p, s4);
      }
      row_sum[j] = qy.w[j] * s;
    }
  });
  double lhs = 0.0;
  for (double s : row_sum) lhs += s;

  // Right side: midpoint rule over the support square of g, one degree per
  // cell center; cells where g vanishes (or nearly so) contribute nothing.
  const double r = g.radius;
  const Vec2 c = g.center;
  const int n = std::max(8, quad_resolution);
  const double h = 2.0 * r / n;
  const Evaluator tg2(gtree);
  double rhs = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2 y{c.x - r + (i + 0.5) * h, c.y - r + (j + 0.5) * h};
      thread_local EvalScratch sg;
      const double gy = tg2.eval(y, sg);
      if (std::abs(gy) < 1e-14) continue;
      DegreeQuery q2 = query;
      q2.y = y;
      rhs += gy * h * h * static_cast<double>(brouwer_degree(grad, q2));
    }
  }
  return std::abs(lhs - rhs);
}

int gradient_image_boxcount(const Expr& v, const Domain& domain, int grid_n) {
  if (grid_n < 1) throw ConfigError("gradient_image_boxcount: grid_n must be positive");
  const Expr v1 = differentiate(v, 1, 0);
  const Expr v2 = differentiate(v, 0, 1);
  const Evaluator t1(v1), t2(v2);
  std::vector<Vec2> img(static_cast<std::size_t>(grid_n) * grid_n);
  parallel_for(static_cast<std::size_t>(grid_n), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch s1, s2;
    for (std::size_t j = jb; j < je; ++j)
      for (int i = 0; i < grid_n; ++i) {
        const Vec2 p{domain.rect_min.x + domain.width() * i / (grid_n - 1.0),
                     domain.rect_min.y + domain.height() * static_cast<double>(j) / (grid_n - 1.0)};
        img[j * grid_n + i] = {t1.eval(p, s1), t2.eval(p, s2)};
      }
  });
  Vec2 lo = img[0], hi = img[0];
  for (const Vec2& p : img) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const double wx = hi.x - lo.x, wy = hi.y - lo.y;
  if (wx <= 0.0 && wy <= 0.0) return 1;
  std::vector<char> occ(static_cast<std::size_t>(grid_n) * grid_n, 0);
  for (const Vec2& p : img) {
    const int i = wx > 0.0 ? std::min(grid_n - 1, static_cast<int>((p.x - lo.x) / wx * grid_n)) : 0;
    const int j = wy > 0.0 ? std::min(grid_n - 1, static_cast<int>((p.y - lo.y) / wy * grid_n)) : 0;
    occ[static_cast<std::size_t>(j) * grid_n + i] = 1;
  }
  int count = 0;
  for (char o : occ) count += o;
  return count;
}

}  // namespace wforge
