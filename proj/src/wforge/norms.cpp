#include "wforge/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wforge/errors.hpp"
#include "wforge/parallel.hpp"

namespace wforge {

namespace {

/// Uniform lattice on the base rectangle with at least `resolution` points per
/// unit length per axis (endpoints included).
struct Lattice {
  std::vector<double> xs, ys;
};

Lattice make_lattice(const Domain& domain, int resolution) {
  if (resolution < 2) throw ConfigError("norm_estimate: resolution must be >= 2");
  auto axis = [&](double a, double b) {
    const int n = std::max(2, static_cast<int>(std::ceil((b - a) * resolution))) + 1;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
  };
  return {axis(domain.rect_min.x, domain.rect_max.x), axis(domain.rect_min.y, domain.rect_max.y)};
}

/// Parallel max of |f| (or of `map(f(x,y))`) over the lattice; the reduction
/// over row maxima is sequential, so results are thread-count independent.
template <typename PointFn>
double lattice_max(const Lattice& lat, const PointFn& fn) {
  const std::size_t ny = lat.ys.size();
  std::vector<double> row_max(ny, -std::numeric_limits<double>::infinity());
  parallel_for(ny, [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (double x : lat.xs) m = std::max(m, fn(Vec2{x, lat.ys[j]}));
      row_max[j] = m;
    }
  });
  double m = -std::numeric_limits<double>::infinity();
  for (double v : row_max) m = std::max(m, v);
  return m;
}

}  // namespace

NormEstimate norm_sup(const Expr& f, const Domain& domain, int resolution) {
  const Lattice lat = make_lattice(domain, resolution);
  const Evaluator tape(f);
  const double v = lattice_max(lat, [&](Vec2 p) {
    thread_local EvalScratch scratch;
    return std::abs(tape.eval(p, scratch));
  });
  return {v, NormKind::sup, resolution, 0, 0.0};
}

NormEstimate norm_cm(const Expr& f, const Domain& domain, int m, int resolution) {
  if (m < 0 || m > 3) throw PreconditionError("norm_cm: order must be in 0..3");
  double best = 0.0;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; i + j <= m; ++j) {
      const Expr d = differentiate(f, i, j);
      best = std::max(best, norm_sup(d, domain, resolution).value);
    }
  }
  return {best, NormKind::cm, resolution, m, 0.0};
}

NormEstimate norm_holder(const Expr& f, const Domain& domain, double alpha, int resolution) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("norm_holder: alpha must lie in (0, 1]");
  const Lattice lat = make_lattice(domain, resolution);
  const int nx = static_cast<int>(lat.xs.size());
  const int ny = static_cast<int>(lat.ys.size());

  // Precompute values on the lattice once.
  const Evaluator tape(f);
  std::vector<double> val(static_cast<std::size_t>(nx) * ny);
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch scratch;
    for (std::size_t j = jb; j < je; ++j)
      for (int i = 0; i < nx; ++i)
        val[j * nx + i] = tape.eval(Vec2{lat.xs[i], lat.ys[j]}, scratch);
  });

  // For each point, probe 8 lattice directions at dyadic index strides.
  static const int dirs[8][2] = {{1, 0}, {0, 1},  {1, 1},  {1, -1},
                                 {2, 1}, {1, 2},  {2, -1}, {1, -2}};
  std::vector<double> row_best(ny, 0.0);
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      double best = 0.0;
      for (int i = 0; i < nx; ++i) {
        const double fx = val[j * nx + i];
        for (const auto& d : dirs) {
          for (int s = 1;; s *= 2) {
            const int i2 = i + d[0] * s;
            const int j2 = static_cast<int>(j) + d[1] * s;
            if (i2 < 0 || i2 >= nx || j2 < 0 || j2 >= ny) break;
            const double ddx = lat.xs[i2] - lat.xs[i];
            const double ddy = lat.ys[j2] - lat.ys[j];
            const double dist = std::sqrt(ddx * ddx + ddy * ddy);
            const double q = std::abs(val[static_cast<std::size_t>(j2) * nx + i2] - fx) /
                             std::pow(dist, alpha);
            best = std::max(best, q);
          }
        }
      }
      row_best[j] = best;
    }
  });
  double best = 0.0;
  for (double v : row_best) best = std::max(best, v);
  return {best, NormKind::holder, resolution, 0, alpha};
}

NormEstimate norm_estimate(const Expr& f, const Domain& domain, NormKind kind, int resolution,
                           int m, double alpha) {
  switch (kind) {
    case NormKind::sup:
      return norm_sup(f, domain, resolution);
    case NormKind::cm:
      return norm_cm(f, domain, m, resolution);
    case NormKind::holder:
      return norm_holder(f, domain, alpha, resolution);
  }
  throw ConfigError("norm_estimate: unknown kind");
}

double commutator_gap(const Expr& f, const Expr& g, double l, double alpha, const Domain& domain,
                      int resolution, int quad_order) {
  (void)alpha;  // reported alongside the gap by callers fitting C l^{2 alpha}
  if (!(l > 0.0)) throw ConfigError("commutator_gap: l must be positive");
  if (domain.margin < l)
    throw PreconditionError("commutator_gap: domain margin smaller than mollification scale");
  const Expr fg_m = mollify(f * g, domain, l, quad_order);
  const Expr fm = mollify(f, domain, l, quad_order);
  const Expr gm = mollify(g, domain, l, quad_order);
  const Expr gap = fg_m - fm * gm;
  return norm_sup(gap, domain, resolution).value;
}

double lattice_min(const Expr& f, const Domain& domain, int resolution) {
  const Lattice lat = make_lattice(domain, resolution);
  const Evaluator tape(f);
  return -lattice_max(lat, [&](Vec2 p) {
    thread_local EvalScratch scratch;
    return -tape.eval(p, scratch);
  });
}

SymField sym_add(const SymField& a, const SymField& b) {
  return {a.e11 + b.e11, a.e12 + b.e12, a.e22 + b.e22};
}

SymField sym_sub(const SymField& a, const SymField& b) {
  return {a.e11 - b.e11, a.e12 - b.e12, a.e22 - b.e22};
}

SymField sym_scale(double s, const SymField& a) {
  return {s * a.e11, s * a.e12, s * a.e22};
}

SymField sym_const(Sym2 g) { return {constant(g.m11), constant(g.m12), constant(g.m22)}; }

NormEstimate sym_norm_sup(const SymField& d, const Domain& domain, int resolution) {
  const Lattice lat = make_lattice(domain, resolution);
  const Evaluator t11(d.e11), t12(d.e12), t22(d.e22);
  const double v = lattice_max(lat, [&](Vec2 p) {
    thread_local EvalScratch s11, s12, s22;
    return std::max({std::abs(t11.eval(p, s11)), std::abs(t12.eval(p, s12)),
                     std::abs(t22.eval(p, s22))});
  });
  return {v, NormKind::sup, resolution, 0, 0.0};
}

double sym_eig_min(const SymField& d, const Domain& domain, int resolution) {
  const Lattice lat = make_lattice(domain, resolution);
  const Evaluator t11(d.e11), t12(d.e12), t22(d.e22);
  return -lattice_max(lat, [&](Vec2 p) {
    thread_local EvalScratch s11, s12, s22;
    const Sym2 g{t11.eval(p, s11), t12.eval(p, s12), t22.eval(p, s22)};
    return -eig_min(g);
  });
}

}  // namespace wforge
