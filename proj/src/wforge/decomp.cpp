#include "wforge/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "wforge/errors.hpp"
#include "wforge/parallel.hpp"

namespace wforge {

namespace {

constexpr double kR0Cap = 1.0 / 8.0 - 1e-3;

/// 3x3 inverse by adjugate; used once on the constant direction matrix.
std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m) {
  const auto det2 = [&](int r0, int r1, int c0, int c1) {
    return m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
  };
  const double det =
      m[0][0] * det2(1, 2, 1, 2) - m[0][1] * det2(1, 2, 0, 2) + m[0][2] * det2(1, 2, 0, 1);
  if (std::abs(det) < 1e-14) throw PreconditionError("invert3: singular matrix");
  std::array<std::array<double, 3>, 3> inv{};
  inv[0][0] = det2(1, 2, 1, 2) / det;
  inv[0][1] = -det2(0, 2, 1, 2) / det;
  inv[0][2] = det2(0, 1, 1, 2) / det;
  inv[1][0] = -det2(1, 2, 0, 2) / det;
  inv[1][1] = det2(0, 2, 0, 2) / det;
  inv[1][2] = -det2(0, 1, 0, 2) / det;
  inv[2][0] = det2(1, 2, 0, 1) / det;
  inv[2][1] = -det2(0, 2, 0, 1) / det;
  inv[2][2] = det2(0, 1, 0, 1) / det;
  return inv;
}

Vec2 apply_sym(Sym2 s, Vec2 v) { return {s.m11 * v.x + s.m12 * v.y, s.m12 * v.x + s.m22 * v.y}; }

double frob_sq(Sym2 g) { return g.m11 * g.m11 + 2.0 * g.m12 * g.m12 + g.m22 * g.m22; }

}  // namespace

std::array<Vec2, 3> zeta_directions() {
  const double s12 = 1.0 / std::sqrt(12.0);
  const double r2 = std::sqrt(2.0);
  const double s2 = 1.0 / std::sqrt(2.0);
  return {Vec2{s12 * (2.0 + r2), s12 * (-2.0 + r2)},
          Vec2{s12 * (-2.0 + r2), s12 * (2.0 + r2)}, Vec2{s2, s2}};
}

std::array<std::array<double, 3>, 3> psi_functionals() {
  static const auto psi = [] {
    const auto z = zeta_directions();
    // Column k of M holds the (11, 12, 22) entries of zeta_k (x) zeta_k;
    // then  (G11, G12, G22)^T = M * Psi(G),  so the functionals are M^{-1}.
    std::array<std::array<double, 3>, 3> m{};
    for (int k = 0; k < 3; ++k) {
      const Sym2 zz = sym_outer(z[k]);
      m[0][k] = zz.m11;
      m[1][k] = zz.m12;
      m[2][k] = zz.m22;
    }
    return invert3(m);
  }();
  return psi;
}

double calibrate_r0() {
  static const double r0 = [] {
    const auto psi = psi_functionals();
    const double psi_id[3] = {psi[0][0] + psi[0][2], psi[1][0] + psi[1][2],
                              psi[2][0] + psi[2][2]};
    // Psi is linear, so along a unit direction U the positivity bound is
    // -Psi_k(Id)/Psi_k(U) whenever Psi_k(U) < 0; sweep a dense deterministic
    // grid of Frobenius-unit directions (a, b, c) with a^2 + 2b^2 + c^2 = 1.
    const double pi = std::acos(-1.0);
    double best = kR0Cap;
    const int nth = 257, nph = 512;
    for (int it = 0; it < nth; ++it) {
      const double th = pi * it / (nth - 1);
      for (int ip = 0; ip < nph; ++ip) {
        const double ph = 2.0 * pi * ip / nph;
        const double u11 = std::sin(th) * std::cos(ph);
        const double u22 = std::sin(th) * std::sin(ph);
        const double u12 = std::cos(th) / std::sqrt(2.0);
        for (int k = 0; k < 3; ++k) {
          const double pu = psi[k][0] * u11 + psi[k][1] * u12 + psi[k][2] * u22;
          if (pu < 0.0) best = std::min(best, -psi_id[k] / pu);
        }
      }
    }
    return 0.9 * best;
  }();
  return r0;
}

double BasisTriple::radius() const {
  const Sym2 si = sym_inverse(spd_sqrt(base));
  return r0 / frob_sq(si);
}

BasisTriple basis_for(Sym2 g0) {
  if (!(eig_min(g0) > 0.0))
    throw PreconditionError("basis_for: base point is not positive definite");
  BasisTriple b;
  b.zeta = zeta_directions();
  b.base = g0;
  b.r0 = calibrate_r0();
  const Sym2 s = spd_sqrt(g0);
  const Sym2 si = sym_inverse(s);
  const auto psi = psi_functionals();
  // Linear map L: (G11, G12, G22) -> entries of  G0^{-1/2} G G0^{-1/2}.
  std::array<std::array<double, 3>, 3> lmap{};
  const Sym2 basis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int j = 0; j < 3; ++j) {
    const Sym2 e = congruence(si, basis[j]);
    lmap[0][j] = e.m11;
    lmap[1][j] = e.m12;
    lmap[2][j] = e.m22;
  }
  for (int k = 0; k < 3; ++k) {
    const Vec2 sz = apply_sym(s, b.zeta[k]);
    const double w = dot(sz, sz);
    b.xi[k] = (1.0 / std::sqrt(w)) * sz;
    for (int j = 0; j < 3; ++j)
      b.phi_coeffs[k][j] =
          w * (psi[k][0] * lmap[0][j] + psi[k][1] * lmap[1][j] + psi[k][2] * lmap[2][j]);
  }
  return b;
}

namespace {

struct SampleSet {
  std::vector<Vec2> pts;
  std::vector<Sym2> vals;
};

SampleSet sample_field(const SymField& d, const Domain& domain, int resolution) {
  if (resolution < 2) throw ConfigError("decompose_field: resolution must be >= 2");
  const int nx = std::max(2, static_cast<int>(std::ceil(domain.width() * resolution))) + 1;
  const int ny = std::max(2, static_cast<int>(std::ceil(domain.height() * resolution))) + 1;
  SampleSet s;
  s.pts.resize(static_cast<std::size_t>(nx) * ny);
  s.vals.resize(s.pts.size());
  const Evaluator t11(d.e11), t12(d.e12), t22(d.e22);
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch s11, s12, s22;
    for (std::size_t j = jb; j < je; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec2 p{domain.rect_min.x + domain.width() * i / (nx - 1),
                     domain.rect_min.y + domain.height() * j / (ny - 1)};
        s.pts[j * nx + i] = p;
        s.vals[j * nx + i] = {t11.eval(p, s11), t12.eval(p, s12), t22.eval(p, s22)};
      }
  });
  return s;
}

/// Linear-functional expression  c . (D11, D12, D22)  as a tree.
Expr linear_in(const SymField& d, const std::array<double, 3>& c) {
  return c[0] * d.e11 + c[1] * d.e12 + c[2] * d.e22;
}

}  // namespace

RankOneSystem decompose_field(const SymField& d, const Domain& domain, int resolution) {
  const SampleSet s = sample_field(d, domain, resolution);

  // Precondition: pointwise positive definiteness on the sample lattice.
  for (std::size_t i = 0; i < s.vals.size(); ++i) {
    const double ev = eig_min(s.vals[i]);
    if (!(ev > 0.0)) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "decompose_field: field not positive definite at (%.6g, %.6g): "
                    "min eigenvalue %.6g",
                    s.pts[i].x, s.pts[i].y, ev);
      throw PreconditionError(msg);
    }
  }

  // Bounding box of the sampled range and its midpoint base point.
  Sym2 lo = s.vals[0], hi = s.vals[0];
  for (const Sym2& g : s.vals) {
    lo.m11 = std::min(lo.m11, g.m11);
    lo.m12 = std::min(lo.m12, g.m12);
    lo.m22 = std::min(lo.m22, g.m22);
    hi.m11 = std::max(hi.m11, g.m11);
    hi.m12 = std::max(hi.m12, g.m12);
    hi.m22 = std::max(hi.m22, g.m22);
  }
  const Sym2 mid = 0.5 * (lo + hi);

  RankOneSystem sys;
  if (eig_min(mid) > 0.0) {
    const BasisTriple b = basis_for(mid);
    double maxdist = 0.0;
    for (const Sym2& g : s.vals) maxdist = std::max(maxdist, frob(g - mid));
    if (maxdist <= 0.9 * b.radius()) {
      // Single-ball fast path: three global terms a_k = Phi_k(D)^{1/2}.
      for (int k = 0; k < 3; ++k)
        sys.terms.push_back({sqrt_pos(linear_in(d, b.phi_coeffs[k])), b.xi[k]});
      sys.multiplicity = 3;
      sys.patches = 1;
      return sys;
    }
  }

  // Greedy covering of the sampled range by positivity balls.  Each patch i
  // carries a box of half-width h_i = radius_i / 2 in the three matrix
  // coordinates (every interior point of the box lies strictly inside the
  // Frobenius ball), a smooth tensor bump theta_i supported on the box, and
  // claims the samples inside the box shrunk by 0.45, so values drifting
  // between lattice samples stay well inside the claiming patch's box.
  std::vector<char> covered(s.vals.size(), 0);
  struct Patch {
    BasisTriple basis;
    double h;
    Expr theta;
  };
  std::vector<Patch> patches;
  for (std::size_t seed = 0; seed < s.vals.size(); ++seed) {
    if (covered[seed]) continue;
    const Sym2 g0 = s.vals[seed];
    BasisTriple b = basis_for(g0);
    const double h = 0.5 * b.radius();
    auto coord_bump = [&](const Expr& e, double center) {
      return bump_profile(pow_of((1.0 / h) * (e - constant(center)), 2.0));
    };
    Expr theta = coord_bump(d.e11, g0.m11) * coord_bump(d.e12, g0.m12) *
                 coord_bump(d.e22, g0.m22);
    for (std::size_t i = 0; i < s.vals.size(); ++i) {
      if (covered[i]) continue;
      const Sym2 dd = s.vals[i] - g0;
      if (std::abs(dd.m11) <= 0.45 * h && std::abs(dd.m12) <= 0.45 * h &&
          std::abs(dd.m22) <= 0.45 * h)
        covered[i] = 1;
    }
    patches.push_back({std::move(b), h, std::move(theta)});
  }

  // Smooth partition of unity: theta_i / (sum_j theta_j + floor).  The floor
  // only matters off the covered set, where every theta vanishes identically.
  Expr z = constant(1e-300);
  for (const Patch& p : patches) z = z + p.theta;
  const Expr zinv = pow_of(std::move(z), -1.0);
  for (const Patch& p : patches) {
    for (int k = 0; k < 3; ++k) {
      Expr radicand = p.theta * zinv * linear_in(d, p.basis.phi_coeffs[k]);
      sys.terms.push_back({sqrt_pos(std::move(radicand)), p.basis.xi[k]});
    }
  }
  sys.patches = static_cast<int>(patches.size());

  // Bounded multiplicity: count patches active per sample.
  int maxact = 0;
  for (std::size_t i = 0; i < s.vals.size(); ++i) {
    int act = 0;
    for (const Patch& p : patches) {
      const Sym2 dd = s.vals[i] - p.basis.base;
      if (std::abs(dd.m11) < p.h && std::abs(dd.m12) < p.h && std::abs(dd.m22) < p.h) ++act;
    }
    maxact = std::max(maxact, act);
  }
  sys.multiplicity = 3 * maxact;
  return sys;
}

}  // namespace wforge
