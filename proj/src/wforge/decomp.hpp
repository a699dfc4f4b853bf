#pragma once

#include <array>
#include <vector>

#include "wforge/domain.hpp"
#include "wforge/norms.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Rank-one decompositions of symmetric positive definite 2x2 matrices and
// matrix fields: a fixed three-direction basis with linear coefficient
// functionals, adapted bases at arbitrary SPD base points, and a covering
// decomposition for matrix fields whose range exceeds one positivity ball.
// ---------------------------------------------------------------------------

/// The three fixed unit directions zeta_1, zeta_2, zeta_3.
std::array<Vec2, 3> zeta_directions();

/// Coefficients of the linear functionals Psi_k acting on (G11, G12, G22),
/// determined by inverting the 3x3 matrix of zeta_k (x) zeta_k entries, so
/// that  G = sum_k Psi_k(G) zeta_k (x) zeta_k  for every symmetric G.
std::array<std::array<double, 3>, 3> psi_functionals();

/// Largest r <= 1/8 - 1e-3 such that min_k Psi_k(G) > 0 on a dense sample of
/// the sphere |G - Id| = r, times a 0.9 safety factor.  Cached.
double calibrate_r0();

/// Basis adapted to an SPD base point G0: unit vectors
/// xi_k = G0^{1/2} zeta_k / |G0^{1/2} zeta_k| and linear functionals
/// Phi_k(G) = |G0^{1/2} zeta_k|^2 Psi_k(G0^{-1/2} G G0^{-1/2}).
struct BasisTriple {
  std::array<Vec2, 3> zeta;
  std::array<Vec2, 3> xi;
  std::array<std::array<double, 3>, 3> phi_coeffs;  // Phi_k acting on (G11,G12,G22)
  double r0 = 0.0;                                  // calibrated base radius
  Sym2 base{1, 0, 1};                               // G0

  [[nodiscard]] double phi(int k, Sym2 g) const {
    return phi_coeffs[k][0] * g.m11 + phi_coeffs[k][1] * g.m12 + phi_coeffs[k][2] * g.m22;
  }
  /// Positivity radius: Phi_k(G) > 0 whenever |G - G0|_F < radius().
  [[nodiscard]] double radius() const;
};

BasisTriple basis_for(Sym2 g0);

/// One rank-one term a(x)^2 eta (x) eta.
struct RankOneTerm {
  Expr a;     // nonnegative amplitude
  Vec2 eta;   // unit direction
};

/// Decomposition  D(x) = sum_k a_k(x)^2 eta_k (x) eta_k  as expression trees.
struct RankOneSystem {
  std::vector<RankOneTerm> terms;
  int multiplicity = 0;  // max number of terms nonzero at any sample point
  int patches = 1;       // covering patches used (1 = single-ball fast path)
};

/// Decomposes a sampled-positive-definite matrix field.  If the sampled range
/// fits inside one positivity ball around the bounding-box midpoint (with a
/// 0.9 safety factor) the 3-term path is taken; otherwise a greedy covering
/// with a smooth matrix-space partition of unity is constructed.
RankOneSystem decompose_field(const SymField& d, const Domain& domain, int resolution);

}  // namespace wforge
