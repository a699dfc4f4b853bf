#pragma once

#include <array>

#include "wforge/domain.hpp"
#include "wforge/norms.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Corrugation profiles and the single oscillatory step
//
//   v~(x) = v(x) + (1/lambda) G1(x, lambda x.eta)
//   w~(x) = w(x) - (1/lambda) G1(x, lambda x.eta) grad v(x)
//               + (1/lambda) G2(x, lambda x.eta) eta
//
// with  G1(x,t) = (a(x)/pi) sin(2 pi t),  G2(x,t) = -(a(x)^2/(4 pi)) sin(4 pi t),
// whose t-derivatives satisfy  (1/2)(dt G1)^2 + dt G2 = a(x)^2  exactly, so the
// step adds a(x)^2 eta (x) eta to the induced tensor up to O(1/lambda) errors.
// ---------------------------------------------------------------------------

/// Pointwise corrugation profile values at one (a, t).
struct GammaValues {
  double g1 = 0.0;    // G1
  double g2 = 0.0;    // G2
  double dtg1 = 0.0;  // dG1/dt
  double dtg2 = 0.0;  // dG2/dt
};

/// Closed-form profiles; requires a_value >= 0.
GammaValues gamma(double a_value, double t);

/// Profile expressions composed with an amplitude field and a phase field.
struct GammaExprs {
  Expr g1, g2;
};
GammaExprs gamma_exprs(const Expr& a, const Expr& phase);

/// Outcome of one oscillatory step.
struct StepOutcome {
  Expr v_new;
  std::array<Expr, 2> w_new;
  double lambda = 0.0;
  NormEstimate residual;  // sampled sup of the step-identity mismatch
};

inline constexpr double kLambdaCap = 16777216.0;  // 2^24

/// One oscillatory step at frequency lambda > 1.  The residual is the sampled
/// sup norm over the domain of
///   (1/2 grad v~ (x) grad v~ + sym grad w~)
///     - (1/2 grad v (x) grad v + sym grad w + a^2 eta (x) eta),
/// measured on a lattice with 6 samples per oscillation period, capped at
/// 4096 points per side (resolution_override > 0 replaces that rule).
StepOutcome step(const Expr& v, const std::array<Expr, 2>& w, const Expr& a, Vec2 eta,
                 double lambda, const Domain& domain, int resolution_override = 0);

/// Doubling search on lambda starting at max(2, lambda_floor) until the
/// measured residual is <= budget; hard cap 2^24.
StepOutcome choose_lambda(const Expr& v, const std::array<Expr, 2>& w, const Expr& a, Vec2 eta,
                          double budget, double lambda_floor, const Domain& domain,
                          int resolution_override = 0);

/// Defect of a candidate pair against a target tensor field A:
///   D = A - (1/2 grad v (x) grad v + sym grad w).
SymField defect_field(const Expr& v, const std::array<Expr, 2>& w, const SymField& a);

/// Induced tensor  1/2 grad v (x) grad v + sym grad w  of a pair.
SymField induced_tensor(const Expr& v, const std::array<Expr, 2>& w);

}  // namespace wforge
