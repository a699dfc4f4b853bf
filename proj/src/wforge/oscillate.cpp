#include "wforge/oscillate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wforge/errors.hpp"

namespace wforge {

namespace {
const double kPi = std::acos(-1.0);
}

GammaValues gamma(double a_value, double t) {
  if (!(a_value >= 0.0)) throw PreconditionError("gamma: amplitude must be nonnegative");
  GammaValues g;
  g.g1 = (a_value / kPi) * std::sin(2.0 * kPi * t);
  g.g2 = -(a_value * a_value / (4.0 * kPi)) * std::sin(4.0 * kPi * t);
  g.dtg1 = 2.0 * a_value * std::cos(2.0 * kPi * t);
  g.dtg2 = -a_value * a_value * std::cos(4.0 * kPi * t);
  return g;
}

GammaExprs gamma_exprs(const Expr& a, const Expr& phase) {
  GammaExprs g;
  g.g1 = (1.0 / kPi) * (a * sin_of(2.0 * kPi * phase));
  g.g2 = (-1.0 / (4.0 * kPi)) * (a * a * sin_of(4.0 * kPi * phase));
  return g;
}

SymField induced_tensor(const Expr& v, const std::array<Expr, 2>& w) {
  const Expr v1 = differentiate(v, 1, 0);
  const Expr v2 = differentiate(v, 0, 1);
  return {0.5 * (v1 * v1) + differentiate(w[0], 1, 0),
          0.5 * (v1 * v2) + 0.5 * (differentiate(w[1], 1, 0) + differentiate(w[0], 0, 1)),
          0.5 * (v2 * v2) + differentiate(w[1], 0, 1)};
}

SymField defect_field(const Expr& v, const std::array<Expr, 2>& w, const SymField& a) {
  return sym_sub(a, induced_tensor(v, w));
}

StepOutcome step(const Expr& v, const std::array<Expr, 2>& w, const Expr& a, Vec2 eta,
                 double lambda, const Domain& domain, int resolution_override) {
  if (!(lambda > 1.0)) throw ConfigError("step: lambda must exceed 1");
  const double enorm = norm2(eta);
  if (std::abs(enorm - 1.0) > 1e-9) throw ConfigError("step: eta must be a unit vector");
  if (lattice_min(a, domain, 25) < 0.0)
    throw PreconditionError("step: amplitude is negative somewhere on the domain");

  const Expr phase = lambda * (eta.x * x1() + eta.y * x2());
  const GammaExprs g = gamma_exprs(a, phase);

  StepOutcome out;
  out.lambda = lambda;
  out.v_new = v + (1.0 / lambda) * g.g1;
  const Expr v1 = differentiate(v, 1, 0);
  const Expr v2 = differentiate(v, 0, 1);
  out.w_new[0] = w[0] - (1.0 / lambda) * (g.g1 * v1) + (eta.x / lambda) * g.g2;
  out.w_new[1] = w[1] - (1.0 / lambda) * (g.g1 * v2) + (eta.y / lambda) * g.g2;

  // Mismatch of the step identity: new induced tensor minus (old + a^2 eta x eta).
  const SymField target =
      sym_add(induced_tensor(v, w), {sym_outer(eta).m11 * (a * a), sym_outer(eta).m12 * (a * a),
                                     sym_outer(eta).m22 * (a * a)});
  const SymField mismatch = sym_sub(induced_tensor(out.v_new, out.w_new), target);

  int res = resolution_override;
  if (res <= 0) {
    // 6 samples per oscillation period, at most 4096 points per side.
    const double side = std::max(domain.width(), domain.height());
    res = static_cast<int>(std::min(6.0 * lambda, 4096.0 / side));
    res = std::max(res, 2);
  }
  out.residual = sym_norm_sup(mismatch, domain, res);
  return out;
}

StepOutcome choose_lambda(const Expr& v, const std::array<Expr, 2>& w, const Expr& a, Vec2 eta,
                          double budget, double lambda_floor, const Domain& domain,
                          int resolution_override) {
  if (!(budget > 0.0)) throw NonConvergenceError("choose_lambda: budget must be positive");
  double lambda = std::max(2.0, lambda_floor);
  double last_residual = -1.0;
  while (lambda <= kLambdaCap) {
    StepOutcome out = step(v, w, a, eta, lambda, domain, resolution_override);
    last_residual = out.residual.value;
    if (last_residual <= budget) return out;
    lambda *= 2.0;
  }
  char msg[160];
  if (last_residual < 0.0)
    std::snprintf(msg, sizeof(msg),
                  "choose_lambda: frequency floor %.6g already above the lambda cap 2^24",
                  lambda_floor);
  else
    std::snprintf(msg, sizeof(msg),
                  "choose_lambda: residual %.6g still above budget %.6g at lambda cap 2^24",
                  last_residual, budget);
  throw NonConvergenceError(msg);
}

}  // namespace wforge
