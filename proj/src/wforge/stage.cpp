#include "wforge/stage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wforge/errors.hpp"

namespace wforge {

double pd_margin(const SymField& d, const Domain& domain, int resolution) {
  return sym_eig_min(d, domain, resolution);
}

StageResult stage_c1(const Expr& v, const std::array<Expr, 2>& w, const SymField& a,
                     const Domain& domain, const StageParams& params) {
  if (!(params.epsilon > 0.0)) throw ConfigError("stage_c1: epsilon must be positive");
  const SymField d0 = defect_field(v, w, a);
  const double margin0 = pd_margin(d0, domain, params.resolution);
  if (!(margin0 > 0.0)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "stage_c1: defect is not positive definite (margin %.6g)", margin0);
    throw PreconditionError(msg);
  }

  StageResult r{v, w, {}};
  r.report.defect_before = sym_norm_sup(d0, domain, params.resolution);
  const double dnorm = r.report.defect_before.value;
  const double delta = std::min(0.5, params.epsilon / (2.0 * dnorm + 1e-12));
  r.report.delta = delta;

  const RankOneSystem sys = decompose_field(d0, domain, params.decomp_resolution);
  const int n = static_cast<int>(sys.terms.size());
  r.report.terms = n;

  // One measured-budget step per term; if the outgoing defect loses
  // positivity (budgets too loose for the retained delta*D cushion), halve
  // the per-step budget and redo the whole stage, up to six times.
  const double amp_scale = std::sqrt(1.0 - delta);
  double budget = params.epsilon / (2.0 * n);
  for (int attempt = 0;; ++attempt) {
    Expr cv = v;
    std::array<Expr, 2> cw = w;
    std::vector<double> lambdas;
    double lambda_floor = 2.0;
    for (const RankOneTerm& term : sys.terms) {
      const Expr ak = amp_scale * term.a;
      StepOutcome out = choose_lambda(cv, cw, ak, term.eta, budget, lambda_floor, domain,
                                      params.step_resolution);
      cv = out.v_new;
      cw = out.w_new;
      lambdas.push_back(out.lambda);
      // Keep frequencies strictly separated so later corrugations ride on
      // resolved earlier ones.
      lambda_floor = 2.0 * out.lambda;
    }
    const SymField dnew = defect_field(cv, cw, a);
    const double margin = pd_margin(dnew, domain, params.resolution);
    if (margin > 0.0 || attempt >= 6) {
      r.v = std::move(cv);
      r.w = std::move(cw);
      r.report.lambdas = std::move(lambdas);
      r.report.defect_after = sym_norm_sup(dnew, domain, params.resolution);
      r.report.c1_margin = margin;
      r.report.budget_halvings = attempt;
      if (!(margin > 0.0))
        throw NonConvergenceError(
            "stage_c1: outgoing defect lost positive definiteness after 6 budget halvings");
      return r;
    }
    budget *= 0.5;
  }
}

StageResult stage_holder(const Expr& v, const std::array<Expr, 2>& w, const SymField& a,
                         const Domain& domain, const StageParams& params) {
  if (!(params.sigma > 1.0)) throw ConfigError("stage_holder: sigma must exceed 1");
  if (!(params.M > 1.0)) throw ConfigError("stage_holder: M must exceed 1");

  const SymField d0 = defect_field(v, w, a);
  StageResult r{v, w, {}};
  r.report.defect_before = sym_norm_sup(d0, domain, params.resolution);
  const double dnorm = r.report.defect_before.value;
  if (!(dnorm > 0.0) || !(dnorm < params.delta0)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "stage_holder: defect norm %.6g outside the admissible range (0, %.6g)", dnorm,
                  params.delta0);
    throw PreconditionError(msg);
  }

  const double l = std::sqrt(dnorm) / params.M;
  r.report.l = l;
  if (domain.margin < l) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "stage_holder: domain margin %.6g smaller than mollification scale %.6g",
                  domain.margin, l);
    throw PreconditionError(msg);
  }

  // Mollify the pair and the target at the defect scale.
  const Expr vm = mollify(v, domain, l, params.quad_order);
  const std::array<Expr, 2> wm = {mollify(w[0], domain, l, params.quad_order),
                                  mollify(w[1], domain, l, params.quad_order)};
  const SymField am = {mollify(a.e11, domain, l, params.quad_order),
                       mollify(a.e12, domain, l, params.quad_order),
                       mollify(a.e22, domain, l, params.quad_order)};
  const SymField dm = defect_field(vm, wm, am);
  const double dmnorm = sym_norm_sup(dm, domain, params.resolution).value;

  // Linear shift: w' = wm - kappa x moves the mollified defect to
  // kappa (Id + dm / kappa), a field within r0/2 of the identity.
  const double r0 = calibrate_r0();
  const double kappa = 2.0 * (dmnorm + dnorm) / r0;
  r.report.shift = kappa;
  std::array<Expr, 2> wcur = {wm[0] - kappa * x1(), wm[1] - kappa * x2()};
  Expr vcur = vm;

  // 3-term decomposition of kappa G at the identity basis:
  //   a_k = (kappa Psi_k(G))^{1/2},  G = Id + dm / kappa.
  const BasisTriple b = basis_for(sym_identity());
  r.report.terms = 3;
  // The frequency schedule is fixed, so the per-step residual scan is
  // informational; measure it on the stage lattice instead of the 6-per-period
  // rule (the latter would cost a capped 4096x4096 scan per step).
  const int sres = params.step_resolution > 0 ? params.step_resolution : params.resolution;
  for (int k = 0; k < 3; ++k) {
    const auto& c = b.phi_coeffs[k];
    Expr gk = constant(b.phi(k, sym_identity()) * kappa) + c[0] * dm.e11 + c[1] * dm.e12 +
              c[2] * dm.e22;
    const Expr ak = sqrt_pos(std::move(gk));
    const double lambda = std::pow(params.sigma, k + 1) / l;
    StepOutcome out = step(vcur, wcur, ak, b.xi[k], lambda, domain, sres);
    vcur = out.v_new;
    wcur = out.w_new;
    r.report.lambdas.push_back(lambda);
  }

  r.v = std::move(vcur);
  r.w = std::move(wcur);
  const SymField dnew = defect_field(r.v, r.w, a);
  r.report.defect_after = sym_norm_sup(dnew, domain, params.resolution);
  r.report.c1_margin = pd_margin(dnew, domain, params.resolution);
  return r;
}

}  // namespace wforge
