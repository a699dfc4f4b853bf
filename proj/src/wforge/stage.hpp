#pragma once

#include <vector>

#include "wforge/decomp.hpp"
#include "wforge/oscillate.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// One full stage of the iteration: either the C^1 stage (decompose the whole
// defect, one measured-budget step per rank-one term) or the Hoelder stage
// (mollify at the defect scale, shift the linear part, decompose near the
// identity, exactly three steps on a geometric frequency schedule).
// ---------------------------------------------------------------------------

struct StageParams {
  double epsilon = 0.05;   // C1 stage: target stage error
  double M = 10.0;         // Hoelder stage: C2-norm bound parameter
  double sigma = 4.0;      // Hoelder stage: frequency ratio between steps
  double delta0 = 0.1;     // Hoelder stage: admissible defect threshold
  int resolution = 64;     // lattice resolution for norms and margins
  int quad_order = 24;     // mollification quadrature order per axis
  int decomp_resolution = 48;  // sampling for the rank-one decomposition
  int step_resolution = 0;     // 0 = per-step 6-per-period rule
};

struct StageReport {
  NormEstimate defect_before;
  NormEstimate defect_after;
  std::vector<double> lambdas;
  double l = 0.0;          // mollification scale (Hoelder stage)
  double shift = 0.0;      // linear w-shift magnitude kappa (Hoelder stage)
  double c1_margin = 0.0;  // min eigenvalue of the outgoing defect
  double delta = 0.0;      // retained defect fraction (C1 stage)
  int terms = 0;           // rank-one terms consumed
  int budget_halvings = 0; // C1 margin-recovery retries
};

struct StageResult {
  Expr v;
  std::array<Expr, 2> w;
  StageReport report;
};

/// Minimum over the lattice of the smaller eigenvalue of D.
double pd_margin(const SymField& d, const Domain& domain, int resolution);

/// C^1 stage: requires a positive-definite defect; returns fields whose
/// defect is below epsilon while staying positive definite.
StageResult stage_c1(const Expr& v, const std::array<Expr, 2>& w, const SymField& a,
                     const Domain& domain, const StageParams& params);

/// Hoelder stage: requires 0 < ||D||_0 < delta0 and domain margin >= l where
/// l = ||D||_0^{1/2} / M; performs mollify -> shift -> 3-term decomposition ->
/// three steps at lambda_k = sigma^k / l.
StageResult stage_holder(const Expr& v, const std::array<Expr, 2>& w, const SymField& a,
                         const Domain& domain, const StageParams& params);

}  // namespace wforge
