#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wforge/analysis.hpp"
#include "wforge/stage.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Iteration drivers: the C^1 scheme (stagewise epsilon schedule), the Hoelder
// scheme (geometric defect decay at fixed sigma), the end-to-end pipeline,
// and the spectral Poisson preprocessing that turns a right-hand side f into
// an admissible initial target A0.
// ---------------------------------------------------------------------------

struct SchemeConfig {
  double alpha = 0.1;  // target Hoelder exponent of grad v
  double beta = 1.0;   // Hoelder regularity of the data A
  double sigma = 4.0;  // stage frequency ratio
  double m0 = 10.0;    // initial norm bound M_0
  double s = 0.7;      // decay exponent (defect shrinks like sigma^{-s k})
  double frak_c = 4.0;           // schedule constant for M_k growth
  std::vector<double> epsilon_schedule;  // C1 stage budgets; empty = 0.04 * 2^{-k}
  int max_stages = 4;
  double target_defect = 1e-3;   // C1 scheme stopping defect
  double delta0 = 0.1;           // Hoelder admissibility threshold
  unsigned seed = 0;             // recorded for reproducibility of artifacts
  bool strict_sigma = true;      // reject sigma^s <= 4 up front
  bool enforce_decay = true;     // error out on a decay violation
  int resolution = 64;           // lattice resolution for traces
  int quad_order = 24;           // mollification quadrature order
  int decomp_resolution = 48;
  int step_resolution = 0;       // 0 = 6-per-period rule in C1 steps
  int poisson_modes = 64;        // K for solve_A0_from_f
  double c_extra = 0.1;          // additive margin in solve_A0_from_f
};

struct ExponentGate {
  bool ok = false;
  double s_choice = 0.0;
};

/// Admissibility of (alpha, beta): ok iff 0 < alpha < min{1/7, beta/2}; the
/// decay exponent must satisfy both  s > 6 alpha / (1 - alpha)  (so that
/// alpha (6 + s) - s < 0) and  s < min{1, 6 beta / (2 - beta)}; s_choice is
/// the midpoint of that interval.
ExponentGate exponent_gate(double alpha, double beta);

/// Spectral Dirichlet Poisson solve on the extended rectangle: returns
/// A0 = (u + c) Id with  -Laplace(u) = f,  u = 0 on the extended boundary,
/// truncated to K x K double sine modes, and c = c_extra + max(0, -min u).
SymField solve_A0_from_f(const Expr& f, const Domain& domain, double c_extra, int modes = 64);

struct RunArtifacts {
  Expr v_final;
  std::array<Expr, 2> w_final;
  std::vector<StageReport> stage_reports;
  std::vector<double> defect_trace;      // defect sup per completed stage (incl. stage 0)
  std::vector<double> drift_trace;       // ||v_k - v_0||_0 per stage
  std::vector<double> grad_increments;   // ||grad v_k - grad v_{k-1}||_0 per stage
  std::vector<double> residual_trace;    // weak-Hessian residual per stage (run_full with f)
  std::string phase;                     // last phase executed
  std::string halt;                      // run_full only: why the final phase stopped early
};

/// C^1 scheme: iterates the C^1 stage over the epsilon schedule until the
/// sampled defect is <= target_defect or stages run out.
RunArtifacts run_c1(const Expr& v0, const std::array<Expr, 2>& w0, const SymField& a0,
                    const Domain& domain, const SchemeConfig& config);

/// Hoelder scheme: iterates the Hoelder stage with M_k = (frak_c (1 +
/// ||grad v0||_0) sigma^3)^{k-1} M_0, asserting the geometric decay
/// ||D_k||_0 <= sigma^{-s k} ||D_0||_0 stage by stage.
RunArtifacts run_holder(const Expr& v, const std::array<Expr, 2>& w, const SymField& a,
                        const Domain& domain, const SchemeConfig& config);

/// End-to-end pipeline: optional Poisson preprocessing, C^1 phase down to
/// delta0/4, mollified C^2 proxy re-entry, Hoelder phase, and (when f is
/// supplied) a weak-Hessian residual trace across the Hoelder stages.
RunArtifacts run_full(const Expr& v0, const std::array<Expr, 2>& w0,
                      const std::optional<SymField>& a0, const std::optional<Expr>& f,
                      const Domain& domain, const SchemeConfig& config);

}  // namespace wforge
