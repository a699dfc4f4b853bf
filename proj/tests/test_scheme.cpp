#include <doctest.h>

#include <cmath>

#include "wforge/scheme.hpp"

using namespace wforge;

namespace {
const double kPi = std::acos(-1.0);
const Domain kUnit({0.0, 0.0}, {1.0, 1.0}, 0.25);
const std::array<Expr, 2> kZeroW{constant(0.0), constant(0.0)};

SchemeConfig cheap_config() {
  SchemeConfig c;
  c.resolution = 33;
  c.quad_order = 8;
  c.decomp_resolution = 25;
  c.step_resolution = 256;
  return c;
}
}  // namespace

TEST_SUITE_BEGIN("scheme");

TEST_CASE("exponent admissibility table") {
  const ExponentGate g1 = exponent_gate(0.1, 1.0);
  CHECK(g1.ok);
  // interval (0.6/0.9, min{1, 6}) = (2/3, 1), midpoint 5/6
  CHECK(g1.s_choice == doctest::Approx(5.0 / 6.0).epsilon(1e-12));

  CHECK_FALSE(exponent_gate(0.2, 1.0).ok);        // above 1/7
  CHECK_FALSE(exponent_gate(1.0 / 7.0, 1.0).ok);  // boundary excluded
  CHECK_FALSE(exponent_gate(0.05, 0.08).ok);      // above beta/2
  CHECK_FALSE(exponent_gate(0.0, 1.0).ok);
  CHECK_FALSE(exponent_gate(-0.1, 1.0).ok);
  CHECK_FALSE(exponent_gate(0.1, 0.0).ok);

  const ExponentGate g2 = exponent_gate(0.05, 0.2);
  CHECK(g2.ok);
}

TEST_CASE("chosen decay exponent satisfies both side conditions") {
  for (auto [alpha, beta] : {std::pair{0.1, 1.0}, {0.05, 0.2}, {0.12, 0.9}, {0.01, 1.0}}) {
    const ExponentGate g = exponent_gate(alpha, beta);
    REQUIRE(g.ok);
    const double s = g.s_choice;
    CHECK(alpha * (6.0 + s) - s < 0.0);
    CHECK(s < std::min(1.0, 6.0 * beta / (2.0 - beta)));
    CHECK(s > 0.0);
  }
}

TEST_CASE("Poisson preprocessing reproduces a single sine mode exactly") {
  // zero-margin domain so the extended rectangle is the unit square itself
  const Domain flat({0.0, 0.0}, {1.0, 1.0}, 0.0);
  const Expr f = 2.0 * kPi * kPi * sin_of(kPi * x1()) * sin_of(kPi * x2());
  const SymField a0 = solve_A0_from_f(f, flat, 0.1, 16);
  // u = sin(pi x1) sin(pi x2) >= 0, so the additive lift is just c_extra
  CHECK(a0.e11(0.5, 0.5) == doctest::Approx(1.0 + 0.1).epsilon(1e-8));
  CHECK(a0.e11(0.25, 0.5) == doctest::Approx(std::sin(kPi * 0.25) + 0.1).epsilon(1e-8));
  CHECK(a0.e12(0.3, 0.7) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(a0.e22(0.5, 0.5) == doctest::Approx(a0.e11(0.5, 0.5)).epsilon(1e-13));
}

TEST_CASE("Poisson preprocessing of the zero right-hand side is the constant lift") {
  const SymField a0 = solve_A0_from_f(constant(0.0), kUnit, 0.25, 8);
  CHECK(a0.e11(0.3, 0.9) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(a0.e22(0.8, 0.1) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("Poisson residual for the constant right-hand side, truncated series") {
  // Honest record: the truncated double-sine expansion of f = 1 converges
  // slowly (Gibbs at the boundary), leaving an interior residual of order 1e-2
  // at 64 modes rather than anything near machine precision.
  const SymField a0 = solve_A0_from_f(constant(1.0), kUnit, 0.1, 64);
  const Expr lap = differentiate(a0.e11, 2, 0) + differentiate(a0.e11, 0, 2);
  double worst = 0.0;
  for (double x : {0.35, 0.5, 0.65})
    for (double y : {0.35, 0.5, 0.65}) worst = std::max(worst, std::abs(-lap(x, y) - 1.0));
  CHECK(worst < 0.05);
  CHECK(worst > 1e-6);  // the truncation error is genuinely visible
}

TEST_CASE("Poisson preprocessing input validation") {
  CHECK_THROWS_AS((void)solve_A0_from_f(constant(1.0), kUnit, 0.1, 0), ConfigError);
  // overflow to infinity on the quadrature grid
  const Expr bad = pow_of(constant(10.0) + x1(), 400.0);
  CHECK_THROWS_WITH_AS((void)solve_A0_from_f(bad, kUnit, 0.1, 8),
                       doctest::Contains("finite"), ConfigError);
  // domain errors inside the evaluator surface as precondition failures
  const Expr radicand = pow_of(x1() - 10.0, 0.5);
  CHECK_THROWS_WITH_AS((void)solve_A0_from_f(radicand, kUnit, 0.1, 8),
                       doctest::Contains("radicand"), PreconditionError);
}

TEST_CASE("low-regularity scheme rejects inadmissible budget schedules") {
  SchemeConfig c = cheap_config();
  const SymField a = sym_const({0.3, 0.0, 0.3});
  c.epsilon_schedule = {0.5, 0.5};  // sum of square roots = 1.41
  CHECK_THROWS_WITH_AS((void)run_c1(constant(0.0), kZeroW, a, kUnit, c),
                       doctest::Contains("square roots"), ConfigError);
  c.epsilon_schedule = {0.05, 0.0};
  CHECK_THROWS_AS((void)run_c1(constant(0.0), kZeroW, a, kUnit, c), ConfigError);
}

TEST_CASE("low-regularity scheme rejects indefinite starting defects") {
  SchemeConfig c = cheap_config();
  c.epsilon_schedule = {0.05};
  const SymField a = sym_const({0.1, 0.3, 0.1});
  CHECK_THROWS_AS((void)run_c1(constant(0.0), kZeroW, a, kUnit, c), PreconditionError);
}

TEST_CASE("low-regularity scheme stops immediately once the target is met") {
  SchemeConfig c = cheap_config();
  c.epsilon_schedule = {0.05};
  c.target_defect = 10.0;
  const SymField a = sym_const({0.3, 0.0, 0.3});
  const RunArtifacts art = run_c1(constant(0.0), kZeroW, a, kUnit, c);
  CHECK(art.stage_reports.empty());
  REQUIRE(art.defect_trace.size() == 1);
  CHECK(art.defect_trace[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(art.phase == "c1");
}

TEST_CASE("low-regularity scheme walks a one-stage schedule with decreasing defect") {
  SchemeConfig c = cheap_config();
  c.epsilon_schedule = {0.06};
  c.target_defect = 1e-4;  // unreachable: the stage runs
  const SymField a = sym_const({0.3, 0.0, 0.3});
  const RunArtifacts art = run_c1(constant(0.0), kZeroW, a, kUnit, c);
  REQUIRE(art.defect_trace.size() == 2);
  CHECK(art.defect_trace[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(art.defect_trace[1] < 0.06);
  REQUIRE(art.drift_trace.size() == 2);
  CHECK(art.drift_trace[0] == 0.0);
  REQUIRE(art.grad_increments.size() == 1);
  CHECK(art.grad_increments[0] > 0.0);
  // the final pair's defect against A matches the reported trace
  const double check =
      sym_norm_sup(defect_field(art.v_final, art.w_final, a), kUnit, c.resolution).value;
  CHECK(check == doctest::Approx(art.defect_trace.back()).epsilon(1e-10));
}

TEST_CASE("multi-stage low-regularity schedules exhaust the frequency cap") {
  // Each corrugation must out-oscillate the curvature laid down by the
  // previous one by a factor of roughly 4 a^2 / budget (~1e2 here), so the
  // hard frequency cap 2^24 admits only a handful of steps.  A two-stage
  // schedule already needs more, and the run must say so rather than
  // silently accept an unresolved step.
  SchemeConfig c = cheap_config();
  c.epsilon_schedule = {0.06, 0.02};
  c.target_defect = 1e-4;
  const SymField a = sym_const({0.3, 0.0, 0.3});
  CHECK_THROWS_AS((void)run_c1(constant(0.0), kZeroW, a, kUnit, c), NonConvergenceError);
}

TEST_CASE("high-regularity scheme enforces the frequency-ratio inequality up front") {
  SchemeConfig c = cheap_config();  // sigma = 4, s = 0.7: sigma^s = 2.64
  const SymField a = sym_const({0.05, 0.0, 0.05});
  CHECK_THROWS_WITH_AS((void)run_holder(constant(0.0), kZeroW, a, kUnit, c),
                       doctest::Contains("sigma^s"), ConfigError);
}

TEST_CASE("high-regularity scheme rejects inadmissible exponents") {
  SchemeConfig c = cheap_config();
  c.alpha = 0.2;
  c.strict_sigma = false;
  const SymField a = sym_const({0.05, 0.0, 0.05});
  CHECK_THROWS_WITH_AS((void)run_holder(constant(0.0), kZeroW, a, kUnit, c),
                       doctest::Contains("gate"), ConfigError);
}

TEST_CASE("high-regularity scheme rejects defects outside the admissible band") {
  SchemeConfig c = cheap_config();
  c.strict_sigma = false;
  // too large
  const SymField big = sym_const({0.3, 0.0, 0.3});
  CHECK_THROWS_AS((void)run_holder(constant(0.0), kZeroW, big, kUnit, c), PreconditionError);
  // exactly zero
  const SymField zero = sym_const({0.0, 0.0, 0.0});
  CHECK_THROWS_AS((void)run_holder(constant(0.0), kZeroW, zero, kUnit, c), PreconditionError);
}

TEST_CASE("high-regularity scheme reports the measured decay violation honestly") {
  // Honest record: at this desk scale the first stage grows the defect well
  // above the geometric bound, and the decay assertion fires with the trace.
  SchemeConfig c = cheap_config();
  c.strict_sigma = false;
  c.enforce_decay = true;
  c.max_stages = 1;
  const Expr v = 0.1 * sin_of(2.0 * kPi * x1());
  const SymField a = sym_add(induced_tensor(v, kZeroW), sym_const({0.01, 0.0, 0.01}));
  CHECK_THROWS_WITH_AS((void)run_holder(v, kZeroW, a, kUnit, c), doctest::Contains("decay"),
                       NonConvergenceError);
}

TEST_CASE("high-regularity scheme with assertions relaxed completes and records traces") {
  SchemeConfig c = cheap_config();
  c.strict_sigma = false;
  c.enforce_decay = false;
  c.max_stages = 1;
  const Expr v = 0.1 * sin_of(2.0 * kPi * x1());
  const SymField a = sym_add(induced_tensor(v, kZeroW), sym_const({0.01, 0.0, 0.01}));
  const RunArtifacts art = run_holder(v, kZeroW, a, kUnit, c);
  CHECK(art.phase == "holder");
  REQUIRE(art.defect_trace.size() == 2);
  CHECK(art.defect_trace[0] == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(art.defect_trace[1] > art.defect_trace[0]);  // the measured growth
  CHECK(art.residual_trace.empty());                 // no f supplied
  CHECK(art.halt.empty());
  REQUIRE(art.stage_reports.size() == 1);
  CHECK(art.stage_reports[0].lambdas.size() == 3);
}

TEST_CASE("end-to-end pipeline requires a target or a right-hand side") {
  SchemeConfig c = cheap_config();
  CHECK_THROWS_AS((void)run_full(constant(0.0), kZeroW, std::nullopt, std::nullopt, kUnit, c),
                  ConfigError);
}

TEST_CASE("end-to-end pipeline completes the low-regularity phase and records the stop") {
  // With the default strict frequency-ratio check the final phase cannot
  // start (sigma^s = 2.64 <= 4); the pipeline keeps the completed artifacts
  // and stores the reason instead of discarding the run.
  SchemeConfig c = cheap_config();
  const SymField a = sym_const({0.3, 0.0, 0.3});
  const RunArtifacts art = run_full(constant(0.0), kZeroW, a, std::nullopt, kUnit, c);
  CHECK(art.phase == "holder");
  CHECK(!art.halt.empty());
  CHECK(art.halt.find("sigma^s") != std::string::npos);
  REQUIRE(art.defect_trace.size() >= 2);
  CHECK(art.defect_trace.front() == doctest::Approx(0.3).epsilon(1e-12));
  // the low-regularity phase reached its quarter-threshold target
  CHECK(art.defect_trace.back() <= 0.25 * c.delta0);
  for (std::size_t i = 1; i < art.defect_trace.size(); ++i)
    CHECK(art.defect_trace[i] < art.defect_trace[i - 1]);
}

TEST_SUITE_END();
