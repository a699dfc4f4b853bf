#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "wforge/grid_io.hpp"
#include "wforge/norms.hpp"

using namespace wforge;

namespace {
const double kPi = std::acos(-1.0);
const Domain kUnit({0.0, 0.0}, {1.0, 1.0}, 0.25);
}  // namespace

TEST_SUITE_BEGIN("field");

TEST_CASE("evaluation of basic trees") {
  CHECK(pow_of(x1(), 2.0)(3.0, 0.0) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(sin_of(2.0 * kPi * x1())(0.25, 0.7) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(constant(5.0)(0.3, -2.0) == 5.0);
  // purity: repeated evaluation is bit-identical
  const Expr e = sin_of(x1() * x2()) + cos_of(3.0 * x2());
  const double v1 = e(0.37, 0.81), v2 = e(0.37, 0.81);
  CHECK(v1 == v2);
}

TEST_CASE("exact differentiation") {
  CHECK(differentiate(pow_of(x1(), 2.0), 1, 0)(2.0, 5.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(differentiate(x1() * x2(), 1, 1)(0.3, 0.9) == doctest::Approx(1.0).epsilon(1e-14));
  // mixed third derivative of sin(x1)cos(2 x2): d^3/dx1 dx2^2 = -sin? check analytically
  const Expr f = sin_of(x1()) * cos_of(2.0 * x2());
  const Expr d = differentiate(f, 1, 2);
  const double x = 0.4, y = 0.7;
  CHECK(d(x, y) == doctest::Approx(std::cos(x) * (-4.0) * std::cos(2.0 * y)).epsilon(1e-12));
}

TEST_CASE("derivatives agree with finite differences at random points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const Expr f = sin_of(2.0 * kPi * x1()) * cos_of(kPi * x2()) + pow_of(x1() + 0.5, 3.0) +
                 bump_profile(pow_of(x1() - 0.5, 2.0) + pow_of(x2() - 0.5, 2.0));
  const Expr fx = differentiate(f, 1, 0);
  const Expr fy = differentiate(f, 0, 1);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng), y = u(rng);
    const double gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
    const double gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
    CHECK(fx(x, y) == doctest::Approx(gx).epsilon(1e-6));
    CHECK(fy(x, y) == doctest::Approx(gy).epsilon(1e-6));
  }
}

TEST_CASE("mollifier bump has unit mass") {
  // Independent oracle: radial composite Simpson of c * exp(-1/(1-r^2)) * 2 pi r.
  const double c = mollifier_constant();
  const int n = 20000;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r0 = static_cast<double>(i) / n, r1 = static_cast<double>(i + 1) / n;
    const double rm = 0.5 * (r0 + r1);
    auto f = [&](double r) {
      const double t = 1.0 - r * r;
      return t > 0.0 ? 2.0 * kPi * r * c * std::exp(-1.0 / t) : 0.0;
    };
    mass += (r1 - r0) / 6.0 * (f(r0) + 4.0 * f(rm) + f(r1));
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mollification reproduces constants and affine fields") {
  const Expr c5 = mollify(constant(5.0), kUnit, 0.2);
  CHECK(c5(0.5, 0.5) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(c5(0.1, 0.9) == doctest::Approx(5.0).epsilon(1e-13));
  const Expr lin = mollify(2.0 * x1() + constant(-1.0) + 3.0 * x2(), kUnit, 0.15);
  CHECK(lin(0.3, 0.6) == doctest::Approx(2.0 * 0.3 - 1.0 + 3.0 * 0.6).epsilon(1e-12));
}

TEST_CASE("mollified coordinate derivative converges to one with the quadrature") {
  // the derivative kernel integrand is rougher than the value kernel, so the
  // default order carries ~4e-4 of quadrature error; order 96 reaches ~4e-8
  const Expr coarse = mollify(x1(), kUnit, 0.1, 24);
  CHECK(differentiate(coarse, 1, 0)(0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-3));
  const Expr fine = mollify(x1(), kUnit, 0.1, 96);
  CHECK(differentiate(fine, 1, 0)(0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mollification node derivative matches finite differences at high order") {
  const Expr f = sin_of(2.0 * kPi * x1()) * cos_of(kPi * x2());
  const Expr m = mollify(f, kUnit, 0.1, 96);
  const Expr mx = differentiate(m, 1, 0);
  const double h = 1e-5;
  const double fd = (m(0.5 + h, 0.4) - m(0.5 - h, 0.4)) / (2.0 * h);
  CHECK(mx(0.5, 0.4) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("mollification attenuates but tracks a sine") {
  const Expr f = sin_of(2.0 * kPi * x1());
  const Expr m = mollify(f, kUnit, 0.1);
  // f * phi_l = rho(l) sin(2 pi x1) with rho in (0, 1).
  const double ratio = m(0.25, 0.5);  // sin attains 1 there
  CHECK(ratio > 0.1);
  CHECK(ratio < 1.0);
  const double gap = norm_sup(m - f, kUnit, 48).value;
  CHECK(gap > 0.0);
  CHECK(gap < 2.0 * kPi * 0.1);  // <= C l ||f||_{0,1} with C ~ 1
}

TEST_CASE("mollify requires enough margin") {
  CHECK_THROWS_AS((void)mollify(x1(), kUnit, 0.3), Error);  // margin 0.25 < l
}

TEST_CASE("extension re-tags the region without changing values") {
  const Expr f = pow_of(x1(), 2.0);
  const Expr g = extend(f, kUnit);
  CHECK(g(1.1, 0.0) == doctest::Approx(1.21).epsilon(1e-14));
  const Domain ext({-0.2, -0.2}, {1.2, 1.2}, 0.0);
  CHECK(norm_sup(g, ext, 60).value >= norm_sup(f, kUnit, 60).value);
}

TEST_CASE("sup norm estimates") {
  CHECK(norm_sup(constant(3.0), kUnit, 16).value == 3.0);
  CHECK(norm_sup(sin_of(2.0 * kPi * x1()), kUnit, 64).value == doctest::Approx(1.0).epsilon(1e-12));
  // high frequency needs resolution >= 4 lambda
  const Expr hf = sin_of(2.0 * kPi * 64.0 * x1());
  CHECK(norm_sup(hf, kUnit, 4 * 64).value >= 0.999);
}

TEST_CASE("norm estimates are monotone under refinement") {
  const Expr f = sin_of(2.0 * kPi * 3.0 * x1()) * cos_of(5.0 * x2());
  double prev = 0.0;
  for (int res : {8, 16, 32, 64}) {
    const double v = norm_sup(f, kUnit, res).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Lipschitz seminorm of a coordinate") {
  const NormEstimate e = norm_holder(x1(), kUnit, 1.0, 32);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("C^m norm picks up derivative sups") {
  const NormEstimate e = norm_cm(sin_of(2.0 * kPi * x1()), kUnit, 1, 64);
  CHECK(e.value == doctest::Approx(2.0 * kPi).epsilon(1e-9));
}

TEST_CASE("commutator gap: constants commute, smooth pair has quadratic slope") {
  const Expr f = sin_of(2.0 * kPi * x1());
  CHECK(commutator_gap(constant(2.0), f, 0.1, 1.0, kUnit) < 1e-12);
  const double g1 = commutator_gap(f, f, 0.2, 1.0, kUnit);
  const double g2 = commutator_gap(f, f, 0.1, 1.0, kUnit);
  const double g3 = commutator_gap(f, f, 0.05, 1.0, kUnit);
  CHECK(g1 > g2);
  CHECK(g2 > g3);
  // frozen slopes: 1.834 between 0.2 and 0.1, 1.958 between 0.1 and 0.05
  CHECK(std::log2(g2 / g3) >= 1.9);
  CHECK(std::log2(g1 / g2) >= 1.7);
}

TEST_CASE("commutator gap for coordinates equals the bump's second moment scaling") {
  const double g1 = commutator_gap(x1(), x1(), 0.2, 1.0, kUnit);
  const double g2 = commutator_gap(x1(), x1(), 0.1, 1.0, kUnit);
  CHECK(g1 > 0.0);
  CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(1e-6));  // proportional to l^2
}

TEST_CASE("grid round trip and header validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wforge_grid_test";
  fs::create_directories(dir);
  const Grid g = sample_grid(sin_of(x1()) + x2(), kUnit, 17, 9);
  const std::string path = (dir / "g.wfg").string();
  write_grid(g, path);
  const Grid r = read_grid(path);
  CHECK(r.nx == g.nx);
  CHECK(r.ny == g.ny);
  CHECK(r.data == g.data);

  // truncated payload
  {
    std::ifstream is(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::ofstream os((dir / "trunc.wfg").string(), std::ios::binary);
    os.write(all.data(), static_cast<std::streamsize>(all.size() - 16));
  }
  CHECK_THROWS_WITH_AS((void)read_grid((dir / "trunc.wfg").string()),
                       doctest::Contains("truncated"), IoError);

  // bad magic names the field
  {
    std::ofstream os((dir / "bad.wfg").string(), std::ios::binary);
    os << "NOPE" << std::string(64, '\0');
  }
  CHECK_THROWS_WITH_AS((void)read_grid((dir / "bad.wfg").string()), doctest::Contains("magic"),
                       IoError);
  CHECK_THROWS_AS((void)read_grid((dir / "missing.wfg").string()), IoError);
}

TEST_CASE("grid CSV export has the documented header") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wforge_grid_test";
  fs::create_directories(dir);
  const Grid g = sample_grid(x1(), kUnit, 3, 3);
  const std::string path = (dir / "g.csv").string();
  write_grid_csv(g, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,y,value");
}

TEST_CASE("cubic grid interpolation reproduces cubics with derivatives") {
  auto poly = [](double x, double y) {
    return x * x * x - 2.0 * x * x * y + y * y * y + 0.5 * x * y;
  };
  const Expr tree = pow_of(x1(), 3.0) + (-2.0) * pow_of(x1(), 2.0) * x2() + pow_of(x2(), 3.0) +
                    0.5 * x1() * x2();
  const GridField gf(sample_grid(tree, kUnit, 9, 9));
  for (double x : {0.03, 0.41, 0.77, 0.98})
    for (double y : {0.09, 0.55, 0.93}) {
      CHECK(gf.value({x, y}) == doctest::Approx(poly(x, y)).epsilon(1e-12));
      CHECK(gf.deriv({x, y}, 1, 0) ==
            doctest::Approx(3.0 * x * x - 4.0 * x * y + 0.5 * y).epsilon(1e-11));
      CHECK(gf.deriv({x, y}, 0, 1) ==
            doctest::Approx(-2.0 * x * x + 3.0 * y * y + 0.5 * x).epsilon(1e-11));
    }
}

TEST_CASE("grid interpolation rejects degenerate grids") {
  Grid g;
  g.nx = 3;
  g.ny = 3;
  g.xmax = g.ymax = 1.0;
  g.data.assign(9, 0.0);
  CHECK_THROWS_AS((void)GridField(g), PreconditionError);
}

TEST_SUITE_END();
