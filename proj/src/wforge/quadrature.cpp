#include "wforge/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace wforge {

static GaussRule compute_gauss(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

Composite1D composite_gauss(double a, double b, int cells, int pts) {
  const GaussRule& g = gauss_legendre(pts);
  Composite1D c;
  c.x.reserve(static_cast<std::size_t>(cells) * pts);
  c.w.reserve(static_cast<std::size_t>(cells) * pts);
  const double h = (b - a) / cells;
  for (int i = 0; i < cells; ++i) {
    const double mid = a + (i + 0.5) * h;
    for (int j = 0; j < pts; ++j) {
      c.x.push_back(mid + 0.5 * h * g.nodes[j]);
      c.w.push_back(0.5 * h * g.weights[j]);
    }
  }
  return c;
}

}  // namespace wforge
