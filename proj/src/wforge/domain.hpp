#pragma once

#include <array>
#include <cmath>

#include "wforge/errors.hpp"

namespace wforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Axis-aligned rectangular base domain Ω together with a margin that defines
/// the enlarged rectangle used by mollification and by the Poisson solve.
struct Domain {
  Vec2 rect_min{0.0, 0.0};
  Vec2 rect_max{1.0, 1.0};
  double margin = 0.0;

  Domain() = default;
  Domain(Vec2 lo, Vec2 hi, double m) : rect_min(lo), rect_max(hi), margin(m) {
    if (!(rect_min.x < rect_max.x) || !(rect_min.y < rect_max.y))
      throw ConfigError("Domain: rect_min must be componentwise below rect_max");
    if (!(margin >= 0.0)) throw ConfigError("Domain: margin must be nonnegative");
  }

  [[nodiscard]] Vec2 ext_min() const { return {rect_min.x - margin, rect_min.y - margin}; }
  [[nodiscard]] Vec2 ext_max() const { return {rect_max.x + margin, rect_max.y + margin}; }
  [[nodiscard]] double width() const { return rect_max.x - rect_min.x; }
  [[nodiscard]] double height() const { return rect_max.y - rect_min.y; }
  [[nodiscard]] double diameter() const { return std::hypot(width(), height()); }

  [[nodiscard]] bool contains(Vec2 p) const {
    return p.x >= rect_min.x && p.x <= rect_max.x && p.y >= rect_min.y && p.y <= rect_max.y;
  }
  [[nodiscard]] bool contains_extended(Vec2 p) const {
    return p.x >= rect_min.x - margin && p.x <= rect_max.x + margin && p.y >= rect_min.y - margin &&
           p.y <= rect_max.y + margin;
  }
};

/// Symmetric 2x2 matrix of plain numbers (field-valued counterpart lives in norms.hpp).
struct Sym2 {
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;

  friend Sym2 operator+(Sym2 a, Sym2 b) { return {a.m11 + b.m11, a.m12 + b.m12, a.m22 + b.m22}; }
  friend Sym2 operator-(Sym2 a, Sym2 b) { return {a.m11 - b.m11, a.m12 - b.m12, a.m22 - b.m22}; }
  friend Sym2 operator*(double s, Sym2 a) { return {s * a.m11, s * a.m12, s * a.m22}; }
};

inline Sym2 sym_outer(Vec2 v) { return {v.x * v.x, v.x * v.y, v.y * v.y}; }
inline Sym2 sym_identity() { return {1.0, 0.0, 1.0}; }

/// Frobenius norm treating the matrix as the full 2x2 (off-diagonal counted twice).
inline double frob(Sym2 g) {
  return std::sqrt(g.m11 * g.m11 + 2.0 * g.m12 * g.m12 + g.m22 * g.m22);
}

/// Smaller eigenvalue of a symmetric 2x2 matrix (closed form).
inline double eig_min(Sym2 g) {
  const double mid = 0.5 * (g.m11 + g.m22);
  const double rad = std::hypot(0.5 * (g.m11 - g.m22), g.m12);
  return mid - rad;
}
inline double eig_max(Sym2 g) {
  const double mid = 0.5 * (g.m11 + g.m22);
  const double rad = std::hypot(0.5 * (g.m11 - g.m22), g.m12);
  return mid + rad;
}

/// Principal square root of a symmetric positive definite 2x2 matrix.
inline Sym2 spd_sqrt(Sym2 g) {
  const double det = g.m11 * g.m22 - g.m12 * g.m12;
  const double tr = g.m11 + g.m22;
  if (!(det > 0.0) || !(tr > 0.0))
    throw PreconditionError("spd_sqrt: matrix is not positive definite");
  const double s = std::sqrt(det);
  const double t = std::sqrt(tr + 2.0 * s);
  return {(g.m11 + s) / t, g.m12 / t, (g.m22 + s) / t};
}

/// Inverse of a symmetric 2x2 matrix.
inline Sym2 sym_inverse(Sym2 g) {
  const double det = g.m11 * g.m22 - g.m12 * g.m12;
  if (det == 0.0) throw PreconditionError("sym_inverse: singular matrix");
  return {g.m22 / det, -g.m12 / det, g.m11 / det};
}

/// Congruence product  B * G * B  for symmetric B, G (result is symmetric).
inline Sym2 congruence(Sym2 b, Sym2 g) {
  // A = B*G
  const double a11 = b.m11 * g.m11 + b.m12 * g.m12;
  const double a12 = b.m11 * g.m12 + b.m12 * g.m22;
  const double a21 = b.m12 * g.m11 + b.m22 * g.m12;
  const double a22 = b.m12 * g.m12 + b.m22 * g.m22;
  // A*B (symmetric by construction)
  return {a11 * b.m11 + a12 * b.m12, a11 * b.m12 + a12 * b.m22, a21 * b.m12 + a22 * b.m22};
}

}  // namespace wforge
