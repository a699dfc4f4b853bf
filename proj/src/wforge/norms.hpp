#pragma once

#include <string>

#include "wforge/domain.hpp"
#include "wforge/expr.hpp"

namespace wforge {

enum class NormKind {
  sup,     ///< max |f| over the sample lattice
  cm,      ///< max over all partial derivatives of total order <= m of their sampled sup
  holder,  ///< Hölder seminorm: max |f(x)-f(y)| / |x-y|^alpha over sampled pairs
};

/// Sampled lower bound of a norm; refining the resolution never decreases it.
struct NormEstimate {
  double value = 0.0;
  NormKind kind = NormKind::sup;
  int sample_resolution = 0;  // points per unit length
  int order = 0;              // m for kind == cm
  double alpha = 0.0;         // exponent for kind == holder
};

/// Sup norm over a lattice on the base rectangle.
NormEstimate norm_sup(const Expr& f, const Domain& domain, int resolution);

/// C^m-type estimate: max over multi-indices |(i,j)| <= m of the sampled sup of
/// the exact derivative trees.
NormEstimate norm_cm(const Expr& f, const Domain& domain, int m, int resolution);

/// Hölder seminorm estimate: for each lattice point, pairs at dyadic index
/// strides in 8 directions up to the domain diameter.
NormEstimate norm_holder(const Expr& f, const Domain& domain, double alpha, int resolution);

/// Dispatcher matching the generic operation signature.
NormEstimate norm_estimate(const Expr& f, const Domain& domain, NormKind kind, int resolution,
                           int m = 0, double alpha = 1.0);

/// Sampled sup norm of (fg)*phi_l - (f*phi_l)(g*phi_l) on the base rectangle.
/// `alpha` is carried for the downstream slope test C l^{2 alpha} and does not
/// affect the measurement.
double commutator_gap(const Expr& f, const Expr& g, double l, double alpha, const Domain& domain,
                      int resolution = 48, int quad_order = 24);

/// Minimum over the lattice of a scalar field (used for positivity margins).
double lattice_min(const Expr& f, const Domain& domain, int resolution);

/// Symmetric 2x2 matrix field with expression-tree entries.
struct SymField {
  Expr e11, e12, e22;

  [[nodiscard]] Sym2 at(Vec2 p) const { return {e11(p), e12(p), e22(p)}; }
};

SymField sym_add(const SymField& a, const SymField& b);
SymField sym_sub(const SymField& a, const SymField& b);
SymField sym_scale(double s, const SymField& a);
SymField sym_const(Sym2 g);

/// Sup over the lattice of the max absolute entry of a symmetric matrix field.
NormEstimate sym_norm_sup(const SymField& d, const Domain& domain, int resolution);

/// Min over the lattice of the smaller eigenvalue of a symmetric matrix field.
double sym_eig_min(const SymField& d, const Domain& domain, int resolution);

}  // namespace wforge
