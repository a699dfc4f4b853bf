#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wforge/domain.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Immutable analytic expression trees for scalar fields on the plane.
//
// Supported node kinds: constants, coordinates, sums, products, scalar
// multiples, sine/cosine, real powers, a compactly supported bump profile
// (with its first three derivatives as sibling kinds), mollification by
// convolution against a fixed radial bump (evaluated by masked tensor
// Gauss-Legendre quadrature), and a double-sine-series node used by the
// spectral Poisson solve.  Every kind supports exact differentiation as a new
// tree; mollification and series nodes differentiate by bumping a derivative
// multi-index carried on the node.
// ---------------------------------------------------------------------------

enum class ExprKind : std::uint8_t {
  constant,
  coord,       // i0: 0 -> x1, 1 -> x2
  add,         // n-ary sum
  mul,         // binary product
  scale,       // a * child
  sine,
  cosine,
  power,         // child ^ a (real exponent)
  power_clamped, // like power but evaluates to 0 when child <= 0 (see differentiate)
  bump,          // i0-th derivative (0..3) of t -> exp(-1/(1-t)), zero for t >= 1
  mollify,       // convolution with d^(dx,dy) of the scaled mollifier
  sine_series,   // double sine series with derivative multi-index
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Precomputed quadrature for one mollification node: offsets y_q inside the
/// ball of radius l and combined weights w_q * (d^(dx,dy) phi_l)(y_q), so an
/// evaluation is just  sum_q W_q * inner(x - y_q).
struct MollifyData {
  double l = 0.0;
  int quad_order = 24;
  int dx = 0, dy = 0;
  std::vector<double> qx, qy, qw;
};

/// Double sine series sum_{m,n=1..K} c_{mn} sin(m pi u) sin(n pi v) with
/// u = (x - x0)/Lx, v = (y - y0)/Ly, differentiated (dx, dy) times.
struct SeriesData {
  int K = 0;
  double x0 = 0, y0 = 0, Lx = 1, Ly = 1;
  std::vector<double> coeff;  // row-major K x K
  int dx = 0, dy = 0;
};

struct ExprNode {
  ExprKind kind;
  double a = 0.0;  // constant value / scale factor / power exponent
  int i0 = 0;      // coord index or bump derivative order
  std::vector<ExprPtr> kids;
  std::shared_ptr<const MollifyData> moll;
  std::shared_ptr<const SeriesData> series;

  // Lazy derivative cache (per axis) so repeated differentiation returns the
  // same shared subtree and downstream tape compilation can deduplicate it.
  mutable std::array<std::weak_ptr<const ExprNode>, 2> dcache;
};

/// Value-semantic handle to an immutable expression tree, with an optional
/// admissible-evaluation rectangle (advisory; set by `extend`).
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr n) : node_(std::move(n)) {}

  [[nodiscard]] const ExprPtr& node() const { return node_; }
  [[nodiscard]] bool empty() const { return node_ == nullptr; }

  /// Convenience single-point evaluation (builds and caches a tape).
  double operator()(Vec2 p) const;
  double operator()(double x, double y) const { return (*this)(Vec2{x, y}); }

  [[nodiscard]] const std::shared_ptr<const Domain>& region() const { return region_; }
  [[nodiscard]] Expr with_region(std::shared_ptr<const Domain> d) const {
    Expr e = *this;
    e.region_ = std::move(d);
    return e;
  }

 private:
  ExprPtr node_;
  std::shared_ptr<const Domain> region_;
  mutable std::shared_ptr<void> tape_;  // lazily built Evaluator for operator()
  friend class Evaluator;
};

// --- builders (with constant folding) --------------------------------------
Expr constant(double v);
Expr coord(int axis);  // 0 -> x1, 1 -> x2
inline Expr x1() { return coord(0); }
inline Expr x2() { return coord(1); }
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr scale(double s, Expr a);
Expr sin_of(Expr a);
Expr cos_of(Expr a);
Expr pow_of(Expr base, double exponent);
inline Expr sqrt_pos(Expr a) { return pow_of(std::move(a), 0.5); }
/// k-th derivative (k in 0..3) of the compactly supported profile
/// t -> exp(-1/(1-t)) for t < 1, 0 otherwise, composed with `t`.
Expr bump_profile(Expr t, int k = 0);
/// Double sine series node.
Expr sine_series(std::shared_ptr<const SeriesData> data);

inline Expr operator+(Expr a, Expr b) { return add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return mul(std::move(a), std::move(b)); }
inline Expr operator*(double s, Expr a) { return scale(s, std::move(a)); }
inline Expr operator-(Expr a) { return scale(-1.0, std::move(a)); }
inline Expr operator+(Expr a, double b) { return add(std::move(a), constant(b)); }
inline Expr operator+(double a, Expr b) { return add(constant(a), std::move(b)); }
inline Expr operator-(Expr a, double b) { return sub(std::move(a), constant(b)); }
inline Expr operator-(double a, Expr b) { return sub(constant(a), std::move(b)); }
inline Expr operator*(Expr a, double s) { return scale(s, std::move(a)); }

// --- operations -------------------------------------------------------------

/// Exact value at a point; honors the admissible region when one is tagged.
double evaluate(const Expr& f, Vec2 p);

/// Exact partial derivative d^(i+j) / dx1^i dx2^j as a new tree (i + j <= 3
/// supported through every node kind used by the artifact).
Expr differentiate(const Expr& f, int i, int j);

/// Convolution with the unit-mass radial bump at scale l (masked tensor
/// Gauss-Legendre of the given per-axis order).  Requires domain.margin >= l.
Expr mollify(const Expr& f, const Domain& domain, double l, int quad_order = 24);

/// Re-tags the admissible evaluation region to the extended rectangle.
/// Closed-form trees are globally defined, so the tree itself is unchanged.
Expr extend(const Expr& f, const Domain& domain);

/// Normalization constant c of the mollifier c*exp(-1/(1-|x|^2)) (unit mass).
double mollifier_constant();

/// Serialize grammar-subset trees (constants, coords, +, *, scalar multiples,
/// sin, cos, integer powers) back to the tiny config grammar.
std::string to_grammar_string(const Expr& f);

// --- tape evaluator ---------------------------------------------------------

/// Reusable scratch for one evaluation thread.
struct EvalScratch {
  std::vector<double> slots;
  std::vector<std::unique_ptr<EvalScratch>> nested;
};

/// Compiled postorder tape over the expression DAG (common subtrees are
/// evaluated once per point).  Immutable and shareable between threads; each
/// thread supplies its own EvalScratch.
class Evaluator {
 public:
  explicit Evaluator(const Expr& root);
  double eval(Vec2 p, EvalScratch& scratch) const;
  [[nodiscard]] std::size_t slot_count() const { return nslots_; }

 private:
  struct Op {
    ExprKind kind;
    double a;
    int i0;
    int out;
    int kid_begin;  // index into kid_slots_
    int kid_count;
    int plan;  // mollify plan or series index
  };
  struct MollifyPlan {
    std::shared_ptr<const MollifyData> data;
    std::unique_ptr<Evaluator> inner;
  };
  struct SeriesPlan {
    std::shared_ptr<const SeriesData> data;
    std::vector<double> fx, fy;  // per-mode derivative prefactors (m pi / L)^d
  };

  std::vector<Op> ops_;
  std::vector<int> kid_slots_;
  std::vector<MollifyPlan> plans_;
  std::vector<SeriesPlan> series_;
  std::size_t nslots_ = 0;
};

}  // namespace wforge
