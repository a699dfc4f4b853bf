#include "wforge/expr.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <unordered_map>

#include "wforge/errors.hpp"
#include "wforge/quadrature.hpp"

namespace wforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

ExprPtr make_node(ExprKind kind) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  return n;
}

bool is_const(const Expr& e, double* v = nullptr) {
  if (e.node() && e.node()->kind == ExprKind::constant) {
    if (v) *v = e.node()->a;
    return true;
  }
  return false;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

// ---------------------------------------------------------------------------
// The compactly supported profile B(t) = exp(-1/(1-t)) for t < 1, 0 otherwise,
// and its first three derivatives.  With u = 1 - t and the exponent
// e(t) = -1/u:  e' = -u^-2, e'' = -2u^-3, e''' = -6u^-4, and
//   B'   = B e'
//   B''  = B (e'^2 + e'')
//   B''' = B (e'^3 + 3 e' e'' + e''')
double bump_deriv(int order, double t) {
  const double u = 1.0 - t;
  // Below u ~ 1e-12 the value exp(-1/u) underflows long before the rational
  // prefactors overflow; return the limit 0 to avoid inf*0.
  if (u < 1e-12) return 0.0;
  const double b = std::exp(-1.0 / u);
  if (b == 0.0) return 0.0;
  switch (order) {
    case 0:
      return b;
    case 1:
      return b * (-1.0 / (u * u));
    case 2: {
      const double e1 = -1.0 / (u * u);
      const double e2 = -2.0 / (u * u * u);
      return b * (e1 * e1 + e2);
    }
    case 3: {
      const double e1 = -1.0 / (u * u);
      const double e2 = -2.0 / (u * u * u);
      const double e3 = -6.0 / (u * u * u * u);
      return b * (e1 * e1 * e1 + 3.0 * e1 * e2 + e3);
    }
    default:
      throw PreconditionError("bump_deriv: unsupported derivative order");
  }
}

// Partial derivative d^(i+j) phi / dy1^i dy2^j of the unit-scale mollifier
// phi(y) = c * B(|y|^2), for i + j <= 3.
double phi_deriv(int i, int j, double y1, double y2) {
  const double c = mollifier_constant();
  const double t = y1 * y1 + y2 * y2;
  if (t >= 1.0) return 0.0;
  const double b1 = bump_deriv(1, t);
  const double b2 = bump_deriv(2, t);
  const double b3 = bump_deriv(3, t);
  const int total = i + j;
  if (total == 0) return c * bump_deriv(0, t);
  if (total == 1) {
    const double yi = (i == 1) ? y1 : y2;
    return c * 2.0 * yi * b1;
  }
  if (total == 2) {
    if (i == 2) return c * (4.0 * y1 * y1 * b2 + 2.0 * b1);
    if (j == 2) return c * (4.0 * y2 * y2 * b2 + 2.0 * b1);
    return c * 4.0 * y1 * y2 * b2;  // i = j = 1
  }
  // total == 3
  if (i == 3) return c * (8.0 * y1 * y1 * y1 * b3 + 12.0 * y1 * b2);
  if (i == 2) return c * (8.0 * y1 * y1 * y2 * b3 + 4.0 * y2 * b2);
  if (i == 1) return c * (8.0 * y1 * y2 * y2 * b3 + 4.0 * y1 * b2);
  return c * (8.0 * y2 * y2 * y2 * b3 + 12.0 * y2 * b2);
}

std::shared_ptr<const MollifyData> build_mollify_data(double l, int quad_order, int dx, int dy) {
  auto md = std::make_shared<MollifyData>();
  md->l = l;
  md->quad_order = quad_order;
  md->dx = dx;
  md->dy = dy;
  const GaussRule& g = gauss_legendre(quad_order);
  const double scale = std::pow(l, -2.0 - dx - dy);
  std::vector<double> base;  // w_q * phi_l(y_q), kept for moment corrections
  for (int a = 0; a < quad_order; ++a) {
    for (int b = 0; b < quad_order; ++b) {
      const double y1 = l * g.nodes[a];
      const double y2 = l * g.nodes[b];
      if (y1 * y1 + y2 * y2 >= l * l) continue;  // outside the support ball
      const double w = (l * g.weights[a]) * (l * g.weights[b]);
      const double B = w * phi_deriv(0, 0, y1 / l, y2 / l) / (l * l);
      const double W = w * scale * phi_deriv(dx, dy, y1 / l, y2 / l);
      if (W == 0.0 && B == 0.0) continue;
      md->qx.push_back(y1);
      md->qy.push_back(y2);
      md->qw.push_back(W);
      base.push_back(B);
    }
  }
  // Enforce the exact moment conditions  int phi = 1  and  int d^beta phi = 0
  // (|beta| >= 1): the ball mask makes the raw tensor rule only ~1e-4 accurate
  // in these moments, which would bias mollified constants.
  double mass = 0.0, s = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    mass += base[k];
    s += md->qw[k];
  }
  if (mass > 0.0) {
    if (dx == 0 && dy == 0) {
      for (double& w : md->qw) w /= mass;
    } else {
      for (std::size_t k = 0; k < base.size(); ++k) md->qw[k] -= s * base[k] / mass;
    }
  }
  return md;
}

}  // namespace

double mollifier_constant() {
  // c = 1 / (pi * I) with I = int_0^1 exp(-1/(1-t)) dt  (polar substitution
  // t = r^2 turns the planar integral of B(|y|^2) into pi * I).
  static const double c = [] {
    Composite1D q = composite_gauss(0.0, 1.0, 64, 16);
    double I = 0.0;
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      const double u = 1.0 - q.x[k];
      I += q.w[k] * (u < 1e-14 ? 0.0 : std::exp(-1.0 / u));
    }
    return 1.0 / (kPi * I);
  }();
  return c;
}

// --- builders ----------------------------------------------------------------

Expr constant(double v) {
  auto n = make_node(ExprKind::constant);
  const_cast<ExprNode*>(n.get())->a = v;
  return Expr(n);
}

Expr coord(int axis) {
  if (axis != 0 && axis != 1) throw ConfigError("coord: axis must be 0 or 1");
  auto n = make_node(ExprKind::coord);
  const_cast<ExprNode*>(n.get())->i0 = axis;
  return Expr(n);
}

static Expr keep_region(const Expr& a, const Expr& b, Expr result) {
  if (a.region()) return result.with_region(a.region());
  if (b.region()) return result.with_region(b.region());
  return result;
}

Expr add(Expr a, Expr b) {
  double ca = 0, cb = 0;
  if (is_const(a, &ca) && is_const(b, &cb)) return constant(ca + cb);
  if (is_const(a, &ca) && ca == 0.0) return b;
  if (is_const(b, &cb) && cb == 0.0) return a;
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::add;
  double cval = 0.0;
  bool have_c = false;
  auto absorb = [&](const Expr& e) {
    if (!e.node()) return;
    if (e.node()->kind == ExprKind::add) {
      for (const auto& k : e.node()->kids) {
        if (k->kind == ExprKind::constant) {
          cval += k->a;
          have_c = true;
        } else {
          n->kids.push_back(k);
        }
      }
    } else if (e.node()->kind == ExprKind::constant) {
      cval += e.node()->a;
      have_c = true;
    } else {
      n->kids.push_back(e.node());
    }
  };
  absorb(a);
  absorb(b);
  if (have_c && cval != 0.0) n->kids.push_back(constant(cval).node());
  if (n->kids.empty()) return keep_region(a, b, constant(have_c ? cval : 0.0));
  if (n->kids.size() == 1) return keep_region(a, b, Expr(n->kids[0]));
  return keep_region(a, b, Expr(n));
}

Expr sub(Expr a, Expr b) { return add(std::move(a), scale(-1.0, std::move(b))); }

Expr mul(Expr a, Expr b) {
  double ca = 0, cb = 0;
  const bool ka = is_const(a, &ca), kb = is_const(b, &cb);
  if (ka && kb) return constant(ca * cb);
  if (ka) return scale(ca, std::move(b));
  if (kb) return scale(cb, std::move(a));
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::mul;
  n->kids = {a.node(), b.node()};
  return keep_region(a, b, Expr(n));
}

Expr scale(double s, Expr a) {
  if (s == 0.0) return constant(0.0);
  if (s == 1.0) return a;
  double ca = 0;
  if (is_const(a, &ca)) return constant(s * ca);
  if (a.node() && a.node()->kind == ExprKind::scale)
    return scale(s * a.node()->a, Expr(a.node()->kids[0])).with_region(a.region());
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::scale;
  n->a = s;
  n->kids = {a.node()};
  Expr r(n);
  if (a.region()) r = r.with_region(a.region());
  return r;
}

static Expr unary(ExprKind kind, Expr a, double param = 0.0, int iparam = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->a = param;
  n->i0 = iparam;
  n->kids = {a.node()};
  Expr r(n);
  if (a.region()) r = r.with_region(a.region());
  return r;
}

Expr sin_of(Expr a) {
  double c = 0;
  if (is_const(a, &c)) return constant(std::sin(c));
  return unary(ExprKind::sine, std::move(a));
}

Expr cos_of(Expr a) {
  double c = 0;
  if (is_const(a, &c)) return constant(std::cos(c));
  return unary(ExprKind::cosine, std::move(a));
}

Expr pow_of(Expr base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  double c = 0;
  if (is_const(base, &c)) {
    if (c < 0.0 && !is_integer(exponent))
      throw PreconditionError("pow: negative base with non-integer exponent");
    return constant(std::pow(c, exponent));
  }
  return unary(ExprKind::power, std::move(base), exponent);
}

static Expr pow_clamped(Expr base, double exponent) {
  return unary(ExprKind::power_clamped, std::move(base), exponent);
}

Expr bump_profile(Expr t, int k) {
  if (k < 0 || k > 3) throw PreconditionError("bump_profile: order must be in 0..3");
  double c = 0;
  if (is_const(t, &c)) return constant(bump_deriv(k, c));
  return unary(ExprKind::bump, std::move(t), 0.0, k);
}

Expr sine_series(std::shared_ptr<const SeriesData> data) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::sine_series;
  n->series = std::move(data);
  return Expr(n);
}

Expr mollify(const Expr& f, const Domain& domain, double l, int quad_order) {
  if (!(l > 0.0 && l < 1.0)) throw ConfigError("mollify: scale l must lie in (0,1)");
  if (quad_order < 2) throw ConfigError("mollify: quadrature order must be >= 2");
  if (domain.margin < l)
    throw PreconditionError("mollify: insufficient domain extension (margin < l)");
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::mollify;
  n->kids = {f.node()};
  n->moll = build_mollify_data(l, quad_order, 0, 0);
  return Expr(n);
}

Expr extend(const Expr& f, const Domain& domain) {
  return f.with_region(std::make_shared<Domain>(domain));
}

// --- differentiation ----------------------------------------------------------

static ExprPtr d_axis(const ExprPtr& n, int axis);

static Expr d_axis_e(const Expr& e, int axis) { return Expr(d_axis(e.node(), axis)); }

static ExprPtr d_axis_uncached(const ExprPtr& n, int axis) {
  const Expr kid0 = n->kids.empty() ? Expr() : Expr(n->kids[0]);
  switch (n->kind) {
    case ExprKind::constant:
      return constant(0.0).node();
    case ExprKind::coord:
      return constant(n->i0 == axis ? 1.0 : 0.0).node();
    case ExprKind::add: {
      Expr s = constant(0.0);
      for (const auto& k : n->kids) s = add(std::move(s), Expr(d_axis(k, axis)));
      return s.node();
    }
    case ExprKind::mul: {
      const Expr a(n->kids[0]), b(n->kids[1]);
      return add(mul(d_axis_e(a, axis), b), mul(a, d_axis_e(b, axis))).node();
    }
    case ExprKind::scale:
      return scale(n->a, d_axis_e(kid0, axis)).node();
    case ExprKind::sine:
      return mul(cos_of(kid0), d_axis_e(kid0, axis)).node();
    case ExprKind::cosine:
      return scale(-1.0, mul(sin_of(kid0), d_axis_e(kid0, axis))).node();
    case ExprKind::power:
    case ExprKind::power_clamped: {
      const double p = n->a;
      // For non-integer exponents the derivative factor f^(p-1) is evaluated
      // with a clamp to 0 at f <= 0: every non-integer power in this artifact
      // has a radicand that is either strictly positive or vanishes to
      // infinite order (bump partitions), where 0 is the correct limit.
      Expr factor = (is_integer(p) && p - 1.0 >= 0.0 && n->kind == ExprKind::power)
                        ? pow_of(kid0, p - 1.0)
                        : pow_clamped(kid0, p - 1.0);
      return scale(p, mul(std::move(factor), d_axis_e(kid0, axis))).node();
    }
    case ExprKind::bump: {
      if (n->i0 >= 3)
        throw PreconditionError("differentiate: bump profile supports orders up to 3");
      return mul(bump_profile(kid0, n->i0 + 1), d_axis_e(kid0, axis)).node();
    }
    case ExprKind::mollify: {
      const auto& md = *n->moll;
      if (md.dx + md.dy >= 3)
        throw PreconditionError("differentiate: mollification node supports total order <= 3");
      auto out = std::make_shared<ExprNode>();
      out->kind = ExprKind::mollify;
      out->kids = n->kids;
      out->moll = build_mollify_data(md.l, md.quad_order, md.dx + (axis == 0 ? 1 : 0),
                                     md.dy + (axis == 1 ? 1 : 0));
      return out;
    }
    case ExprKind::sine_series: {
      auto data = std::make_shared<SeriesData>(*n->series);
      if (axis == 0)
        data->dx += 1;
      else
        data->dy += 1;
      auto out = std::make_shared<ExprNode>();
      out->kind = ExprKind::sine_series;
      out->series = std::move(data);
      return out;
    }
  }
  throw PreconditionError("differentiate: unknown node kind");
}

static ExprPtr d_axis(const ExprPtr& n, int axis) {
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto hit = n->dcache[axis].lock()) return hit;
  }
  ExprPtr result = d_axis_uncached(n, axis);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto hit = n->dcache[axis].lock()) return hit;  // racing builder won
    n->dcache[axis] = result;
  }
  return result;
}

Expr differentiate(const Expr& f, int i, int j) {
  if (i < 0 || j < 0 || i + j > 3)
    throw PreconditionError("differentiate: multi-index must satisfy 0 <= i+j <= 3");
  ExprPtr n = f.node();
  for (int k = 0; k < i; ++k) n = d_axis(n, 0);
  for (int k = 0; k < j; ++k) n = d_axis(n, 1);
  Expr r(n);
  if (f.region()) r = r.with_region(f.region());
  return r;
}

// --- evaluation ----------------------------------------------------------------

Evaluator::Evaluator(const Expr& root) {
  std::unordered_map<const ExprNode*, int> memo;
  // Iterative postorder over the DAG.
  struct Frame {
    const ExprNode* node;
    std::size_t next_kid;
  };
  std::vector<Frame> stack;
  if (!root.node()) throw PreconditionError("Evaluator: empty expression");
  stack.push_back({root.node().get(), 0});
  // Hold shared ownership of every distinct node via the root; pointers stay valid.
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (memo.count(f.node)) {
      stack.pop_back();
      continue;
    }
    // Mollify nodes compile their inner field into a nested evaluator instead
    // of inlining it into this tape.
    const bool recurse_kids = f.node->kind != ExprKind::mollify;
    if (recurse_kids && f.next_kid < f.node->kids.size()) {
      const ExprNode* kid = f.node->kids[f.next_kid].get();
      ++f.next_kid;
      if (!memo.count(kid)) stack.push_back({kid, 0});
      continue;
    }
    // All children compiled; emit this node.
    Op op{};
    op.kind = f.node->kind;
    op.a = f.node->a;
    op.i0 = f.node->i0;
    op.out = static_cast<int>(nslots_++);
    op.kid_begin = static_cast<int>(kid_slots_.size());
    op.kid_count = recurse_kids ? static_cast<int>(f.node->kids.size()) : 0;
    op.plan = -1;
    if (recurse_kids)
      for (const auto& k : f.node->kids) kid_slots_.push_back(memo.at(k.get()));
    if (f.node->kind == ExprKind::mollify) {
      MollifyPlan plan;
      plan.data = f.node->moll;
      plan.inner = std::make_unique<Evaluator>(Expr(f.node->kids[0]));
      op.plan = static_cast<int>(plans_.size());
      plans_.push_back(std::move(plan));
    } else if (f.node->kind == ExprKind::sine_series) {
      SeriesPlan sp;
      sp.data = f.node->series;
      const auto& sd = *sp.data;
      sp.fx.resize(sd.K + 1);
      sp.fy.resize(sd.K + 1);
      for (int m = 1; m <= sd.K; ++m) {
        sp.fx[m] = std::pow(m * kPi / sd.Lx, sd.dx);
        sp.fy[m] = std::pow(m * kPi / sd.Ly, sd.dy);
      }
      op.plan = static_cast<int>(series_.size());
      series_.push_back(std::move(sp));
    }
    memo.emplace(f.node, op.out);
    ops_.push_back(op);
    stack.pop_back();
  }
}

namespace {
// d^k/dθ^k sin(θ) pattern: sin, cos, -sin, -cos.
inline double trig_phase(int phase, double s, double c) {
  switch (phase & 3) {
    case 0:
      return s;
    case 1:
      return c;
    case 2:
      return -s;
    default:
      return -c;
  }
}
}  // namespace

double Evaluator::eval(Vec2 p, EvalScratch& scratch) const {
  if (scratch.slots.size() < nslots_) scratch.slots.resize(nslots_);
  if (scratch.nested.size() < plans_.size()) scratch.nested.resize(plans_.size());
  double* s = scratch.slots.data();
  for (const Op& op : ops_) {
    switch (op.kind) {
      case ExprKind::constant:
        s[op.out] = op.a;
        break;
      case ExprKind::coord:
        s[op.out] = (op.i0 == 0) ? p.x : p.y;
        break;
      case ExprKind::add: {
        double acc = 0.0;
        for (int k = 0; k < op.kid_count; ++k) acc += s[kid_slots_[op.kid_begin + k]];
        s[op.out] = acc;
        break;
      }
      case ExprKind::mul:
        s[op.out] = s[kid_slots_[op.kid_begin]] * s[kid_slots_[op.kid_begin + 1]];
        break;
      case ExprKind::scale:
        s[op.out] = op.a * s[kid_slots_[op.kid_begin]];
        break;
      case ExprKind::sine:
        s[op.out] = std::sin(s[kid_slots_[op.kid_begin]]);
        break;
      case ExprKind::cosine:
        s[op.out] = std::cos(s[kid_slots_[op.kid_begin]]);
        break;
      case ExprKind::power: {
        const double base = s[kid_slots_[op.kid_begin]];
        if (base < 0.0 && !is_integer(op.a))
          throw PreconditionError("evaluate: negative radicand under non-integer power");
        if (base == 0.0 && op.a < 0.0)
          throw PreconditionError("evaluate: zero base under negative power");
        s[op.out] = std::pow(base, op.a);
        break;
      }
      case ExprKind::power_clamped: {
        const double base = s[kid_slots_[op.kid_begin]];
        s[op.out] = (base <= 1e-300) ? 0.0 : std::pow(base, op.a);
        break;
      }
      case ExprKind::bump:
        s[op.out] = bump_deriv(op.i0, s[kid_slots_[op.kid_begin]]);
        break;
      case ExprKind::mollify: {
        const MollifyPlan& plan = plans_[op.plan];
        auto& sub = scratch.nested[op.plan];
        if (!sub) sub = std::make_unique<EvalScratch>();
        const auto& md = *plan.data;
        double acc = 0.0;
        const std::size_t nq = md.qw.size();
        for (std::size_t q = 0; q < nq; ++q)
          acc += md.qw[q] * plan.inner->eval({p.x - md.qx[q], p.y - md.qy[q]}, *sub);
        s[op.out] = acc;
        break;
      }
      case ExprKind::sine_series: {
        const SeriesPlan& sp = series_[op.plan];
        const auto& sd = *sp.data;
        const double tu = kPi * (p.x - sd.x0) / sd.Lx;
        const double tv = kPi * (p.y - sd.y0) / sd.Ly;
        const double su1 = std::sin(tu), cu1 = std::cos(tu);
        const double sv1 = std::sin(tv), cv1 = std::cos(tv);
        // fy factors for all modes at this point.
        static thread_local std::vector<double> fybuf;
        fybuf.resize(sd.K + 1);
        {
          double sv = su1, cv = cu1;  // placeholders, overwritten below
          sv = sv1;
          cv = cv1;
          for (int nmode = 1; nmode <= sd.K; ++nmode) {
            fybuf[nmode] = sp.fy[nmode] * trig_phase(sd.dy, sv, cv);
            const double sn = sv * cv1 + cv * sv1;
            const double cn = cv * cv1 - sv * sv1;
            sv = sn;
            cv = cn;
          }
        }
        double acc = 0.0;
        double su = su1, cu = cu1;
        const double* coeff = sd.coeff.data();
        for (int m = 1; m <= sd.K; ++m) {
          const double fxm = sp.fx[m] * trig_phase(sd.dx, su, cu);
          if (fxm != 0.0) {
            const double* row = coeff + static_cast<std::size_t>(m - 1) * sd.K;
            double inner = 0.0;
            for (int nmode = 1; nmode <= sd.K; ++nmode) inner += row[nmode - 1] * fybuf[nmode];
            acc += fxm * inner;
          }
          const double sm = su * cu1 + cu * su1;
          const double cm = cu * cu1 - su * su1;
          su = sm;
          cu = cm;
        }
        s[op.out] = acc;
        break;
      }
    }
  }
  return s[ops_.back().out];
}

double Expr::operator()(Vec2 p) const {
  if (!node_) throw PreconditionError("evaluate: empty expression");
  if (!tape_) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    if (!tape_) tape_ = std::make_shared<Evaluator>(*this);
  }
  EvalScratch scratch;
  return std::static_pointer_cast<Evaluator>(tape_)->eval(p, scratch);
}

double evaluate(const Expr& f, Vec2 p) {
  if (f.region() && !f.region()->contains_extended(p))
    throw PreconditionError("evaluate: point outside the admissible (extended) domain");
  return f(p);
}

// --- grammar serialization -----------------------------------------------------

namespace {

std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Precedence: 0 sum, 1 product, 2 power/atom.
void emit(const ExprPtr& n, int parent_prec, std::string& out) {
  auto paren = [&](int prec, auto&& body) {
    const bool need = prec < parent_prec;
    if (need) out += '(';
    body();
    if (need) out += ')';
  };
  switch (n->kind) {
    case ExprKind::constant:
      if (n->a < 0) {
        out += '(';
        out += fmt_number(n->a);
        out += ')';
      } else {
        out += fmt_number(n->a);
      }
      return;
    case ExprKind::coord:
      out += (n->i0 == 0) ? "x1" : "x2";
      return;
    case ExprKind::add:
      paren(0, [&] {
        for (std::size_t k = 0; k < n->kids.size(); ++k) {
          if (k) out += " + ";
          emit(n->kids[k], 0, out);
        }
      });
      return;
    case ExprKind::mul:
      paren(1, [&] {
        emit(n->kids[0], 1, out);
        out += "*";
        emit(n->kids[1], 1, out);
      });
      return;
    case ExprKind::scale:
      paren(1, [&] {
        if (n->a < 0) {
          out += '(';
          out += fmt_number(n->a);
          out += ')';
        } else {
          out += fmt_number(n->a);
        }
        out += "*";
        emit(n->kids[0], 1, out);
      });
      return;
    case ExprKind::sine:
      out += "sin(";
      emit(n->kids[0], 0, out);
      out += ")";
      return;
    case ExprKind::cosine:
      out += "cos(";
      emit(n->kids[0], 0, out);
      out += ")";
      return;
    case ExprKind::power:
      if (!is_integer(n->a))
        throw ConfigError("to_grammar_string: non-integer power is outside the config grammar");
      paren(2, [&] {
        emit(n->kids[0], 2, out);
        out += "^";
        out += fmt_number(n->a);
      });
      return;
    default:
      throw ConfigError("to_grammar_string: node kind outside the config grammar");
  }
}

}  // namespace

std::string to_grammar_string(const Expr& f) {
  if (!f.node()) return "0";
  std::string out;
  emit(f.node(), 0, out);
  return out;
}

}  // namespace wforge
