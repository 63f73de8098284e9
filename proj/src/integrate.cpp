#include "darmon/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

Rational ppow(long p, long e) {
  return e >= 0 ? Rational(ipow(p, static_cast<unsigned long>(e))) : Rational(1, ipow(p, static_cast<unsigned long>(-e)));
}

long val_or(const Rational& q, long p, long if_zero) { return q == 0 ? if_zero : valuation(q, p); }

// Representative in Z[1/p] of the class of a modulo p^n Z_p.
Rational canonical_center(const Rational& a, long n, long p) {
  if (a == 0) return 0;
  long v = valuation(a, p);
  if (v >= n) return 0;
  Rational u = a / ppow(p, v);
  return ppow(p, v) * Rational(rational_mod(u, ipow(p, static_cast<unsigned long>(n - v))));
}

Padic from_q(const PadicCtx& ctx, const Rational& q, long prec) { return Padic::from_rational(ctx, q, prec); }

// c tau - a, exact in the integer coefficients (a zero coefficient must not
// cap the absolute precision)
Padic linear(const Int& c, const Padic& tau, const Int& a, long prec) {
  const PadicCtx& ctx = tau.ctx();
  if (c == 0) return -Padic::from_int(ctx, a, prec);
  Padic ct = Padic::from_int(ctx, c, prec) * tau;
  return a == 0 ? ct : ct - Padic::from_int(ctx, a, prec);
}

// beta(tau) = (c tau - a) / (d tau - b) = gbar(g) tau
Padic beta(const Mat2<Int>& g, const Padic& tau, long prec) {
  return linear(g.c, tau, g.a, prec) / linear(g.d, tau, g.b, prec);
}

// alpha0 = (b - d tau2) / (b - d tau1), the integrand at g 0
Padic alpha0(const Mat2<Int>& g, const Padic& tau1, const Padic& tau2, long prec) {
  return linear(g.d, tau2, g.b, prec) / linear(g.d, tau1, g.b, prec);
}

Padic unit_power(const Padic& u, long e) { return e == 0 ? Padic::one(u.ctx(), u.rel_prec()) : u.pow(e); }

Padic degree2(const Padic& x) { return x.ctx().degree == 2 ? x : x.to_degree2(); }

}  // namespace

BallShape ball_shape(const Mat2<Rational>& g, long p) {
  Rational det = g.det();
  if (det == 0) throw PreconditionError("ball: singular matrix");
  long vdet = valuation(det, p);
  BallShape b;
  if (g.c == 0) {
    b.n = valuation(Rational(g.a / g.d), p);
    b.center = canonical_center(g.b / g.d, b.n, p);
    return b;
  }
  long vc = valuation(g.c, p), vd = val_or(g.d, p, std::numeric_limits<long>::max());
  if (vd < vc) {
    b.n = vdet - 2 * vd;
    b.center = canonical_center(g.b / g.d, b.n, p);
  } else {
    b.n = vdet + 1 - 2 * vc;
    b.center = canonical_center(g.a / g.c, b.n, p);
    b.complement = true;
  }
  return b;
}

MeasureCtx::MeasureCtx(const NewformSymbol& sym, long p, Cusp r, Cusp s)
    : sym_(&sym), p_(p), M_(0), r_(std::move(r)), s_(std::move(s)) {
  long N = sym.level();
  if (N % p != 0 || (N / p) % p == 0) throw PreconditionError("measure: p must divide the level exactly once");
  M_ = N / p;
  // p^2 x - M y = 1
  Int x, y, g, pp = Int(p) * p;
  mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), pp.get_mpz_t(), Int(M_).get_mpz_t());
  y = -y;
  gamma0_ = {Rational(p * x), Rational(y), Rational(M_), Rational(p)};
  if (gamma0_.det() != 1) throw Error("measure: internal check failed");
}

long MeasureCtx::measure(const BallShape& b) const {
  const Rational& a = b.center;
  long value;
  if (b.n % 2 == 0) {
    // gamma = (p^(n/2), a p^(-n/2); 0, p^(-n/2)); gamma^-1 x = (x - a)/p^n
    Mat2<Rational> gi{1, -a, 0, ppow(p_, b.n)};
    value = sym_->eval(r_.act(gi), s_.act(gi));
  } else {
    // a + p^n Z_p = beta(p Z_p) is the complement of beta gamma0 Z_p
    Mat2<Rational> bi{1, -a, 0, ppow(p_, b.n - 1)};
    Mat2<Rational> gi = gamma0_.adjugate() * bi;
    value = -sym_->eval(r_.act(gi), s_.act(gi));
  }
  return b.complement ? -value : value;
}

// ---------------------------------------------------------------------------

MultIntResult MultIntResult::one(const PadicCtx& ctx, long prec) {
  return {0, Padic::zero(ctx, prec), Padic::one(ctx, prec), prec};
}

MultIntResult MultIntResult::split(const Padic& x, long prec) {
  if (x.is_zero()) throw DomainError("split: zero has no multiplicative decomposition");
  Padic u = x.unit_part();
  return {x.valuation(), padic_log(u), teichmuller(u), prec};
}

MultIntResult MultIntResult::operator*(const MultIntResult& o) const {
  return {valuation + o.valuation, log_value + o.log_value, teich_unit * o.teich_unit, std::min(precision, o.precision)};
}

MultIntResult MultIntResult::inverse() const { return {-valuation, -log_value, teich_unit.inverse(), precision}; }

bool MultIntResult::agrees(const MultIntResult& o, long n) const {
  if (valuation != o.valuation) return false;
  long m = std::min({n, log_value.abs_prec(), o.log_value.abs_prec()});
  long t = std::min({n, teich_unit.abs_prec(), o.teich_unit.abs_prec()});
  return congruent(degree2(log_value), degree2(o.log_value), m) && congruent(degree2(teich_unit), degree2(o.teich_unit), t);
}

Padic recover_value(const MultIntResult& res) {
  const PadicCtx& ctx = res.teich_unit.ctx();
  Padic pv = Padic::from_coords(ctx, 1, 0, res.valuation, res.precision);
  Padic e = res.log_value.is_zero() ? Padic::one(ctx, res.precision) : padic_exp(res.log_value);
  return pv * res.teich_unit * e;
}

Mat2<Rational> gbar(const Mat2<Rational>& g) {
  Mat2<Rational> w{0, -1, 1, 0};
  return w * g.inverse();
}

Padic act(const Mat2<Rational>& g, const Padic& tau) {
  const PadicCtx& ctx = tau.ctx();
  long prec = tau.rel_prec() + 2;
  auto lin = [&](const Rational& x, const Rational& y) {
    if (x == 0) return from_q(ctx, y, prec);
    Padic xt = from_q(ctx, x, prec) * tau;
    return y == 0 ? xt : xt + from_q(ctx, y, prec);
  };
  return lin(g.a, g.b) / lin(g.c, g.d);
}

// ---------------------------------------------------------------------------

StandardCover standard_cover(const Padic& tau1_in, const Padic& tau2_in) {
  Padic tau1 = degree2(tau1_in), tau2 = degree2(tau2_in);
  const PadicCtx& ctx = tau1.ctx();
  long p = ctx.p;
  Padic x = tau1.coord(0), y = tau1.coord(1);
  if (y.is_zero()) throw DomainError("standard_cover: tau1 lies in P^1(Q_p) to working precision");
  long k = y.valuation();
  Rational x0 = 0;
  if (!x.is_zero() && x.valuation() < k) {
    long vx = x.valuation();
    Int u = x.unit_part().coords_mod(k - vx).first;
    x0 = ppow(p, vx) * Rational(u);
  }
  // h0^-1 tau1 = (tau1 - x0)/p^k has integral coordinates, second one a unit
  Mat2<Rational> h0{ppow(p, k), x0, 0, 1};
  Padic t2 = act(h0.inverse(), tau2);
  if (t2.valuation() < 0) {
    h0 = h0 * Mat2<Rational>{0, 1, 1, 0};
    t2 = t2.inverse();
  }
  Padic y2 = t2.coord(1);
  if (y2.is_zero()) throw DomainError("standard_cover: tau2 lies in P^1(Q_p) to working precision");
  long r = y2.valuation();
  Int t2int = t2.coord(0).is_zero() ? Int(0) : t2.coords_mod(r + 1).first;

  // clear the p-power denominators of h0
  Int den = 1;
  for (const Rational* e : {&h0.a, &h0.b, &h0.c, &h0.d}) den = lcm(den, Int(e->get_den()));
  StandardCover cov;
  cov.h = {Int(h0.a * den), Int(h0.b * den), Int(h0.c * den), Int(h0.d * den)};
  cov.r = r;
  auto push = [&](const Mat2<Int>& g) { cov.balls.push_back(cov.h * g); };
  for (long i = 1; i <= r; ++i) {
    Int pi1 = ipow(p, static_cast<unsigned long>(i - 1));
    Int ti1 = mod(t2int, pi1);
    long digit = mod(t2int / pi1, Int(p)).get_si();
    for (long b = 0; b < p; ++b)
      if (b != digit) push({ipow(p, static_cast<unsigned long>(i)), ti1 + b * pi1, 0, 1});
  }
  Int pr = ipow(p, static_cast<unsigned long>(r));
  Int tr = mod(t2int, pr);
  for (long b = 0; b < p; ++b) push({pr * p, tr + b * pr, 0, 1});
  push({0, 1, p, 0});
  return cov;
}

namespace {

// Digits lost to cancellation when tau is p-adically close to P^1(Q_p):
// v(imaginary coordinate) - v(tau), zero for tau in the unramified disc.
long closeness(const Padic& tau) {
  Padic y = tau.coord(1);
  if (y.is_zero()) throw DomainError("double integral: tau lies in P^1(Q_p) to working precision");
  return std::max<long>(0, y.valuation() - tau.valuation());
}

}  // namespace

MultIntResult riemann_double_integral(const MeasureCtx& ctx, const Padic& tau1_in, const Padic& tau2_in, long depth) {
  if (depth < 1) throw PreconditionError("riemann_double_integral: depth must be at least 1");
  long p = ctx.p();
  Padic tau1 = degree2(tau1_in), tau2 = degree2(tau2_in);
  long slack = std::max(closeness(tau1), closeness(tau2));
  long prec = depth + 2 + 2 * slack;
  if (tau1.rel_prec() < prec || tau2.rel_prec() < prec)
    throw PrecisionError("riemann_double_integral: tau known to too few digits for depth " + std::to_string(depth));
  tau1 = tau1.with_rel_prec(prec);
  tau2 = tau2.with_rel_prec(prec);
  const PadicCtx& kctx = tau1.ctx();
  long v_total = 0;
  Padic unit = Padic::one(kctx, prec);
  struct Node {
    Mat2<Int> g;
    long level;
  };
  const long max_level = 2 * (depth + slack) + 8 + std::abs(tau1.valuation()) + std::abs(tau2.valuation());
  std::vector<Node> stack{{{1, 0, 0, 1}, 0}, {{0, 1, p, 0}, 0}};
  while (!stack.empty()) {
    Node node = stack.back();
    stack.pop_back();
    const Mat2<Int>& g = node.g;
    Padic b1 = beta(g, tau1, prec), b2 = beta(g, tau2, prec);
    if (b1.is_zero() || b2.is_zero() || node.level > max_level)
      throw PrecisionError("riemann_double_integral: integrand not resolved at working precision (ball level " +
                           std::to_string(node.level) + ", beta " + b1.to_string() + ", " + b2.to_string() + ")");
    if (b1.valuation() < depth || b2.valuation() < depth) {
      for (long j = 0; j < p; ++j)
        stack.push_back({{g.a * p, g.a * j + g.b, g.c * p, g.c * j + g.d}, node.level + 1});
      continue;
    }
    long mu = ctx.measure(g);
    if (mu == 0) continue;
    Padic a0 = alpha0(g, tau1, tau2, prec);
    v_total += mu * a0.valuation();
    unit *= unit_power(a0.unit_part(), mu);
  }
  unit = unit.with_rel_prec(std::min(unit.rel_prec(), depth));
  return {v_total, padic_log(unit), teichmuller(unit), depth};
}

std::vector<Int> ball_moments(const MeasureCtx& ctx, const Mat2<Int>& g, long n_max, long depth) {
  if (n_max < 0 || depth < 0) throw PreconditionError("ball_moments: negative bound");
  long p = ctx.p();
  Int pk = ipow(p, static_cast<unsigned long>(depth));
  std::vector<Int> m(n_max + 1, 0);
  for (Int j = 0; j < pk; ++j) {
    long mu = ctx.measure(Mat2<Int>{g.a * pk, g.a * j + g.b, g.c * pk, g.c * j + g.d});
    if (mu == 0) continue;
    m[0] += mu;
    Int jn = 1;
    for (long n = 1; n <= n_max; ++n) {
      jn = jn * j % pk;
      m[n] += mu * jn;
    }
  }
  for (long n = 1; n <= n_max; ++n) m[n] = mod(m[n], pk);
  return m;
}

MultIntResult series_double_integral(const MeasureCtx& ctx, const Padic& tau1_in, const Padic& tau2_in, long prec,
                                     long moment_depth) {
  if (prec < 1) throw PreconditionError("series_double_integral: precision must be at least 1");
  if (moment_depth < 0) moment_depth = prec;
  long p = ctx.p();
  long target = std::min(prec, moment_depth);
  long n_max = target + 4;
  while (static_cast<double>(n_max) - std::log(static_cast<double>(n_max)) / std::log(static_cast<double>(p)) < target + 1) ++n_max;
  long extra = static_cast<long>(std::log(static_cast<double>(n_max)) / std::log(static_cast<double>(p))) + 2;
  long wprec = target + extra;

  Padic tau1 = degree2(tau1_in), tau2 = degree2(tau2_in);
  wprec += 2 * std::max(closeness(tau1), closeness(tau2));
  if (tau1.rel_prec() < wprec || tau2.rel_prec() < wprec)
    throw PrecisionError("series_double_integral: tau known to too few digits for precision " + std::to_string(prec));
  tau1 = tau1.with_rel_prec(wprec);
  tau2 = tau2.with_rel_prec(wprec);
  const PadicCtx& kctx = tau1.ctx();
  StandardCover cov = standard_cover(tau1, tau2);

  long v_total = 0;
  Padic unit = Padic::one(kctx, wprec);
  Padic log_sum = Padic::zero(kctx, wprec);
  for (const Mat2<Int>& g : cov.balls) {
    Mat2<Rational> gb = gbar(g.cast<Rational>());
    Padic b1 = act(gb, tau1).with_rel_prec(wprec), b2 = act(gb, tau2).with_rel_prec(wprec);
    if (b1.valuation() < 1 || b2.valuation() < 1)
      throw Error("series_double_integral: cover ball violates the valuation condition");
    long mu = ctx.measure(g);
    auto m = ball_moments(ctx, g, n_max, moment_depth);
    if (m[0] != mu) throw Error("series_double_integral: moment 0 disagrees with the ball measure");
    Padic a0 = alpha0(g, tau1, tau2, wprec);
    if (mu != 0) {
      v_total += mu * a0.valuation();
      unit *= unit_power(a0.unit_part(), mu);
      log_sum += padic_log(a0) * Padic::from_int(kctx, mu, wprec);
    }
    // log((1 + b2 t)/(1 + b1 t)) = sum (-1)^(n+1) (b2^n - b1^n) t^n / n
    Padic p1 = b1, p2 = b2;
    for (long n = 1; n <= n_max; ++n) {
      if (m[n] != 0) {
        Padic coef = (p2 - p1) / Padic::from_int(kctx, n, wprec);
        if (n % 2 == 0) coef = -coef;
        log_sum += coef * Padic::from_int(kctx, m[n], wprec);
      }
      p1 *= b1;
      p2 *= b2;
    }
  }
  return {v_total, log_sum.with_abs_prec(std::min(log_sum.abs_prec(), target)), teichmuller(unit.with_rel_prec(target)),
          target};
}

}  // namespace darmon
