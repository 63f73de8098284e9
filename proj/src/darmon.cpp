#include "darmon/darmon.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

using Series = std::vector<Int>;

Series series_mul(const Series& a, const Series& b, std::size_t n) {
  Series r(n, 0);
  for (std::size_t i = 0; i < std::min(n, a.size()); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size() && i + j < n; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

// 1/f for f(0) = +-1
Series series_inv(const Series& f, std::size_t n) {
  Series g(n, 0);
  g[0] = f[0];  // f0 = +-1 is its own inverse
  for (std::size_t k = 1; k < n; ++k) {
    Int acc = 0;
    for (std::size_t i = 1; i <= k && i < f.size(); ++i) acc += f[i] * g[k - i];
    g[k] = -acc * f[0];
  }
  return g;
}

Series sigma_series(unsigned k, std::size_t n) {
  Series s(n, 0);
  for (std::size_t d = 1; d < n; ++d) {
    Int dk = ipow(static_cast<long>(d), k);
    for (std::size_t m = d; m < n; m += d) s[m] += dk;
  }
  return s;
}

// prod_{k>=1} (1 - q^k)^24
Series eta24(std::size_t n) {
  Series r(n, 0);
  r[0] = 1;
  for (std::size_t k = 1; k < n; ++k)
    for (int rep = 0; rep < 24; ++rep)
      for (std::size_t i = n - 1; i >= k; --i) r[i] -= r[i - k];
  return r;
}

Series e4_series(std::size_t n) {
  Series s = sigma_series(3, n);
  for (auto& c : s) c *= 240;
  s[0] = 1;
  return s;
}

Padic eval_series(const Series& s, const Padic& x, long prec) {
  Padic acc = Padic::zero(x.ctx(), prec + std::max<long>(0, x.valuation()) * static_cast<long>(s.size()));
  for (std::size_t i = s.size(); i-- > 0;) {
    acc = acc * x;
    if (s[i] != 0) acc += Padic::from_int(x.ctx(), s[i], prec);  // an exact zero must not cap precision
  }
  return acc;
}

std::size_t terms_needed(long v, long prec) { return static_cast<std::size_t>(prec / std::max<long>(v, 1) + 3); }

Padic deg2(const Padic& x) { return x.ctx().degree == 2 ? x : x.to_degree2(); }

bool agree(const Padic& a, const Padic& b, long n) { return (a - b).valuation() >= n; }

Padic from_q(const PadicCtx& K, const Rational& q, long prec) {
  if (q == 0) return Padic::zero(K, prec + 1000);
  return Padic::from_rational(K, q, prec);
}

}  // namespace

// ---------------------------------------------------------------------------

long squarefree_kernel(long D) {
  if (D <= 1) throw PreconditionError("discriminant must be > 1");
  long d = D;
  for (long f = 2; f * f <= d; ++f)
    while (d % (f * f) == 0) d /= f * f;
  return d;
}

Padic embedded_sqrt(const PadicCtx& K, long D, long prec) {
  if (kronecker(D, K.p) != -1) throw PreconditionError("sqrt(D) is not in the unramified quadratic extension as a non-Q_p element");
  Padic s = hensel_sqrt(Padic::from_int(K, D, prec + 1), true);
  s = deg2(s);
  if (s.residue().second > (K.p - 1) / 2) s = -s;
  return s.with_rel_prec(prec);
}

Padic embedded_sqrt_kernel(const PadicCtx& K, long D, long prec) {
  long d = squarefree_kernel(D);
  long f2 = D / d;
  long f = 1;
  while (f * f < f2) ++f;
  return embedded_sqrt(K, D, prec + 1) / Padic::from_int(K, f, prec + 1);
}

Padic embed_quad(const QuadElt& x, const Padic& sqrt_d, long prec) {
  const PadicCtx& K = sqrt_d.ctx();
  if (x.y == 0) return from_q(K, x.x, prec);
  Padic ys = from_q(K, x.y, prec) * sqrt_d;
  return x.x == 0 ? ys : ys + from_q(K, x.x, prec);
}

QuadElt mobius(const Mat2<Rational>& g, const QuadElt& z) {
  QuadElt num = QuadElt(z.d, g.a) * z + QuadElt(z.d, g.b);
  QuadElt den = QuadElt(z.d, g.c) * z + QuadElt(z.d, g.d);
  return num / den;
}

EichlerSetup build_setup(const EllCurve& E, long p) {
  if (E.conductor() == p) throw PreconditionError("setup: conductor is prime (M = 1); only composite conductor pM is handled");
  return build_setup(std::make_shared<const NewformSymbol>(E), p);
}

EichlerSetup build_setup(std::shared_ptr<const NewformSymbol> sym, long p) {
  long N = sym->level();
  if (p < 3 || !is_prime(Int(p))) throw PreconditionError("setup: p must be an odd prime");
  if (N % p != 0 || (N / p) % p == 0) throw PreconditionError("setup: p must divide the conductor exactly once");
  EichlerSetup S;
  S.p = p;
  S.M = N / p;
  if (S.M == 1) throw PreconditionError("setup: conductor is prime (M = 1); only composite conductor pM is handled");
  for (long d = 2; d <= S.M; ++d) {
    if (S.M % d != 0 || std::gcd(d, N / d) != 1) continue;
    if (sym->atkin_lehner_sign(d) == 1) {
      S.d = d;
      break;
    }
  }
  if (S.d == 0)
    throw PreconditionError("setup: no d | M with Atkin-Lehner eigenvalue +1; the curve is out of scope");
  S.w_d = {0, 1, -S.d, 0};
  S.symbol = std::move(sym);
  return S;
}

void check_field(const EichlerSetup& S, long D) {
  long d = squarefree_kernel(D);
  if (field_discriminant(d) != D) throw PreconditionError("D = " + std::to_string(D) + " is not a fundamental discriminant");
  if (kronecker(D, S.p) != -1) throw PreconditionError("p = " + std::to_string(S.p) + " is not inert in Q(sqrt " + std::to_string(d) + ")");
  for (auto& [ell, e] : factor(Int(S.M))) {
    (void)e;
    if (kronecker(D, ell.get_si()) != 1)
      throw PreconditionError("the prime " + to_string(ell) + " of M does not split in Q(sqrt " + std::to_string(d) + ")");
  }
}

std::vector<Embedding> find_embeddings(const EichlerSetup& S, long D, std::size_t count, long prec) {
  check_field(S, D);
  const long d = squarefree_kernel(D);
  const long f = D == d ? 1 : 2;
  const Int nrm = (Int(D) * D - D) / 4;
  PadicCtx K = S.field();
  Padic sd = embedded_sqrt_kernel(K, D, prec + 4);
  std::vector<Embedding> out;
  const long kmax = 400;
  for (long k = 1; k <= kmax && out.size() < count; ++k) {
    for (long sign : {1L, -1L}) {
      Int c = Int(sign * k * S.M);
      Int ac = abs(c);
      for (Int a0 = 0; a0 < ac && out.size() < count; ++a0) {
        // a = a0 - j |c| ranges over both signs, smallest |a| first
        Int a = a0 * 2 <= ac ? a0 : a0 - ac;
        Int dd = Int(D) - a;
        Int num = a * dd - nrm;
        if (mod(num, ac) != 0) continue;
        Embedding e;
        e.D = D;
        e.W = {a, num / c, c, dd};
        e.tau_exact = QuadElt(d, make_rational(a - dd, 2 * c), make_rational(Int(f), 2 * c));
        e.tau = embed_quad(e.tau_exact, sd, prec);
        e.gamma = gamma_tau(e);
        QuadElt eps = fundamental_unit(d);
        e.unit = eps.norm() == -1 ? eps * eps : eps;
        out.push_back(std::move(e));
      }
    }
  }
  if (out.empty()) throw SearchFailure("find_embeddings: none with |c| <= " + std::to_string(kmax * S.M));
  return out;
}

Mat2<Int> gamma_tau(const Embedding& e) {
  long d = squarefree_kernel(e.D);
  long f = e.D == d ? 1 : 2;
  QuadElt eps = fundamental_unit(d);
  if (eps.norm() == -1) eps = eps * eps;
  // sqrt d = sqrt D / f and sqrt D maps to 2W - D
  Rational x = eps.x, y = eps.y / f;
  Mat2<Rational> S{Rational(2 * e.W.a - e.D), Rational(2 * e.W.b), Rational(2 * e.W.c), Rational(2 * e.W.d - e.D)};
  Mat2<Rational> g{x + y * S.a, y * S.b, y * S.c, x + y * S.d};
  for (const Rational* q : {&g.a, &g.b, &g.c, &g.d})
    if (q->get_den() != 1) throw Error("gamma_tau: non-integral image of the unit");
  return {g.a.get_num(), g.b.get_num(), g.c.get_num(), g.d.get_num()};
}

Gamma1Normalized normalize_to_gamma1(const EichlerSetup& S, const Mat2<Int>& gamma, const QuadElt& tau) {
  const Int M = S.M;
  Int a = mod(gamma.a, M);
  Gamma1Normalized out;
  out.tau = tau;
  Mat2<Rational> g = gamma.cast<Rational>();
  if (a == 1) {
    out.gamma = g;
    return out;
  }
  if (a == M - 1 || M == 2) {
    out.gamma = -g;
    return out;
  }
  // diag(p^-n, p^n) path, |n| as small as possible
  Int ordp = multiplicative_order(Int(S.p), M);
  long best = 0;
  int sign = 0;
  for (long n = 1; n < ordp.get_si(); ++n) {
    Int pn = mod(ipow(S.p, n), M);
    long cand = n <= ordp.get_si() / 2 ? n : n - ordp.get_si();
    if (pn == a || pn == M - a) {
      if (sign == 0 || std::abs(cand) < std::abs(best)) {
        best = cand;
        sign = pn == a ? 1 : -1;
      }
    }
  }
  if (sign != 0) {
    Rational pn = best >= 0 ? Rational(ipow(S.p, best)) : make_rational(1, ipow(S.p, -best));
    Mat2<Rational> dg{sign / pn, 0, 0, sign * pn};
    out.gamma = dg * g;
    out.tau = mobius(dg, tau);
    out.shift = best;
    return out;
  }
  Mat2<Rational> acc = g;
  for (long m = 2;; ++m) {
    acc = acc * g;
    Int am = mod(acc.a.get_num(), M);
    if (am == 1 || am == M - 1) {
      out.gamma = am == 1 ? acc : -acc;
      out.m = m;
      return out;
    }
  }
}

SemiIndefPlan plan_semi_indefinite(const EichlerSetup& S, long D, const Mat2<Rational>& gamma, const QuadElt& tau,
                                   long multiplier) {
  SemiIndefPlan plan;
  plan.D = D;
  plan.multiplier = multiplier;
  auto N = S.level();
  plan.factors = decompose(N, gamma);
  if (!verify_product(N.ring, plan.factors, gamma)) throw Error("plan: decomposition does not multiply back");
  QuadElt cur = tau;
  for (const auto& f : plan.factors) {
    switch (f.kind) {
      case FactorKind::Upper:
        cur = cur - QuadElt(cur.d, f.param);
        break;
      case FactorKind::Lower: {
        // int^t int_oo^{L G oo} = int_t^{L^-1 t} int_0^oo * int^{L^-1 t} int_oo^{G oo}
        QuadElt next = mobius(Mat2<Rational>{1, 0, -f.param, 1}, cur);
        plan.terms.push_back({cur, next, Cusp::make(0, 1), Cusp::infinity(), 1, false});
        cur = next;
        break;
      }
      case FactorKind::UnitDiag:
        throw Error("plan: unexpected diagonal factor for a determinant-one matrix");
    }
  }
  return plan;
}

MultIntResult compute_J(const EichlerSetup& S, const SemiIndefPlan& plan, long prec, long depth) {
  PadicCtx K = S.field();
  long target = std::min(prec, depth);
  MultIntResult acc = MultIntResult::one(K, target);
  if (plan.terms.empty()) return acc;
  auto eval_term = [&](const PlanTerm& t) {
    MeasureCtx ctx(*S.symbol, S.p, t.r, t.s);
    long ep = prec + depth + 40;
    for (int attempt = 0;; ++attempt) {
      Padic sd = embedded_sqrt_kernel(K, plan.D, ep);
      Padic a = embed_quad(t.tau_from, sd, ep), b = embed_quad(t.tau_to, sd, ep);
      try {
        try {
          return series_double_integral(ctx, a, b, prec, depth);
        } catch (const PrecisionError&) {
          return riemann_double_integral(ctx, a, b, target);
        }
      } catch (const PrecisionError&) {
        if (attempt >= 3) throw;
        ep *= 2;
      }
    }
  };
  std::vector<std::future<MultIntResult>> jobs;
  for (const auto& t : plan.terms) jobs.push_back(std::async(std::launch::async, eval_term, std::cref(t)));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    MultIntResult r = jobs[i].get();
    const auto& t = plan.terms[i];
    if (t.half) throw Error("compute_J: half-weight terms are not produced by this planner");
    for (int k = 0; k < std::abs(t.exponent); ++k) acc = acc * (t.exponent > 0 ? r : r.inverse());
  }
  return acc;
}

// ---------------------------------------------------------------------------

Padic weierstrass_residual(const EllCurve& E, const LocalPoint& P) {
  const PadicCtx& K = P.x.ctx();
  long n = std::max(P.x.rel_prec(), P.y.rel_prec()) + 4;
  auto c = [&](const Int& v) { return v == 0 ? Padic::zero(K, n + 1000) : Padic::from_int(K, v, n); };
  const Padic &x = P.x, &y = P.y;
  return y * y + c(E.a1) * x * y + c(E.a3) * y - (x * x * x + c(E.a2) * x * x + c(E.a4) * x + c(E.a6));
}

bool on_curve(const EllCurve& E, const LocalPoint& P, long n) {
  if (P.infinity) return true;
  long k = std::max<long>(0, -P.x.valuation() / 2);
  return weierstrass_residual(E, P).valuation() >= n - 6 * k;
}

LocalPoint ec_neg(const EllCurve& E, const LocalPoint& P) {
  if (P.infinity) return P;
  const PadicCtx& K = P.x.ctx();
  long n = P.y.rel_prec() + 4;
  Padic t = -P.y;
  if (E.a1 != 0) t -= Padic::from_int(K, E.a1, n) * P.x;
  if (E.a3 != 0) t -= Padic::from_int(K, E.a3, n);
  return {P.x, t, false};
}

LocalPoint ec_add(const EllCurve& E, const LocalPoint& P, const LocalPoint& Q) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  const PadicCtx& K = P.x.ctx();
  long n = std::max(P.x.rel_prec(), Q.x.rel_prec()) + 4;
  auto c = [&](const Int& v) { return v == 0 ? Padic::zero(K, n + 1000) : Padic::from_int(K, v, n); };
  Padic lambda;
  if ((P.x - Q.x).is_zero()) {
    Padic s = P.y + Q.y + c(E.a1) * Q.x + c(E.a3);
    if (s.is_zero()) return LocalPoint::origin();
    Padic three = Padic::from_int(K, 3, n), two = Padic::from_int(K, 2, n);
    lambda = (three * P.x * P.x + two * c(E.a2) * P.x + c(E.a4) - c(E.a1) * P.y) /
             (two * P.y + c(E.a1) * P.x + c(E.a3));
  } else {
    lambda = (Q.y - P.y) / (Q.x - P.x);
  }
  Padic nu = P.y - lambda * P.x;
  Padic x3 = lambda * lambda + c(E.a1) * lambda - c(E.a2) - P.x - Q.x;
  Padic y3 = -(lambda + c(E.a1)) * x3 - nu - c(E.a3);
  return {x3, y3, false};
}

LocalPoint ec_mul(const EllCurve& E, long k, const LocalPoint& P) {
  LocalPoint base = k < 0 ? ec_neg(E, P) : P;
  unsigned long e = static_cast<unsigned long>(k < 0 ? -k : k);
  LocalPoint acc = LocalPoint::origin();
  while (e) {
    if (e & 1) acc = ec_add(E, acc, base);
    e >>= 1;
    if (e) base = ec_add(E, base, base);
  }
  return acc;
}

bool same_point(const LocalPoint& P, const LocalPoint& Q, long n) {
  if (P.infinity || Q.infinity) return P.infinity == Q.infinity;
  return agree(P.x, Q.x, n) && agree(P.y, Q.y, n);
}

// ---------------------------------------------------------------------------

Padic j_of_q(const Padic& q, long prec) {
  if (q.valuation() < 1) throw DomainError("j_of_q: q must have positive valuation");
  // dividing by q costs v(q) digits
  const long wp = prec + q.valuation();
  std::size_t n = terms_needed(q.valuation(), wp) + 2;
  Series e4 = e4_series(n);
  Series e4c = series_mul(series_mul(e4, e4, n), e4, n);
  Series eta = eta24(n);  // Delta / q
  return (eval_series(e4c, q, wp) / (q * eval_series(eta, q, wp))).with_rel_prec(prec);
}

Padic tate_q(const EllCurve& E, long p, long prec) {
  PadicCtx Q = PadicCtx::make(p, 1);
  Int c4 = E.c4(), disc = E.discriminant();
  Rational j = make_rational(c4 * c4 * c4, disc);
  if (j == 0 || valuation(j, p) >= 0)
    throw DomainError("tate_q: E does not have multiplicative reduction at p (v_p(j) >= 0)");
  Rational t = 1 / j;
  long vt = valuation(t, p);
  std::size_t n = terms_needed(vt, prec + vt);
  // q = sum c_k t^k with c_k = [q^(k-1)] G^k / k, G = E4^3 / prod (1 - q^i)^24
  Series e4 = e4_series(n);
  Series G = series_mul(series_mul(series_mul(e4, e4, n), e4, n), series_inv(eta24(n), n), n);
  Series coeffs(n + 1, 0), Gk{1};
  for (std::size_t k = 1; k <= n; ++k) {
    Gk = series_mul(Gk, G, n);
    coeffs[k] = Gk[k - 1] / static_cast<long>(k);
  }
  Padic tp = Padic::from_rational(Q, t, prec + 2);
  return eval_series(coeffs, tp, prec + 2).with_rel_prec(prec);
}

TateCurve TateCurve::make(const EllCurve& E, long p, long prec) {
  TateCurve T;
  T.E = E;
  T.prec = prec;
  PadicCtx K = PadicCtx::make(p, 2);
  long wp = prec + 6;
  T.q = deg2(tate_q(E, p, wp));
  std::size_t n = terms_needed(T.q.valuation(), wp) + 2;
  Series s3 = sigma_series(3, n), s5 = sigma_series(5, n), a4s(n), a6s(n);
  for (std::size_t i = 0; i < n; ++i) {
    a4s[i] = -5 * s3[i];
    Int num = 5 * s3[i] + 7 * s5[i];
    a6s[i] = -(num / 12);
  }
  T.a4 = eval_series(a4s, T.q, wp);
  T.a6 = eval_series(a6s, T.q, wp);
  auto c = [&](const Int& v) { return v == 0 ? Padic::zero(K, wp + 1000) : Padic::from_int(K, v, wp); };
  Padic c4q = Padic::one(K, wp) - c(48) * T.a4;
  Padic c6q = c(72) * T.a4 - c(864) * T.a6 - Padic::one(K, wp);
  Padic u2 = (c(E.c6()) / c6q) * (c4q / c(E.c4()));
  T.u = deg2(hensel_sqrt(u2, true));
  Padic two = c(2), three = c(3);
  T.s = (T.u - c(E.a1)) / two;
  T.r = (T.s * T.s + T.s * c(E.a1) - c(E.a2)) / three;
  T.t = -(c(E.a3) + T.r * c(E.a1)) / two;
  // remaining coefficients must match
  Padic u4 = T.u.pow(4), u6 = T.u.pow(6);
  Padic rhs4 = c(E.a4) - T.s * c(E.a3) + two * T.r * c(E.a2) - (T.t + T.r * T.s) * c(E.a1) + three * T.r * T.r -
               two * T.s * T.t;
  Padic rhs6 = c(E.a6) + T.r * c(E.a4) + T.r * T.r * c(E.a2) + T.r * T.r * T.r - T.t * c(E.a3) - T.t * T.t -
               T.r * T.t * c(E.a1);
  if (!agree(u4 * T.a4, rhs4, prec) || !agree(u6 * T.a6, rhs6, prec))
    throw Error("Tate curve: isomorphism onto the given model not found (reduction data inconsistent)");
  return T;
}

Padic TateCurve::normalized_log(const Padic& x) const {
  return Padic::from_int(q.ctx(), q.valuation(), prec + 4) * padic_log(deg2(x)) -
         Padic::from_int(q.ctx(), x.valuation(), prec + 4) * padic_log(q);
}

Padic TateCurve::reduce(const Padic& x) const {
  long vq = q.valuation();
  long v = x.valuation();
  long k = v >= 0 ? v / vq : -((-v + vq - 1) / vq);
  return k == 0 ? deg2(x) : deg2(x) * q.pow(-k);
}

namespace {

struct TateSums {
  Padic X, Y;
};

// Coordinates on the Tate curve for 0 <= v(u) < v(q), u != 1.
TateSums tate_sums(const Padic& u, const Padic& q, long wp) {
  const PadicCtx& K = q.ctx();
  Padic one = Padic::one(K, wp);
  Padic one_m = one - u;
  Padic X = u / (one_m * one_m), Y = u * u / (one_m * one_m * one_m);
  Padic uinv = u.inverse();
  long vq = q.valuation();
  Padic qn = q;
  for (long n = 1; n * vq - u.valuation() <= wp + 2; ++n, qn *= q) {
    Padic a = qn * u, b = qn * uinv;
    Padic oa = one - a, ob = one - b, oq = one - qn;
    X += a / (oa * oa) + b / (ob * ob) - Padic::from_int(K, 2, wp) * qn / (oq * oq);
    Y += a * a / (oa * oa * oa) - b / (ob * ob * ob) + qn / (oq * oq);
  }
  return {X, Y};
}

// d/du of X + Y
Padic tate_sum_derivative(const Padic& u, const Padic& q, long wp) {
  const PadicCtx& K = q.ctx();
  Padic one = Padic::one(K, wp), two = Padic::from_int(K, 2, wp);
  Padic om = one - u;
  Padic d = (one + two * u) / om.pow(4);
  Padic uinv = u.inverse();
  long vq = q.valuation();
  Padic qn = q;
  for (long n = 1; n * vq - u.valuation() <= wp + 2; ++n, qn *= q) {
    Padic a = qn * u, z = qn * uinv;
    d += qn * (one + two * a) / (one - a).pow(4);
    d += z * z * (two + z) / ((one - z).pow(4) * u);
  }
  return d;
}

}  // namespace

LocalPoint tate_curve_point(const Padic& u_in, const TateCurve& T) {
  if (u_in.is_zero()) throw DomainError("tate_map: zero has no image");
  Padic u = T.reduce(u_in);
  long wp = T.prec + 4;
  if ((u - Padic::one(u.ctx(), wp)).valuation() >= u.rel_prec()) return LocalPoint::origin();
  auto [X, Y] = tate_sums(u, T.q, wp);
  return {X, Y, false};
}

LocalPoint tate_map(const Padic& u, const TateCurve& T) {
  LocalPoint P = tate_curve_point(u, T);
  if (P.infinity) return P;
  Padic u2 = T.u * T.u;
  return {u2 * P.x + T.r, u2 * T.u * P.y + u2 * T.s * P.x + T.t, false};
}

namespace {

// Newton iteration for (X + Y)(u) = target from u0; empty if it diverges
// or the limit does not reproduce (X, Y).
std::optional<Padic> solve_tate(const Padic& X, const Padic& Y, Padic u, const TateCurve& T) {
  long wp = T.prec + 4;
  long vq = T.q.valuation();
  Padic target = X + Y;
  for (int it = 0; it < 200; ++it) {
    if (u.is_zero() || u.valuation() < 0 || u.valuation() >= vq) return std::nullopt;
    if ((u - Padic::one(u.ctx(), wp)).valuation() >= wp) return std::nullopt;
    auto s = tate_sums(u, T.q, wp);
    Padic delta = (s.X + s.Y - target) / tate_sum_derivative(u, T.q, wp);
    u = u - delta;
    if (delta.valuation() >= wp + u.valuation()) break;
  }
  if (u.is_zero() || u.valuation() < 0 || u.valuation() >= vq) return std::nullopt;
  auto s = tate_sums(u, T.q, wp);
  long n = T.prec + std::min<long>(0, std::min(X.valuation(), Y.valuation()));
  if (!agree(s.X, X, n) || !agree(s.Y, Y, n)) return std::nullopt;
  return u;
}

}  // namespace

Padic tate_inverse(const LocalPoint& P, const TateCurve& T) {
  const PadicCtx& K = T.q.ctx();
  long wp = T.prec + 4;
  if (P.infinity) return Padic::one(K, wp);
  Padic u2 = T.u * T.u;
  Padic X = (deg2(P.x) - T.r) / u2;
  Padic Y = (deg2(P.y) - T.t - u2 * T.s * X) / (u2 * T.u);
  std::vector<std::pair<Padic, bool>> starts;  // (u0, solve for -P and invert)
  if (X.valuation() <= 0) {
    starts.push_back({Y / (X + Y), false});
  } else {
    starts.push_back({X + Y, false});
    starts.push_back({-Y, true});
  }
  for (auto& [u0, flip] : starts) {
    Padic Yt = flip ? -Y - X : Y;
    auto u = solve_tate(X, Yt, u0, T);
    if (!u) continue;
    return flip ? T.reduce(u->inverse()) : *u;
  }
  throw PrecisionError("tate_inverse: iteration did not converge to a preimage");
}

// ---------------------------------------------------------------------------

DarmonPoint darmon_point(const EichlerSetup& S, long D, long prec, long depth) {
  DarmonPoint out;
  out.D = D;
  auto embs = find_embeddings(S, D, 1, prec + 10);
  out.embedding = embs.front();
  auto norm = normalize_to_gamma1(S, out.embedding.gamma, out.embedding.tau_exact);
  out.plan = plan_semi_indefinite(S, D, norm.gamma, norm.tau, norm.m);
  out.multiplier = norm.m;
  out.J = compute_J(S, out.plan, prec, depth);
  TateCurve T = TateCurve::make(S.curve(), S.p, out.J.precision);
  out.point = tate_map(recover_value(out.J), T);
  return out;
}

}  // namespace darmon
