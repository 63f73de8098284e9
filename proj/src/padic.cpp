#include "darmon/padic.hpp"

#include <algorithm>
#include <sstream>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

Int pw(long p, long n) { return n <= 0 ? Int(1) : ipow(p, static_cast<unsigned long>(n)); }

// Pairs x + y w with integer coordinates, reduced modulo a fixed modulus.
struct PairMod {
  Int x, y;
};

PairMod mul_mod(const PairMod& a, const PairMod& b, long r, const Int& m) {
  return {mod(a.x * b.x + r * a.y * b.y, m), mod(a.x * b.y + a.y * b.x, m)};
}

PairMod pow_mod(PairMod base, Int e, long r, const Int& m) {
  PairMod acc{1, 0};
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) acc = mul_mod(acc, base, r, m);
    base = mul_mod(base, base, r, m);
    e >>= 1;
  }
  return acc;
}

long floor_log(long k, long p) {
  long e = 0;
  while (k >= p) {
    k /= p;
    ++e;
  }
  return e;
}

long vfact(long k, long p) {
  long v = 0;
  for (long q = p; q <= k; q *= p) v += k / q;
  return v;
}

}  // namespace

long least_nonresidue(long p) {
  for (long r = 2; r < p; ++r)
    if (kronecker(r, p) == -1) return r;
  throw DomainError("no quadratic nonresidue modulo " + std::to_string(p));
}

PadicCtx PadicCtx::make(long p, int degree) {
  if (p < 3 || !is_prime(Int(p))) throw DomainError("p-adic context requires an odd prime, got " + std::to_string(p));
  if (degree != 1 && degree != 2) throw DomainError("p-adic degree must be 1 or 2");
  PadicCtx c;
  c.p = p;
  c.degree = degree;
  c.nonresidue = degree == 2 ? least_nonresidue(p) : 0;
  return c;
}

Padic Padic::zero(const PadicCtx& ctx, long abs_prec) {
  Padic z;
  z.ctx_ = ctx;
  z.zero_ = true;
  z.val_ = abs_prec;
  z.prec_ = 0;
  return z;
}

Padic Padic::from_int(const PadicCtx& ctx, const Int& n, long rel_prec) {
  if (n == 0) return zero(ctx, rel_prec);
  return from_coords(ctx, n, 0, 0, rel_prec + darmon::valuation(n, ctx.p));
}

Padic Padic::from_rational(const PadicCtx& ctx, const Rational& q, long rel_prec) {
  if (q == 0) return zero(ctx, rel_prec);
  long vn = darmon::valuation(q.get_num(), ctx.p), vd = darmon::valuation(q.get_den(), ctx.p);
  Int num = q.get_num(), den = q.get_den();
  Int pvn = pw(ctx.p, vn), pvd = pw(ctx.p, vd);
  num /= pvn;
  den /= pvd;
  Int m = pw(ctx.p, rel_prec);
  Int u = mod(num * inv_mod(den, m), m);
  return from_coords(ctx, u, 0, vn - vd, rel_prec);
}

Padic Padic::from_coords(const PadicCtx& ctx, const Int& x, const Int& y, long val, long rel_prec) {
  if (ctx.degree == 1 && y != 0) throw DomainError("second coordinate in Q_p");
  Padic r;
  r.ctx_ = ctx;
  r.zero_ = false;
  r.val_ = val;
  r.prec_ = rel_prec;
  r.u0_ = x;
  r.u1_ = y;
  r.normalize();
  return r;
}

Padic Padic::gen(const PadicCtx& ctx, long rel_prec) {
  if (ctx.degree != 2) throw DomainError("generator w requires the quadratic extension");
  return from_coords(ctx, 0, 1, 0, rel_prec);
}

void Padic::normalize() {
  if (zero_) {
    u0_ = 0;
    u1_ = 0;
    return;
  }
  if (prec_ <= 0) {
    *this = zero(ctx_, val_ + std::max<long>(prec_, 0));
    return;
  }
  Int m = pw(ctx_.p, prec_);
  u0_ = mod(u0_, m);
  u1_ = mod(u1_, m);
  if (u0_ == 0 && u1_ == 0) {
    *this = zero(ctx_, val_ + prec_);
    return;
  }
  long k = prec_;
  if (u0_ != 0) k = std::min(k, darmon::valuation(u0_, ctx_.p));
  if (u1_ != 0) k = std::min(k, darmon::valuation(u1_, ctx_.p));
  if (k > 0) {
    Int pk = pw(ctx_.p, k);
    u0_ /= pk;
    u1_ /= pk;
    val_ += k;
    prec_ -= k;
  }
}

Padic Padic::unit_part() const {
  if (zero_) throw DomainError("unit part of zero");
  Padic r = *this;
  r.val_ = 0;
  return r;
}

std::pair<long, long> Padic::residue() const {
  if (zero_) return {0, 0};
  Int p(ctx_.p);
  return {mod(u0_, p).get_si(), mod(u1_, p).get_si()};
}

Padic Padic::coord(int i) const {
  PadicCtx base = ctx_.with_degree(1);
  if (zero_) return zero(base, val_);
  const Int& u = i == 0 ? u0_ : u1_;
  if (u == 0) return zero(base, abs_prec());
  return from_coords(base, u, 0, val_, prec_);
}

Padic Padic::conj() const {
  Padic r = *this;
  if (!zero_) {
    r.u1_ = -u1_;
    r.normalize();
  }
  return r;
}

Padic Padic::with_rel_prec(long n) const {
  if (zero_ || n >= prec_) return *this;
  Padic r = *this;
  r.prec_ = n;
  r.normalize();
  return r;
}

Padic Padic::with_abs_prec(long n) const {
  if (zero_) return zero(ctx_, std::min(val_, n));
  if (n >= abs_prec()) return *this;
  if (n <= val_) return zero(ctx_, n);
  return with_rel_prec(n - val_);
}

Padic Padic::to_degree2() const {
  if (ctx_.degree == 2) return *this;
  Padic r = *this;
  r.ctx_ = ctx_.with_degree(2);
  return r;
}

Padic Padic::inverse() const {
  if (zero_) throw DomainError("inverse of p-adic zero");
  Int m = pw(ctx_.p, prec_);
  Padic r;
  r.ctx_ = ctx_;
  r.zero_ = false;
  r.val_ = -val_;
  r.prec_ = prec_;
  if (ctx_.degree == 1) {
    r.u0_ = inv_mod(u0_, m);
    r.u1_ = 0;
  } else {
    Int n = mod(u0_ * u0_ - ctx_.nonresidue * u1_ * u1_, m);
    Int ni = inv_mod(n, m);
    r.u0_ = mod(u0_ * ni, m);
    r.u1_ = mod(-u1_ * ni, m);
  }
  return r;
}

Padic Padic::pow(long e) const {
  if (e == 0) return one(ctx_, zero_ ? std::max<long>(val_, 1) : prec_);
  if (zero_) {
    if (e < 0) throw DomainError("negative power of p-adic zero");
    return zero(ctx_, std::max<long>(val_, 0) * e);
  }
  Padic base = e < 0 ? inverse() : *this;
  unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
  Int m = pw(ctx_.p, prec_);
  PairMod acc = pow_mod({base.u0_, base.u1_}, Int(static_cast<unsigned long>(k)), ctx_.nonresidue, m);
  return from_coords(ctx_, acc.x, acc.y, base.val_ * static_cast<long>(k), prec_);
}

Padic operator+(const Padic& a, const Padic& b) {
  if (!(a.ctx_ == b.ctx_)) {
    if (a.ctx_.p == b.ctx_.p) return a.to_degree2() + b.to_degree2();
    throw DomainError("p-adic operands over different primes");
  }
  if (a.zero_ && b.zero_) return Padic::zero(a.ctx_, std::min(a.val_, b.val_));
  if (a.zero_) return b.with_abs_prec(a.val_);
  if (b.zero_) return a.with_abs_prec(b.val_);
  long v = std::min(a.val_, b.val_);
  long A = std::min(a.abs_prec(), b.abs_prec());
  long rel = A - v;
  if (rel <= 0) return Padic::zero(a.ctx_, A);
  Int sa = pw(a.ctx_.p, a.val_ - v), sb = pw(a.ctx_.p, b.val_ - v);
  return Padic::from_coords(a.ctx_, a.u0_ * sa + b.u0_ * sb, a.u1_ * sa + b.u1_ * sb, v, rel);
}

Padic Padic::operator-() const {
  Padic r = *this;
  if (!zero_) {
    r.u0_ = -u0_;
    r.u1_ = -u1_;
    r.normalize();
  }
  return r;
}

Padic operator-(const Padic& a, const Padic& b) { return a + (-b); }

Padic operator*(const Padic& a, const Padic& b) {
  if (!(a.ctx_ == b.ctx_)) {
    if (a.ctx_.p == b.ctx_.p) return a.to_degree2() * b.to_degree2();
    throw DomainError("p-adic operands over different primes");
  }
  if (a.zero_ || b.zero_) {
    long va = a.zero_ ? a.val_ : a.val_;
    long vb = b.zero_ ? b.val_ : b.val_;
    return Padic::zero(a.ctx_, va + vb);
  }
  long prec = std::min(a.prec_, b.prec_);
  Int m = pw(a.ctx_.p, prec);
  PairMod r = mul_mod({a.u0_, a.u1_}, {b.u0_, b.u1_}, a.ctx_.nonresidue, m);
  return Padic::from_coords(a.ctx_, r.x, r.y, a.val_ + b.val_, prec);
}

Padic operator/(const Padic& a, const Padic& b) { return a * b.inverse(); }

bool congruent(const Padic& a, const Padic& b) { return (a - b).is_zero(); }

bool congruent(const Padic& a, const Padic& b, long n) {
  Padic d = a - b;
  return d.is_zero() ? true : d.valuation() >= n;
}

std::pair<Int, Int> Padic::coords_mod(long n) const {
  if (zero_) return {0, 0};
  if (val_ < 0) throw DomainError("coords_mod of a non-integral p-adic");
  Int m = pw(ctx_.p, n);
  Int s = pw(ctx_.p, val_);
  return {mod(u0_ * s, m), mod(u1_ * s, m)};
}

std::string Padic::to_string() const {
  std::ostringstream os;
  if (zero_) {
    os << "O(" << ctx_.p << "^" << val_ << ")";
    return os.str();
  }
  os << ctx_.p << "^" << val_ << "*(" << u0_;
  if (ctx_.degree == 2) os << " + " << u1_ << "*w";
  os << ") + O(" << ctx_.p << "^" << abs_prec() << ")";
  return os.str();
}

Padic padic_log(const Padic& x) {
  if (x.is_zero()) throw DomainError("log of zero");
  const PadicCtx& ctx = x.ctx();
  long p = ctx.p;
  long N = x.rel_prec();
  Int mN = pw(p, N);
  // log(x) = log(u^(q-1)) / (q-1) where u is the unit part.
  long q = ctx.residue_field_size();
  PairMod y = pow_mod({x.unit0(), x.unit1()}, Int(q - 1), ctx.nonresidue, mN);
  PairMod z{mod(y.x - 1, mN), y.y};
  if (z.x == 0 && z.y == 0) return Padic::zero(ctx, N);
  long vz = N;
  if (z.x != 0) vz = std::min(vz, valuation(z.x, p));
  if (z.y != 0) vz = std::min(vz, valuation(z.y, p));
  long kmax = 1;
  while (kmax * vz - floor_log(kmax, p) < N) ++kmax;
  long extra = floor_log(kmax, p) + 1;
  Int P = pw(p, N + extra);
  PairMod zk{1, 0};
  Int s0 = 0, s1 = 0;
  for (long k = 1; k <= kmax; ++k) {
    zk = mul_mod(zk, z, ctx.nonresidue, P);
    long e = 0;
    long kk = k;
    while (kk % p == 0) {
      kk /= p;
      ++e;
    }
    Int pe = pw(p, e);
    Int ki = inv_mod(Int(kk), P);
    Int t0 = mod((zk.x / pe) * ki, P), t1 = mod((zk.y / pe) * ki, P);
    if (k % 2 == 1) {
      s0 += t0;
      s1 += t1;
    } else {
      s0 -= t0;
      s1 -= t1;
    }
  }
  Int inv = inv_mod(Int(q - 1), mN);
  s0 = mod(s0 * inv, mN);
  s1 = mod(s1 * inv, mN);
  if (s0 == 0 && s1 == 0) return Padic::zero(ctx, N);
  return Padic::from_coords(ctx, s0, s1, 0, N);
}

Padic padic_exp(const Padic& x) {
  const PadicCtx& ctx = x.ctx();
  long p = ctx.p;
  if (x.is_zero()) return Padic::one(ctx, std::max<long>(x.valuation(), 1));
  long v = x.valuation();
  if (v < 1) throw DomainError("exp diverges for valuation < 1");
  long A = x.abs_prec();
  long kmax = 1;
  while ((kmax * v) * (p - 1) - (kmax - 1) < A * (p - 1)) ++kmax;
  long extra = vfact(kmax, p) + 1;
  Int P = pw(p, A + extra);
  auto xs = x.coords_mod(A + extra);
  PairMod X{xs.first, xs.second};
  PairMod xk{1, 0};
  Int s0 = 1, s1 = 0;
  Int fact = 1;
  for (long k = 1; k <= kmax; ++k) {
    xk = mul_mod(xk, X, ctx.nonresidue, P);
    fact *= k;
    long e = vfact(k, p);
    Int pe = pw(p, e);
    Int rest = fact / pe;
    Int ri = inv_mod(rest, P);
    s0 += mod((xk.x / pe) * ri, P);
    s1 += mod((xk.y / pe) * ri, P);
  }
  return Padic::from_coords(ctx, s0, s1, 0, A);
}

Padic teichmuller(const Padic& x) {
  if (!x.is_unit()) throw DomainError("Teichmuller lift needs a unit");
  long q = x.ctx().residue_field_size();
  Padic y = x;
  for (long i = 0; i <= y.rel_prec(); ++i) y = y.pow(q);
  return y;
}

Padic hensel_sqrt(const Padic& a, bool allow_extension) {
  const PadicCtx& ctx = a.ctx();
  if (a.is_zero()) return Padic::zero(ctx, a.valuation() / 2);
  if (a.valuation() % 2 != 0) throw DomainError("odd valuation: not a square in an unramified extension");
  long p = ctx.p;
  auto [r0, r1] = a.residue();
  long N = a.rel_prec();
  std::optional<std::pair<long, long>> root;
  if (ctx.degree == 1) {
    for (long t = 1; t < p; ++t)
      if ((t * t - r0) % p == 0) {
        root = {{t, 0}};
        break;
      }
    if (!root) {
      if (!allow_extension) throw DomainError("not a square in Q_p");
      return hensel_sqrt(a.to_degree2(), false);
    }
  } else {
    long r = ctx.nonresidue;
    for (long xx = 0; xx < p && !root; ++xx) {
      if (xx == 0) {
        if (r1 != 0) continue;
        long target = (r0 * inv_mod(Int(r), Int(p)).get_si()) % p;
        for (long yy = 1; yy < p; ++yy)
          if ((yy * yy - target) % p == 0) {
            root = {{0, yy}};
            break;
          }
      } else {
        long yy = (r1 * inv_mod(Int(2 * xx), Int(p)).get_si()) % p;
        if (((xx * xx + r * yy * yy - r0) % p + p) % p == 0) root = {{xx, yy}};
      }
    }
    if (!root) throw DomainError("not a square in Q_{p^2}");
  }
  Padic u = a.unit_part();
  Padic s = Padic::from_coords(ctx, root->first, root->second, 0, N);
  Padic half = Padic::from_rational(ctx, Rational(1, 2), N);
  for (long prec = 1; prec < 2 * N + 2; prec *= 2) s = half * (s + u / s);
  Padic out = Padic::from_coords(ctx, s.unit0(), s.unit1(), a.valuation() / 2, N);
  return out;
}

}  // namespace darmon
