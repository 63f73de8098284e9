#include "darmon/modsym.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

// Target size of a truncated q-expansion tail, as a power of 10.
constexpr double kTailDigits = 45;

Int egcd(const Int& a, const Int& b, Int& s, Int& t) {
  Int g;
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

long mod_long(long a, long m) {
  a %= m;
  return a < 0 ? a + m : a;
}

long mod_long(const Int& a, long m) { return mod(a, Int(m)).get_si(); }

long inv_mod_long(long a, long m) { return inv_mod(Int(a), Int(m)).get_si(); }

// Root of a cubic by Newton, from a starting point to the right of every
// root the iteration decreases monotonically.
Real newton_root(const Real c[4], Real x) {
  for (int it = 0; it < 500; ++it) {
    Real f = ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
    Real df = (3 * c[3] * x + 2 * c[2]) * x + c[1];
    if (df == 0) break;
    Real step = f / df;
    x -= step;
    if (abs(step) <= abs(x) * std::numeric_limits<Real>::epsilon() * 4) break;
  }
  return x;
}

Real agm(Real a, Real b) {
  for (int it = 0; it < 200; ++it) {
    Real a1 = (a + b) / 2;
    Real b1 = sqrt(a * b);
    if (abs(a1 - b1) <= abs(a1) * std::numeric_limits<Real>::epsilon() * 8) return a1;
    a = a1;
    b = b1;
  }
  return a;
}

Real to_real(const Int& n) { return Real(n.get_str()); }

}  // namespace

// ---------------------------------------------------------------------------
// EllCurve

EllCurve EllCurve::parse(const std::string& text) {
  std::string s = text;
  for (char& ch : s)
    if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
  std::istringstream is(s);
  std::vector<Int> v;
  std::string tok;
  while (is >> tok) {
    Int x;
    if (x.set_str(tok, 10) != 0) throw PreconditionError("curve: bad coefficient '" + tok + "'");
    v.push_back(x);
  }
  if (v.size() != 5) throw PreconditionError("curve: expected 5 coefficients a1 a2 a3 a4 a6");
  EllCurve E{v[0], v[1], v[2], v[3], v[4]};
  if (E.discriminant() == 0) throw PreconditionError("curve: singular (discriminant 0)");
  return E;
}

Int EllCurve::discriminant() const {
  Int B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
  return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
}

std::vector<long> EllCurve::bad_primes() const {
  std::vector<long> out;
  for (const auto& [q, e] : factor(discriminant())) out.push_back(q.get_si());
  std::sort(out.begin(), out.end());
  return out;
}

long EllCurve::conductor() const {
  long N = 1;
  Int C4 = c4();
  for (long ell : bad_primes()) {
    if (C4 % ell == 0)
      throw PreconditionError("curve: reduction at " + std::to_string(ell) +
                              " is not multiplicative (or the model is not minimal); only semistable curves are handled");
    N *= ell;
  }
  return N;
}

long EllCurve::ap(long ell) const {
  long count = 1;  // point at infinity
  if (ell == 2) {
    long A1 = mod_long(a1, 2), A2 = mod_long(a2, 2), A3 = mod_long(a3, 2), A4 = mod_long(a4, 2),
         A6 = mod_long(a6, 2);
    for (long x = 0; x < 2; ++x)
      for (long y = 0; y < 2; ++y)
        if (mod_long(y * y + A1 * x * y + A3 * y - x * x * x - A2 * x * x - A4 * x - A6, 2) == 0) ++count;
    return ell + 1 - count;
  }
  // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
  long B2 = mod_long(b2(), ell), B4 = mod_long(2 * b4(), ell), B6 = mod_long(b6(), ell);
  std::vector<signed char> chi(ell, -1);
  chi[0] = 0;
  for (long y = 1; y < ell; ++y) chi[y * y % ell] = 1;
  for (long x = 0; x < ell; ++x) {
    long f = (((4 * x + B2) % ell * x + B4) % ell * x + B6) % ell;
    count += 1 + chi[f];
  }
  return ell + 1 - count;
}

std::string EllCurve::to_string() const {
  return "[" + darmon::to_string(a1) + "," + darmon::to_string(a2) + "," + darmon::to_string(a3) + "," +
         darmon::to_string(a4) + "," + darmon::to_string(a6) + "]";
}

std::vector<long> an_coeffs(const EllCurve& E, long B) {
  if (B < 1) throw PreconditionError("an_coeffs: B must be positive");
  Int disc = E.discriminant();
  std::vector<long> spf(B + 1, 0);
  for (long i = 2; i <= B; ++i)
    if (spf[i] == 0)
      for (long j = i; j <= B; j += i)
        if (spf[j] == 0) spf[j] = i;
  std::vector<long> a(B + 1, 0);
  a[1] = 1;
  for (long n = 2; n <= B; ++n) {
    long ell = spf[n], m = n, pk = 1;
    while (m % ell == 0) {
      m /= ell;
      pk *= ell;
    }
    if (m > 1) {
      a[n] = a[pk] * a[m];
    } else if (pk == ell) {
      a[n] = E.ap(ell);
    } else {
      bool good = disc % ell != 0;
      a[n] = a[ell] * a[pk / ell] - (good ? ell * a[pk / ell / ell] : 0);
    }
  }
  return a;
}

Real real_period(const EllCurve& E) {
  Real c[4] = {to_real(E.b6()), to_real(2 * E.b4()), to_real(E.b2()), Real(4)};
  Real bound = 1;
  for (int i = 0; i < 3; ++i) bound = std::max(bound, 1 + abs(c[i]) / 4);
  Real e1 = newton_root(c, bound);
  const Real pi = boost::math::constants::pi<Real>();
  if (E.discriminant() > 0) {
    // remaining roots of 4x^2 + (b2 + 4 e1) x + (2 b4 + e1 (b2 + 4 e1))
    Real qb = c[2] + 4 * e1, qc = c[1] + e1 * qb;
    Real disc = qb * qb - 16 * qc;
    if (disc < 0) disc = 0;
    Real r = sqrt(disc);
    Real e2 = newton_root(c, (-qb + r) / 8), e3 = (-qb - r) / 8;
    // polish e3 from below by symmetry x -> -x
    Real cm[4] = {-c[0], c[1], -c[2], c[3]};
    e3 = -newton_root(cm, -e3 + (r == 0 ? Real(0) : r / 16));
    if (e2 < e3) std::swap(e2, e3);
    return pi / agm(sqrt(e1 - e3), sqrt(e1 - e2));
  }
  Real a = 3 * e1 + c[2] / 4;
  Real b = sqrt(3 * e1 * e1 + c[2] * e1 / 2 + to_real(E.b4()) / 2);
  return 2 * pi / agm(2 * sqrt(b), sqrt(2 * b + a));
}

// ---------------------------------------------------------------------------
// Cusp

Cusp Cusp::make(Int num, Int den) {
  if (num == 0 && den == 0) throw PreconditionError("cusp: 0/0");
  if (den == 0) return infinity();
  Int g = gcd(num, den);
  num /= g;
  den /= g;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return {num, den};
}

Cusp Cusp::act(const Mat2<Int>& g) const { return make(g.a * num + g.b * den, g.c * num + g.d * den); }

Cusp Cusp::act(const Mat2<Rational>& g) const {
  Rational x = g.a * Rational(num) + g.b * Rational(den);
  Rational y = g.c * Rational(num) + g.d * Rational(den);
  if (y == 0) return infinity();
  return from(x / y);
}

std::string Cusp::to_string() const {
  if (is_infinity()) return "oo";
  if (den == 1) return darmon::to_string(num);
  return darmon::to_string(num) + "/" + darmon::to_string(den);
}

// ---------------------------------------------------------------------------
// NewformSymbol

void NewformSymbol::init_classes() {
  N_ = E_.conductor();
  primes_ = E_.bad_primes();
  for (long ell : primes_) eps_[ell] = -E_.ap(ell);
  std::size_t count = 1;
  for (long ell : primes_) count *= static_cast<std::size_t>(ell + 1);
  values_.assign(count, 0);
}

long NewformSymbol::atkin_lehner_eigenvalue(long q) const {
  long e = 1;
  for (long ell : primes_)
    if (q % ell == 0) e *= eps_.at(ell);
  return e;
}

std::size_t NewformSymbol::class_index(const Int& c, const Int& d) const {
  std::size_t idx = 0;
  for (long ell : primes_) {
    long cl = mod_long(c, ell), dl = mod_long(d, ell);
    long x;
    if (cl != 0)
      x = dl * inv_mod_long(cl, ell) % ell;
    else if (dl != 0)
      x = ell;
    else
      throw PreconditionError("manin symbol: (c, d) not primitive modulo the level");
    idx = idx * static_cast<std::size_t>(ell + 1) + static_cast<std::size_t>(x);
  }
  return idx;
}

std::pair<Int, Int> NewformSymbol::class_rep(std::size_t idx) const {
  // mixed radix digits, last prime least significant
  std::vector<long> digit(primes_.size());
  for (std::size_t i = primes_.size(); i-- > 0;) {
    long base = primes_[i] + 1;
    digit[i] = static_cast<long>(idx % static_cast<std::size_t>(base));
    idx /= static_cast<std::size_t>(base);
  }
  Int c = 0, d = 0, Nn = N_;
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    long ell = primes_[i];
    long ci = digit[i] < ell ? 1 : 0, di = digit[i] < ell ? digit[i] : 1;
    Int rest = Nn / ell;
    Int e = rest * inv_mod(rest, Int(ell));  // CRT idempotent
    c += e * ci;
    d += e * di;
  }
  return {mod(c, Nn), mod(d, Nn)};
}

namespace {

// g in SL2(Z) with bottom row congruent to (c, d) modulo N.
Mat2<Int> lift_to_sl2(Int c, Int d, long N) {
  c = mod(c, Int(N));
  d = mod(d, Int(N));
  if (c == 0) c = N;
  while (gcd(c, d) != 1) d += N;
  Int s, t;
  egcd(d, c, s, t);  // s d + t c = 1
  return {s, -t, c, d};
}

}  // namespace

Complex NewformSymbol::tail(const Cusp& r, const Complex& w) {
  // r = W oo with W = (Q a, y; Q c, Q x) an Atkin-Lehner matrix for Q = N/gcd(c, N)
  Int a = r.num, c = r.den;
  Int g = c == 0 ? Int(N_) : gcd(c, Int(N_));
  Int Q = N_ / g;
  Int x, y;
  egcd(Q * a, c, x, y);  // x Qa + y c = 1, so W = (Qa, -y; Qc, Qx)
  y = -y;
  // u = W^-1 w via the adjugate (Qx, y; -Qc, Qa)
  Real qx = to_real(Q * x), yy = to_real(y), qc = to_real(Q * c), qa = to_real(Q * a);
  Complex u = (Complex(qx) * w - Complex(yy)) / (Complex(-qc) * w + Complex(qa));
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  Real im = u.imag();
  if (im <= 0) throw Error("modular symbol: point outside the upper half plane");
  long B = static_cast<long>(std::ceil(kTailDigits * std::log(10.0) / (two_pi.convert_to<double>() * im.convert_to<double>())));
  if (B > 10'000'000) throw PrecisionError("modular symbol: q-expansion bound too large");
  if (B + 1 > static_cast<long>(an_.size())) an_ = an_coeffs(E_, std::max(B, 2 * static_cast<long>(an_.size())));
  const auto& an = an_;
  Real mag = exp(-two_pi * im), ang = two_pi * u.real();
  Real qr = mag * cos(ang), qi = mag * sin(ang);
  Real pr = qr, pi = qi, sr = 0, si = 0;
  for (long n = 1; n <= B; ++n) {
    if (an[n] != 0) {
      sr += pr * an[n] / n;
      si += pi * an[n] / n;
    }
    Real nr = pr * qr - pi * qi;
    pi = pr * qi + pi * qr;
    pr = nr;
  }
  long e = atkin_lehner_eigenvalue(Q.get_si());
  return Complex(sr * e, si * e);
}

Real NewformSymbol::numeric_path(const Mat2<Int>& g) {
  Cusp r = Cusp::make(g.b, g.d), s = Cusp::make(g.a, g.c);
  // Im W_r^-1 g(it) = K_r / t and Im W_s^-1 g(it) = K_s t; split where they agree.
  auto adj_times = [&](const Cusp& cu) {
    Int a = cu.num, c = cu.den;
    Int gg = c == 0 ? Int(N_) : gcd(c, Int(N_));
    Int Q = N_ / gg, x, y;
    egcd(Q * a, c, x, y);
    y = -y;
    Mat2<Int> adj{Q * x, -y, -Q * c, Q * a};
    return adj * g;
  };
  Mat2<Int> Ar = adj_times(r), As = adj_times(s);
  Real Kr = to_real(Ar.det()) / (to_real(Ar.c) * to_real(Ar.c));
  Real Ks = to_real(As.det()) / (to_real(As.d) * to_real(As.d));
  Real t = sqrt(Kr / Ks);
  // w = g(it)
  Complex it(Real(0), t);
  Complex w = (Complex(to_real(g.a)) * it + Complex(to_real(g.b))) / (Complex(to_real(g.c)) * it + Complex(to_real(g.d)));
  return (tail(r, w) - tail(s, w)).real();
}

NewformSymbol::NewformSymbol(const EllCurve& E) : E_(E) {
  init_classes();
  // worst split height is 1/N
  const double two_pi = 2 * M_PI;
  long B = static_cast<long>(std::ceil(kTailDigits * std::log(10.0) * N_ / two_pi)) + 16;
  an_ = an_coeffs(E_, B);

  std::vector<Real> raw(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto [c, d] = class_rep(i);
    raw[i] = numeric_path(lift_to_sl2(c, d, N_));
  }

  Real period = real_period(E_);
  // x_i = raw_i / period are rationals with small denominators
  const Real tol("1e-20");
  Int L = 1;
  std::vector<Real> ratio(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ratio[i] = raw[i] / period;
    long den = 0;
    for (long k = 1; k <= 8 && den == 0; ++k) {
      Real v = ratio[i] * k;
      if (abs(v - round(v)) < tol) den = k;
    }
    if (den == 0)
      throw PrecisionError("normalize_period: a Manin symbol value is not a small rational multiple of the real period");
    L = lcm(L, Int(den));
  }
  std::vector<Int> ints(raw.size());
  Int G = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Real v = round(ratio[i] * to_real(L));
    ints[i] = v.convert_to<long>();
    G = gcd(G, ints[i]);
  }
  if (G == 0) throw PrecisionError("normalize_period: all Manin symbol values vanish");
  c0_ = Rational(L, G);
  c0_.canonicalize();
  if (c0_.get_num() > 8 || c0_.get_den() > 8) throw PrecisionError("normalize_period: no normalizing factor c0 <= 8");
  omega_ = period * to_real(c0_.get_den()) / to_real(c0_.get_num());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Real v = raw[i] / omega_;
    Real rv = round(v);
    max_err_ = std::max(max_err_, abs(v - rv).convert_to<double>());
    values_[i] = rv.convert_to<long>();
  }
  if (max_err_ >= 1e-6) throw PrecisionError("modular symbol: value not within 1e-6 of an integer");
}

NewformSymbol NewformSymbol::from_cache(const EllCurve& E, std::istream& in) {
  NewformSymbol S;
  S.E_ = E;
  S.init_classes();
  std::vector<bool> seen(S.values_.size(), false);
  static const std::regex line_re(R"(\s*\(\s*(-?\d+)\s*:\s*(-?\d+)\s*\)\s*->\s*(-?\d+)\s*)");
  static const std::regex c0_re(R"(#\s*c0\s+(\S+)\s*)");
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_match(line, m, c0_re)) {
      S.c0_ = parse_rational(m[1].str());
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!std::regex_match(line, m, line_re)) throw PreconditionError("symbol cache: bad line '" + line + "'");
    std::size_t idx = S.class_index(Int(m[1].str()), Int(m[2].str()));
    S.values_[idx] = std::stol(m[3].str());
    seen[idx] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw PreconditionError("symbol cache: missing Manin symbols for level " + std::to_string(S.N_));
  return S;
}

void NewformSymbol::export_cache(std::ostream& out) const {
  out << "# curve " << E_.to_string() << " level " << N_ << "\n";
  out << "# c0 " << to_string(c0_) << "\n";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto [c, d] = class_rep(i);
    out << "(" << c << ":" << d << ") -> " << values_[i] << "\n";
  }
}

long NewformSymbol::manin(const Int& c, const Int& d) const { return values_[class_index(c, d)]; }

long NewformSymbol::from_infinity(const Cusp& x) const {
  if (x.is_infinity()) return 0;
  // convergents p_k/q_k of num/den; path k is {p_{k-1}/q_{k-1} -> p_k/q_k}
  // = g{0 -> oo} with bottom row ((-1)^(k-1) q_k, q_{k-1})
  Int num = x.num, den = x.den;
  Int p_prev = 1, q_prev = 0, p = 0, q = 1;
  long total = 0;
  bool first = true;
  int sign = -1;  // (-1)^(k-1) at k = 0
  while (true) {
    Int a;
    mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    Int pn, qn;
    if (first) {
      pn = a;
      qn = 1;
      p_prev = 1;
      q_prev = 0;
      first = false;
    } else {
      pn = a * p + p_prev;
      qn = a * q + q_prev;
      p_prev = p;
      q_prev = q;
    }
    p = pn;
    q = qn;
    total += manin(sign * q, q_prev);
    sign = -sign;
    Int r = num - a * den;
    if (r == 0) break;
    num = den;
    den = r;
  }
  return total;
}

long NewformSymbol::eval(const Cusp& r, const Cusp& s) const { return from_infinity(s) - from_infinity(r); }

int NewformSymbol::atkin_lehner_sign(long d) const {
  if (d <= 1 || N_ % d != 0 || std::gcd(d, N_ / d) != 1)
    throw PreconditionError("atkin_lehner_sign: d must be an exact divisor > 1 of the level");
  // W_d = (d x, y; N z, d w) with det d
  long n = N_ / d;
  Int xx, yy;
  egcd(Int(d), Int(n), xx, yy);  // xx d + yy n = 1 -> (d, -yy; N, d xx) has det d^2 xx + N yy = d
  Mat2<Int> W{Int(d), -yy, Int(N_), Int(d) * xx};
  if (W.det() != d) throw Error("atkin_lehner_sign: internal check failed");
  int sign = 0, agree = 0;
  for (long den = 1; den <= 60 && agree < 5; ++den) {
    for (long num = -den; num <= den && agree < 5; ++num) {
      if (std::gcd(num, den) != 1) continue;
      Cusp r = Cusp::infinity(), s = Cusp::make(num, den);
      long v = eval(r, s);
      if (v == 0) continue;
      long w = eval(r.act(W), s.act(W));
      int e = w == v ? 1 : w == -v ? -1 : 0;
      if (e == 0 || (sign != 0 && e != sign))
        throw PrecisionError("atkin_lehner_sign: inconsistent signs across sample paths");
      sign = e;
      ++agree;
    }
  }
  if (agree < 3) throw PrecisionError("atkin_lehner_sign: too few nonzero sample paths");
  return sign;
}

}  // namespace darmon
