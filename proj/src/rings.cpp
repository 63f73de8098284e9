#include "darmon/rings.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <type_traits>
#include <unordered_map>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

struct IntHash {
  std::size_t operator()(const Int& x) const {
    return static_cast<std::size_t>(mpz_get_ui(x.get_mpz_t())) * 0x9E3779B97F4A7C15ull;
  }
};

// Smallest k in [0, ord) with g^k == target, by baby-step giant-step.
// `key` maps a group element to a canonical Int.
template <class K>
using HashFor = std::conditional_t<std::is_same_v<K, Int>, IntHash, std::hash<K>>;

template <class E, class Mul, class Key>
std::optional<Int> bsgs(const E& g, const E& target, const E& one, const Int& ord, Mul mul, Key key) {
  Int m = sqrt(ord) + 1;
  if (m > 50'000'000) throw SearchFailure("discrete logarithm: group too large");
  long steps = m.get_si();
  using K = std::decay_t<decltype(key(one))>;
  std::unordered_map<K, long, HashFor<K>> baby;
  baby.reserve(static_cast<std::size_t>(steps) * 2);
  E e = one;
  for (long j = 0; j < steps; ++j) {
    baby.emplace(key(e), j);
    e = mul(e, g);
  }
  // giant = g^(-m) = g^(ord - m mod ord)
  Int gexp = mod(Int(-m), ord);
  E giant = one, base = g;
  for (Int k = gexp; k > 0; k >>= 1) {
    if (mpz_odd_p(k.get_mpz_t())) giant = mul(giant, base);
    base = mul(base, base);
  }
  E cur = target;
  for (long i = 0; i < steps; ++i) {
    auto it = baby.find(key(cur));
    if (it != baby.end()) {
      Int k = Int(i) * m + it->second;
      if (k < ord) return k;
    }
    cur = mul(cur, giant);
  }
  return std::nullopt;
}

// Among exponents solving g^k = +-c (k in [0, ord)), choose the smallest |k|,
// allowing k - ord; returns (sign, k).
std::optional<std::pair<int, Int>> best_exponent(const std::optional<Int>& plus, const std::optional<Int>& minus,
                                                 const Int& ord) {
  std::optional<std::pair<int, Int>> best;
  auto consider = [&](int sign, const Int& k) {
    if (!best || abs(k) < abs(best->second) || (abs(k) == abs(best->second) && k > best->second))
      best = std::make_pair(sign, k);
  };
  for (auto [sign, k] : {std::make_pair(1, plus), std::make_pair(-1, minus)}) {
    if (!k) continue;
    consider(sign, *k);
    if (*k > 0) consider(sign, Int(*k - ord));
  }
  return best;
}

// Scan k = 0, 1, -1, 2, ... up to |k| <= cap for g^k == +-target.
template <class E, class Mul>
std::optional<std::pair<int, Int>> scan_exponent(const E& g, const E& ginv, const E& plus, const E& minus,
                                                 const E& one, long cap, Mul mul) {
  E up = one, down = one;
  for (long k = 0; k <= cap; ++k) {
    if (up == plus) return std::make_pair(1, Int(k));
    if (up == minus) return std::make_pair(-1, Int(k));
    if (down == plus) return std::make_pair(1, Int(-k));
    if (down == minus) return std::make_pair(-1, Int(-k));
    up = mul(up, g);
    down = mul(down, ginv);
  }
  return std::nullopt;
}

// Hermite basis {(A, 0), (B, C)} of the Z-lattice spanned by `vecs`
// (coordinates (m, n) of m + n*omega); the lattice must have full rank.
std::tuple<Int, Int, Int> hermite(const std::vector<std::pair<Int, Int>>& vecs) {
  std::optional<std::pair<Int, Int>> cur;
  Int A = 0;
  for (auto w : vecs) {
    if (!cur) {
      if (w.second == 0) {
        A = gcd(A, w.first);
      } else {
        cur = w;
      }
      continue;
    }
    Int g, s, t;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), cur->second.get_mpz_t(), w.second.get_mpz_t());
    std::pair<Int, Int> next{s * cur->first + t * w.first, g};
    Int z = (w.second / g) * cur->first - (cur->second / g) * w.first;
    A = gcd(A, z);
    cur = next;
  }
  if (!cur || A == 0) throw DomainError("hermite: lattice not of full rank");
  Int C = abs(cur->second);
  Int B = mod(cur->second > 0 ? cur->first : Int(-cur->first), A);
  return {abs(A), B, C};
}

}  // namespace

// ---------------------------------------------------------------------------

QuadElt fundamental_unit(long d) {
  if (d <= 1 || !is_squarefree(d)) throw PreconditionError("fundamental_unit: d must be squarefree and > 1");
  // Continued fraction of theta = (P + sqrt d)/Q with theta = sqrt d or
  // (sqrt d - 1)/2; a convergent p/q of theta gives the candidate p + q*w'
  // where w' = sqrt d, resp. omega.
  const bool one_mod_four = d % 4 == 1;
  Int P = one_mod_four ? -1 : 0, Q = one_mod_four ? 2 : 1;
  const Int D = d, s = sqrt(D);
  Int p0 = 1, q0 = 0, p1, q1;
  const QuadElt w = QuadElt::omega(d);
  for (int it = 0; it < 100000; ++it) {
    Int a;
    if (Q > 0) {
      mpz_fdiv_q(a.get_mpz_t(), Int(P + s).get_mpz_t(), Q.get_mpz_t());
    } else {
      Int aq = -Q;
      mpz_fdiv_q(a.get_mpz_t(), Int(P + s).get_mpz_t(), aq.get_mpz_t());
      a = -(a + 1);
    }
    if (it == 0) {
      p1 = a;
      q1 = 1;
    } else {
      Int p2 = a * p1 + p0, q2 = a * q1 + q0;
      p0 = p1;
      q0 = q1;
      p1 = p2;
      q1 = q2;
    }
    QuadElt cand = QuadElt(d, Rational(p1)) + QuadElt(d, Rational(q1)) * w;
    Rational n = cand.norm();
    if ((n == 1 || n == -1) && q1 != 0) {
      if (cand.to_double() < 0) cand = -cand;
      if (cand.to_double() < 1) cand = cand.inverse();
      return cand;
    }
    P = a * Q - P;
    Q = (D - P * P) / Q;
  }
  throw SearchFailure("fundamental_unit: continued fraction did not close");
}

bool admissible_real_quadratic(long d) {
  static const std::set<long> ok{2,  5,   13,  17,  29,  37,  41,  53,  61,  73,  89,  97,
                                 101, 109, 113, 137, 149, 157, 173, 181, 193, 197, 233, 241};
  return ok.count(d) > 0;
}

long field_discriminant(long d) { return d % 4 == 1 || d % 4 == -3 ? d : 4 * d; }

// ---------------------------------------------------------------------------

RationalResidueRing::RationalResidueRing(long p, const Rational& modulus) : p_(p) {
  if (modulus == 0) throw PreconditionError("residue ring: zero modulus");
  n_ = abs(strip_prime(modulus.get_num(), p));
}

Int RationalResidueRing::unit_group_order() const { return euler_phi(n_); }

Int RationalResidueRing::unit_image_order() const {
  if (n_ <= 2) return 1;
  Int ord = multiplicative_order(Int(p_), n_);
  Int half;
  if (ord % 2 == 0) {
    Int e = ord / 2, P = p_;
    mpz_powm(half.get_mpz_t(), P.get_mpz_t(), e.get_mpz_t(), n_.get_mpz_t());
    if (half == n_ - 1) return ord;
  }
  return 2 * ord;
}

RationalSRing::RationalSRing(long p) : p_(p) {
  if (!is_prime(Int(p))) throw PreconditionError("Z[1/p]: p must be prime");
}

bool RationalSRing::contains(const Elt& x) const {
  return strip_prime(x.get_den(), p_) == 1;
}

bool RationalSRing::is_unit(const Elt& x) const {
  return x != 0 && contains(x) && contains(Rational(1) / x);
}

bool RationalSRing::divides(const Elt& x, const Elt& y) const {
  if (x == 0) return y == 0;
  return contains(y / x);
}

Int RationalSRing::prime_to_s_part(const Elt& x) const {
  if (x == 0) throw DomainError("prime_to_s_part(0)");
  return abs(strip_prime(x.get_num(), p_));
}

bool RationalSRing::generates_prime_ideal(const Elt& a) const {
  if (a == 0) return false;
  return is_prime(prime_to_s_part(a));
}

bool RationalSRing::unit_reduction_surjective(const Elt& a) const {
  RationalResidueRing r(p_, a);
  if (r.modulus() == 1) throw PreconditionError("unit_reduction_surjective: modulus is a unit");
  return r.unit_image_order() == r.unit_group_order();
}

std::optional<Rational> RationalSRing::unit_congruent_to(const Elt& c, const Elt& a, long max_exponent) const {
  RationalResidueRing r(p_, a);
  const Int& n = r.modulus();
  if (n == 1) return Rational(1);
  Int target = r.reduce(c);
  if (gcd(target, n) != 1) return std::nullopt;
  Int minus = mod(Int(-target), n);
  std::optional<std::pair<int, Int>> best;
  const bool scan = max_exponent >= 0 && Int(max_exponent) < 8 * sqrt(n) + 64;
  if (n < (Int(1) << 62)) {
    using u64 = std::uint64_t;
    const u64 nn = mpz_get_ui(n.get_mpz_t());
    auto mul = [nn](u64 x, u64 y) { return static_cast<u64>(static_cast<unsigned __int128>(x) * y % nn); };
    u64 g = static_cast<u64>(p_) % nn, gi = mpz_get_ui(Int(inv_mod(Int(p_), n)).get_mpz_t());
    u64 tp = mpz_get_ui(target.get_mpz_t()), tm = mpz_get_ui(minus.get_mpz_t());
    if (scan) {
      best = scan_exponent(g, gi, tp, tm, u64{1}, max_exponent, mul);
    } else {
      Int ord = multiplicative_order(Int(p_), n);
      auto key = [](u64 x) { return x; };
      best = best_exponent(bsgs(g, tp, u64{1}, ord, mul, key), bsgs(g, tm, u64{1}, ord, mul, key), ord);
    }
  } else {
    auto mul = [&](const Int& x, const Int& y) { return Int(x * y % n); };
    if (scan) {
      best = scan_exponent(Int(p_), inv_mod(Int(p_), n), target, minus, Int(1), max_exponent, mul);
    } else {
      Int ord = multiplicative_order(Int(p_), n);
      auto key = [](const Int& x) { return x; };
      best = best_exponent(bsgs(Int(p_), target, Int(1), ord, mul, key),
                           bsgs(Int(p_), minus, Int(1), ord, mul, key), ord);
    }
  }
  if (!best || (max_exponent >= 0 && abs(best->second) > max_exponent)) return std::nullopt;
  long k = best->second.get_si();
  Rational u = k >= 0 ? Rational(ipow(p_, k)) : Rational(1, ipow(p_, -k));
  return best->first > 0 ? u : Rational(-u);
}

Rational RationalSRing::lambda_candidate(std::size_t index) const {
  long h = static_cast<long>((index + 1) / 2);
  return index % 2 == 1 ? Rational(h) : Rational(-h);
}

namespace {
Int round_nearest(const Rational& x) {
  Rational y = x + Rational(1, 2);
  Int f;
  mpz_fdiv_q(f.get_mpz_t(), y.get_num_mpz_t(), y.get_den_mpz_t());
  return f;
}
}  // namespace

Rational RationalSRing::round_to_integral(const Elt& x) const { return Rational(round_nearest(x)); }

Rational RationalSRing::lambda_step(const Elt& a, const Elt& c) const {
  if (a == 0 || c == 0) return 1;
  long e = valuation(a, p_) - valuation(c, p_);
  return e >= 0 ? Rational(ipow(p_, e)) : Rational(1, ipow(p_, -e));
}

Rational RationalSRing::sample(std::mt19937_64& rng, long height) const {
  std::uniform_int_distribution<long> m(-height, height), k(-1, 1);
  long e = k(rng);
  Rational u = e >= 0 ? Rational(ipow(p_, e)) : Rational(1, ipow(p_, -e));
  return Rational(m(rng)) * u;
}

Rational RationalSRing::parse(const std::string& s) const {
  Rational x = parse_rational(s);
  if (!contains(x)) throw PreconditionError("not an element of " + name() + ": " + s);
  return x;
}

// ---------------------------------------------------------------------------

QuadraticRing::QuadraticRing(long d) : d_(d) {
  if (!admissible_real_quadratic(d))
    throw PreconditionError("Q(sqrt " + std::to_string(d) +
                            ") is not in the list of narrow class number one fields");
  eps_ = darmon::fundamental_unit(d);
}

std::pair<Int, Int> QuadraticRing::coords(const Elt& x) const {
  auto [m, n] = x.omega_coords();
  if (m.get_den() != 1 || n.get_den() != 1) throw DomainError("coords: element is not integral");
  return {m.get_num(), n.get_num()};
}

QuadElt QuadraticRing::from_coords(const Int& m, const Int& n) const {
  return QuadElt::from_omega_coords(d_, Rational(m), Rational(n));
}

bool QuadraticRing::is_unit(const Elt& x) const {
  if (!contains(x) || x.is_zero()) return false;
  Rational n = x.norm();
  return n == 1 || n == -1;
}

bool QuadraticRing::divides(const Elt& x, const Elt& y) const {
  if (x.is_zero()) return y.is_zero();
  return (y / x).is_integral();
}

bool QuadraticRing::generates_prime_ideal(const Elt& a) const {
  if (!contains(a) || a.is_zero()) return false;
  Int N = abs(a.norm().get_num());
  if (N == 1) return false;
  if (is_prime(N)) return true;
  Int q = sqrt(N);
  return q * q == N && is_prime(q) && kronecker(field_discriminant(d_), q.get_si()) == -1;
}

bool QuadraticRing::unit_reduction_surjective(const Elt& a) const {
  if (is_unit(a)) throw PreconditionError("unit_reduction_surjective: modulus is a unit");
  QuadraticResidueRing r(*this, a);
  return r.unit_image_order() == r.unit_group_order();
}

std::optional<QuadElt> QuadraticRing::unit_congruent_to(const Elt& c, const Elt& a, long max_exponent) const {
  QuadraticResidueRing r(*this, a);
  if (r.size() == 1) return one();
  if (!r.is_unit(c)) return std::nullopt;
  using Res = QuadraticResidueRing::Res;
  Res e = r.reduce(eps_), target = r.reduce(c), neg = r.reduce(-c);
  auto mul = [&](const Res& x, const Res& y) { return r.mul(x, y); };
  std::optional<std::pair<int, Int>> best;
  if (max_exponent >= 0 && Int(max_exponent) < 8 * sqrt(r.size()) + 64) {
    best = scan_exponent(e, r.reduce(eps_.inverse()), target, neg, r.one(), max_exponent, mul);
  } else {
    Int ord = r.eps_order();
    auto key = [&](const Res& x) { return r.index(x); };
    best = best_exponent(bsgs(e, target, r.one(), ord, mul, key), bsgs(e, neg, r.one(), ord, mul, key), ord);
  }
  if (!best || (max_exponent >= 0 && abs(best->second) > max_exponent)) return std::nullopt;
  QuadElt u = eps_.pow(best->second.get_si());
  return best->first > 0 ? u : -u;
}

QuadElt QuadraticRing::lambda_candidate(std::size_t index) const {
  if (index == 0) return zero();
  // Shell h holds 8h elements; count off whole shells first.
  long h = 1;
  std::size_t before = 1;
  while (index >= before + 8 * static_cast<std::size_t>(h)) {
    before += 8 * static_cast<std::size_t>(h);
    ++h;
  }
  long pos = static_cast<long>(index - before);
  // Lexicographic over (m, n): m = -h has 2h+1 entries, interior m have 2,
  // m = h has 2h+1.
  long m, n;
  if (pos < 2 * h + 1) {
    m = -h;
    n = -h + pos;
  } else if (pos >= 8 * h - (2 * h + 1)) {
    m = h;
    n = -h + (pos - (8 * h - (2 * h + 1)));
  } else {
    long q = pos - (2 * h + 1);
    m = -h + 1 + q / 2;
    n = q % 2 == 0 ? -h : h;
  }
  return from_coords(m, n);
}

QuadElt QuadraticRing::round_to_integral(const Elt& x) const {
  auto [m, n] = x.omega_coords();
  return from_coords(round_nearest(m), round_nearest(n));
}

QuadElt QuadraticRing::sample(std::mt19937_64& rng, long height) const {
  std::uniform_int_distribution<long> dist(-height, height);
  long m = dist(rng);
  return from_coords(m, dist(rng));
}

// ---------------------------------------------------------------------------

QuadraticResidueRing::QuadraticResidueRing(const QuadraticRing& ring, const QuadElt& modulus)
    : d_(ring.d()), eps_(ring.fundamental_unit()), modulus_(modulus) {
  if (!ring.contains(modulus) || modulus.is_zero()) throw PreconditionError("residue ring: bad modulus");
  if (d_ % 4 == 1) {
    t_ = 1;
    s_ = (d_ - 1) / 4;
  } else {
    t_ = 0;
    s_ = d_;
  }
  auto [m, n] = ring.coords(modulus);
  // modulus * omega = n*s + (m + n*t) omega
  std::tie(A_, B_, C_) = hermite({{m, n}, {n * s_, m + n * t_}});
  prime_ = ring.generates_prime_ideal(modulus);
}

QuadraticResidueRing::Res QuadraticResidueRing::reduce(const Int& m0, const Int& n0) const {
  Int k;
  mpz_fdiv_q(k.get_mpz_t(), n0.get_mpz_t(), C_.get_mpz_t());
  Int n = n0 - k * C_;
  Int m = mod(Int(m0 - k * B_), A_);
  return {m, n};
}

QuadraticResidueRing::Res QuadraticResidueRing::reduce(const QuadElt& x) const {
  auto [m, n] = x.omega_coords();
  if (m.get_den() != 1 || n.get_den() != 1) throw DomainError("residue ring: element not integral");
  return reduce(m.get_num(), n.get_num());
}

QuadraticResidueRing::Res QuadraticResidueRing::mul(const Res& x, const Res& y) const {
  Int nn = x.second * y.second;
  return reduce(x.first * y.first + nn * s_, x.first * y.second + x.second * y.first + nn * t_);
}

QuadraticResidueRing::Res QuadraticResidueRing::pow(Res x, Int e) const {
  Res r = one();
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) r = mul(r, x);
    x = mul(x, x);
    e >>= 1;
  }
  return r;
}

bool QuadraticResidueRing::is_zero(const QuadElt& x) const {
  Res r = reduce(x);
  return r.first == 0 && r.second == 0;
}

bool QuadraticResidueRing::is_unit_res(const Res& x) const {
  if (prime_) return !(x.first == 0 && x.second == 0);
  // (x) + modulus = O iff the joint lattice has index one.
  auto [m, n] = x;
  auto [am, an] = modulus_.omega_coords();
  Int M = am.get_num(), N = an.get_num();
  auto [A, B, C] = hermite({{m, n}, {n * s_, m + n * t_}, {M, N}, {N * s_, M + N * t_}});
  (void)B;
  return A * C == 1;
}

bool QuadraticResidueRing::is_unit(const QuadElt& x) const { return is_unit_res(reduce(x)); }

namespace {
constexpr long kEnumerationCap = 4'000'000;
}

Int QuadraticResidueRing::unit_group_order() const {
  if (prime_) return size() - 1;
  if (size() > kEnumerationCap) throw PreconditionError("residue ring too large to enumerate");
  long count = 0;
  for (Int n = 0; n < C_; ++n)
    for (Int m = 0; m < A_; ++m)
      if (is_unit_res({m, n})) ++count;
  return count;
}

Int QuadraticResidueRing::eps_order() const {
  Res e = reduce(eps_);
  if (prime_) return element_order(size() - 1, [&](const Int& k) { return pow(e, k) == one(); });
  Int ord = 1;
  for (Res x = e; x != one(); x = mul(x, e)) {
    ++ord;
    if (ord > kEnumerationCap) throw PreconditionError("residue ring too large to enumerate");
  }
  return ord;
}

Int QuadraticResidueRing::unit_image_order() const {
  Res minus = reduce(Int(-1), Int(0));
  Int ord = eps_order();
  if (minus == one()) return ord;
  if (ord % 2 == 0 && pow(reduce(eps_), ord / 2) == minus) return ord;
  // -1 is not a power of eps; in the prime case <eps> is cyclic and so is
  // <-1> x <eps> of twice the size; in general -1 still has order two.
  return 2 * ord;
}

}  // namespace darmon
