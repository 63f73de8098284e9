#include "darmon/numbers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "darmon/errors.hpp"

namespace darmon {

long valuation(const Int& n, long p) {
  if (n == 0) throw DomainError("valuation of zero");
  Int m, P = p;
  return static_cast<long>(mpz_remove(m.get_mpz_t(), n.get_mpz_t(), P.get_mpz_t()));
}

Int strip_prime(const Int& n, long p) {
  if (n == 0) return 0;
  Int m, P = p;
  mpz_remove(m.get_mpz_t(), n.get_mpz_t(), P.get_mpz_t());
  return m;
}

long valuation(const Rational& q, long p) {
  return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

Int ipow(long base, unsigned long exp) {
  Int r;
  if (base >= 0) {
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), exp);
  } else {
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(-base), exp);
    if (exp % 2 == 1) r = -r;
  }
  return r;
}

Int ipow(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

Int mod(const Int& a, const Int& m) {
  Int r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

Int inv_mod(const Int& a, const Int& m) {
  Int r;
  if (m == 1) return 0;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
    throw DomainError("element not invertible modulo " + m.get_str());
  return r;
}

Int rational_mod(const Rational& q, const Int& m) {
  return mod(q.get_num() * inv_mod(q.get_den(), m), m);
}

bool is_prime(const Int& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

bool is_squarefree(long n) {
  if (n == 0) return false;
  n = std::labs(n);
  for (long q = 2; q * q <= n; ++q) {
    if (n % (q * q) == 0) return false;
  }
  return true;
}

int kronecker(long a, long n) {
  Int A(a), N(n);
  return mpz_kronecker(A.get_mpz_t(), N.get_mpz_t());
}

namespace {

// Brent's variant of Pollard rho; n composite, odd.
Int rho_divisor(const Int& n) {
  for (unsigned long c = 1;; ++c) {
    Int y = 2, x, g = 1, q = 1, ys;
    unsigned long r = 1;
    const unsigned long m = 128;
    auto f = [&](const Int& v) { return Int((v * v + c) % n); };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) y = f(y);
      unsigned long k = 0;
      do {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = q * abs(Int(x - y)) % n;
        }
        g = gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = gcd(abs(Int(x - ys)), n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(const Int& n, std::vector<Int>& primes) {
  if (n == 1) return;
  if (is_prime(n)) {
    primes.push_back(n);
    return;
  }
  Int g = rho_divisor(n);
  factor_into(g, primes);
  factor_into(n / g, primes);
}

}  // namespace

std::vector<std::pair<Int, int>> factor(Int n) {
  if (n == 0) throw DomainError("factor(0)");
  n = abs(n);
  std::vector<std::pair<Int, int>> out;
  for (unsigned long q = 2; q < 1000 && q * q <= n; ++q) {
    int e = 0;
    while (mpz_divisible_ui_p(n.get_mpz_t(), q)) {
      n /= q;
      ++e;
    }
    if (e > 0) out.emplace_back(Int(q), e);
  }
  std::vector<Int> rest;
  factor_into(n, rest);
  std::sort(rest.begin(), rest.end());
  for (const Int& q : rest) {
    if (!out.empty() && out.back().first == q)
      ++out.back().second;
    else
      out.emplace_back(q, 1);
  }
  return out;
}

Int euler_phi(const Int& n) {
  Int r = 1;
  for (const auto& [q, e] : factor(n)) r *= (q - 1) * ipow(q, e - 1);
  return r;
}

Int multiplicative_order(const Int& g, const Int& n) {
  if (n == 1) return 1;
  Int gg = mod(g, n);
  return element_order(euler_phi(n), [&](const Int& k) {
    Int r;
    mpz_powm(r.get_mpz_t(), gg.get_mpz_t(), k.get_mpz_t(), n.get_mpz_t());
    return r == 1;
  });
}

Rational make_rational(const Int& num, const Int& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw PreconditionError("empty rational literal");
  if (s[0] == '+') s = s.substr(1);
  Rational q;
  if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0 || q.get_den() == 0)
    throw PreconditionError("malformed rational literal '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }
std::string to_string(const Int& n) { return n.get_str(); }

QuadElt QuadElt::omega(long d) {
  if (((d % 4) + 4) % 4 == 1) return {d, Rational(1, 2), Rational(1, 2)};
  return {d, 0, 1};
}

bool QuadElt::is_integral() const {
  auto [m, n] = omega_coords();
  return m.get_den() == 1 && n.get_den() == 1;
}

std::pair<Rational, Rational> QuadElt::omega_coords() const {
  if (((d % 4) + 4) % 4 == 1) {
    // x + y sqrt d = m + n (1 + sqrt d)/2  =>  n = 2y, m = x - y
    return {x - y, 2 * y};
  }
  return {x, y};
}

QuadElt QuadElt::from_omega_coords(long d, const Rational& m, const Rational& n) {
  QuadElt w = omega(d);
  return QuadElt(d, m) + QuadElt(d, n) * w;
}

double QuadElt::to_double() const { return x.get_d() + y.get_d() * std::sqrt(static_cast<double>(d)); }

QuadElt QuadElt::inverse() const {
  Rational n = norm();
  if (n == 0) throw DomainError("inverse of zero in Q(sqrt d)");
  return {d, x / n, -y / n};
}

QuadElt QuadElt::pow(long e) const {
  QuadElt base = e < 0 ? inverse() : *this;
  unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
  QuadElt r(d, 1, 0);
  while (k > 0) {
    if (k & 1) r = r * base;
    base = base * base;
    k >>= 1;
  }
  return r;
}

namespace {
void check_same_field(const QuadElt& a, const QuadElt& b) {
  if (a.d != b.d) throw PreconditionError("mixing elements of different quadratic fields");
}
}  // namespace

QuadElt operator+(const QuadElt& a, const QuadElt& b) {
  check_same_field(a, b);
  return {a.d, a.x + b.x, a.y + b.y};
}
QuadElt operator-(const QuadElt& a, const QuadElt& b) {
  check_same_field(a, b);
  return {a.d, a.x - b.x, a.y - b.y};
}
QuadElt operator*(const QuadElt& a, const QuadElt& b) {
  check_same_field(a, b);
  return {a.d, a.x * b.x + Rational(a.d) * a.y * b.y, a.x * b.y + a.y * b.x};
}
QuadElt operator/(const QuadElt& a, const QuadElt& b) { return a * b.inverse(); }

std::string to_string(const QuadElt& a, bool sqrt_basis) {
  Rational c0, c1;
  std::string sym;
  if (sqrt_basis) {
    c0 = a.x;
    c1 = a.y;
    sym = "s";
  } else {
    std::tie(c0, c1) = a.omega_coords();
    sym = "w";
  }
  if (c1 == 0) return c0.get_str();
  std::string out;
  if (c0 != 0) out = c0.get_str();
  if (c1 < 0) {
    out += "-";
  } else if (!out.empty()) {
    out += "+";
  }
  Rational m = abs(c1);
  if (m != 1) out += m.get_str() + "*";
  out += sym;
  return out;
}

QuadElt parse_quad(std::string_view text, long d) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw PreconditionError("empty quadratic literal");
  QuadElt total(d, 0, 0);
  size_t i = 0;
  while (i < s.size()) {
    size_t j = i + 1;
    while (j < s.size() && s[j] != '+' && s[j] != '-') ++j;
    std::string term = s.substr(i, j - i);
    i = j;
    int sign = 1;
    if (!term.empty() && (term[0] == '+' || term[0] == '-')) {
      if (term[0] == '-') sign = -1;
      term = term.substr(1);
    }
    if (term.empty()) throw PreconditionError("malformed quadratic literal '" + std::string(text) + "'");
    QuadElt unit(d, 1, 0);
    char last = term.back();
    if (last == 'w' || last == 's') {
      unit = last == 'w' ? QuadElt::omega(d) : QuadElt(d, 0, 1);
      term.pop_back();
      if (!term.empty() && term.back() == '*') term.pop_back();
      if (term.empty()) term = "1";
    }
    Rational coef = parse_rational(term);
    total += QuadElt(d, coef * sign) * unit;
  }
  return total;
}

}  // namespace darmon
