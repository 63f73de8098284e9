#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace darmon {

using Int = mpz_class;
using Rational = mpq_class;

/// p-adic valuation of a nonzero integer.
long valuation(const Int& n, long p);
/// p-adic valuation of a nonzero rational.
long valuation(const Rational& q, long p);
/// n with every factor p removed (0 stays 0).
Int strip_prime(const Int& n, long p);

Int ipow(long base, unsigned long exp);
Int ipow(const Int& base, unsigned long exp);
Int mod(const Int& a, const Int& m);  ///< least nonnegative residue
/// Inverse of `a` modulo `m`; throws DomainError when not invertible.
Int inv_mod(const Int& a, const Int& m);
/// Reduces a rational with denominator prime to m into [0, m).
Int rational_mod(const Rational& q, const Int& m);

bool is_prime(const Int& n);
bool is_squarefree(long n);
int kronecker(long a, long n);

/// Trial-division factorization of |n| (n != 0) as (prime, exponent) pairs.
std::vector<std::pair<Int, int>> factor(Int n);

Int euler_phi(const Int& n);
/// Order of g in (Z/n)^x; g must be a unit mod n.
Int multiplicative_order(const Int& g, const Int& n);
/// Order of an element of a finite group with known order `group_order`,
/// given its power map.
template <class PowEqualsOne>
Int element_order(const Int& group_order, PowEqualsOne pow_is_one) {
  Int ord = group_order;
  for (const auto& [q, e] : factor(group_order)) {
    for (int i = 0; i < e && ord % q == 0 && pow_is_one(Int(ord / q)); ++i) ord /= q;
  }
  return ord;
}

Rational make_rational(const Int& num, const Int& den = 1);
/// Parses "a", "-a", "a/b".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string to_string(const Int& n);

/// Element x + y*sqrt(d) of the quadratic field Q(sqrt d), d squarefree.
struct QuadElt {
  long d = 5;
  Rational x = 0;
  Rational y = 0;

  QuadElt() = default;
  QuadElt(long d_, Rational x_, Rational y_ = 0) : d(d_), x(std::move(x_)), y(std::move(y_)) {}

  static QuadElt omega(long d);  ///< generator of the ring of integers

  Rational norm() const { return x * x - Rational(d) * y * y; }
  Rational trace() const { return 2 * x; }
  QuadElt conj() const { return {d, x, -y}; }
  bool is_zero() const { return x == 0 && y == 0; }
  bool is_rational() const { return y == 0; }
  /// True iff the element lies in the ring of integers of Q(sqrt d).
  bool is_integral() const;
  /// Coordinates (m, n) with value = m + n*omega; valid for any element.
  std::pair<Rational, Rational> omega_coords() const;
  static QuadElt from_omega_coords(long d, const Rational& m, const Rational& n);
  double to_double() const;

  QuadElt inverse() const;
  QuadElt pow(long e) const;

  friend bool operator==(const QuadElt& a, const QuadElt& b) {
    return a.d == b.d && a.x == b.x && a.y == b.y;
  }
  friend QuadElt operator+(const QuadElt& a, const QuadElt& b);
  friend QuadElt operator-(const QuadElt& a, const QuadElt& b);
  friend QuadElt operator*(const QuadElt& a, const QuadElt& b);
  friend QuadElt operator/(const QuadElt& a, const QuadElt& b);
  QuadElt operator-() const { return {d, -x, -y}; }
  QuadElt& operator+=(const QuadElt& o) { return *this = *this + o; }
  QuadElt& operator-=(const QuadElt& o) { return *this = *this - o; }
  QuadElt& operator*=(const QuadElt& o) { return *this = *this * o; }
};

/// Prints in the integral basis: "m+n*w" (w = omega), or "x+y*s" style
/// with s = sqrt(d) when `sqrt_basis` is set.
std::string to_string(const QuadElt& a, bool sqrt_basis = false);
/// Parses literals such as "46368+75025w", "-4+3*w", "1-s", "3/2*s+1/2".
/// `w` denotes omega and `s` denotes sqrt(d).
QuadElt parse_quad(std::string_view text, long d);
inline std::ostream& operator<<(std::ostream& os, const QuadElt& a) { return os << to_string(a); }

}  // namespace darmon
