#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "darmon/numbers.hpp"

namespace darmon {

/// Generator eps > 1 of the unit group of the ring of integers of Q(sqrt d)
/// modulo {+-1}, found from the continued fraction of the ring generator.
QuadElt fundamental_unit(long d);

/// Squarefree d > 1 for which Q(sqrt d) is known to have narrow class number
/// one. Only these fields are admitted as S-integer rings.
bool admissible_real_quadratic(long d);

/// Fundamental discriminant of Q(sqrt d).
long field_discriminant(long d);

// ---------------------------------------------------------------------------
// Z[1/p]

/// Finite quotient Z[1/p] / a' Z[1/p] = Z/n, n the prime-to-p part of a'.
class RationalResidueRing {
 public:
  RationalResidueRing(long p, const Rational& modulus);

  const Int& modulus() const { return n_; }
  Int reduce(const Rational& x) const { return rational_mod(x, n_); }
  /// |(Z/n)^x|.
  Int unit_group_order() const;
  /// Size of the subgroup generated by the images of -1 and p.
  Int unit_image_order() const;

 private:
  long p_;
  Int n_;
};

/// Ring of S-integers Z[1/p] (S = {infinity, p}).
class RationalSRing {
 public:
  using Elt = Rational;

  explicit RationalSRing(long p);

  long p() const { return p_; }
  Elt zero() const { return 0; }
  Elt one() const { return 1; }
  Elt from_int(long n) const { return n; }

  bool contains(const Elt& x) const;
  bool is_unit(const Elt& x) const;
  /// x divides y in Z[1/p].
  bool divides(const Elt& x, const Elt& y) const;
  /// Strips the unit factor +-p^k, leaving a positive integer prime to p.
  Int prime_to_s_part(const Elt& x) const;

  bool generates_prime_ideal(const Elt& a) const;
  bool unit_reduction_surjective(const Elt& a) const;
  /// A unit u = +-p^k with u == c mod a, smallest |k| first; none when
  /// |k| would exceed `max_exponent` (if nonnegative).
  std::optional<Elt> unit_congruent_to(const Elt& c, const Elt& a, long max_exponent = -1) const;
  /// Candidate lambda values 0, 1, -1, 2, -2, ...
  Elt lambda_candidate(std::size_t index) const;
  /// Nearest integer (ties upward).
  Elt round_to_integral(const Elt& x) const;
  /// Unit s = p^(v(a) - v(c)): stepping lambda in multiples of s keeps
  /// a + lambda*c comparable in size to the prime-to-p part of c.
  Elt lambda_step(const Elt& a, const Elt& c) const;
  /// Random element m p^k with |m| <= height, |k| <= 1 (test inputs).
  Elt sample(std::mt19937_64& rng, long height) const;

  std::string format(const Elt& x) const { return to_string(x); }
  Elt parse(const std::string& s) const;
  std::string name() const { return "Z[1/" + std::to_string(p_) + "]"; }

 private:
  long p_;
};

// ---------------------------------------------------------------------------
// O_F, F real quadratic of narrow class number one, S = archimedean places.

class QuadraticRing;

/// O_F / a' O_F described by the Hermite basis {(A, 0), (B, C)} of the ideal
/// lattice in coordinates m + n*omega; elements are indexed canonically.
class QuadraticResidueRing {
 public:
  /// Canonical residue (m mod A after reducing n mod C).
  using Res = std::pair<Int, Int>;

  QuadraticResidueRing(const QuadraticRing& ring, const QuadElt& modulus);

  Int size() const { return A_ * C_; }
  bool modulus_is_prime() const { return prime_; }
  Res reduce(const QuadElt& x) const;
  Res reduce(const Int& m, const Int& n) const;
  Res mul(const Res& x, const Res& y) const;
  Res pow(Res x, Int e) const;
  Res one() const { return reduce(1, 0); }
  /// Canonical index in [0, size()).
  Int index(const Res& x) const { return x.first + A_ * x.second; }

  bool is_zero(const QuadElt& x) const;
  bool is_unit(const QuadElt& x) const;
  Int unit_group_order() const;
  /// Size of the subgroup generated by -1 and the fundamental unit.
  Int unit_image_order() const;
  /// Order of the fundamental unit in the unit group.
  Int eps_order() const;

 private:
  bool is_unit_res(const Res& x) const;

  long d_;
  Int s_, t_;  // omega^2 = t*omega + s
  QuadElt eps_;
  QuadElt modulus_;
  Int A_, B_, C_;
  bool prime_;
};

class QuadraticRing {
 public:
  using Elt = QuadElt;

  /// Throws PreconditionError for fields outside the admissible list.
  explicit QuadraticRing(long d);

  long d() const { return d_; }
  const QuadElt& fundamental_unit() const { return eps_; }
  Elt zero() const { return QuadElt(d_, 0); }
  Elt one() const { return QuadElt(d_, 1); }
  Elt from_int(long n) const { return QuadElt(d_, n); }
  Elt omega() const { return QuadElt::omega(d_); }

  bool contains(const Elt& x) const { return x.d == d_ && x.is_integral(); }
  bool is_unit(const Elt& x) const;
  bool divides(const Elt& x, const Elt& y) const;

  bool generates_prime_ideal(const Elt& a) const;
  bool unit_reduction_surjective(const Elt& a) const;
  /// u = +-eps^k with u == c mod a, smallest |k| first.
  std::optional<Elt> unit_congruent_to(const Elt& c, const Elt& a, long max_exponent = -1) const;
  /// Shells max(|m|, |n|) = h of m + n*omega, lexicographic within a shell.
  Elt lambda_candidate(std::size_t index) const;
  /// Rounds both coordinates in the basis {1, omega}.
  Elt round_to_integral(const Elt& x) const;
  Elt lambda_step(const Elt&, const Elt&) const { return one(); }
  /// Random m + n*omega with |m|, |n| <= height.
  Elt sample(std::mt19937_64& rng, long height) const;

  std::string format(const Elt& x) const { return to_string(x); }
  Elt parse(const std::string& s) const { return parse_quad(s, d_); }
  std::string name() const { return "O_Q(sqrt " + std::to_string(d_) + ")"; }

  /// Integer coordinates of an integral element in the basis {1, omega}.
  std::pair<Int, Int> coords(const Elt& x) const;
  Elt from_coords(const Int& m, const Int& n) const;

 private:
  long d_;
  QuadElt eps_;
};

}  // namespace darmon
