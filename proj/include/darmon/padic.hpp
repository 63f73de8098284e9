#pragma once

#include <string>
#include <utility>

#include "darmon/numbers.hpp"

namespace darmon {

/// Q_p (degree 1) or its unramified quadratic extension Q_p(w), w^2 = r,
/// with r the least positive integer that is a nonresidue mod p (degree 2).
struct PadicCtx {
  long p = 0;
  int degree = 1;
  long nonresidue = 0;

  static PadicCtx make(long p, int degree);
  long residue_field_size() const { return degree == 1 ? p : p * p; }
  PadicCtx with_degree(int deg) const { return make(p, deg); }

  friend bool operator==(const PadicCtx& a, const PadicCtx& b) {
    return a.p == b.p && a.degree == b.degree && a.nonresidue == b.nonresidue;
  }
};

/// Capped relative precision element p^val * (u0 + u1 w) of Q_p or Q_{p^2}.
///
/// The unit part is known modulo p^prec (relative precision) and is a unit
/// unless the element is zero. A zero carries the absolute precision to which
/// it is known. Equality is always "congruent to the joint precision".
class Padic {
 public:
  Padic() = default;

  static Padic zero(const PadicCtx& ctx, long abs_prec);
  static Padic one(const PadicCtx& ctx, long rel_prec) { return from_int(ctx, 1, rel_prec); }
  static Padic from_int(const PadicCtx& ctx, const Int& n, long rel_prec);
  static Padic from_rational(const PadicCtx& ctx, const Rational& q, long rel_prec);
  /// p^val * (x + y w), normalised (x, y need not be reduced or units).
  static Padic from_coords(const PadicCtx& ctx, const Int& x, const Int& y, long val, long rel_prec);
  /// The generator w (sqrt of the nonresidue); requires degree 2.
  static Padic gen(const PadicCtx& ctx, long rel_prec);

  const PadicCtx& ctx() const { return ctx_; }
  long p() const { return ctx_.p; }
  bool is_zero() const { return zero_; }
  /// Valuation; for a zero element this is its absolute precision.
  long valuation() const { return val_; }
  long rel_prec() const { return zero_ ? 0 : prec_; }
  long abs_prec() const { return zero_ ? val_ : val_ + prec_; }
  const Int& unit0() const { return u0_; }
  const Int& unit1() const { return u1_; }
  bool is_unit() const { return !zero_ && val_ == 0; }
  bool in_base_field() const { return ctx_.degree == 1 || zero_ || u1_ == 0; }

  /// Unit part p^-val * x as an element of valuation 0.
  Padic unit_part() const;
  /// Residues (u0 mod p, u1 mod p) of the unit part.
  std::pair<long, long> residue() const;
  /// Coordinate i (0 or 1) of the value in the basis {1, w}, as an element
  /// of Q_p.
  Padic coord(int i) const;

  Padic conj() const;
  Padic with_rel_prec(long n) const;
  Padic with_abs_prec(long n) const;
  /// Same value viewed in the degree-2 extension.
  Padic to_degree2() const;

  Padic inverse() const;
  Padic pow(long e) const;

  friend Padic operator+(const Padic& a, const Padic& b);
  friend Padic operator-(const Padic& a, const Padic& b);
  friend Padic operator*(const Padic& a, const Padic& b);
  friend Padic operator/(const Padic& a, const Padic& b);
  Padic operator-() const;
  Padic& operator+=(const Padic& o) { return *this = *this + o; }
  Padic& operator-=(const Padic& o) { return *this = *this - o; }
  Padic& operator*=(const Padic& o) { return *this = *this * o; }

  /// Congruence to the minimal absolute precision of the two operands.
  friend bool congruent(const Padic& a, const Padic& b);
  /// Congruence modulo p^n (n must not exceed both precisions).
  friend bool congruent(const Padic& a, const Padic& b, long n);

  /// Integer representatives of the two coordinates of the value modulo
  /// p^n; requires valuation >= 0 (or zero).
  std::pair<Int, Int> coords_mod(long n) const;

  std::string to_string() const;

 private:
  void normalize();

  PadicCtx ctx_;
  bool zero_ = true;
  long val_ = 0;
  long prec_ = 0;
  Int u0_ = 0;
  Int u1_ = 0;
};

/// Iwasawa logarithm: log(p) = 0, kills roots of unity.
Padic padic_log(const Padic& x);
/// Exponential on valuation >= 1 (p odd).
Padic padic_exp(const Padic& x);
/// Teichmüller representative of the reduction of a unit.
Padic teichmuller(const Padic& x);
/// A square root; with `allow_extension`, a nonsquare unit of Q_p is
/// square-rooted in the quadratic extension.
Padic hensel_sqrt(const Padic& a, bool allow_extension = false);

/// Smallest positive integer that is a quadratic nonresidue mod p.
long least_nonresidue(long p);

}  // namespace darmon
