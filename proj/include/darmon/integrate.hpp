#pragma once

#include <vector>

#include "darmon/mat2.hpp"
#include "darmon/modsym.hpp"
#include "darmon/padic.hpp"

namespace darmon {

/// The ball a + p^n Z_p of P^1(Q_p), or its complement.
struct BallShape {
  Rational center;
  long n = 0;
  bool complement = false;
};

/// Shape of g Z_p for an invertible rational matrix g.
BallShape ball_shape(const Mat2<Rational>& g, long p);

/// The measure mu{r -> s} on P^1(Q_p) attached to a level N = pM symbol:
/// mu(gamma Z_p) = I{gamma^-1 r -> gamma^-1 s} for gamma in the group of
/// determinant-one matrices over Z[1/p] that are upper triangular mod M.
class MeasureCtx {
 public:
  MeasureCtx(const NewformSymbol& sym, long p, Cusp r, Cusp s);

  long p() const { return p_; }
  long M() const { return M_; }
  const Cusp& r() const { return r_; }
  const Cusp& s() const { return s_; }
  const NewformSymbol& symbol() const { return *sym_; }
  /// Element (p x, y; M, p) of determinant 1 taking Z_p onto P^1 \ pZ_p.
  const Mat2<Rational>& odd_element() const { return gamma0_; }

  long measure(const BallShape& b) const;
  long measure(const Mat2<Rational>& g) const { return measure(ball_shape(g, p_)); }
  long measure(const Mat2<Int>& g) const { return measure(g.cast<Rational>()); }

 private:
  const NewformSymbol* sym_;
  long p_, M_;
  Cusp r_, s_;
  Mat2<Rational> gamma0_;
};

/// Element p^valuation * teich_unit * exp(log_value) of K_p^x, with the
/// unit-part data known modulo p^precision.
struct MultIntResult {
  long valuation = 0;
  Padic log_value;
  Padic teich_unit;
  long precision = 0;

  static MultIntResult one(const PadicCtx& ctx, long prec);
  /// Splits a nonzero element.
  static MultIntResult split(const Padic& x, long prec);
  MultIntResult operator*(const MultIntResult& o) const;
  MultIntResult inverse() const;
  /// Agreement of all three components modulo p^n.
  bool agrees(const MultIntResult& o, long n) const;
};

/// p^v * zeta * exp(log).
Padic recover_value(const MultIntResult& res);

/// (0 -1; 1 0) g^-1, up to the scalar det g (irrelevant for the Moebius
/// action): gbar(g) tau = (c tau - a)/(d tau - b).
Mat2<Rational> gbar(const Mat2<Rational>& g);

Padic act(const Mat2<Rational>& g, const Padic& tau);

/// Normalizing matrix and cover of P^1(Q_p) for the series method.
struct StandardCover {
  Mat2<Int> h;
  long r = 0;
  /// Balls g Z_p (g already multiplied by h); the last one is the image of
  /// the complement of Z_p.
  std::vector<Mat2<Int>> balls;
};

/// Throws DomainError when tau1 or tau2 lies in P^1(Q_p) to working
/// precision.
StandardCover standard_cover(const Padic& tau1, const Padic& tau2);

/// Riemann product over an adaptive cover, refined until the integrand is
/// constant modulo p^depth on every ball.
MultIntResult riemann_double_integral(const MeasureCtx& ctx, const Padic& tau1, const Padic& tau2, long depth);

/// n-th moments int_{Z_p} t^n dmu(g t), n = 0..n_max, by Riemann sums over
/// the p^depth sub-balls; correct modulo p^depth.
std::vector<Int> ball_moments(const MeasureCtx& ctx, const Mat2<Int>& g, long n_max, long depth);

/// Power-series evaluation over standard_cover with moments at
/// `moment_depth` (defaults to prec).
MultIntResult series_double_integral(const MeasureCtx& ctx, const Padic& tau1, const Padic& tau2, long prec,
                                     long moment_depth = -1);

}  // namespace darmon
