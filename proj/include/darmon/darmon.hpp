#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "darmon/decomp.hpp"
#include "darmon/integrate.hpp"
#include "darmon/modsym.hpp"
#include "darmon/padic.hpp"

namespace darmon {

/// Curve of conductor p*M with the data defining Gamma (determinant-one
/// matrices over Z[1/p], upper triangular mod M).
struct EichlerSetup {
  std::shared_ptr<const NewformSymbol> symbol;
  long p = 0, M = 0;
  /// Smallest d > 1, d | M, with Atkin-Lehner eigenvalue +1.
  long d = 0;
  Mat2<Int> w_d;  // (0 1; -d 0)

  const EllCurve& curve() const { return symbol->curve(); }
  /// Unramified quadratic extension of Q_p.
  PadicCtx field() const { return PadicCtx::make(p, 2); }
  LevelIdeal<RationalSRing> level() const { return {RationalSRing(p), Rational(M)}; }
};

/// Throws PreconditionError unless p exactly divides the conductor, M > 1
/// and some d | M has eigenvalue +1.
EichlerSetup build_setup(const EllCurve& E, long p);
EichlerSetup build_setup(std::shared_ptr<const NewformSymbol> sym, long p);

/// Integer matrix W = (a b; c d) with M | c and characteristic polynomial
/// x^2 - D x + (D^2 - D)/4, i.e. the image of (D + sqrt D)/2.
struct Embedding {
  long D = 0;
  Mat2<Int> W;
  QuadElt tau_exact;  // (a - d + sqrt D) / 2c in Q(sqrt d)
  Padic tau;
  Mat2<Int> gamma;    // image of the norm-one unit
  QuadElt unit;       // that unit, in Q(sqrt d), d the squarefree kernel
};

/// sqrt(D) in the unramified quadratic extension, with second coordinate
/// reducing into [1, (p-1)/2] (D must be a nonsquare mod p).
Padic embedded_sqrt(const PadicCtx& K, long D, long prec);
/// sqrt(d) = sqrt(D)/f for D = f^2 d, d squarefree.
Padic embedded_sqrt_kernel(const PadicCtx& K, long D, long prec);
long squarefree_kernel(long D);
/// x + y sqrt(d) with sqrt(d) given.
Padic embed_quad(const QuadElt& x, const Padic& sqrt_d, long prec);
QuadElt mobius(const Mat2<Rational>& g, const QuadElt& z);

/// Checks that D is a fundamental discriminant, p is inert and every prime
/// of M splits; throws PreconditionError otherwise.
void check_field(const EichlerSetup& S, long D);

/// Up to `count` embeddings, at most one per (c, a mod c), ordered by |c|
/// and then |a|.
std::vector<Embedding> find_embeddings(const EichlerSetup& S, long D, std::size_t count, long prec);

/// Image of eps (squared if of norm -1), eps the fundamental unit.
Mat2<Int> gamma_tau(const Embedding& e);

struct Gamma1Normalized {
  Mat2<Rational> gamma;
  QuadElt tau;
  long m = 1;
  long shift = 0;  // n of diag(p^-n, p^n), 0 when the power path was taken
};

/// Brings gamma into Gamma_1(M Z[1/p]): by diag(+-p^-n, +-p^n) on the left
/// when a == +-p^n mod M, otherwise by the least power m with a^m == +-1.
Gamma1Normalized normalize_to_gamma1(const EichlerSetup& S, const Mat2<Int>& gamma, const QuadElt& tau);

/// One double integral of int_{tau_from}^{tau_to} int_r^s, raised to
/// `exponent`.
struct PlanTerm {
  QuadElt tau_from, tau_to;
  Cusp r, s;
  int exponent = 1;
  bool half = false;
};

struct SemiIndefPlan {
  long D = 0;  // the limits lie in Q(sqrt D)
  std::vector<ElemFactor<Rational>> factors;
  std::vector<PlanTerm> terms;
  long multiplier = 1;
};

/// Expresses int^tau int_oo^{gamma oo} as a product of double integrals
/// over {0 -> oo}, folding the elementary factors of gamma from the left.
SemiIndefPlan plan_semi_indefinite(const EichlerSetup& S, long D, const Mat2<Rational>& gamma, const QuadElt& tau,
                                   long multiplier = 1);

/// Product of the plan's terms (series method, Riemann products when the
/// series evaluator refuses a term); terms run concurrently.
MultIntResult compute_J(const EichlerSetup& S, const SemiIndefPlan& plan, long prec, long depth);

// ---------------------------------------------------------------------------
// Points over K_p and Tate uniformization

struct LocalPoint {
  Padic x, y;
  bool infinity = false;

  static LocalPoint origin() { return {Padic(), Padic(), true}; }
};

/// Weierstrass equation residual y^2 + a1xy + a3y - (x^3 + ...).
Padic weierstrass_residual(const EllCurve& E, const LocalPoint& P);
/// On the curve modulo p^n (for points with negative valuation, the
/// equation is scaled by the appropriate power of p first).
bool on_curve(const EllCurve& E, const LocalPoint& P, long n);
LocalPoint ec_neg(const EllCurve& E, const LocalPoint& P);
LocalPoint ec_add(const EllCurve& E, const LocalPoint& P, const LocalPoint& Q);
LocalPoint ec_mul(const EllCurve& E, long k, const LocalPoint& P);
/// Points agree modulo p^n (affine coordinates, or both infinity).
bool same_point(const LocalPoint& P, const LocalPoint& Q, long n);

/// The p-adic period: the q with j(q) = j(E), from the reversed series of
/// 1/j. DomainError unless v_p(j) < 0.
Padic tate_q(const EllCurve& E, long p, long prec);

/// j(q) = E4^3 / Delta evaluated at q.
Padic j_of_q(const Padic& q, long prec);

/// Tate curve y^2 + xy = x^3 + a4 x + a6 for q together with the
/// isomorphism x = u^2 X + r, y = u^3 Y + u^2 s X + t onto E over the
/// unramified quadratic extension.
struct TateCurve {
  EllCurve E;
  Padic q, a4, a6;
  Padic u, r, s, t;
  long prec = 0;

  static TateCurve make(const EllCurve& E, long p, long prec);
  /// v(q) * log(x) - v(x) * log(q): a homomorphism K_p^x -> K_p killing q.
  Padic normalized_log(const Padic& x) const;
  /// x q^-k with 0 <= v < v(q).
  Padic reduce(const Padic& x) const;
};

LocalPoint tate_map(const Padic& u, const TateCurve& T);
Padic tate_inverse(const LocalPoint& P, const TateCurve& T);

/// Coordinates on the Tate curve itself (no isomorphism applied).
LocalPoint tate_curve_point(const Padic& u, const TateCurve& T);

struct DarmonPoint {
  long D = 0;
  Embedding embedding;
  SemiIndefPlan plan;
  MultIntResult J;
  long multiplier = 1;
  LocalPoint point;
};

/// Full pipeline for the first embedding of discriminant D.
DarmonPoint darmon_point(const EichlerSetup& S, long D, long prec, long depth);

}  // namespace darmon
