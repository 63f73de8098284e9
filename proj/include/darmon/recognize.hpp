#pragma once

#include <optional>
#include <string>
#include <vector>

#include "darmon/darmon.hpp"
#include "darmon/numbers.hpp"
#include "darmon/padic.hpp"

namespace darmon {

using IntVec = std::vector<Int>;

/// Lattice spanned by the (independent) rows of `basis`.
struct IntLattice {
  std::vector<IntVec> basis;
};

/// LLL with delta = 99/100, exact rational Gram-Schmidt.
IntLattice lattice_reduce(const IntLattice& L, const Rational& delta = Rational(99, 100));

/// Size reduction |mu_ij| <= 1/2 and the Lovasz condition at delta.
bool is_lll_reduced(const IntLattice& L, const Rational& delta = Rational(99, 100));

/// Absolute value of the Gram determinant (squared covolume).
Int gram_determinant(const IntLattice& L);

struct Recognized {
  QuadElt value;
  bool tentative = false;  // fewer than 3 spare digits over the height bound
};

/// Height of a + b sqrt d: max |n_i| over the primitive integer triple
/// (n0, n1, n2), n2 > 0, with a = n0/n2, b = n1/n2.
Int quad_height(const QuadElt& x);

/// Small (n0, n1, n2) with n0 + n1 sqrt(d) - n2 x == 0 mod p^prec, where
/// sqrt(d) is the conventional embedding. PreconditionError unless
/// p^prec > (2H)^3.
std::optional<Recognized> recognize_quadratic(const Padic& x, long D, const Int& height_bound, long prec);

/// x^2 + b x + c over Q(sqrt d) vanishing at x.
struct QuadraticOverK {
  QuadElt b, c;
  /// Set when x itself lies in K (then the polynomial is (X - root)^2).
  std::optional<QuadElt> root;
  bool tentative = false;
};

std::optional<QuadraticOverK> recognize_degree2_over_K(const Padic& x, long D, const Int& height_bound, long prec);

/// Point with coordinates in Q(sqrt d).
struct GlobalPoint {
  QuadElt x, y;
};

struct MatchVerdict {
  bool matched = false;
  long n = 0, m_prime = 0;  // n log(u) = m' log(J)
  int sqrt_sign = 1;        // embedding of sqrt d used
  bool component_match = false;  // n v(u) == m' v(J) mod v(q)
  long precision = 0;
  std::size_t relations = 0;  // pairs (n, m') with m' > 0 satisfying the log relation
};

/// Log relation n log(u) = m' log(J) between J and the Tate parameter u of
/// a local point, |n|, m' <= bound.
MatchVerdict match_local_point(const MultIntResult& J, const LocalPoint& P, const TateCurve& T, long prec,
                               long bound = 20);

/// Compares J with the image of a global point through the normalized
/// logarithm (which kills q and torsion), trying both embeddings of
/// sqrt d and |n|, |m'| <= bound. The reported pair has m' > 0 and minimal
/// max(|n|, m').
MatchVerdict match_global_point(const MultIntResult& J, const GlobalPoint& P, long D, const TateCurve& T, long prec,
                                long bound = 20);

}  // namespace darmon
