#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "darmon/mat2.hpp"
#include "darmon/numbers.hpp"

namespace darmon {

using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<64>>;
using Complex = boost::multiprecision::number<boost::multiprecision::complex_adaptor<boost::multiprecision::cpp_bin_float<64>>>;

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6, assumed minimal at the bad
/// primes.
struct EllCurve {
  Int a1, a2, a3, a4, a6;

  /// "a1 a2 a3 a4 a6", whitespace or comma separated, optional brackets.
  static EllCurve parse(const std::string& text);

  Int b2() const { return a1 * a1 + 4 * a2; }
  Int b4() const { return 2 * a4 + a1 * a3; }
  Int b6() const { return a3 * a3 + 4 * a6; }
  Int b8() const { return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4; }
  Int c4() const { return b2() * b2() - 24 * b4(); }
  Int c6() const { return -b2() * b2() * b2() + 36 * b2() * b4() - 216 * b6(); }
  Int discriminant() const;

  /// Product of the bad primes; throws PreconditionError unless every bad
  /// prime is multiplicative (the only case handled).
  long conductor() const;
  std::vector<long> bad_primes() const;
  /// ell + 1 - #E~(F_ell), singular point included for bad ell.
  long ap(long ell) const;

  template <class T>
  bool contains_point(const T& x, const T& y) const {
    return y * y + T(a1) * x * y + T(a3) * y == x * x * x + T(a2) * x * x + T(a4) * x + T(a6);
  }

  std::string to_string() const;
};

/// a_1 .. a_B (index 0 unused).
std::vector<long> an_coeffs(const EllCurve& E, long B);

/// Real period of E from the arithmetic-geometric mean.
Real real_period(const EllCurve& E);

/// Cusp num/den in lowest terms with den >= 0; infinity is 1/0.
struct Cusp {
  Int num = 1, den = 0;

  static Cusp infinity() { return {}; }
  static Cusp from(const Rational& q) { return {q.get_num(), q.get_den()}; }
  static Cusp make(Int num, Int den);
  bool is_infinity() const { return den == 0; }
  Cusp act(const Mat2<Int>& g) const;
  Cusp act(const Mat2<Rational>& g) const;
  friend bool operator==(const Cusp& a, const Cusp& b) { return a.num == b.num && a.den == b.den; }
  std::string to_string() const;
};

/// Plus modular symbol I_f of the newform attached to E, normalized to take
/// integer values generating Z.
///
/// Values on the unimodular paths {g0 -> g oo} depend only on the class of
/// the bottom row of g in P^1(Z/N); all classes are evaluated up front from
/// q-expansions at the cusps, so evaluation afterwards is exact and
/// read-only (safe to share across threads).
class NewformSymbol {
 public:
  explicit NewformSymbol(const EllCurve& E);
  /// Rebuilds a symbol from exported Manin symbol values.
  static NewformSymbol from_cache(const EllCurve& E, std::istream& in);

  const EllCurve& curve() const { return E_; }
  long level() const { return N_; }
  /// Omega+ (zero when loaded from a cache).
  const Real& omega_plus() const { return omega_; }
  /// Omega+ = real_period / c0.
  const Rational& c0() const { return c0_; }
  /// Largest distance to the nearest integer seen while normalizing.
  double max_rounding_error() const { return max_err_; }
  long atkin_lehner_eigenvalue(long q) const;

  long eval(const Cusp& r, const Cusp& s) const;
  long eval(const Rational& r, const Rational& s) const { return eval(Cusp::from(r), Cusp::from(s)); }
  /// I{oo -> x}.
  long from_infinity(const Cusp& x) const;

  /// Value on {g0 -> g oo} for g with bottom row (c, d), gcd(c, d, N) = 1.
  long manin(const Int& c, const Int& d) const;
  std::size_t num_manin_classes() const { return values_.size(); }

  /// "(c:d) -> value" lines.
  void export_cache(std::ostream& out) const;

  /// Sign e with I{w r -> w s} = e I{r -> s} for w = (0 1; -d 0), from at
  /// least three nonzero sample paths; PrecisionError on disagreement.
  int atkin_lehner_sign(long d) const;

 private:
  NewformSymbol() = default;
  std::size_t class_index(const Int& c, const Int& d) const;
  std::pair<Int, Int> class_rep(std::size_t idx) const;
  Real numeric_path(const Mat2<Int>& g);
  Complex tail(const Cusp& r, const Complex& w);
  void init_classes();

  EllCurve E_;
  long N_ = 0;
  std::vector<long> primes_;
  std::map<long, long> eps_;  // Atkin-Lehner eigenvalues at bad primes
  Real omega_ = 0;
  Rational c0_ = 1;
  double max_err_ = 0;
  std::vector<long> values_;
  std::vector<long> an_;  // q-expansion coefficients, grown on demand
};

}  // namespace darmon
