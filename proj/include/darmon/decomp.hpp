#pragma once

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "darmon/errors.hpp"
#include "darmon/mat2.hpp"
#include "darmon/rings.hpp"

namespace darmon {

enum class FactorKind { Upper, Lower, UnitDiag };

/// (1 x; 0 1), (1 0; y 1) or (1 0; 0 u).
template <class Elt>
struct ElemFactor {
  FactorKind kind;
  Elt param;

  friend bool operator==(const ElemFactor& x, const ElemFactor& y) {
    return x.kind == y.kind && x.param == y.param;
  }
};

/// Principal level ideal N = generator * O_S.
template <class Ring>
struct LevelIdeal {
  Ring ring;
  typename Ring::Elt generator;

  bool contains(const typename Ring::Elt& x) const { return ring.divides(generator, x); }
};

template <class Ring>
using SMat = Mat2<typename Ring::Elt>;

template <class Ring>
SMat<Ring> factor_matrix(const Ring& R, const ElemFactor<typename Ring::Elt>& f) {
  auto one = R.one(), zero = R.zero();
  switch (f.kind) {
    case FactorKind::Upper:
      return {one, f.param, zero, one};
    case FactorKind::Lower:
      return {one, zero, f.param, one};
    case FactorKind::UnitDiag:
      return {one, zero, zero, f.param};
  }
  return SMat<Ring>::identity(one, zero);
}

template <class Ring>
SMat<Ring> factor_product(const Ring& R, const std::vector<ElemFactor<typename Ring::Elt>>& fs) {
  SMat<Ring> m = SMat<Ring>::identity(R.one(), R.zero());
  for (const auto& f : fs) m = m * factor_matrix(R, f);
  return m;
}

template <class Ring>
bool verify_product(const Ring& R, const std::vector<ElemFactor<typename Ring::Elt>>& fs, const SMat<Ring>& g) {
  return factor_product(R, fs) == g;
}

/// Structural check: Upper parameters in O_S, Lower parameters in N,
/// UnitDiag parameters units.
template <class Ring>
bool factors_well_formed(const LevelIdeal<Ring>& N, const std::vector<ElemFactor<typename Ring::Elt>>& fs) {
  for (const auto& f : fs) {
    switch (f.kind) {
      case FactorKind::Upper:
        if (!N.ring.contains(f.param)) return false;
        break;
      case FactorKind::Lower:
        if (!N.contains(f.param)) return false;
        break;
      case FactorKind::UnitDiag:
        if (!N.ring.is_unit(f.param)) return false;
        break;
    }
  }
  return true;
}

/// a == 1 and c == 0 modulo N, entries in O_S.
template <class Ring>
bool in_gamma1_shape(const LevelIdeal<Ring>& N, const SMat<Ring>& g) {
  const Ring& R = N.ring;
  return R.contains(g.a) && R.contains(g.b) && R.contains(g.c) && R.contains(g.d) && N.contains(g.a - R.one()) &&
         N.contains(g.c);
}

/// Explicit four-factor expression of g from c = u + t*a:
/// g = L(c + t(1-a)) U(-1/u) L(u(1-a)) U(x).
template <class Ring>
std::vector<ElemFactor<typename Ring::Elt>> lemma_factorization(const LevelIdeal<Ring>& N, const SMat<Ring>& g,
                                                                const typename Ring::Elt& u,
                                                                const typename Ring::Elt& t) {
  using Elt = typename Ring::Elt;
  const Ring& R = N.ring;
  if (!(g.c == u + t * g.a)) throw PreconditionError("lemma_factorization: c != u + t*a");
  if (!R.is_unit(u)) throw PreconditionError("lemma_factorization: u is not a unit");
  Elt one = R.one();
  Elt am1 = g.a - one;
  auto L = [&](const Elt& y) { return factor_matrix(R, ElemFactor<Elt>{FactorKind::Lower, y}); };
  auto U = [&](const Elt& x) { return factor_matrix(R, ElemFactor<Elt>{FactorKind::Upper, x}); };
  SMat<Ring> T = L(u * am1) * U(one / u) * L(t * am1) * L(-g.c);
  SMat<Ring> Tg = T * g;
  if (!(Tg.a == one && Tg.c == R.zero() && Tg.d == one)) throw Error("lemma_factorization: internal check failed");
  return {{FactorKind::Lower, g.c + t * (one - g.a)},
          {FactorKind::Upper, -(one / u)},
          {FactorKind::Lower, u * (one - g.a)},
          {FactorKind::Upper, Tg.b}};
}

namespace detail {
template <class Elt>
void drop_trivial(std::vector<ElemFactor<Elt>>& fs, const Elt& zero, const Elt& one) {
  std::vector<ElemFactor<Elt>> out;
  for (auto& f : fs) {
    bool trivial = f.kind == FactorKind::UnitDiag ? f.param == one : f.param == zero;
    if (!trivial) out.push_back(f);
  }
  fs.swap(out);
}
}  // namespace detail

/// Product of at most five elementary matrices equal to g in Gamma_1(N).
/// Searches lambda in enumeration order (centred at -a/c) for a' = a + lambda*c
/// generating a prime (or the unit) ideal with surjective unit reduction.
/// The unit u == c mod a' is +-p^k (or +-eps^k); candidates whose smallest
/// |k| exceeds a slowly growing cap are passed over, which keeps the factor
/// entries from growing like p^|a'|.
inline constexpr long kMaxUnitRejections = 16 * 24;

template <class Ring>
std::vector<ElemFactor<typename Ring::Elt>> decompose(const LevelIdeal<Ring>& N, const SMat<Ring>& g,
                                                      std::size_t search_bound = 1'000'000) {
  using Elt = typename Ring::Elt;
  const Ring& R = N.ring;
  const Elt one = R.one(), zero = R.zero();
  if (!in_gamma1_shape(N, g)) throw PreconditionError("decompose: matrix is not in Gamma_1(N)");
  if (!(g.det() == one)) throw PreconditionError("decompose: determinant is not 1");

  std::vector<ElemFactor<Elt>> out;
  if (g.c == zero) {
    if (g.a == one) {
      out = {{FactorKind::Upper, g.b}};
    } else {
      // a is a unit; c = 1 + (-1/a)*a
      out = lemma_factorization(N, g, one, Elt(-(one / g.a)));
    }
    detail::drop_trivial(out, zero, one);
    return out;
  }
  if (g.a == one && g.b == zero) {
    out = {{FactorKind::Lower, g.c}};
    return out;
  }

  // Centre the search so that a' starts out about as small as c.
  const Elt step = R.lambda_step(g.a, g.c);
  const Elt lambda0 = R.round_to_integral(Elt(-(g.a / (g.c * step))));
  long rejected = 0;
  for (std::size_t i = 0; i < search_bound; ++i) {
    Elt lambda = step * (lambda0 + R.lambda_candidate(i));
    Elt ap = g.a + lambda * g.c;
    if (ap == zero) continue;
    std::optional<Elt> u;
    if (R.is_unit(ap)) {
      u = one;
    } else {
      if (!R.generates_prime_ideal(ap) || !R.unit_reduction_surjective(ap)) continue;
      if (rejected >= kMaxUnitRejections)
        throw SearchFailure("decompose: no admissible a' with a small-exponent unit u == c found; the matrix entries are too large for a practical factorization");
      long cap = 32L << std::min<long>(rejected / 16, 15);
      u = R.unit_congruent_to(g.c, ap, cap);
      if (!u) {
        ++rejected;
        continue;
      }
    }
    SMat<Ring> up = SMat<Ring>{one, lambda, zero, one} * g;
    Elt t = (g.c - *u) / ap;
    out.push_back({FactorKind::Upper, -lambda});
    for (auto& f : lemma_factorization(N, up, *u, t)) out.push_back(f);
    detail::drop_trivial(out, zero, one);
    return out;
  }
  throw SearchFailure(
      "decompose: no suitable a + lambda*c among " + std::to_string(search_bound) +
      " candidates; termination of this search is conditional on GRH, raise the search bound");
}

/// Variant for determinant a unit: g = g1 * (1 0; 0 det g) with det g1 = 1.
template <class Ring>
std::vector<ElemFactor<typename Ring::Elt>> decompose_unit_det(const LevelIdeal<Ring>& N, const SMat<Ring>& g,
                                                               std::size_t search_bound = 1'000'000) {
  using Elt = typename Ring::Elt;
  const Ring& R = N.ring;
  Elt delta = g.det();
  if (!R.is_unit(delta)) throw PreconditionError("decompose_unit_det: determinant is not a unit");
  if (delta == R.one()) return decompose(N, g, search_bound);
  SMat<Ring> g1{g.a, g.b / delta, g.c, g.d / delta};
  auto out = decompose(N, g1, search_bound);
  out.push_back({FactorKind::UnitDiag, delta});
  return out;
}

/// Deterministic word of `word_length` alternating Upper/Lower factors with
/// random parameters (Lower parameters are multiples of the generator).
template <class Ring>
SMat<Ring> random_gamma1(const LevelIdeal<Ring>& N, int word_length, std::uint64_t seed, long height = 5) {
  std::mt19937_64 rng(seed);
  const Ring& R = N.ring;
  SMat<Ring> m = SMat<Ring>::identity(R.one(), R.zero());
  bool upper = rng() % 2 == 0;
  for (int i = 0; i < word_length; ++i, upper = !upper) {
    auto x = R.sample(rng, height);
    if (upper)
      m = m * SMat<Ring>{R.one(), x, R.zero(), R.one()};
    else
      m = m * SMat<Ring>{R.one(), R.zero(), N.generator * x, R.one()};
  }
  return m;
}

template <class Ring>
std::string format_factors(const Ring& R, const std::vector<ElemFactor<typename Ring::Elt>>& fs) {
  std::ostringstream os;
  for (const auto& f : fs) {
    char tag = f.kind == FactorKind::Upper ? 'U' : f.kind == FactorKind::Lower ? 'L' : 'D';
    os << tag << ' ' << R.format(f.param) << '\n';
  }
  return os.str();
}

template <class Ring>
std::vector<ElemFactor<typename Ring::Elt>> parse_factors(const Ring& R, const std::string& text) {
  std::vector<ElemFactor<typename Ring::Elt>> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    char tag = line[start];
    FactorKind k;
    if (tag == 'U')
      k = FactorKind::Upper;
    else if (tag == 'L')
      k = FactorKind::Lower;
    else if (tag == 'D')
      k = FactorKind::UnitDiag;
    else
      throw PreconditionError("factor list: unknown tag in line '" + line + "'");
    std::string rest = line.substr(start + 1);
    auto b = rest.find_first_not_of(" \t");
    auto e = rest.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw PreconditionError("factor list: missing parameter in line '" + line + "'");
    out.push_back({k, R.parse(rest.substr(b, e - b + 1))});
  }
  return out;
}

}  // namespace darmon
