#include <random>
#include <set>

#include "darmon/errors.hpp"
#include "darmon/rings.hpp"
#include "doctest.h"

using namespace darmon;

namespace {

// Pell-type brute force: the unit m + n*omega with least n > 0.
QuadElt pell_oracle(long d) {
  for (long n = 1; n < 100000; ++n) {
    for (int sgn : {-1, 1}) {
      if (d % 4 == 1) {
        Int disc = Int(d) * n * n + 4 * sgn;
        if (disc < 0 || !mpz_perfect_square_p(disc.get_mpz_t())) continue;
        Int m = (sqrt(disc) - n) / 2;
        return QuadElt::from_omega_coords(d, Rational(m), Rational(n));
      }
      Int sq = Int(d) * n * n + sgn;
      if (sq < 0 || !mpz_perfect_square_p(sq.get_mpz_t())) continue;
      return QuadElt(d, Rational(sqrt(sq)), Rational(n));
    }
  }
  return {};
}

bool same_up_to_sign_and_inverse(const QuadElt& a, const QuadElt& b) {
  QuadElt bi = b.inverse();
  return a == b || a == -b || a == bi || a == -bi;
}

}  // namespace

TEST_CASE("fundamental unit") {
  QuadElt e5 = fundamental_unit(5);
  CHECK(same_up_to_sign_and_inverse(e5, QuadElt::omega(5)));
  QuadElt u(5, -2, -1);
  CHECK(u.norm() == -1);
  CHECK(same_up_to_sign_and_inverse(u, e5.pow(3)));
  for (long d : {2L, 3L, 5L, 13L}) {
    Rational n = fundamental_unit(d).norm();
    CHECK((n == 1 || n == -1));
  }
  for (long d = 2; d <= 50; ++d) {
    if (!is_squarefree(d)) continue;
    CAPTURE(d);
    QuadElt e = fundamental_unit(d);
    CHECK(e.to_double() > 1);
    CHECK(e.is_integral());
    CHECK(same_up_to_sign_and_inverse(e, pell_oracle(d)));
  }
  CHECK_THROWS_AS(fundamental_unit(12), PreconditionError);
}

TEST_CASE("Z[1/p] predicates") {
  RationalSRing R(5);
  CHECK(R.generates_prime_ideal(3));
  CHECK(R.generates_prime_ideal(15));
  CHECK(R.generates_prime_ideal(Rational(-3, 25)));
  CHECK_FALSE(R.generates_prime_ideal(21));
  CHECK_FALSE(R.generates_prime_ideal(25));
  CHECK(R.unit_reduction_surjective(3));
  CHECK(R.unit_reduction_surjective(11));
  CHECK_FALSE(R.unit_reduction_surjective(31));
  CHECK_THROWS_AS(R.unit_reduction_surjective(Rational(-1, 5)), PreconditionError);
  CHECK(R.is_unit(Rational(-1, 125)));
  CHECK_FALSE(R.is_unit(3));
  CHECK_FALSE(R.contains(Rational(1, 3)));
  CHECK(R.divides(3, Rational(6, 5)));
  CHECK_FALSE(R.divides(3, 5));
  CHECK(R.lambda_candidate(0) == 0);
  CHECK(R.lambda_candidate(1) == 1);
  CHECK(R.lambda_candidate(2) == -1);
  CHECK(R.lambda_candidate(5) == 3);
}

TEST_CASE("Z[1/p] unit search agrees with brute force") {
  std::mt19937_64 rng(99);
  for (long p : {3L, 5L, 7L, 11L}) {
    RationalSRing R(p);
    int found = 0;
    for (long q = 3; q < 400; ++q) {
      if (!is_prime(Int(q)) || q == p) continue;
      bool surj = R.unit_reduction_surjective(q);
      // Oracle: close {-1, p} under multiplication mod q.
      std::set<long> sub{1};
      bool grew = true;
      while (grew) {
        grew = false;
        for (long x : std::set<long>(sub))
          for (long g : {q - 1, p % q})
            if (sub.insert(x * g % q).second) grew = true;
      }
      CHECK(surj == (static_cast<long>(sub.size()) == q - 1));
      if (!surj) continue;
      long c = 1 + static_cast<long>(rng() % static_cast<unsigned long>(q - 1));
      auto u = R.unit_congruent_to(c, q);
      REQUIRE(u);
      CHECK(R.is_unit(*u));
      CHECK(rational_mod(*u - c, Int(q)) == 0);
      ++found;
    }
    CHECK(found > 5);
  }
}

TEST_CASE("quadratic ring basics") {
  CHECK_THROWS_AS(QuadraticRing(3), PreconditionError);
  CHECK_THROWS_AS(QuadraticRing(229), PreconditionError);
  QuadraticRing O(5);
  QuadElt w = O.omega();
  CHECK(O.is_unit(QuadElt(5, -2, -1)));
  CHECK(O.is_unit(w));
  CHECK_FALSE(O.is_unit(w + O.one()  + O.one()));
  CHECK(O.generates_prime_ideal(O.from_int(2)));   // 2 inert in Q(sqrt 5)
  CHECK(O.generates_prime_ideal(O.from_int(3)));
  CHECK_FALSE(O.generates_prime_ideal(O.from_int(11)));  // 11 splits
  CHECK(O.generates_prime_ideal(O.from_coords(3, 1)));    // norm 11
  CHECK_FALSE(O.generates_prime_ideal(O.from_int(5)));    // ramified
  CHECK(O.divides(O.from_coords(3, 1), O.from_int(11)));

  // Shell enumeration: every element of max-norm <= 3 appears exactly once.
  std::set<std::pair<Int, Int>> seen;
  for (std::size_t i = 0; i < 49; ++i) {
    auto c = O.coords(O.lambda_candidate(i));
    CHECK(std::max(abs(c.first), abs(c.second)) <= 3);
    seen.insert(c);
  }
  CHECK(seen.size() == 49);
  CHECK(O.lambda_candidate(1) == O.from_coords(-1, -1));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    QuadElt x = O.sample(rng, 1000), y = O.sample(rng, 1000);
    CHECK((x + y) - y == x);
    if (!y.is_zero()) CHECK((x * y) / y == x);
    CHECK(O.contains(x * y));
  }
}

TEST_CASE("quadratic residue rings") {
  std::mt19937_64 rng(21);
  for (long d : {2L, 5L, 13L}) {
    QuadraticRing O(d);
    int primes = 0;
    for (int it = 0; it < 400 && primes < 25; ++it) {
      QuadElt a = O.sample(rng, 12);
      if (a.is_zero() || O.is_unit(a)) continue;
      QuadraticResidueRing R(O, a);
      Int N = abs(a.norm().get_num());
      CHECK(R.size() == N);
      if (!O.generates_prime_ideal(a) || N > 400) continue;
      ++primes;
      // Oracle: units are exactly the residues with a multiplicative inverse.
      long n = N.get_si(), units = 0;
      std::vector<QuadraticResidueRing::Res> all;
      std::set<Int> idx;
      for (long m = 0; m < n; ++m)
        for (long k = 0; k < n; ++k) {
          auto r = R.reduce(Int(m), Int(k));
          if (idx.insert(R.index(r)).second) all.push_back(r);
        }
      CHECK(static_cast<long>(all.size()) == n);
      for (auto& x : all) {
        bool inv = false;
        for (auto& y : all)
          if (R.mul(x, y) == R.one()) inv = true;
        if (inv) ++units;
      }
      CHECK(units == n - 1);
      CHECK(R.unit_group_order() == N - 1);

      if (!O.unit_reduction_surjective(a)) continue;
      QuadElt c = O.sample(rng, 50);
      if (R.is_zero(c)) continue;
      auto u = O.unit_congruent_to(c, a);
      REQUIRE(u);
      CHECK(O.is_unit(*u));
      CHECK(R.is_zero(*u - c));
    }
    CHECK(primes > 5);
  }
}
