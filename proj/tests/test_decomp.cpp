#include <chrono>

#include "darmon/decomp.hpp"
#include "doctest.h"

using namespace darmon;

namespace {

template <class Ring>
void check_random(const LevelIdeal<Ring>& N, int count, int word_length, std::uint64_t seed, long height = 5) {
  for (int i = 0; i < count; ++i) {
    auto g = random_gamma1(N, word_length, seed + static_cast<std::uint64_t>(i), height);
    REQUIRE(in_gamma1_shape(N, g));
    REQUIRE(g.det() == N.ring.one());
    auto fs = decompose(N, g);
    CAPTURE(g);
    CHECK(fs.size() <= 5);
    CHECK(verify_product(N.ring, fs, g));
    CHECK(factors_well_formed(N, fs));
    for (const auto& f : fs) CHECK(f.kind != FactorKind::UnitDiag);
  }
}

}  // namespace

TEST_CASE("lemma factorization") {
  LevelIdeal<RationalSRing> N{RationalSRing(5), 3};
  SMat<RationalSRing> id{1, 0, 0, 1};
  auto fs = lemma_factorization(N, id, Rational(1), Rational(-1));
  CHECK(fs.size() == 4);
  CHECK(verify_product(N.ring, fs, id));
  CHECK_THROWS_AS(lemma_factorization(N, id, Rational(1), Rational(2)), PreconditionError);

  // Random gammas where a happens to admit u = +-5^k with u == c mod a.
  int tried = 0;
  for (std::uint64_t s = 0; s < 400 && tried < 60; ++s) {
    auto g = random_gamma1(N, 5, s);
    if (g.c == 0 || !N.ring.generates_prime_ideal(g.a) || !N.ring.unit_reduction_surjective(g.a)) continue;
    auto u = N.ring.unit_congruent_to(g.c, g.a);
    REQUIRE(u);
    Rational t = (g.c - *u) / g.a;
    CHECK(N.ring.contains(t));
    auto lf = lemma_factorization(N, g, *u, t);
    CHECK(verify_product(N.ring, lf, g));
    CHECK(factors_well_formed(N, lf));
    ++tried;
  }
  CHECK(tried > 10);
}

TEST_CASE("degenerate inputs") {
  LevelIdeal<RationalSRing> N{RationalSRing(5), 3};
  using E = ElemFactor<Rational>;
  SMat<RationalSRing> up{1, Rational(7, 5), 0, 1}, lo{1, 0, 12, 1};
  CHECK(decompose(N, up) == std::vector<E>{{FactorKind::Upper, Rational(7, 5)}});
  CHECK(decompose(N, lo) == std::vector<E>{{FactorKind::Lower, 12}});
  CHECK(decompose(N, SMat<RationalSRing>{1, 0, 0, 1}).empty());
  SMat<RationalSRing> diag{25, 2, 0, Rational(1, 25)};  // 25 == 1 mod 3
  auto fs = decompose(N, diag);
  CHECK(verify_product(N.ring, fs, diag));
  CHECK(fs.size() <= 5);
  SMat<RationalSRing> ud{1, 0, 0, 5};
  CHECK(decompose_unit_det(N, ud) == std::vector<E>{{FactorKind::UnitDiag, 5}});
  CHECK_THROWS_AS(decompose(N, SMat<RationalSRing>{2, 1, 3, 2}), PreconditionError);
  CHECK_THROWS_AS(decompose(N, SMat<RationalSRing>{1, 1, 3, 5}), PreconditionError);
  CHECK(verify_product(N.ring, {}, SMat<RationalSRing>{1, 0, 0, 1}));
  E single{FactorKind::Lower, 6};
  CHECK(verify_product(N.ring, {single}, factor_matrix(N.ring, single)));
}

TEST_CASE("decomposition over Z[1/p] for the table setups") {
  for (auto [p, M] : {std::pair{5L, 3L}, {3L, 7L}, {11L, 3L}, {7L, 5L}, {3L, 17L}, {3L, 35L}}) {
    CAPTURE(p);
    CAPTURE(M);
    LevelIdeal<RationalSRing> N{RationalSRing(p), Rational(M)};
    check_random(N, 60, 4, 1000 * static_cast<std::uint64_t>(p * M));
  }
}

TEST_CASE("decomposition over the integers of Q(sqrt 5)") {
  QuadraticRing O(5);
  LevelIdeal<QuadraticRing> N{O, parse_quad("6+s", 5)};
  check_random(N, 25, 3, 77, 3);
  LevelIdeal<QuadraticRing> N2{QuadraticRing(13), parse_quad("3", 13)};
  check_random(N2, 15, 3, 5, 3);
}

TEST_CASE("published five-factor product over Q(sqrt 5)") {
  auto t0 = std::chrono::steady_clock::now();
  QuadraticRing O(5);
  LevelIdeal<QuadraticRing> N{O, parse_quad("6+s", 5)};
  auto q = [](const char* s) { return parse_quad(s, 5); };
  SMat<QuadraticRing> gamma{q("-4+3w"), q("2-2w"), q("-22+16w"), q("12-9w")};
  QuadElt u(5, -2, -1);
  SMat<QuadraticRing> D{u.inverse(), q("0"), q("0"), u};
  SMat<QuadraticRing> gp = D * gamma;
  CHECK(gamma.det() == q("1+w"));
  CHECK(in_gamma1_shape(N, gp));

  SMat<QuadraticRing> last{q("1"), q("-37268-60300w"), q("0"), q("1+w")};
  auto prod = SMat<QuadraticRing>{q("1"), q("1-w"), q("0"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("0"), q("118739-73384w"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("46368+75025w"), q("0"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("0"), q("-5431444+3356817w"), q("1")} * last;
  // The displayed factors multiply to gamma_tau itself (determinant 1 + w);
  // their product is not the rescaled matrix.
  CHECK(prod == gamma);
  CHECK_FALSE(prod == gp);

  auto fs = decompose_unit_det(N, gp);
  CHECK(verify_product(O, fs, gp));
  CHECK(factors_well_formed(N, fs));
  CHECK(fs.size() <= 6);
  CHECK(fs.back().kind == FactorKind::UnitDiag);
  auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(elapsed < std::chrono::seconds(1));
}

TEST_CASE("factor list text format") {
  QuadraticRing O(5);
  using E = ElemFactor<QuadElt>;
  std::vector<E> fs{{FactorKind::Upper, parse_quad("1-w", 5)},
                    {FactorKind::Lower, parse_quad("118739-73384w", 5)},
                    {FactorKind::UnitDiag, parse_quad("1+w", 5)}};
  std::string text = format_factors(O, fs);
  CHECK(parse_factors(O, text) == fs);
  RationalSRing R(3);
  std::vector<ElemFactor<Rational>> rf{{FactorKind::Upper, Rational(-5, 9)}, {FactorKind::Lower, 14}};
  CHECK(format_factors(R, rf) == "U -5/9\nL 14\n");
  CHECK(parse_factors(R, "# comment\nU -5/9\n\nL 14\n") == rf);
  CHECK_THROWS_AS(parse_factors(R, "X 3\n"), PreconditionError);
  CHECK_THROWS_AS(parse_factors(R, "U 1/2\n"), PreconditionError);
}
