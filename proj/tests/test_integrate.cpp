#include <map>
#include <memory>
#include <random>

#include "darmon/errors.hpp"
#include "darmon/integrate.hpp"
#include "doctest.h"

using namespace darmon;

namespace {

struct Setup {
  const char* label;
  const char* coeffs;
  long p;
};

const Setup kSetups[] = {{"15A1", "1 1 1 -10 -10", 5}, {"21A1", "1 0 0 -4 -1", 3}, {"33A1", "1 1 0 -11 0", 11}};

const NewformSymbol& symbol_for(const char* coeffs) {
  static std::map<std::string, std::unique_ptr<NewformSymbol>> cache;
  auto& slot = cache[coeffs];
  if (!slot) slot = std::make_unique<NewformSymbol>(EllCurve::parse(coeffs));
  return *slot;
}

Rational rand_s_integer(std::mt19937_64& rng, long p, long height) {
  long m = static_cast<long>(rng() % static_cast<unsigned long>(2 * height + 1)) - height;
  long k = static_cast<long>(rng() % 3) - 1;
  Rational q = k >= 0 ? Rational(m * (k ? p : 1)) : Rational(m, p);
  q.canonicalize();
  return q;
}

// Random element of the determinant-one group upper triangular mod M over Z[1/p].
Mat2<Rational> rand_gamma(std::mt19937_64& rng, long p, long M) {
  Mat2<Rational> g{1, 0, 0, 1};
  for (int i = 0; i < 3; ++i) {
    g = g * Mat2<Rational>{1, rand_s_integer(rng, p, 3), 0, 1};
    g = g * Mat2<Rational>{1, 0, M * rand_s_integer(rng, p, 2), 1};
    if (rng() % 3 == 0) g = g * Mat2<Rational>{p, 0, 0, Rational(1, p)};
  }
  return g;
}

Cusp rand_cusp(std::mt19937_64& rng) {
  return Cusp::make(static_cast<long>(rng() % 61) - 30, 1 + static_cast<long>(rng() % 20));
}

// tau = x + y w in K_p \ Q_p with small random coordinates.
Padic rand_tau(std::mt19937_64& rng, long p, long prec) {
  PadicCtx K = PadicCtx::make(p, 2);
  long x = static_cast<long>(rng() % 50) - 25, y = 1 + static_cast<long>(rng() % 20);
  long v = static_cast<long>(rng() % 3) - 1;
  return Padic::from_coords(K, x, y, v, prec);
}

// Uniform cover at level D, raw product of integrand values.
Padic uniform_riemann(const MeasureCtx& ctx, const Padic& t1, const Padic& t2, long D) {
  long p = ctx.p();
  Int pD = ipow(p, D);
  Padic prod = Padic::one(t1.ctx(), D + 4);
  auto visit = [&](const Mat2<Int>& g) {
    long mu = ctx.measure(g);
    if (mu == 0) return;
    const PadicCtx& K = t1.ctx();
    Padic b = Padic::from_int(K, g.b, D + 4), d = Padic::from_int(K, g.d, D + 4);
    prod *= ((b - d * t2) / (b - d * t1)).pow(mu);
  };
  for (Int j = 0; j < pD; ++j) visit({pD, j, 0, 1});
  // complement: x = 1/(p u), u in Z_p
  Int pD1 = pD / p;
  for (Int j = 0; j < pD1; ++j) visit(Mat2<Int>{0, 1, p, 0} * Mat2<Int>{pD1, j, 0, 1});
  return prod;
}

}  // namespace

TEST_CASE("ball shapes") {
  auto b = ball_shape(Mat2<Rational>{25, 3, 0, 1}, 5);
  CHECK(b.n == 2);
  CHECK(b.center == 3);
  CHECK_FALSE(b.complement);
  b = ball_shape(Mat2<Rational>{0, 1, 5, 0}, 5);
  CHECK(b.complement);
  CHECK(b.n == 0);
  b = ball_shape(Mat2<Rational>{5, Rational(1, 3), 0, 1}, 5);  // 1/3 = 2 mod 5
  CHECK(b.center == 2);
}

TEST_CASE("measure axioms") {
  for (const auto& S : kSetups) {
    std::string label = S.label;
    CAPTURE(label);
    const NewformSymbol& sym = symbol_for(S.coeffs);
    long p = S.p;
    std::mt19937_64 rng(41);
    for (int it = 0; it < 20; ++it) {
      MeasureCtx ctx(sym, p, rand_cusp(rng), rand_cusp(rng));
      CHECK(ctx.measure(Mat2<Int>{1, 0, 0, 1}) + ctx.measure(Mat2<Int>{0, 1, p, 0}) == 0);
      long total = 0;
      for (long j = 0; j < p; ++j) total += ctx.measure(Mat2<Int>{p, j, 0, 1});
      CHECK(total == ctx.measure(Mat2<Int>{1, 0, 0, 1}));
    }
    // child additivity on random balls
    for (int it = 0; it < 200; ++it) {
      MeasureCtx ctx(sym, p, rand_cusp(rng), rand_cusp(rng));
      Mat2<Rational> g = rand_gamma(rng, p, 1) * Mat2<Rational>{ipow(p, rng() % 4), static_cast<long>(rng() % 30), 0, 1};
      long sum = 0;
      for (long j = 0; j < p; ++j) sum += ctx.measure(g * Mat2<Rational>{p, j, 0, 1});
      CHECK(sum == ctx.measure(g));
    }
    // equivariance mu{gr -> gs}(gU) = mu{r -> s}(U)
    long M = sym.level() / p;
    for (int it = 0; it < 100; ++it) {
      Cusp r = rand_cusp(rng), s = rand_cusp(rng);
      Mat2<Rational> gam = rand_gamma(rng, p, M);
      MeasureCtx c1(sym, p, r, s), c2(sym, p, r.act(gam), s.act(gam));
      Mat2<Rational> g{ipow(p, rng() % 4), static_cast<long>(rng() % 30), 0, 1};
      CHECK(c2.measure(gam * g) == c1.measure(g));
    }
  }
}

TEST_CASE("gbar") {
  Mat2<Rational> id{1, 0, 0, 1};
  CHECK(gbar(id) == Mat2<Rational>{0, -1, 1, 0});
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    Mat2<Rational> g = rand_gamma(rng, 5, 3), h = rand_gamma(rng, 5, 1) * Mat2<Rational>{5, 1, 0, 1};
    CHECK(gbar(h * g) == gbar(g) * h.inverse());
  }
}

TEST_CASE("standard cover") {
  std::mt19937_64 rng(7);
  for (long p : {3L, 5L, 11L}) {
    for (int it = 0; it < 30; ++it) {
      Padic t1 = rand_tau(rng, p, 12), t2 = rand_tau(rng, p, 12);
      if (rng() % 2) t2 = t2 + Padic::from_int(t1.ctx(), ipow(p, 2) * (rng() % 7), 12) * t2;
      StandardCover cov = standard_cover(t1, t2);
      CAPTURE(p);
      CHECK(static_cast<long>(cov.balls.size()) == p + 1 + cov.r * (p - 1));
      // normalized balls: exactly one contains each residue mod p^(r+2)
      Mat2<Rational> hinv = cov.h.cast<Rational>().inverse();
      std::vector<BallShape> shapes;
      for (auto& g : cov.balls) shapes.push_back(ball_shape(hinv * g.cast<Rational>(), p));
      Int mod_n = ipow(p, cov.r + 2);
      for (Int x = 0; x < mod_n; ++x) {
        int hits = 0;
        for (auto& s : shapes) {
          bool in = s.n <= 0 || mod(Int(x) - Int(s.center * ipow(p, 0)), ipow(p, s.n)) == 0;
          if (s.complement) in = !in;
          hits += in;
        }
        CHECK(hits == 1);
      }
      CHECK(shapes.back().complement);
      CHECK(shapes.back().n == 0);
      // valuation condition for every ball
      for (auto& g : cov.balls) {
        Mat2<Rational> gb = gbar(g.cast<Rational>());
        CHECK(act(gb, t1).valuation() >= 1);
        CHECK(act(gb, t2).valuation() >= 1);
      }
    }
  }
  PadicCtx K = PadicCtx::make(5, 2);
  CHECK_THROWS_AS(standard_cover(Padic::from_int(K, 3, 10), Padic::gen(K, 10)), DomainError);
}

TEST_CASE("split and recover") {
  PadicCtx K = PadicCtx::make(5, 2);
  CHECK(congruent(recover_value(MultIntResult::one(K, 8)), Padic::one(K, 8)));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    Padic x = Padic::from_coords(K, 1 + rng() % 1000, rng() % 1000, static_cast<long>(rng() % 7) - 3, 10);
    if (x.residue() == std::pair<long, long>{0, 0}) continue;
    auto res = MultIntResult::split(x, 10);
    CHECK(congruent(recover_value(res), x));
  }
}

TEST_CASE("double integrals: Riemann product") {
  const Setup& S = kSetups[0];
  const NewformSymbol& sym = symbol_for(S.coeffs);
  long p = S.p, M = sym.level() / p, depth = 4;
  std::mt19937_64 rng(11);
  for (int it = 0; it < 6; ++it) {
    Cusp r = rand_cusp(rng), s = rand_cusp(rng);
    MeasureCtx ctx(sym, p, r, s);
    Padic t1 = rand_tau(rng, p, 30), t2 = rand_tau(rng, p, 30);
    auto same = riemann_double_integral(ctx, t1, t1, depth);
    CHECK(same.valuation == 0);
    CHECK(same.agrees(MultIntResult::one(t1.ctx(), depth), depth));
    auto J = riemann_double_integral(ctx, t1, t2, depth);
    auto Jinv = riemann_double_integral(ctx, t2, t1, depth);
    CHECK((J * Jinv).agrees(MultIntResult::one(t1.ctx(), depth), depth));

    // recovered value against the raw product over a uniform cover
    if (t1.valuation() == 0 && t2.valuation() == 0) {
      Padic raw = uniform_riemann(ctx, t1, t2, depth);
      CHECK(congruent(recover_value(J), raw.with_rel_prec(depth)));
    }

    Mat2<Rational> gam = rand_gamma(rng, p, M);
    MeasureCtx ctx2(sym, p, r.act(gam), s.act(gam));
    auto Jg = riemann_double_integral(ctx2, act(gam, t1), act(gam, t2), depth);
    CHECK(Jg.agrees(J, depth));
  }
}

TEST_CASE("double integrals: series method agrees with Riemann products") {
  for (const auto& S : kSetups) {
    std::string label = S.label;
    CAPTURE(label);
    const NewformSymbol& sym = symbol_for(S.coeffs);
    long p = S.p;
    long depth = p == 11 ? 2 : p == 5 ? 3 : 5;
    std::mt19937_64 rng(13);
    for (int it = 0; it < 3; ++it) {
      MeasureCtx ctx(sym, p, rand_cusp(rng), rand_cusp(rng));
      Padic t1 = rand_tau(rng, p, 14), t2 = rand_tau(rng, p, 14);
      auto a = riemann_double_integral(ctx, t1, t2, depth);
      auto b = series_double_integral(ctx, t1, t2, depth);
      CHECK(a.valuation == b.valuation);
      CHECK(a.agrees(b, depth));
      auto m = ball_moments(ctx, Mat2<Int>{1, 0, 0, 1}, 4, depth);
      auto m1 = ball_moments(ctx, Mat2<Int>{1, 0, 0, 1}, 4, depth + 1);
      for (int n = 0; n <= 4; ++n) CHECK(mod(m[n] - m1[n], ipow(p, depth)) == 0);
      CHECK(m[0] == ctx.measure(Mat2<Int>{1, 0, 0, 1}));
    }
  }
}
