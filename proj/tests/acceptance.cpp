#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "darmon/darmon.hpp"
#include "darmon/decomp.hpp"
#include "darmon/errors.hpp"
#include "darmon/integrate.hpp"
#include "darmon/recognize.hpp"
#include "darmon/tables.hpp"

using namespace darmon;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Curve {
  const char* label;
  const char* coeffs;
  long p;
};

const Curve kCurves[] = {{"15A1", "1 1 1 -10 -10", 5}, {"21A1", "1 0 0 -4 -1", 3}, {"33A1", "1 1 0 -11 0", 11}};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

long rnd(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

Cusp rand_cusp(std::mt19937_64& rng) { return Cusp::make(rnd(rng, -30, 30), rnd(rng, 1, 20)); }

Rational rand_s_integer(std::mt19937_64& rng, long p, long h) {
  long m = rnd(rng, -h, h), k = rnd(rng, -1, 1);
  return k >= 0 ? Rational(m * (k ? p : 1)) : make_rational(m, p);
}

// determinant one over Z[1/p], upper triangular mod M
Mat2<Rational> rand_gamma(std::mt19937_64& rng, long p, long M) {
  Mat2<Rational> g{1, 0, 0, 1};
  for (int i = 0; i < 3; ++i) {
    g = g * Mat2<Rational>{1, rand_s_integer(rng, p, 3), 0, 1};
    g = g * Mat2<Rational>{1, 0, M * rand_s_integer(rng, p, 2), 1};
    if (rng() % 3 == 0) g = g * Mat2<Rational>{p, 0, 0, make_rational(1, p)};
  }
  return g;
}

Mat2<Int> rand_gamma0(std::mt19937_64& rng, long N) {
  Mat2<Int> g{1, 0, 0, 1};
  for (int i = 0; i < 3; ++i) {
    g = g * Mat2<Int>{1, rnd(rng, -4, 4), 0, 1};
    g = g * Mat2<Int>{1, 0, N * rnd(rng, -2, 2), 1};
  }
  return g;
}

Padic rand_tau(std::mt19937_64& rng, long p, long prec) {
  PadicCtx K = PadicCtx::make(p, 2);
  return Padic::from_coords(K, rnd(rng, -25, 24), rnd(rng, 1, 20), rnd(rng, -1, 1), prec);
}

Padic rand_unit(std::mt19937_64& rng, const PadicCtx& K, long prec) {
  Int m = ipow(K.p, static_cast<unsigned long>(prec));
  for (;;) {
    Int x = Int(static_cast<unsigned long>(rng() % 1000000007ul)) % m;
    Int y = K.degree == 2 ? Int(static_cast<unsigned long>(rng() % 1000000007ul)) % m : Int(0);
    Padic u = Padic::from_coords(K, x, y, 0, prec);
    if (u.is_unit()) return u;
  }
}

// depth used for integral comparisons, kept small for the larger primes
long small_depth(long p) { return p == 11 ? 2 : p == 5 ? 3 : 5; }

// ---------------------------------------------------------------------------

Verdict decomposition_random() {
  std::ostringstream d;
  bool ok = true;
  for (auto [p, M] : {std::pair{5L, 3L}, {3L, 7L}}) {
    LevelIdeal<RationalSRing> N{RationalSRing(p), Rational(M)};
    std::vector<double> ms;
    std::size_t worst = 0;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      auto g = random_gamma1(N, 4, 90000 + static_cast<std::uint64_t>(i));
      auto t0 = Clock::now();
      auto fs = decompose(N, g);
      ms.push_back(seconds_since(t0) * 1000);
      worst = std::max(worst, fs.size());
      if (fs.size() > 5 || !verify_product(N.ring, fs, g) || !factors_well_formed(N, fs)) ++bad;
    }
    std::nth_element(ms.begin(), ms.begin() + 500, ms.end());
    double median = ms[500];
    ok = ok && bad == 0 && median < 50;
    d << "M=" << M << ",p=" << p << ": " << bad << " bad, max " << worst << " factors, median " << median << " ms; ";
  }
  return {ok, d.str()};
}

Verdict five_factor_claim() {
  QuadraticRing O(5);
  auto q = [](const char* s) { return parse_quad(s, 5); };
  SMat<QuadraticRing> gamma{q("-4+3w"), q("2-2w"), q("-22+16w"), q("12-9w")};
  QuadElt u(5, -2, -1);
  SMat<QuadraticRing> gp = SMat<QuadraticRing>{u.inverse(), q("0"), q("0"), u} * gamma;
  auto prod = SMat<QuadraticRing>{q("1"), q("1-w"), q("0"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("0"), q("118739-73384w"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("46368+75025w"), q("0"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("0"), q("-5431444+3356817w"), q("1")} *
              SMat<QuadraticRing>{q("1"), q("-37268-60300w"), q("0"), q("1+w")};
  bool claim = prod == gp;
  std::string d = claim ? "product equals diag(u^-1,u) gamma_tau"
                        : std::string("product equals gamma_tau itself: ") + (prod == gamma ? "yes" : "no") +
                              "; a valid factorization of the rescaled matrix is produced separately";
  return {claim, d};
}

Verdict table_rows() {
  Tables t = load_tables(default_tables_path());
  std::ostringstream d;
  bool ok = true;
  for (const char* key : {"15A1:13", "21A1:8", "33A1:13"}) {
    const TableRow* row = nullptr;
    for (auto& r : t.rows)
      if (r.key() == key) row = &r;
    const TableCurve& c = t.curve(row->label);
    long prec = 4;
    while (ipow(c.p, static_cast<unsigned long>(prec)) < 10000) ++prec;
    auto t0 = Clock::now();
    try {
      EichlerSetup S = build_setup(c.E, c.p);
      DarmonPoint dp = darmon_point(S, row->D, prec, prec);
      TateCurve T = TateCurve::make(c.E, c.p, dp.J.precision);
      MatchVerdict v = match_global_point(dp.J, row->point, row->D, T, dp.J.precision, 20);
      double s = seconds_since(t0);
      bool row_ok = v.matched && v.precision >= 4 && s < 1800;
      ok = ok && row_ok;
      d << key << (v.matched ? " matched" : " unmatched") << " (n=" << v.n << ", m'=" << v.m_prime << ", mod p^"
        << v.precision << ", " << static_cast<long>(s) << " s); ";
    } catch (const Error& e) {
      ok = false;
      d << key << " error: " << e.what() << "; ";
    }
  }
  return {ok, d.str()};
}

Verdict series_vs_riemann() {
  int bad = 0, total = 0;
  for (const auto& c : kCurves) {
    NewformSymbol sym(EllCurve::parse(c.coeffs));
    long depth = small_depth(c.p);
    std::mt19937_64 rng(700 + static_cast<unsigned long>(c.p));
    for (int i = 0; i < 20; ++i) {
      MeasureCtx ctx(sym, c.p, rand_cusp(rng), rand_cusp(rng));
      Padic t1 = rand_tau(rng, c.p, 16), t2 = rand_tau(rng, c.p, 16);
      auto a = riemann_double_integral(ctx, t1, t2, depth);
      auto b = series_double_integral(ctx, t1, t2, depth, depth);
      ++total;
      if (a.valuation != b.valuation || !a.agrees(b, depth)) ++bad;
    }
  }
  return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " agree"};
}

Verdict measure_axioms() {
  int bad = 0, covers = 0, balls = 0;
  for (const auto& c : kCurves) {
    NewformSymbol sym(EllCurve::parse(c.coeffs));
    long p = c.p;
    std::mt19937_64 rng(900 + static_cast<unsigned long>(p));
    for (int i = 0; i < 20; ++i) {
      MeasureCtx ctx(sym, p, rand_cusp(rng), rand_cusp(rng));
      // Z_p and its complement; p balls a + pZ_p and the complement
      long whole = ctx.measure(Mat2<Int>{1, 0, 0, 1}) + ctx.measure(Mat2<Int>{0, 1, p, 0});
      long fine = ctx.measure(Mat2<Int>{0, 1, p, 0});
      for (long j = 0; j < p; ++j) fine += ctx.measure(Mat2<Int>{p, j, 0, 1});
      covers += 2;
      bad += (whole != 0) + (fine != 0);
    }
    for (int i = 0; i < 200; ++i) {
      MeasureCtx ctx(sym, p, rand_cusp(rng), rand_cusp(rng));
      Mat2<Rational> g = rand_gamma(rng, p, 1) * Mat2<Rational>{ipow(p, rng() % 4), rnd(rng, 0, 29), 0, 1};
      long sum = 0;
      for (long j = 0; j < p; ++j) sum += ctx.measure(g * Mat2<Rational>{p, j, 0, 1});
      ++balls;
      bad += sum != ctx.measure(g);
    }
  }
  return {bad == 0, std::to_string(covers) + " covers, " + std::to_string(balls) + " balls, " +
                        std::to_string(bad) + " violations"};
}

Verdict invariance() {
  int bad = 0;
  std::ostringstream d;
  // double integrals under Gamma
  int gam_checks = 0;
  for (const auto& c : kCurves) {
    NewformSymbol sym(EllCurve::parse(c.coeffs));
    long p = c.p, M = sym.level() / p, depth = small_depth(p);
    std::mt19937_64 rng(1100 + static_cast<unsigned long>(p));
    int n = c.p == 5 ? 34 : 33;
    for (int i = 0; i < n; ++i) {
      Cusp r = rand_cusp(rng), s = rand_cusp(rng);
      Padic t1 = rand_tau(rng, p, 30), t2 = rand_tau(rng, p, 30);
      Mat2<Rational> g = rand_gamma(rng, p, M);
      MeasureCtx c1(sym, p, r, s), c2(sym, p, r.act(g), s.act(g));
      auto J = riemann_double_integral(c1, t1, t2, depth);
      auto Jg = riemann_double_integral(c2, act(g, t1), act(g, t2), depth);
      ++gam_checks;
      bad += !Jg.agrees(J, depth);
    }
    // modular symbol cocycle and Gamma_0(N) invariance
    long N = sym.level();
    for (int i = 0; i < 100; ++i) {
      Cusp r = rand_cusp(rng), s = rand_cusp(rng), t = rand_cusp(rng);
      bad += sym.eval(r, s) + sym.eval(s, t) != sym.eval(r, t);
      Mat2<Int> g = rand_gamma0(rng, N);
      bad += sym.eval(r.act(g), s.act(g)) != sym.eval(r, s);
    }
    // Tate parametrization is a homomorphism
    const long prec = 8;
    EllCurve E = EllCurve::parse(c.coeffs);
    TateCurve T = TateCurve::make(E, p, prec + 6);
    PadicCtx K = T.q.ctx();
    for (int i = 0; i < 10; ++i) {
      Padic u = rand_unit(rng, K, prec + 8), v = rand_unit(rng, K, prec + 8);
      if (T.q.valuation() > 1) u = u * Padic::from_int(K, p, prec + 8).pow(rnd(rng, 0, T.q.valuation() - 1));
      LocalPoint sum = ec_add(E, tate_map(u, T), tate_map(v, T));
      bad += !same_point(sum, tate_map(u * v, T), prec);
    }
  }
  d << gam_checks << " Gamma checks, 300 symbol checks, 30 Tate checks";
  return {bad == 0, d.str() + ", " + std::to_string(bad) + " violations"};
}

Verdict kernel_properties() {
  std::mt19937_64 rng(4242);
  int bad = 0, n = 0;
  for (int i = 0; i < 1000; ++i) {
    long p = std::vector<long>{3, 5, 7, 11}[i % 4];
    PadicCtx K = PadicCtx::make(p, 1 + (i / 4) % 2);
    const long N = 10;
    Padic x = rand_unit(rng, K, N), y = rand_unit(rng, K, N), z = rand_unit(rng, K, N);
    Padic pp = Padic::from_int(K, p, N);
    bad += !congruent((x * y) * z, x * (y * z));
    bad += !congruent(x * (y + z), x * y + x * z);
    bad += !congruent(x * x.inverse(), Padic::one(K, N));
    bad += !congruent(padic_log(x * y), padic_log(x) + padic_log(y));
    Padic onep = Padic::one(K, N) + pp * y;
    bad += !congruent(padic_exp(padic_log(onep)), onep);
    Padic sq = hensel_sqrt(x * x);
    bad += !(congruent(sq, x) || congruent(sq, -x));
    Padic t = teichmuller(x);
    bad += !congruent(t.pow(K.residue_field_size() - 1), Padic::one(K, N));
    ++n;
  }
  return {bad == 0, std::to_string(n) + " samples, " + std::to_string(bad) + " violations"};
}

Verdict recognition() {
  std::ostringstream d;
  bool ok = true;
  PadicCtx K = PadicCtx::make(5, 2);
  std::mt19937_64 rng(31337);
  int wrong = 0, missed = 0;
  for (int i = 0; i < 100;) {
    long den = rnd(rng, 1, 100);
    QuadElt v(13, make_rational(rnd(rng, -100, 100), den), make_rational(rnd(rng, -100, 100), den));
    if (quad_height(v) > 100) continue;
    ++i;
    Padic x = embed_quad(v, embedded_sqrt_kernel(K, 13, 20), 16);
    auto r = recognize_quadratic(x, 13, 100, 12);
    if (!r)
      ++missed;
    else if (!(r->value == v))
      ++wrong;
  }
  ok = ok && wrong == 0 && missed == 0;
  d << "planted: " << (100 - wrong - missed) << "/100 recovered, " << wrong << " false; ";

  PadicCtx K3 = PadicCtx::make(3, 2);
  const long prec = 45;
  QuadElt b(65, make_rational(-491926, 6241), make_rational(61851, 6241));
  QuadElt c(65, make_rational(3256777, 6241), make_rational(-403782, 6241));
  Padic sd = embedded_sqrt_kernel(K3, 65, prec + 10);
  Padic bp = embed_quad(b, sd, prec + 10), cp = embed_quad(c, sd, prec + 10);
  Padic root = (-bp + hensel_sqrt(bp * bp - Padic::from_int(K3, 4, prec + 10) * cp)) /
               Padic::from_int(K3, 2, prec + 10);
  auto h = recognize_degree2_over_K(root, 65, Int(3256777) * 2, prec);
  bool poly = h && h->b == b && h->c == c;
  ok = ok && poly;
  d << "D=65 polynomial " << (poly ? "recovered" : "not recovered");
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  // criteria whose literal statement is known to be false (documented)
  const std::vector<int> expected_fail{2};
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  std::vector<Criterion> all{
      {1, "decomposition of random Gamma_1 elements", decomposition_random},
      {2, "five-factor product over Q(sqrt 5) equals the rescaled matrix", five_factor_claim},
      {3, "table rows match global points", table_rows},
      {4, "series and Riemann double integrals agree", series_vs_riemann},
      {5, "measure axioms", measure_axioms},
      {6, "invariance properties", invariance},
      {7, "arithmetic kernel properties", kernel_properties},
      {8, "algebraic recognition", recognition},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int unexpected = 0;
  for (auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    bool known = std::find(expected_fail.begin(), expected_fail.end(), c.id) != expected_fail.end();
    if (!v.pass && !known) ++unexpected;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.detail
              << (known && !v.pass ? " (known false claim)" : "") << " [" << static_cast<long>(seconds_since(t0))
              << " s]" << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
