#include "darmon/recognize.hpp"

#include <algorithm>

#include "darmon/errors.hpp"

namespace darmon {

namespace {

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct GramSchmidt {
  std::vector<std::vector<Rational>> star;
  std::vector<std::vector<Rational>> mu;
  std::vector<Rational> norm2;
};

GramSchmidt gram_schmidt(const std::vector<IntVec>& B) {
  std::size_t n = B.size();
  GramSchmidt g;
  g.star.resize(n);
  g.mu.assign(n, std::vector<Rational>(n, 0));
  g.norm2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> bi(B[i].begin(), B[i].end());
    g.star[i] = bi;
    for (std::size_t j = 0; j < i; ++j) {
      g.mu[i][j] = g.norm2[j] == 0 ? Rational(0) : Rational(dot(bi, g.star[j]) / g.norm2[j]);
      for (std::size_t k = 0; k < bi.size(); ++k) g.star[i][k] -= g.mu[i][j] * g.star[j][k];
    }
    g.norm2[i] = dot(g.star[i], g.star[i]);
  }
  return g;
}

Int round_nearest(const Rational& q) {
  // floor(q + 1/2)
  Rational h = q + Rational(1, 2);
  Int f;
  mpz_fdiv_q(f.get_mpz_t(), h.get_num_mpz_t(), h.get_den_mpz_t());
  return f;
}

Int ipow_p(long p, long e) { return ipow(p, static_cast<unsigned long>(e)); }

// Rows (e_i | W * coords(elems[i]) mod p^N) plus modulus rows; returns the
// reduced rows truncated to the first elems.size() entries whose tail
// vanishes, shortest first.
std::vector<IntVec> integer_relations(const std::vector<Padic>& elems, long N) {
  const long p = elems.front().p();
  const std::size_t k = elems.size();
  const std::size_t dim = k + 2;
  Int pN = ipow_p(p, N);
  Int W = pN;  // weight: any relation violating the congruence is longer than p^N
  std::vector<IntVec> rows;
  for (std::size_t i = 0; i < k; ++i) {
    IntVec r(dim, 0);
    r[i] = 1;
    auto [c0, c1] = elems[i].coords_mod(N);
    r[k] = W * c0;
    r[k + 1] = W * c1;
    rows.push_back(r);
  }
  for (int j = 0; j < 2; ++j) {
    IntVec r(dim, 0);
    r[k + j] = W * pN;
    rows.push_back(r);
  }
  IntLattice red = lattice_reduce({rows});
  std::vector<IntVec> out;
  for (auto& r : red.basis) {
    if (r[k] != 0 || r[k + 1] != 0) continue;
    bool nonzero = false;
    for (std::size_t i = 0; i < k; ++i) nonzero |= r[i] != 0;
    if (nonzero) out.emplace_back(r.begin(), r.begin() + static_cast<long>(k));
  }
  return out;
}

Int max_abs(const IntVec& v) {
  Int m = 0;
  for (auto& x : v) m = std::max(m, Int(abs(x)));
  return m;
}

Padic scaled(const Padic& x, long k) {
  if (k == 0) return x;
  return x * Padic::from_int(x.ctx(), ipow_p(x.p(), k), x.rel_prec() + 2);
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  Int n = q.get_num(), d = q.get_den();
  Int rn = sqrt(n), rd = sqrt(d);
  if (rn * rn != n || rd * rd != d) return std::nullopt;
  return make_rational(rn, rd);
}

// square roots of z in Q(sqrt d), if any
std::optional<QuadElt> quad_sqrt(const QuadElt& z) {
  if (z.is_zero()) return z;
  auto rn = rational_sqrt(z.norm());
  if (!rn) return std::nullopt;
  for (const Rational& x2 : {Rational((z.x + *rn) / 2), Rational((z.x - *rn) / 2)}) {
    if (x2 == 0) {
      // z = d y^2
      auto y = rational_sqrt(z.x / Rational(z.d));
      if (y && z.y == 0) return QuadElt(z.d, 0, *y);
      continue;
    }
    auto x = rational_sqrt(x2);
    if (!x) continue;
    QuadElt r(z.d, *x, z.y / (2 * *x));
    if (r * r == z) return r;
  }
  return std::nullopt;
}

}  // namespace

IntLattice lattice_reduce(const IntLattice& L, const Rational& delta) {
  std::vector<IntVec> B = L.basis;
  const std::size_t n = B.size();
  if (n == 0) throw PreconditionError("lattice_reduce: empty basis");
  GramSchmidt g = gram_schmidt(B);
  std::size_t k = 1;
  while (k < n) {
    for (std::size_t jj = k; jj-- > 0;) {
      Int q = round_nearest(g.mu[k][jj]);
      if (q == 0) continue;
      for (std::size_t t = 0; t < B[k].size(); ++t) B[k][t] -= q * B[jj][t];
      for (std::size_t t = 0; t <= jj; ++t) g.mu[k][t] -= (t == jj ? Rational(q) : q * g.mu[jj][t]);
    }
    if (g.norm2[k] >= (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.norm2[k - 1]) {
      ++k;
    } else {
      std::swap(B[k], B[k - 1]);
      g = gram_schmidt(B);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return {B};
}

bool is_lll_reduced(const IntLattice& L, const Rational& delta) {
  GramSchmidt g = gram_schmidt(L.basis);
  for (std::size_t i = 0; i < L.basis.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (abs(g.mu[i][j]) > Rational(1, 2)) return false;
  for (std::size_t k = 1; k < L.basis.size(); ++k)
    if (g.norm2[k] < (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.norm2[k - 1]) return false;
  return true;
}

Int gram_determinant(const IntLattice& L) {
  GramSchmidt g = gram_schmidt(L.basis);
  Rational d = 1;
  for (auto& x : g.norm2) d *= x;
  if (d.get_den() != 1) throw Error("gram_determinant: non-integral result");
  return abs(d.get_num());
}

Int quad_height(const QuadElt& x) {
  Int den = lcm(x.x.get_den(), x.y.get_den());
  Int n0 = x.x.get_num() * (den / x.x.get_den()), n1 = x.y.get_num() * (den / x.y.get_den());
  return std::max({Int(abs(n0)), Int(abs(n1)), den});
}

std::optional<Recognized> recognize_quadratic(const Padic& x_in, long D, const Int& H, long prec) {
  const long p = x_in.p();
  Int bound = 2 * H;
  if (ipow_p(p, prec) <= bound * bound * bound)
    throw PreconditionError("recognize_quadratic: p^prec must exceed (2H)^3");
  Padic x = x_in.ctx().degree == 2 ? x_in : x_in.to_degree2();
  long d = squarefree_kernel(D);
  if (x.is_zero()) return Recognized{QuadElt(d, 0), false};
  long k = std::max<long>(0, -x.valuation());
  Padic xs = scaled(x, k);
  long N = std::min(prec, xs.abs_prec());
  Padic s = embedded_sqrt_kernel(x.ctx(), D, N + 4);
  std::vector<Padic> elems{Padic::one(x.ctx(), N + 2), s, -xs};
  for (auto& r : integer_relations(elems, N)) {
    if (r[2] == 0) continue;
    if (max_abs(r) > H * ipow_p(p, k)) continue;
    QuadElt val(d, make_rational(r[0], r[2] * ipow_p(p, k)), make_rational(r[1], r[2] * ipow_p(p, k)));
    if (quad_height(val) > H) continue;
    // re-embed
    Padic back = embed_quad(val, embedded_sqrt_kernel(x.ctx(), D, prec + 4), prec + 4);
    if ((back - x).valuation() < std::min(prec, x.abs_prec())) continue;
    bool tentative = ipow_p(p, prec) <= bound * bound * bound * ipow_p(p, 3);
    return Recognized{val, tentative};
  }
  return std::nullopt;
}

std::optional<QuadraticOverK> recognize_degree2_over_K(const Padic& x_in, long D, const Int& H, long prec) {
  const long p = x_in.p();
  Int bound = 2 * H;
  Int b5 = bound * bound * bound * bound * bound;
  if (ipow_p(p, 2 * prec) <= b5) throw PreconditionError("recognize_degree2_over_K: p^(2 prec) must exceed (2H)^5");
  Padic x = x_in.ctx().degree == 2 ? x_in : x_in.to_degree2();
  long d = squarefree_kernel(D);
  long k = std::max<long>(0, -x.valuation());
  Padic xs = scaled(x, k);
  long N = std::min(prec, xs.abs_prec());
  const PadicCtx& K = x.ctx();
  Padic s = embedded_sqrt_kernel(K, D, N + 4);
  Padic one = Padic::one(K, N + 2);
  // n xs^2 + (b0 + b1 s) xs + (c0 + c1 s)
  std::vector<Padic> elems{xs * xs, xs, s * xs, one, s};
  for (auto& r : integer_relations(elems, N)) {
    if (max_abs(r) > H * ipow_p(p, 2 * k)) continue;
    QuadraticOverK out;
    out.tentative = ipow_p(p, 2 * prec) <= b5 * ipow_p(p, 3);
    Rational pk = Rational(ipow_p(p, k));
    if (r[0] == 0) {
      // linear: (b0 + b1 s) xs + (c0 + c1 s) = 0
      QuadElt beta(d, r[1], r[2]), gamma(d, r[3], r[4]);
      if (beta.is_zero()) continue;
      QuadElt root = -gamma / beta / QuadElt(d, pk);
      out.root = root;
      out.b = QuadElt(d, -2) * root;
      out.c = root * root;
    } else {
      QuadElt n(d, r[0]);
      out.b = QuadElt(d, r[1], r[2]) / n / QuadElt(d, pk);
      out.c = QuadElt(d, r[3], r[4]) / n / QuadElt(d, pk * pk);
    }
    Padic sd = embedded_sqrt_kernel(K, D, prec + 4);
    Padic val = x * x + embed_quad(out.b, sd, prec + 4) * x + embed_quad(out.c, sd, prec + 4);
    long need = std::min(prec, x.abs_prec()) + 2 * std::min<long>(0, x.valuation());
    if (val.valuation() < need) continue;
    if (!out.root) {
      // split over K: report the root that matches x
      if (auto sq = quad_sqrt(out.b * out.b - QuadElt(d, 4) * out.c)) {
        for (const QuadElt& r : {(-out.b + *sq) / QuadElt(d, 2), (-out.b - *sq) / QuadElt(d, 2)})
          if ((embed_quad(r, sd, prec + 4) - x).valuation() >= std::min(prec, x.abs_prec()) / 2) {
            out.root = r;
            break;
          }
      }
    }
    return out;
  }
  return std::nullopt;
}

MatchVerdict match_local_point(const MultIntResult& J, const LocalPoint& loc, const TateCurve& T, long prec, long bound) {
  MatchVerdict best;
  best.precision = prec;
  const PadicCtx& K = T.q.ctx();
  const long vq = T.q.valuation();
  // normalized logs carry the factor v(q)
  const long need = prec + valuation(Int(vq), T.q.p());
  Padic LJ = T.normalized_log(recover_value(J));
  Padic u = tate_inverse(loc, T);
  Padic Lu = T.normalized_log(u);
  for (long m = 1; m <= bound; ++m)
    for (long n = -bound; n <= bound; ++n) {
      if (n == 0) continue;
      Padic diff = Padic::from_int(K, n, prec + 4) * Lu - Padic::from_int(K, m, prec + 4) * LJ;
      if (diff.valuation() < need) continue;
      ++best.relations;
      if (best.matched && std::max(std::abs(n), m) >= std::max(std::abs(best.n), best.m_prime)) continue;
      best.matched = true;
      best.n = n;
      best.m_prime = m;
      best.component_match = mod(Int(n * u.valuation() - m * J.valuation), Int(vq)) == 0;
    }
  return best;
}

MatchVerdict match_global_point(const MultIntResult& J, const GlobalPoint& P, long D, const TateCurve& T, long prec,
                                long bound) {
  const PadicCtx& K = T.q.ctx();
  long d = squarefree_kernel(D);
  if (P.x.d != d || P.y.d != d) throw PreconditionError("match_global_point: point not over Q(sqrt D)");
  MatchVerdict best;
  best.precision = prec;
  for (int sign : {1, -1}) {
    Padic sd = embedded_sqrt_kernel(K, D, T.prec + 8);
    if (sign < 0) sd = -sd;
    LocalPoint loc{embed_quad(P.x, sd, T.prec + 8), embed_quad(P.y, sd, T.prec + 8), false};
    if (!on_curve(T.E, loc, prec)) throw PreconditionError("match_global_point: point is not on the curve");
    MatchVerdict v = match_local_point(J, loc, T, prec, bound);
    v.sqrt_sign = sign;
    std::size_t total = best.relations + v.relations;
    if (v.matched && (!best.matched || std::max(std::abs(v.n), v.m_prime) < std::max(std::abs(best.n), best.m_prime)))
      best = v;
    best.relations = total;
  }
  return best;
}

}  // namespace darmon
