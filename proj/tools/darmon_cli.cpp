#include <atomic>
#include <chrono>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "darmon/darmon.hpp"
#include "darmon/errors.hpp"
#include "darmon/recognize.hpp"
#include "darmon/tables.hpp"
#include "json.hpp"

using namespace darmon;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string curve, ring, level, matrix, rows, tables = default_tables_path();
  std::string tau1, tau2, r = "0", s = "oo", method = "series";
  long p = 0, disc = 0, prec = 4, table_prec = 0, depth = 0, bound = 20, height = 100;
  long count = 5, jobs = 0;
  std::uint64_t seed = 1;
  bool json = false;
};

// stage label attached to errors escaping a pipeline step
struct Staged : std::runtime_error {
  std::string stage;
  int code;
  Staged(std::string st, const Error& e) : std::runtime_error(e.what()), stage(std::move(st)), code(e.exit_code()) {}
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Staged(name, e);
  }
}

long depth_of(const Options& o) { return o.depth > 0 ? o.depth : o.prec; }

std::string str(const Padic& x) { return x.is_zero() ? "0" : x.to_string(); }
std::string str(const QuadElt& x) { return to_string(x, true); }

json point_json(const LocalPoint& P) {
  if (P.infinity) return json{{"infinity", true}};
  return json{{"x", str(P.x)}, {"y", str(P.y)}};
}

json mult_json(const MultIntResult& J) {
  return json{{"valuation", J.valuation},
              {"log", str(J.log_value)},
              {"teichmuller", str(J.teich_unit)},
              {"precision", J.precision},
              {"value", str(recover_value(J))}};
}

void emit(const Options& o, const json& j, const std::string& text) {
  if (o.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

Cusp parse_cusp(const std::string& s) {
  if (s == "oo" || s == "inf") return Cusp::infinity();
  return Cusp::from(parse_rational(s));
}

// ---------------------------------------------------------------------------

template <class Ring>
int decompose_in(const Options& o, const Ring& R, const std::string& ring_name) {
  if (o.level.empty()) throw PreconditionError("decompose: --level is required");
  LevelIdeal<Ring> N{R, R.parse(o.level)};
  SMat<Ring> g;
  if (!o.matrix.empty()) {
    std::istringstream in(o.matrix);
    std::vector<std::string> e;
    for (std::string t; in >> t;) e.push_back(t);
    if (e.size() != 4) throw PreconditionError("decompose: --matrix needs four entries \"a b c d\"");
    g = {R.parse(e[0]), R.parse(e[1]), R.parse(e[2]), R.parse(e[3])};
  } else {
    g = random_gamma1(N, 4, o.seed);
  }
  for (auto* x : {&g.a, &g.b, &g.c, &g.d})
    if (!R.contains(*x)) throw PreconditionError("decompose: entry " + R.format(*x) + " is not in the ring");
  auto fs = R.is_unit(g.det()) && !(g.det() == R.one()) ? decompose_unit_det(N, g) : decompose(N, g);
  bool ok = verify_product(R, fs, g);
  json j{{"ring", ring_name},
         {"level", R.format(N.generator)},
         {"matrix", {R.format(g.a), R.format(g.b), R.format(g.c), R.format(g.d)}},
         {"factors", json::array()},
         {"verified", ok}};
  for (auto& f : fs) {
    const char* k = f.kind == FactorKind::Upper ? "U" : f.kind == FactorKind::Lower ? "L" : "D";
    j["factors"].push_back({{"kind", k}, {"param", R.format(f.param)}});
  }
  std::ostringstream t;
  t << "# matrix (" << R.format(g.a) << " " << R.format(g.b) << "; " << R.format(g.c) << " " << R.format(g.d)
    << ")\n"
    << format_factors(R, fs) << (ok ? "verified: product equals input\n" : "NOT VERIFIED\n");
  emit(o, j, t.str());
  return ok ? 0 : 1;
}

int run_decompose(const Options& o) {
  std::string ring = o.ring;
  if (ring.empty()) {
    if (o.p == 0) throw PreconditionError("decompose: give --ring (Zp1/<p> or O<d>) or --p");
    ring = "Zp1/" + std::to_string(o.p);
  }
  if (ring.rfind("Zp1/", 0) == 0) return decompose_in(o, RationalSRing(std::stol(ring.substr(4))), ring);
  if (ring.size() > 1 && ring[0] == 'O') return decompose_in(o, QuadraticRing(std::stol(ring.substr(1))), ring);
  throw PreconditionError("decompose: unknown ring '" + ring + "' (expected Zp1/<p> or O<d>)");
}

EichlerSetup setup_of(const Options& o) {
  if (o.curve.empty() || o.p == 0) throw PreconditionError("--curve and --p are required");
  return stage("setup", [&] { return build_setup(EllCurve::parse(o.curve), o.p); });
}

int run_embeddings(const Options& o) {
  EichlerSetup S = setup_of(o);
  auto embs = stage("embedding", [&] { return find_embeddings(S, o.disc, static_cast<std::size_t>(o.count), o.prec); });
  json j{{"curve", S.curve().to_string()}, {"p", S.p}, {"M", S.M}, {"D", o.disc}, {"embeddings", json::array()}};
  std::ostringstream t;
  for (auto& e : embs) {
    std::ostringstream W, G;
    W << e.W;
    G << e.gamma;
    j["embeddings"].push_back({{"W", W.str()}, {"tau", str(e.tau_exact)}, {"gamma_tau", G.str()}, {"unit", str(e.unit)}});
    t << "W = " << W.str() << "  tau = " << str(e.tau_exact) << "  gamma_tau = " << G.str() << "\n";
  }
  emit(o, j, t.str());
  return 0;
}

int run_integrate(const Options& o) {
  EichlerSetup S = setup_of(o);
  if (o.tau1.empty() || o.tau2.empty() || o.disc == 0)
    throw PreconditionError("integrate: --tau1, --tau2 and --disc are required");
  long d = squarefree_kernel(o.disc);
  PadicCtx K = S.field();
  long ep = o.prec + depth_of(o) + 40;
  Padic sd = embedded_sqrt_kernel(K, o.disc, ep);
  Padic t1 = embed_quad(parse_quad(o.tau1, d), sd, ep), t2 = embed_quad(parse_quad(o.tau2, d), sd, ep);
  MeasureCtx ctx(*S.symbol, S.p, parse_cusp(o.r), parse_cusp(o.s));
  MultIntResult J = stage("integrate", [&] {
    if (o.method == "riemann") return riemann_double_integral(ctx, t1, t2, std::min(o.prec, depth_of(o)));
    if (o.method == "series") return series_double_integral(ctx, t1, t2, o.prec, depth_of(o));
    throw PreconditionError("integrate: --method must be series or riemann");
  });
  json j = mult_json(J);
  j["method"] = o.method;
  std::ostringstream t;
  t << "valuation " << J.valuation << "\nlog " << str(J.log_value) << "\nteichmuller " << str(J.teich_unit)
    << "\nvalue " << str(recover_value(J)) << "\n";
  emit(o, j, t.str());
  return 0;
}

// table row for this curve and D, if bundled
std::optional<TableRow> lookup_row(const Options& o, const EllCurve& E, long p, long D) {
  try {
    Tables t = load_tables(o.tables);
    for (auto& r : t.rows) {
      const auto& c = t.curve(r.label);
      if (c.p == p && c.E.to_string() == E.to_string() && r.D == D && r.kind == TableRow::Kind::Point) return r;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

struct RowOutcome {
  json j;
  bool matched = false;
  std::string line;
};

RowOutcome point_pipeline(const EichlerSetup& S, long D, long prec, long depth, long bound, long height,
                          const std::optional<TableRow>& row) {
  RowOutcome out;
  auto t0 = std::chrono::steady_clock::now();
  DarmonPoint dp = stage("point", [&] { return darmon_point(S, D, prec, depth); });
  TateCurve T = stage("tate", [&] { return TateCurve::make(S.curve(), S.p, dp.J.precision); });
  std::ostringstream W, G;
  W << dp.embedding.W;
  G << dp.embedding.gamma;
  json j{{"curve", S.curve().to_string()},
         {"p", S.p},
         {"M", S.M},
         {"D", D},
         {"prec", prec},
         {"depth", depth},
         {"embedding", {{"W", W.str()}, {"tau", str(dp.embedding.tau_exact)}, {"gamma_tau", G.str()}}},
         {"multiplier", dp.multiplier},
         {"factors", json::array()},
         {"terms", dp.plan.terms.size()},
         {"J", mult_json(dp.J)},
         {"q", str(T.q)},
         {"point", point_json(dp.point)}};
  for (auto& f : dp.plan.factors)
    j["factors"].push_back({{"kind", f.kind == FactorKind::Upper ? "U" : "L"}, {"param", to_string(f.param)}});
  // recognition of x, only when the precision supports the height bound
  Int b = 2 * Int(height);
  if (!dp.point.infinity && ipow(S.p, static_cast<unsigned long>(dp.J.precision)) > b * b * b) {
    auto r = recognize_quadratic(dp.point.x, D, Int(height), dp.J.precision);
    j["recognized_x"] = r ? json(str(r->value)) : json(nullptr);
  }
  if (row) {
    auto v = stage("match", [&] { return match_global_point(dp.J, row->point, D, T, dp.J.precision, bound); });
    out.matched = v.matched;
    j["match"] = {{"row", row->key()},
                  {"matched", v.matched},
                  {"n", v.n},
                  {"m_prime", v.m_prime},
                  {"table_multiple", row->multiple},
                  {"sqrt_sign", v.sqrt_sign},
                  {"component_match", v.component_match},
                  {"relations", v.relations},
                  {"agreement", v.precision}};
    std::ostringstream l;
    l << row->key() << ": " << (v.matched ? "matched" : "unmatched");
    if (v.matched) l << " n=" << v.n << " m'=" << v.m_prime << " (table multiple " << row->multiple << ")";
    l << " mod p^" << v.precision;
    out.line = l.str();
  }
  j["seconds"] = std::round(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() * 10) / 10;
  out.j = std::move(j);
  return out;
}

int run_point(const Options& o) {
  EichlerSetup S = setup_of(o);
  if (o.disc == 0) throw PreconditionError("point: --disc is required");
  stage("embedding", [&] {
    check_field(S, o.disc);
    return 0;
  });
  auto row = lookup_row(o, S.curve(), S.p, o.disc);
  RowOutcome r = point_pipeline(S, o.disc, o.prec, depth_of(o), o.bound, o.height, row);
  std::ostringstream t;
  const json& j = r.j;
  t << "curve " << j["curve"].get<std::string>() << "  p=" << S.p << "  D=" << o.disc << "\n";
  t << "embedding W=" << j["embedding"]["W"].get<std::string>() << "  tau=" << j["embedding"]["tau"].get<std::string>()
    << "\n";
  t << "gamma_tau " << j["embedding"]["gamma_tau"].get<std::string>() << "  multiplier " << j["multiplier"] << "\n";
  t << "terms " << j["terms"] << "\nJ = " << j["J"]["value"].get<std::string>() << "\n";
  if (j["point"].contains("infinity"))
    t << "point at infinity\n";
  else
    t << "x = " << j["point"]["x"].get<std::string>() << "\ny = " << j["point"]["y"].get<std::string>() << "\n";
  if (j.contains("recognized_x") && !j["recognized_x"].is_null())
    t << "x recognized as " << j["recognized_x"].get<std::string>() << "\n";
  if (!r.line.empty()) t << r.line << "\n";
  emit(o, j, t.str());
  return 0;
}

// smallest precision with p^prec >= 10^4, so that spurious
// log relations with |n|, m' <= 20 are unlikely
long auto_prec(long p) {
  long k = 4;
  while (ipow(p, static_cast<unsigned long>(k)) < 10000) ++k;
  return k;
}

int run_verify_tables(const Options& o, bool rows_given) {
  Tables t = load_tables(o.tables);
  std::vector<TableRow> sel;
  if (rows_given) {
    std::istringstream in(o.rows);
    for (std::string key; std::getline(in, key, ',');) {
      if (key.empty()) continue;
      bool found = false;
      for (auto& r : t.rows)
        if (r.key() == key) {
          sel.push_back(r);
          found = true;
        }
      if (!found) throw PreconditionError("verify-tables: no row " + key);
    }
  } else {
    // smallest D with a rational-coordinate point per curve
    for (auto& c : t.curves)
      for (auto& r : t.rows)
        if (r.label == c.label && r.kind == TableRow::Kind::Point) {
          sel.push_back(r);
          break;
        }
  }
  std::vector<RowOutcome> res(sel.size());
  std::atomic<std::size_t> next{0};
  long jobs = o.jobs > 0 ? o.jobs : std::max<long>(1, std::thread::hardware_concurrency() / 2);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < sel.size();) {
      const TableRow& r = sel[i];
      const TableCurve& c = t.curve(r.label);
      RowOutcome& out = res[i];
      if (r.kind == TableRow::Kind::Poly) {
        out.j = {{"row", r.key()}, {"status", "skipped"}, {"reason", "class number > 1"}};
        out.matched = true;
        out.line = r.key() + ": skipped (class number > 1, needs the relative polynomial at high precision)";
        continue;
      }
      long prec = o.table_prec > 0 ? o.table_prec : auto_prec(c.p);
      long depth = o.depth > 0 ? o.depth : prec;
      try {
        EichlerSetup S = build_setup(EllCurve::parse(c.E.to_string()), c.p);
        out = point_pipeline(S, r.D, prec, depth, o.bound, o.height, r);
        out.j["status"] = out.matched ? "matched" : "unmatched";
      } catch (const Staged& e) {
        out.j = {{"row", r.key()}, {"status", "error"}, {"stage", e.stage}, {"error", e.what()}};
        out.line = r.key() + ": error in " + e.stage + ": " + e.what();
      } catch (const Error& e) {
        out.j = {{"row", r.key()}, {"status", "error"}, {"error", e.what()}};
        out.line = r.key() + ": error: " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (long k = 0; k < std::min<long>(jobs, static_cast<long>(sel.size())); ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  json j = json::array();
  std::ostringstream text;
  bool all = true;
  for (auto& r : res) {
    all = all && r.matched;
    r.j.erase("seconds");  // keep records reproducible
    j.push_back(r.j);
    text << r.line << "\n";
  }
  emit(o, j, text.str());
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic Darmon points for elliptic curves of conductor pM"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) { c->add_flag("--json", o.json, "JSON output"); };
  auto curve_opts = [&](CLI::App* c) {
    c->add_option("--curve", o.curve, "Weierstrass coefficients \"a1 a2 a3 a4 a6\"");
    c->add_option("--p", o.p, "the prime p exactly dividing the conductor");
    c->add_option("--disc", o.disc, "fundamental discriminant D");
    c->add_option("--prec", o.prec, "p-adic precision (digits)");
    c->add_option("--depth", o.depth, "measure depth (defaults to --prec)");
  };

  auto* dec = app.add_subcommand("decompose", "elementary factorization in Gamma_1(N)");
  dec->add_option("--ring", o.ring, "Zp1/<p> for Z[1/p] or O<d> for the integers of Q(sqrt d)");
  dec->add_option("--p", o.p, "shorthand for --ring Zp1/<p>");
  dec->add_option("--level", o.level, "generator of the level ideal");
  dec->add_option("--matrix", o.matrix, "\"a b c d\"");
  dec->add_option("--seed", o.seed, "random Gamma_1 element when no matrix is given");
  common(dec);

  auto* pt = app.add_subcommand("point", "compute a Darmon point");
  curve_opts(pt);
  pt->add_option("--bound", o.bound, "bound on |n|, m' when matching a bundled table point");
  pt->add_option("--seed", o.seed, "unused; the pipeline is deterministic");
  pt->add_option("--tables", o.tables, "table fixtures file");
  common(pt);

  auto* vt = app.add_subcommand("verify-tables", "compute and match bundled table rows");
  auto* rows_opt = vt->add_option("--rows", o.rows, "comma-separated label:D keys (default: smallest D per curve)");
  vt->add_option("--prec", o.table_prec, "precision (0 = choose per prime)");
  vt->add_option("--depth", o.depth, "measure depth (defaults to precision)");
  vt->add_option("--bound", o.bound, "bound on |n|, m'");
  vt->add_option("--jobs", o.jobs, "rows computed in parallel");
  vt->add_option("--tables", o.tables, "table fixtures file");
  common(vt);

  auto* in = app.add_subcommand("integrate", "one multiplicative double integral");
  curve_opts(in);
  in->add_option("--tau1", o.tau1, "lower limit in Q(sqrt D), e.g. 1/2+1/6s");
  in->add_option("--tau2", o.tau2, "upper limit");
  in->add_option("--r", o.r, "cusp r (rational or oo)");
  in->add_option("--s", o.s, "cusp s (rational or oo)");
  in->add_option("--method", o.method, "series or riemann");
  common(in);

  auto* em = app.add_subcommand("embeddings", "list optimal embeddings");
  curve_opts(em);
  em->add_option("--count", o.count, "how many");
  common(em);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (dec->parsed()) return run_decompose(o);
    if (pt->parsed()) return run_point(o);
    if (vt->parsed()) return run_verify_tables(o, rows_opt->count() > 0);
    if (in->parsed()) return run_integrate(o);
    if (em->parsed()) return run_embeddings(o);
  } catch (const Staged& e) {
    std::cerr << "error[" << e.stage << "]: " << e.what() << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
