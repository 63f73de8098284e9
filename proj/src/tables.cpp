#include "darmon/tables.hpp"

#include <fstream>
#include <sstream>

#include "darmon/errors.hpp"

#ifndef DARMON_DATA_DIR
#define DARMON_DATA_DIR "data"
#endif

namespace darmon {

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::string rest_of(std::istringstream& in) {
  std::string r;
  std::getline(in, r);
  return r;
}

}  // namespace

const TableCurve& Tables::curve(const std::string& label) const {
  for (auto& c : curves)
    if (c.label == label) return c;
  throw PreconditionError("tables: unknown curve " + label);
}

Tables parse_tables(const std::string& text) {
  Tables t;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream in(line);
    std::string kind;
    if (!(in >> kind)) continue;
    auto fail = [&](const std::string& why) {
      throw PreconditionError("tables line " + std::to_string(lineno) + ": " + why);
    };
    if (kind == "curve") {
      TableCurve c;
      if (!(in >> c.label >> c.p)) fail("expected label and p");
      c.E = EllCurve::parse(rest_of(in));
      t.curves.push_back(c);
    } else if (kind == "point" || kind == "poly") {
      TableRow r;
      if (!(in >> r.label >> r.D)) fail("expected label and D");
      long d = squarefree_kernel(r.D);
      if (kind == "point") {
        r.kind = TableRow::Kind::Point;
        if (!(in >> r.multiple)) fail("expected multiple");
        auto parts = split_on(rest_of(in), ';');
        if (parts.size() != 2) fail("expected x ; y");
        r.point = {parse_quad(parts[0], d), parse_quad(parts[1], d)};
      } else {
        r.kind = TableRow::Kind::Poly;
        for (auto& c : split_on(rest_of(in), ';')) r.poly.push_back(parse_quad(c, d));
        if (r.poly.size() < 2) fail("polynomial needs at least two coefficients");
      }
      t.curve(r.label);  // must be declared first
      t.rows.push_back(r);
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  return t;
}

Tables load_tables(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw PreconditionError("cannot open tables file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_tables(ss.str());
}

std::string default_tables_path() { return std::string(DARMON_DATA_DIR) + "/tables.txt"; }

bool on_curve_exact(const EllCurve& E, const GlobalPoint& P) {
  long d = P.x.d;
  auto c = [d](const Int& a) { return QuadElt(d, Rational(a)); };
  const QuadElt& x = P.x;
  const QuadElt& y = P.y;
  return y * y + c(E.a1) * x * y + c(E.a3) * y == x * x * x + c(E.a2) * x * x + c(E.a4) * x + c(E.a6);
}

}  // namespace darmon
