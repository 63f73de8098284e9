#include "darmon/errors.hpp"
#include "darmon/tables.hpp"
#include "doctest.h"

using namespace darmon;

TEST_CASE("bundled points lie exactly on their curves") {
  Tables t = load_tables(default_tables_path());
  CHECK(t.curves.size() == 6);
  std::size_t points = 0, polys = 0;
  for (const auto& r : t.rows) {
    const auto& c = t.curve(r.label);
    CHECK(c.E.conductor() % c.p == 0);
    if (r.kind == TableRow::Kind::Point) {
      ++points;
      INFO(r.key());
      CHECK(on_curve_exact(c.E, r.point));
    } else {
      ++polys;
      CHECK(r.poly.front() == QuadElt(r.poly.front().d, 1));
    }
  }
  CHECK(points == 49);
  CHECK(polys == 9);
}

TEST_CASE("table parser errors") {
  CHECK_THROWS_AS(parse_tables("point 15A1 13 1 1 ; 2\n"), PreconditionError);
  CHECK_THROWS_AS(parse_tables("curve 15A1 5 1 1 1 -10 -10\npoint 15A1 13 1 1\n"), PreconditionError);
  CHECK_THROWS_AS(parse_tables("bogus\n"), PreconditionError);
  Tables t = parse_tables("# nothing\n\ncurve 15A1 5 1 1 1 -10 -10\n");
  CHECK(t.rows.empty());
  // a perturbed coordinate is rejected by the exact check
  Tables u = parse_tables("curve 15A1 5 1 1 1 -10 -10\npoint 15A1 13 1 -s+1 ; 2s-3\n");
  CHECK(!on_curve_exact(u.curves[0].E, u.rows[0].point));
}
