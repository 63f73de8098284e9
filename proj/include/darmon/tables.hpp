#pragma once

#include <string>
#include <vector>

#include "darmon/modsym.hpp"
#include "darmon/recognize.hpp"

namespace darmon {

struct TableCurve {
  std::string label;
  long p = 0;
  EllCurve E;
};

struct TableRow {
  enum class Kind { Point, Poly };
  Kind kind = Kind::Point;
  std::string label;
  long D = 0;
  long multiple = 1;  // the listed point is multiple * (x, y)
  GlobalPoint point;
  std::vector<QuadElt> poly;  // leading coefficient first

  std::string key() const { return label + ":" + std::to_string(D); }
};

struct Tables {
  std::vector<TableCurve> curves;
  std::vector<TableRow> rows;

  const TableCurve& curve(const std::string& label) const;
};

Tables parse_tables(const std::string& text);
Tables load_tables(const std::string& path);

/// Directory holding the bundled tables (compile-time default).
std::string default_tables_path();

/// Exact check that (x, y) satisfies the Weierstrass equation over Q(sqrt d).
bool on_curve_exact(const EllCurve& E, const GlobalPoint& P);

}  // namespace darmon
