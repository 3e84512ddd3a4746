#include "pcq/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace pcq {

std::vector<TableRow> table_rows(const MultilevelResult& res) {
  std::vector<TableRow> rows;
  for (std::size_t k = 0; k < res.levels.size(); ++k) {
    const LevelReport& r = res.levels[k];
    TableRow row;
    row.level = r.level;
    row.err = r.error ? r.error : r.epsilon;
    row.residual = r.residual;
    row.m = r.m;
    if (k > 0) {
      const TableRow& p = rows.back();
      if (p.err && row.err) {
        row.l2_rate = rate(p.err->l2, row.err->l2);
        row.h1_rate = rate(p.err->h1, row.err->h1);
        row.h2_rate = rate(p.err->h2, row.err->h2);
      }
      row.r_rate = rate(p.residual, row.residual);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string rate_str(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  if (!std::isfinite(v)) return "---";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string short_rate(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const MultilevelResult& res) {
  out << "level,L2,L2_rate,H1,H1_rate,H2,H2_rate,R,R_rate,m\n";
  for (const TableRow& r : table_rows(res)) {
    out << r.level << ',';
    if (r.err)
      out << num(r.err->l2) << ',' << rate_str(r.l2_rate) << ',' << num(r.err->h1) << ',' << rate_str(r.h1_rate)
          << ',' << num(r.err->h2) << ',' << rate_str(r.h2_rate) << ',';
    else
      out << ",,,,,,";
    out << num(r.residual) << ',' << rate_str(r.r_rate) << ',' << r.m << '\n';
  }
}

void write_text_table(std::ostream& out, const MultilevelResult& res) {
  char line[256];
  std::snprintf(line, sizeof line, "%-5s | %9s %5s | %9s %5s | %9s %5s | %9s %5s | %2s\n", "level", "L2", "rate",
                "H1", "rate", "H2", "rate", "R", "rate", "m");
  out << line;
  const double nan = NAN;
  const ErrorNorms ie = res.init_error.value_or(ErrorNorms{nan, nan, nan});
  std::snprintf(line, sizeof line, "%-5s | %9s %5s | %9s %5s | %9s %5s | %9s %5s | %2s\n", "init",
                res.init_error ? short_num(ie.l2).c_str() : "", "", res.init_error ? short_num(ie.h1).c_str() : "",
                "", res.init_error ? short_num(ie.h2).c_str() : "", "", short_num(res.init_residual).c_str(), "", "");
  out << line;
  for (const TableRow& r : table_rows(res)) {
    const ErrorNorms e = r.err.value_or(ErrorNorms{nan, nan, nan});
    std::snprintf(line, sizeof line, "%-5d | %9s %5s | %9s %5s | %9s %5s | %9s %5s | %2d\n", r.level,
                  short_num(e.l2).c_str(), short_rate(r.l2_rate).c_str(), short_num(e.h1).c_str(),
                  short_rate(r.h1_rate).c_str(), short_num(e.h2).c_str(), short_rate(r.h2_rate).c_str(),
                  short_num(r.residual).c_str(), short_rate(r.r_rate).c_str(), r.m);
    out << line;
  }
}

void write_plot_lattice(std::ostream& out, const SplineFunction& s, int n) {
  if (n < 2) throw std::invalid_argument("lattice needs at least two points per direction");
  const auto& mesh = s.space().mesh();
  Point lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const Point& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  // Arcs may bulge beyond the vertices.
  const Vector pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;
  out.precision(10);
  out << "x,y,value\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point x(lo.x() + (hi.x() - lo.x()) * i / (n - 1), lo.y() + (hi.y() - lo.y()) * j / (n - 1));
      const int t = locate(mesh, x);
      if (t < 0) continue;
      out << x.x() << ',' << x.y() << ',' << s.jet(t, x).value << '\n';
    }
}

}  // namespace pcq
