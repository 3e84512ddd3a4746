#pragma once

#include <iosfwd>
#include <string>

#include "pcq/solver.hpp"

namespace pcq {

/// One table row as printed: errors against the exact solution when known,
/// otherwise the level differences epsilon (absent on the last level).
struct TableRow {
  int level = 0;
  std::optional<ErrorNorms> err;
  double residual = 0;
  int m = 0;
  double l2_rate = NAN, h1_rate = NAN, h2_rate = NAN, r_rate = NAN;
};

std::vector<TableRow> table_rows(const MultilevelResult& res);

/// CSV with columns level,L2,L2_rate,H1,H1_rate,H2,H2_rate,R,R_rate,m.
void write_csv(std::ostream& out, const MultilevelResult& res);
/// Aligned text version of the same table with an "init" row.
void write_text_table(std::ostream& out, const MultilevelResult& res);

/// Samples s on an n x n lattice over the domain bounding box; points outside
/// the domain are skipped. Lines are "x,y,value".
void write_plot_lattice(std::ostream& out, const SplineFunction& s, int n);

}  // namespace pcq
