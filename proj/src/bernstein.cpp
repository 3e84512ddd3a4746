#include "pcq/bernstein.hpp"

#include <cmath>
#include <stdexcept>

namespace pcq {

namespace {

std::vector<std::vector<MultiIndex>> build_index_tables() {
  std::vector<std::vector<MultiIndex>> tables(kMaxDegree + 1);
  for (int d = 0; d <= kMaxDegree; ++d) {
    auto& t = tables[d];
    t.reserve(num_coeffs(d));
    for (int i = d; i >= 0; --i)
      for (int j = d - i; j >= 0; --j) t.push_back({i, j, d - i - j});
  }
  return tables;
}

void check_degree(int d) {
  if (d < 0 || d > kMaxDegree) throw std::invalid_argument("BB degree out of range");
}

}  // namespace

const std::vector<MultiIndex>& domain_indices(int d) {
  static const auto tables = build_index_tables();
  check_degree(d);
  return tables[d];
}

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 2 * kMaxDegree + 1> f{};
    f[0] = 1;
    for (int i = 1; i <= 2 * kMaxDegree; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table.at(static_cast<std::size_t>(n));
}

double multinomial(const MultiIndex& a) {
  return factorial(a[0] + a[1] + a[2]) / (factorial(a[0]) * factorial(a[1]) * factorial(a[2]));
}

Point domain_point(const Triangle& tri, int d, const MultiIndex& a) {
  return (a[0] * tri.v[0] + a[1] * tri.v[1] + a[2] * tri.v[2]) / static_cast<double>(d);
}

Bary barycentric(const Triangle& tri, const Point& v) {
  const double area2 = 2 * tri.signed_area();
  const double scale = tri.diameter();
  if (!(std::abs(area2) > 2e-14 * scale * scale)) throw GeometryError("degenerate triangle");
  auto cr = [](const Vector& a, const Vector& b) { return a.x() * b.y() - a.y() * b.x(); };
  const double b1 = cr(tri.v[1] - v, tri.v[2] - v) / area2;
  const double b2 = cr(tri.v[2] - v, tri.v[0] - v) / area2;
  return {b1, b2, 1.0 - b1 - b2};
}

Bary barycentric_direction(const Triangle& tri, const Vector& u) {
  const auto g = barycentric_gradients(tri);
  return {g[0].dot(u), g[1].dot(u), g[2].dot(u)};
}

std::array<Vector, 3> barycentric_gradients(const Triangle& tri) {
  const double area2 = 2 * tri.signed_area();
  if (area2 == 0) throw GeometryError("degenerate triangle");
  std::array<Vector, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vector e = tri.v[(k + 2) % 3] - tri.v[(k + 1) % 3];
    g[k] = Vector(-e.y(), e.x()) / area2;
  }
  return g;
}

BBPoly::BBPoly(int d, const Triangle& t) : degree(d), tri(t), coeffs(num_coeffs(d), 0.0) {
  check_degree(d);
}

BBPoly::BBPoly(int d, const Triangle& t, std::vector<double> c)
    : degree(d), tri(t), coeffs(std::move(c)) {
  check_degree(d);
  if (static_cast<int>(coeffs.size()) != num_coeffs(d))
    throw std::invalid_argument("coefficient count does not match degree");
}

double de_casteljau(int d, std::span<const double> c, const Bary& b) {
  std::array<double, num_coeffs(kMaxDegree)> work{};
  std::copy(c.begin(), c.end(), work.begin());
  for (int r = d; r > 0; --r) {
    const auto& lower = domain_indices(r - 1);
    for (std::size_t n = 0; n < lower.size(); ++n) {
      const MultiIndex& a = lower[n];
      work[n] = b[0] * work[bb_index(r, {a[0] + 1, a[1], a[2]})] +
                b[1] * work[bb_index(r, {a[0], a[1] + 1, a[2]})] +
                b[2] * work[bb_index(r, {a[0], a[1], a[2] + 1})];
    }
  }
  return work[0];
}

std::vector<double> directional_difference(int d, std::span<const double> c, const Bary& dir) {
  if (d == 0) return {0.0};
  const auto& lower = domain_indices(d - 1);
  std::vector<double> out(lower.size());
  for (std::size_t n = 0; n < lower.size(); ++n) {
    const MultiIndex& a = lower[n];
    out[n] = d * (dir[0] * c[bb_index(d, {a[0] + 1, a[1], a[2]})] +
                  dir[1] * c[bb_index(d, {a[0], a[1] + 1, a[2]})] +
                  dir[2] * c[bb_index(d, {a[0], a[1], a[2] + 1})]);
  }
  return out;
}

double eval_bb(const BBPoly& p, const Bary& b) { return de_casteljau(p.degree, p.coeffs, b); }

double eval_bb(const BBPoly& p, const Point& x) { return eval_bb(p, barycentric(p.tri, x)); }

double eval_bb_derivative(const BBPoly& p, const Bary& b, std::span<const Vector> directions) {
  if (directions.size() > 2) throw std::invalid_argument("derivative order above two");
  std::vector<double> c = p.coeffs;
  int d = p.degree;
  for (const Vector& u : directions) {
    if (d == 0) return 0.0;
    c = directional_difference(d, c, barycentric_direction(p.tri, u));
    --d;
  }
  return de_casteljau(d, c, b);
}

Vector eval_bb_gradient(const BBPoly& p, const Bary& b) {
  const Vector ex(1, 0), ey(0, 1);
  return {eval_bb_derivative(p, b, std::span(&ex, 1)), eval_bb_derivative(p, b, std::span(&ey, 1))};
}

Eigen::Matrix2d eval_bb_hessian(const BBPoly& p, const Bary& b) {
  const std::array<Vector, 2> xx{Vector(1, 0), Vector(1, 0)};
  const std::array<Vector, 2> xy{Vector(1, 0), Vector(0, 1)};
  const std::array<Vector, 2> yy{Vector(0, 1), Vector(0, 1)};
  Eigen::Matrix2d h;
  h(0, 0) = eval_bb_derivative(p, b, xx);
  h(0, 1) = h(1, 0) = eval_bb_derivative(p, b, xy);
  h(1, 1) = eval_bb_derivative(p, b, yy);
  return h;
}

Jet2 eval_bb_jet(const BBPoly& p, const Bary& b) {
  Jet2 j;
  j.value = eval_bb(p, b);
  j.grad = eval_bb_gradient(p, b);
  j.hess = eval_bb_hessian(p, b);
  return j;
}

BBPoly degree_raise(const BBPoly& p, int target) {
  if (target < p.degree) throw std::invalid_argument("degree_raise target below degree");
  BBPoly cur = p;
  while (cur.degree < target) {
    const int d = cur.degree;
    BBPoly next(d + 1, cur.tri);
    for (const MultiIndex& a : domain_indices(d + 1)) {
      double v = 0;
      for (int s = 0; s < 3; ++s) {
        if (a[s] == 0) continue;
        MultiIndex b = a;
        --b[s];
        v += a[s] * cur[b];
      }
      next[a] = v / (d + 1);
    }
    cur = std::move(next);
  }
  return cur;
}

double product_weight(const MultiIndex& a, const MultiIndex& b) {
  const MultiIndex s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  return multinomial(a) * multinomial(b) / multinomial(s);
}

BBPoly bb_product(const BBPoly& p, const BBPoly& q) {
  for (int k = 0; k < 3; ++k)
    if ((p.tri.v[k] - q.tri.v[k]).norm() > 1e-14 * std::max(1.0, p.tri.diameter()))
      throw std::invalid_argument("bb_product: polynomials live on different triangles");
  BBPoly r(p.degree + q.degree, p.tri);
  for (const MultiIndex& a : domain_indices(p.degree)) {
    const double ca = p[a];
    if (ca == 0) continue;
    for (const MultiIndex& b : domain_indices(q.degree)) {
      r[{a[0] + b[0], a[1] + b[1], a[2] + b[2]}] += product_weight(a, b) * ca * q[b];
    }
  }
  return r;
}

std::array<MultiIndex, 6> d2_ring(int d, int slot) {
  if (d < 2) throw std::invalid_argument("d2_ring needs degree >= 2");
  if (slot < 0 || slot > 2) throw std::invalid_argument("slot out of range");
  const int s1 = (slot + 1) % 3, s2 = (slot + 2) % 3;
  auto make = [&](int a, int b, int c) {
    MultiIndex m{};
    m[slot] = a;
    m[s1] = b;
    m[s2] = c;
    return m;
  };
  return {make(d, 0, 0),     make(d - 1, 1, 0), make(d - 1, 0, 1),
          make(d - 2, 2, 0), make(d - 2, 0, 2), make(d - 2, 1, 1)};
}

void bernstein_values(int d, const Bary& b, std::span<double> out) {
  const auto& idx = domain_indices(d);
  std::array<std::array<double, kMaxDegree + 1>, 3> pw{};
  for (int s = 0; s < 3; ++s) {
    pw[s][0] = 1;
    for (int e = 1; e <= d; ++e) pw[s][e] = pw[s][e - 1] * b[s];
  }
  for (std::size_t n = 0; n < idx.size(); ++n) {
    const MultiIndex& a = idx[n];
    out[n] = multinomial(a) * pw[0][a[0]] * pw[1][a[1]] * pw[2][a[2]];
  }
}

Eigen::MatrixXd collocation_matrix(int d, int at_degree) {
  const auto& pts = domain_indices(at_degree);
  Eigen::MatrixXd m(pts.size(), num_coeffs(d));
  std::vector<double> row(num_coeffs(d));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const Bary b{pts[r][0] / double(at_degree), pts[r][1] / double(at_degree),
                 pts[r][2] / double(at_degree)};
    bernstein_values(d, b, row);
    for (int c = 0; c < num_coeffs(d); ++c) m(r, c) = row[c];
  }
  return m;
}

SlotMap slot_map(const std::array<int, 3>& src_ids, const std::array<int, 3>& dst_ids) {
  SlotMap m{-1, -1, -1};
  int shared = 0;
  for (int t = 0; t < 3; ++t)
    for (int s = 0; s < 3; ++s)
      if (dst_ids[t] == src_ids[s]) {
        m[t] = s;
        ++shared;
      }
  if (shared != 2 && shared != 3) throw std::invalid_argument("triangles do not share an edge");
  return m;
}

JoinDefect join_defect(const BBPoly& p, const BBPoly& q, double match_tol) {
  if (p.degree != q.degree) throw std::invalid_argument("join_defect needs equal degrees");
  const double scale = std::max(p.tri.diameter(), q.tri.diameter());
  std::array<int, 3> pid{0, 1, 2};
  std::array<int, 3> qid{-1, -2, -3};
  int shared = 0;
  for (int t = 0; t < 3; ++t)
    for (int s = 0; s < 3; ++s)
      if ((q.tri.v[t] - p.tri.v[s]).norm() <= match_tol * scale) {
        qid[t] = s;
        ++shared;
      }
  if (shared != 2) throw std::invalid_argument("join_defect: triangles do not share exactly one edge");
  const SlotMap map = slot_map(pid, qid);
  int opp = 0;
  for (int t = 0; t < 3; ++t)
    if (map[t] < 0) opp = t;
  const Bary ob = barycentric(p.tri, q.tri.v[opp]);
  double cscale = 0;
  for (double c : p.coeffs) cscale = std::max(cscale, std::abs(c));
  for (double c : q.coeffs) cscale = std::max(cscale, std::abs(c));
  if (cscale == 0) cscale = 1;
  JoinDefect jd;
  auto get = [&](const MultiIndex& a) { return p[a]; };
  for (const MultiIndex& b : domain_indices(q.degree)) {
    if (b[opp] > 1) continue;
    const double ext = extend_coefficient<double>(get, map, ob, b);
    const double diff = std::abs(ext - q[b]) / cscale;
    if (b[opp] == 0) {
      jd.c0 = std::max(jd.c0, diff);
    } else {
      jd.c1 = std::max(jd.c1, diff);
    }
  }
  return jd;
}

bool joins_c0(const BBPoly& p, const BBPoly& q, double tol) { return join_defect(p, q).c0 <= tol; }

bool joins_c1(const BBPoly& p, const BBPoly& q, double tol) {
  const JoinDefect d = join_defect(p, q);
  return d.c0 <= tol && d.c1 <= tol;
}

}  // namespace pcq
