#include "pcq/space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <Eigen/Sparse>
#include <Eigen/SPQRSupport>

namespace pcq {

const char* to_string(DofCategory c) {
  switch (c) {
    case DofCategory::Vertex:
      return "vertex";
    case DofCategory::Edge:
      return "edge";
    case DofCategory::TangentVertex:
      return "tangent-vertex";
    case DofCategory::Pie:
      return "pie";
    case DofCategory::Buffer:
      return "buffer";
  }
  return "?";
}

namespace {

int patch_degree(TriKind k) {
  switch (k) {
    case TriKind::Ordinary:
      return 5;
    case TriKind::Buffer:
      return 6;
    case TriKind::Pie:
      return 4;
  }
  return 5;
}

MultiIndex vertex_index(int d, int slot) {
  MultiIndex a{0, 0, 0};
  a[slot] = d;
  return a;
}

}  // namespace

MinimalDeterminingSet::MinimalDeterminingSet(std::shared_ptr<const CurvedTriangulation> mesh)
    : mesh_(std::move(mesh)) {
  const auto& m = *mesh_;
  for (int v : m.interior_vertices()) {
    const int t = m.designated_vertex_triangle(v);
    for (const MultiIndex& a : d2_ring(5, m.slot_of(t, v)))
      dofs_.push_back({DofCategory::Vertex, v, t, a, 5});
    counts_.vertex += 6;
  }
  for (int e : m.interior_edges0()) {
    const int t = m.designated_edge_triangle(e);
    const auto& ed = m.edge(e);
    MultiIndex a{2, 2, 2};
    for (int s = 0; s < 3; ++s)
      if (m.tri(t).v[s] != ed.v[0] && m.tri(t).v[s] != ed.v[1]) a[s] = 1;
    dofs_.push_back({DofCategory::Edge, e, t, a, 5});
    ++counts_.edge;
  }
  for (int v : m.tangent_vertices()) {
    const int t = m.designated_vertex_triangle(v);
    dofs_.push_back({DofCategory::TangentVertex, v, t, vertex_index(4, m.slot_of(t, v)), 4});
    ++counts_.tangent;
  }
  for (int t : m.triangles_of_kind(TriKind::Pie)) {
    for (MultiIndex a : {MultiIndex{1, 3, 0}, MultiIndex{1, 2, 1}, MultiIndex{1, 1, 2},
                         MultiIndex{1, 0, 3}, MultiIndex{0, 2, 2}})
      dofs_.push_back({DofCategory::Pie, t, t, a, 4});
    counts_.pie += 5;
  }
  for (int t : m.triangles_of_kind(TriKind::Buffer)) {
    for (MultiIndex a : {MultiIndex{4, 1, 1}, MultiIndex{2, 2, 2}})
      dofs_.push_back({DofCategory::Buffer, t, t, a, 6});
    counts_.buffer += 2;
  }
}

int MinimalDeterminingSet::formula_dimension() const {
  const auto& m = *mesh_;
  return 6 * static_cast<int>(m.interior_vertices().size()) +
         static_cast<int>(m.interior_edges0().size()) + static_cast<int>(m.tangent_vertices().size()) +
         5 * m.count(TriKind::Pie) + 2 * m.count(TriKind::Buffer);
}

Point MinimalDeterminingSet::domain_point(int i) const {
  const auto& d = dof(i);
  return pcq::domain_point(mesh_->triangle(d.triangle), d.degree, d.index);
}

MinimalDeterminingSet build_mds(std::shared_ptr<const CurvedTriangulation> mesh) {
  return MinimalDeterminingSet(std::move(mesh));
}

namespace {

struct FormJet {
  LinearForm f;
  std::array<LinearForm, 2> g;
  std::array<std::array<LinearForm, 2>, 2> h;
};

// Propagation of dof values to all patch coefficients, carried out on
// linear forms in the global dofs so that the result is the linear map.
class Propagator {
 public:
  Propagator(const CurvedTriangulation& m, const MinimalDeterminingSet& mds,
             const std::vector<std::array<double, 6>>& q)
      : m_(m), mds_(mds), q_(q) {
    c_.resize(m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) c_[t].resize(num_coeffs(deg(t)));
  }

  void run() {
    assign_dofs();
    vertex_rings();
    interior_edges();
    boundary_vertices();
    pie_edges();
    buffers_from_pies();
    for (int t = 0; t < m_.num_triangles(); ++t)
      for (const auto& c : c_[t])
        if (!c) throw SpaceError("propagation left a coefficient of triangle " + std::to_string(t) + " undetermined");
  }

  int deg(int t) const { return patch_degree(m_.tri(t).kind); }
  const LinearForm& get(int t, const MultiIndex& a) const {
    const auto& c = c_[t][bb_index(deg(t), a)];
    if (!c) throw SpaceError("coefficient needed before it is known (triangle " + std::to_string(t) + ")");
    return *c;
  }
  bool known(int t, const MultiIndex& a) const { return c_[t][bb_index(deg(t), a)].has_value(); }

  // Coefficient of q p (degree 6) for a pie triangle.
  LinearForm pie_a(int t, const MultiIndex& al) const {
    LinearForm r;
    const auto& q = q_[t];
    for (const MultiIndex& b : domain_indices(2)) {
      const double qb = q[bb_index(2, b)];
      if (qb == 0.0) continue;
      const MultiIndex c{al[0] - b[0], al[1] - b[1], al[2] - b[2]};
      if (c[0] < 0 || c[1] < 0 || c[2] < 0) continue;
      r += (product_weight(c, b) * qb) * get(t, c);
    }
    return r;
  }

  // Degree-6 coefficient of a non-pie triangle (ordinary ones are raised).
  LinearForm raised(int t, const MultiIndex& al) const {
    if (deg(t) == 6) return get(t, al);
    LinearForm r;
    for (int s = 0; s < 3; ++s) {
      if (al[s] == 0) continue;
      MultiIndex b = al;
      --b[s];
      r += (al[s] / 6.0) * get(t, b);
    }
    return r;
  }

  LinearForm six(int t, const MultiIndex& al) const {
    return m_.tri(t).kind == TriKind::Pie ? pie_a(t, al) : raised(t, al);
  }

  double defect() const { return defect_; }
  double defect5() const { return defect5_; }
  const std::vector<std::vector<std::optional<LinearForm>>>& coeffs() const { return c_; }

 private:
  void assign(int t, const MultiIndex& a, const LinearForm& f) {
    auto& slot = c_[t][bb_index(deg(t), a)];
    if (slot) {
      defect_ = std::max(defect_, difference(*slot, f));
    } else {
      slot = f;
    }
  }

  void assign_dofs() {
    for (int i = 0; i < mds_.dimension(); ++i) {
      const auto& d = mds_.dof(i);
      assign(d.triangle, d.index, LinearForm::unit(i));
    }
  }

  // Cartesian 2-jet at the vertex in `slot` of t from its ring coefficients.
  FormJet jet_from_ring(int t, int slot) const {
    const int d = deg(t);
    const auto r = d2_ring(d, slot);
    std::array<LinearForm, 6> c;
    for (int k = 0; k < 6; ++k) c[k] = get(t, r[k]);
    const Triangle T = m_.triangle(t);
    Eigen::Matrix2d E;
    E.col(0) = T.v[(slot + 1) % 3] - T.v[slot];
    E.col(1) = T.v[(slot + 2) % 3] - T.v[slot];
    const Eigen::Matrix2d P = E.inverse().transpose();
    const double dd = d, d2 = d * (d - 1.0);
    const std::array<LinearForm, 2> D{dd * (c[1] - c[0]), dd * (c[2] - c[0])};
    std::array<std::array<LinearForm, 2>, 2> DD;
    DD[0][0] = d2 * (c[3] - 2.0 * c[1] + c[0]);
    DD[1][1] = d2 * (c[4] - 2.0 * c[2] + c[0]);
    DD[0][1] = DD[1][0] = d2 * (c[5] - c[1] - c[2] + c[0]);
    FormJet j;
    j.f = c[0];
    for (int a = 0; a < 2; ++a) j.g[a] = P(a, 0) * D[0] + P(a, 1) * D[1];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        LinearForm s;
        for (int i = 0; i < 2; ++i)
          for (int k = 0; k < 2; ++k) s += (P(a, i) * P(b, k)) * DD[i][k];
        j.h[a][b] = s;
      }
    return j;
  }

  // Ring of degree d at `slot` of triangle T reproducing the jet.
  static std::array<LinearForm, 6> ring_from_jet(const FormJet& j, const Triangle& T, int d, int slot) {
    const Vector e1 = T.v[(slot + 1) % 3] - T.v[slot];
    const Vector e2 = T.v[(slot + 2) % 3] - T.v[slot];
    auto dir = [&](const Vector& e) { return e.x() * j.g[0] + e.y() * j.g[1]; };
    auto dir2 = [&](const Vector& e, const Vector& f) {
      LinearForm s;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += (e[a] * f[b]) * j.h[a][b];
      return s;
    };
    const double dd = d, d2 = d * (d - 1.0);
    const LinearForm D1 = dir(e1), D2 = dir(e2);
    return {j.f,
            j.f + D1 / dd,
            j.f + D2 / dd,
            j.f + (2.0 / dd) * D1 + dir2(e1, e1) / d2,
            j.f + (2.0 / dd) * D2 + dir2(e2, e2) / d2,
            j.f + (D1 + D2) / dd + dir2(e1, e2) / d2};
  }

  void vertex_rings() {
    for (int v : m_.interior_vertices()) {
      const int tv = m_.designated_vertex_triangle(v);
      const FormJet j = jet_from_ring(tv, m_.slot_of(tv, v));
      for (int t : m_.vertex_triangles(v)) {
        const int s = m_.slot_of(t, v);
        const Triangle T = m_.triangle(t);
        if (m_.tri(t).kind == TriKind::Pie) {
          if (s != 0) throw SpaceError("interior vertex is not the apex of its pie triangle");
          const auto a = ring_from_jet(j, T, 6, 0);
          const auto& q = q_[t];
          const auto c = factor_ring_solve(a, q[1], q[2], q[4]);
          const auto r4 = d2_ring(4, 0);
          for (int k = 0; k < 6; ++k) assign(t, r4[k], c[k]);
        } else {
          const int d = deg(t);
          const auto r = ring_from_jet(j, T, d, s);
          const auto idx = d2_ring(d, s);
          for (int k = 0; k < 6; ++k) assign(t, idx[k], r[k]);
        }
      }
    }
  }

  // Fills the coefficients of dst with exponent <= 1 at the vertex opposite
  // the shared edge from the polynomial `get` on src.
  template <class Get>
  void extend_into(int src, int dst, int dst_degree, Get&& get, int max_row) {
    const SlotMap map = slot_map(m_.tri(src).v, m_.tri(dst).v);
    int opp = -1;
    for (int s = 0; s < 3; ++s)
      if (map[s] < 0) opp = s;
    const Bary ob = barycentric(m_.triangle(src), m_.vertex(m_.tri(dst).v[opp]));
    for (const MultiIndex& b : domain_indices(dst_degree)) {
      if (b[opp] > max_row) continue;
      assign(dst, b, extend_coefficient<LinearForm>(get, map, ob, b));
    }
  }

  void interior_edges() {
    for (int e : m_.interior_edges0()) {
      const int te = m_.designated_edge_triangle(e);
      const auto& ed = m_.edge(e);
      const int other = ed.tri[0] == te ? ed.tri[1] : ed.tri[0];
      if (other < 0) continue;
      if (m_.tri(other).kind == TriKind::Ordinary) {
        extend_into(te, other, 5, [&](const MultiIndex& a) { return get(te, a); }, 1);
      } else if (m_.tri(other).kind == TriKind::Buffer) {
        extend_into(te, other, 6, [&](const MultiIndex& a) { return raised(te, a); }, 1);
      } else {
        throw SpaceError("pie triangle across an edge with two interior endpoints");
      }
    }
  }

  std::array<int, 2> pies_at(int v) const {
    std::array<int, 2> p{-1, -1};
    int n = 0;
    for (int t : m_.vertex_triangles(v))
      if (m_.tri(t).kind == TriKind::Pie && n < 2) p[n++] = t;
    if (n != 2) throw SpaceError("boundary vertex without two pie triangles");
    return p;
  }

  Vector normalized_gradient(int t, const Point& x) const {
    const auto& r = m_.tri(t);
    const Conic& q = m_.domain().arc(r.arc).conic;
    return q.gradient(x) / q(m_.vertex(r.v[0]));
  }

  void boundary_vertices() {
    for (int v : m_.boundary_vertices()) {
      const auto pies = pies_at(v);
      if (!m_.in_vb1(v)) {
        for (int t : pies) assign(t, vertex_index(4, m_.slot_of(t, v)), LinearForm());
        continue;
      }
      const int tv = m_.designated_vertex_triangle(v);
      const int other = pies[0] == tv ? pies[1] : pies[0];
      const Vector g1 = normalized_gradient(tv, m_.vertex(v));
      const Vector g2 = normalized_gradient(other, m_.vertex(v));
      const int i = std::abs(g2.x()) >= std::abs(g2.y()) ? 0 : 1;
      const double alpha = g1[i] / g2[i];
      const LinearForm& cv = get(tv, vertex_index(4, m_.slot_of(tv, v)));
      assign(other, vertex_index(4, m_.slot_of(other, v)), alpha * cv);
    }
  }

  void pie_edges() {
    for (int t : m_.triangles_of_kind(TriKind::Pie)) {
      const auto& r = m_.tri(t);
      for (int s = 1; s <= 2; ++s) {
        const int o = 3 - s;
        const int buf = r.neighbor[o];
        if (buf < 0 || m_.tri(buf).kind != TriKind::Buffer)
          throw SpaceError("pie triangle edge without a buffer neighbour");
        // Edge coefficients of q p, handed to the buffer.
        extend_into(t, buf, 6, [&](const MultiIndex& a) { return pie_a(t, a); }, 0);
        // The coefficient one row off the edge at the boundary vertex, from
        // the buffer's side.
        MultiIndex target{1, 0, 0};
        target[o] = 1;
        target[s] = 4;
        const SlotMap map = slot_map(m_.tri(buf).v, r.v);
        const Bary ob = barycentric(m_.triangle(buf), m_.vertex(r.v[o]));
        const LinearForm a = extend_coefficient<LinearForm>(
            [&](const MultiIndex& b) { return get(buf, b); }, map, ob, target);
        // Product identity solved for the single unknown coefficient of p.
        LinearForm rest;
        std::optional<MultiIndex> unknown;
        double weight = 0;
        const auto& q = q_[t];
        for (const MultiIndex& b : domain_indices(2)) {
          const double qb = q[bb_index(2, b)];
          if (qb == 0.0) continue;
          const MultiIndex c{target[0] - b[0], target[1] - b[1], target[2] - b[2]};
          if (c[0] < 0 || c[1] < 0 || c[2] < 0) continue;
          const double w = product_weight(c, b) * qb;
          if (known(t, c)) {
            rest += w * get(t, c);
          } else {
            if (unknown) throw SpaceError("product identity has two unknowns");
            unknown = c;
            weight = w;
          }
        }
        if (!unknown) {
          defect5_ = std::max(defect5_, difference(rest, a));
          continue;
        }
        if (std::abs(weight) < 1e-12)
          throw GeometryError("conic gradient condition violated on pie triangle " + std::to_string(t));
        assign(t, *unknown, (1.0 / weight) * (a - rest));
        defect5_ = std::max(defect5_, difference(pie_a(t, target), a));
      }
    }
  }

  void buffers_from_pies() {
    for (int t : m_.triangles_of_kind(TriKind::Pie)) {
      const auto& r = m_.tri(t);
      for (int o = 1; o <= 2; ++o)
        extend_into(t, r.neighbor[o], 6, [&](const MultiIndex& a) { return pie_a(t, a); }, 1);
    }
  }

  const CurvedTriangulation& m_;
  const MinimalDeterminingSet& mds_;
  const std::vector<std::array<double, 6>>& q_;
  std::vector<std::vector<std::optional<LinearForm>>> c_;
  double defect_ = 0, defect5_ = 0;
};

Eigen::MatrixXd forms_to_matrix(const std::vector<LinearForm>& forms, const std::vector<int>& dofs) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(forms.size()),
                                            static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t r = 0; r < forms.size(); ++r)
    for (const auto& [i, w] : forms[r].terms()) {
      const auto it = std::lower_bound(dofs.begin(), dofs.end(), i);
      m(static_cast<Eigen::Index>(r), it - dofs.begin()) = w;
    }
  return m;
}

}  // namespace

std::shared_ptr<const SplineSpace> SplineSpace::build(std::shared_ptr<const CurvedTriangulation> mesh) {
  auto sp = std::make_shared<SplineSpace>();
  sp->mds_ = MinimalDeterminingSet(mesh);
  const auto& m = *mesh;
  sp->pie_q_.assign(m.num_triangles(), {});
  for (int t : m.triangles_of_kind(TriKind::Pie))
    sp->pie_q_[t] = pie_conic_bb_form(m.domain().arc(m.tri(t).arc).conic, m.triangle(t));

  Propagator prop(m, sp->mds_, sp->pie_q_);
  prop.run();
  sp->defect_ = prop.defect();
  sp->defect5_ = prop.defect5();

  sp->maps_.resize(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto kind = m.tri(t).kind;
    std::vector<LinearForm> bb, p;
    if (kind == TriKind::Pie) {
      for (const MultiIndex& a : domain_indices(4)) p.push_back(prop.get(t, a));
      for (const MultiIndex& a : domain_indices(6)) bb.push_back(prop.pie_a(t, a));
    } else {
      for (const MultiIndex& a : domain_indices(prop.deg(t))) bb.push_back(prop.get(t, a));
    }
    std::set<int> ids;
    for (const auto* list : {&bb, &p})
      for (const auto& f : *list)
        for (const auto& term : f.terms()) ids.insert(term.first);
    LocalMap& lm = sp->maps_[t];
    lm.dofs.assign(ids.begin(), ids.end());
    lm.degree = kind == TriKind::Ordinary ? 5 : 6;
    lm.bb = forms_to_matrix(bb, lm.dofs);
    if (kind == TriKind::Pie) lm.p = forms_to_matrix(p, lm.dofs);
  }
  return sp;
}

double SplineSpace::pie_conic_value(int t, const Point& x) const {
  const Triangle T = mesh().triangle(t);
  const auto& q = pie_q_[t];
  return de_casteljau(2, q, barycentric(T, x));
}

SplineFunction::SplineFunction(std::shared_ptr<const SplineSpace> space, Eigen::VectorXd dofs)
    : space_(std::move(space)), dofs_(std::move(dofs)) {
  if (dofs_.size() != space_->dimension()) throw SpaceError("dof vector length does not match the space");
  const auto& m = space_->mesh();
  patches_.resize(m.num_triangles());
  factors_.resize(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const LocalMap& lm = space_->local_map(t);
    Eigen::VectorXd local(static_cast<Eigen::Index>(lm.dofs.size()));
    for (std::size_t k = 0; k < lm.dofs.size(); ++k) local[static_cast<Eigen::Index>(k)] = dofs_[lm.dofs[k]];
    const Eigen::VectorXd c = lm.bb * local;
    patches_[t] = BBPoly(lm.degree, m.triangle(t), std::vector<double>(c.data(), c.data() + c.size()));
    if (m.tri(t).kind == TriKind::Pie) {
      const Eigen::VectorXd p = lm.p * local;
      factors_[t] = BBPoly(4, m.triangle(t), std::vector<double>(p.data(), p.data() + p.size()));
    }
  }
}

SplineFunction propagate(std::shared_ptr<const SplineSpace> space, const Eigen::VectorXd& dofs) {
  return SplineFunction(std::move(space), dofs);
}

double SplineFunction::functional(int i) const {
  const auto& d = space_->mds().dof(i);
  if (d.category == DofCategory::Pie || d.category == DofCategory::TangentVertex)
    return factors_[d.triangle][d.index];
  return patches_[d.triangle][d.index];
}

int SplineFunction::locate_or_throw(const Point& x) const {
  const int t = locate(space_->mesh(), x, 1e-10);
  if (t < 0) throw SpaceError("point outside the domain");
  return t;
}

Jet2 SplineFunction::jet(int t, const Point& x) const {
  const BBPoly& p = patches_[t];
  return eval_bb_jet(p, barycentric(p.tri, x));
}

Jet2 SplineFunction::jet(const Point& x) const { return jet(locate_or_throw(x), x); }

double SplineFunction::value(const Point& x) const {
  const BBPoly& p = patches_[locate_or_throw(x)];
  return eval_bb(p, x);
}

Vector SplineFunction::gradient(const Point& x) const {
  const BBPoly& p = patches_[locate_or_throw(x)];
  return eval_bb_gradient(p, barycentric(p.tri, x));
}

Eigen::Matrix2d SplineFunction::hessian(const Point& x) const {
  const BBPoly& p = patches_[locate_or_throw(x)];
  return eval_bb_hessian(p, barycentric(p.tri, x));
}

std::set<int> basis_support(const SplineSpace& space, int i, double threshold) {
  std::set<int> out;
  const auto& m = space.mesh();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const LocalMap& lm = space.local_map(t);
    const auto it = std::lower_bound(lm.dofs.begin(), lm.dofs.end(), i);
    if (it == lm.dofs.end() || *it != i) continue;
    const Eigen::Index col = it - lm.dofs.begin();
    double mx = lm.bb.col(col).cwiseAbs().maxCoeff();
    if (lm.p.size() > 0) mx = std::max(mx, lm.p.col(col).cwiseAbs().maxCoeff());
    if (mx > threshold) out.insert(t);
  }
  return out;
}

std::vector<int> dof_triangles(const SplineSpace& space, int i) {
  const auto& m = space.mesh();
  const auto& d = space.mds().dof(i);
  const Point x = space.mds().domain_point(i);
  std::vector<int> out;
  for (int t : star(m, SimplexSet{{}, {}, {d.triangle}}, 1)) {
    const Bary b = barycentric(m.triangle(t), x);
    if (b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12) out.push_back(t);
  }
  return out;
}

RankOracle rank_oracle(const CurvedTriangulation& m, bool dense) {
  const int nt = m.num_triangles();
  std::vector<int> offset(nt + 1, 0);
  for (int t = 0; t < nt; ++t) offset[t + 1] = offset[t] + num_coeffs(patch_degree(m.tri(t).kind));
  RankOracle out;
  out.unknowns = offset[nt];

  // Degree-6 representation of every patch as linear forms in the unknowns.
  std::vector<std::vector<LinearForm>> six(nt);
  for (int t = 0; t < nt; ++t) {
    const auto kind = m.tri(t).kind;
    const int d = patch_degree(kind);
    auto raw = [&](const MultiIndex& a) { return LinearForm::unit(offset[t] + bb_index(d, a)); };
    for (const MultiIndex& al : domain_indices(6)) {
      LinearForm f;
      if (kind == TriKind::Buffer) {
        f = raw(al);
      } else if (kind == TriKind::Ordinary) {
        for (int s = 0; s < 3; ++s) {
          if (al[s] == 0) continue;
          MultiIndex b = al;
          --b[s];
          f += (al[s] / 6.0) * raw(b);
        }
      } else {
        const auto q = pie_conic_bb_form(m.domain().arc(m.tri(t).arc).conic, m.triangle(t));
        for (const MultiIndex& b : domain_indices(2)) {
          const double qb = q[bb_index(2, b)];
          const MultiIndex c{al[0] - b[0], al[1] - b[1], al[2] - b[2]};
          if (qb == 0.0 || c[0] < 0 || c[1] < 0 || c[2] < 0) continue;
          f += (product_weight(c, b) * qb) * raw(c);
        }
      }
      six[t].push_back(f);
    }
  }

  std::vector<LinearForm> rows;
  // C0 and C1 across interior edges.
  for (const auto& e : m.edges()) {
    if (e.boundary) continue;
    const int src = e.tri[0], dst = e.tri[1];
    const SlotMap map = slot_map(m.tri(src).v, m.tri(dst).v);
    int opp = -1;
    for (int s = 0; s < 3; ++s)
      if (map[s] < 0) opp = s;
    const Bary ob = barycentric(m.triangle(src), m.vertex(m.tri(dst).v[opp]));
    auto get = [&](const MultiIndex& a) { return six[src][bb_index(6, a)]; };
    for (const MultiIndex& b : domain_indices(6)) {
      if (b[opp] > 1) continue;
      rows.push_back(extend_coefficient<LinearForm>(get, map, ob, b) - six[dst][bb_index(6, b)]);
    }
  }
  // Equal 2-jets at interior vertices.
  auto jet_rows = [&](int t, int slot) {
    const Triangle T = m.triangle(t);
    Bary b{0, 0, 0};
    b[slot] = 1;
    std::array<LinearForm, 6> out;
    std::vector<double> unit(28, 0.0);
    for (int k = 0; k < 28; ++k) {
      unit.assign(28, 0.0);
      unit[k] = 1;
      const Jet2 j = eval_bb_jet(BBPoly(6, T, unit), b);
      const std::array<double, 6> vals{j.value, j.grad.x(), j.grad.y(), j.hess(0, 0), j.hess(0, 1), j.hess(1, 1)};
      for (int c = 0; c < 6; ++c)
        if (vals[c] != 0.0) out[c] += vals[c] * six[t][k];
    }
    return out;
  };
  for (int v : m.interior_vertices()) {
    const auto& ts = m.vertex_triangles(v);
    const auto ref = jet_rows(ts[0], m.slot_of(ts[0], v));
    for (std::size_t k = 1; k < ts.size(); ++k) {
      const auto cur = jet_rows(ts[k], m.slot_of(ts[k], v));
      for (int c = 0; c < 6; ++c) rows.push_back(cur[c] - ref[c]);
    }
  }
  out.constraints = static_cast<int>(rows.size());

  if (dense) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(out.constraints, out.unknowns);
    for (int r = 0; r < out.constraints; ++r)
      for (const auto& [i, w] : rows[r].terms()) A(r, i) = w;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    out.rank = static_cast<int>(qr.rank());
    return out;
  }
  // Rows are scaled to unit length so the absolute pivot threshold is meaningful.
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < out.constraints; ++r) {
    double n2 = 0;
    for (const auto& [i, w] : rows[r].terms()) n2 += w * w;
    if (n2 == 0) continue;
    const double inv = 1 / std::sqrt(n2);
    for (const auto& [i, w] : rows[r].terms()) trip.emplace_back(r, i, w * inv);
  }
  Eigen::SparseMatrix<double> A(out.constraints, out.unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SPQR<Eigen::SparseMatrix<double>> qr;
  qr.setPivotThreshold(1e-10);
  qr.compute(A);
  if (qr.info() != Eigen::Success) throw SpaceError("rank oracle factorization failed");
  out.rank = static_cast<int>(qr.rank());
  return out;
}

nlohmann::json spline_to_json(const SplineFunction& s, bool expand) {
  nlohmann::json j;
  j["dimension"] = s.space().dimension();
  j["dofs"] = std::vector<double>(s.dofs().data(), s.dofs().data() + s.dofs().size());
  j["ordering"] = "lexicographic (i desc, then j desc)";
  if (expand) {
    auto& ps = j["patches"] = nlohmann::json::array();
    const auto& m = s.space().mesh();
    for (int t = 0; t < m.num_triangles(); ++t) {
      nlohmann::json p{{"triangle", t},
                       {"kind", to_string(m.tri(t).kind)},
                       {"degree", s.patch(t).degree},
                       {"coeffs", s.patch(t).coeffs}};
      if (m.tri(t).kind == TriKind::Pie) p["factor"] = s.pie_factor(t).coeffs;
      ps.push_back(p);
    }
  }
  return j;
}

SplineFunction spline_from_json(std::shared_ptr<const SplineSpace> space, const nlohmann::json& j) {
  const auto v = j.at("dofs").get<std::vector<double>>();
  return SplineFunction(std::move(space), Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

}  // namespace pcq
