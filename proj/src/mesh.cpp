#include "pcq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "pcq/bernstein.hpp"

namespace pcq {

namespace {

double cross(const Vector& a, const Vector& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string tri_name(int t) { return "triangle " + std::to_string(t); }
std::string vtx_name(int v) { return "vertex " + std::to_string(v); }
std::string edge_name(int a, int b) {
  return "edge (" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Rotates a counter-clockwise triple so that `first` comes first.
std::array<int, 3> rotate_to(const std::array<int, 3>& v, int first_slot) {
  return {v[first_slot], v[(first_slot + 1) % 3], v[(first_slot + 2) % 3]};
}

// Chooses the arc carrying the boundary edge (a, b); `inner` is the third
// vertex of the adjacent triangle, used to break ties between candidates.
int infer_arc(const ConicDomain& dom, const Point& a, const Point& b, const Point& inner) {
  std::vector<int> cand;
  for (int j = 0; j < dom.num_arcs(); ++j) {
    const auto& arc = dom.arc(j);
    if (arc.contains(a, 1e-9) && arc.contains(b, 1e-9)) cand.push_back(j);
  }
  if (cand.size() <= 1) return cand.empty() ? -1 : cand[0];
  for (int j : cand) {
    try {
      const Point x = arc_point_on_ray(dom.arc(j), inner, 0.5 * (a + b));
      if (dom.arc(j).contains(x, 1e-9)) return j;
    } catch (const GeometryError&) {
    }
  }
  return cand[0];
}

}  // namespace

const char* to_string(TriKind k) {
  switch (k) {
    case TriKind::Ordinary:
      return "ordinary";
    case TriKind::Buffer:
      return "buffer";
    case TriKind::Pie:
      return "pie";
  }
  return "?";
}

Triangle CurvedTriangulation::triangle(int t) const {
  const auto& r = tri(t);
  return Triangle{{vertex(r.v[0]), vertex(r.v[1]), vertex(r.v[2])}};
}

int CurvedTriangulation::slot_of(int t, int v) const {
  const auto& r = tri(t);
  for (int s = 0; s < 3; ++s)
    if (r.v[s] == v) return s;
  return -1;
}

std::vector<int> CurvedTriangulation::triangles_of_kind(TriKind k) const {
  std::vector<int> out;
  for (int t = 0; t < num_triangles(); ++t)
    if (tris_[t].kind == k) out.push_back(t);
  return out;
}

int CurvedTriangulation::count(TriKind k) const {
  return static_cast<int>(std::count_if(tris_.begin(), tris_.end(),
                                        [k](const TriangleRecord& r) { return r.kind == k; }));
}

int CurvedTriangulation::find_edge(int a, int b) const {
  for (int t : vertex_triangles(a)) {
    const auto& r = tri(t);
    for (int k = 0; k < 3; ++k) {
      const auto& e = edge(r.edge[k]);
      if ((e.v[0] == a && e.v[1] == b) || (e.v[0] == b && e.v[1] == a)) return r.edge[k];
    }
  }
  return -1;
}

RawMesh CurvedTriangulation::raw() const {
  RawMesh m;
  m.vertices = vertices_;
  for (const auto& r : tris_) {
    m.triangles.push_back(r.v);
    m.parents.push_back(r.parent);
  }
  for (const auto& e : edges_)
    if (e.boundary) m.boundary_edges.push_back({e.v[0], e.v[1], e.arc});
  return m;
}

nlohmann::json CurvedTriangulation::to_json() const {
  nlohmann::json j;
  j["domain"] = domain_.to_json();
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (const auto& p : vertices_) vs.push_back({p.x(), p.y()});
  auto& ts = j["triangles"] = nlohmann::json::array();
  auto& ks = j["kinds"] = nlohmann::json::array();
  for (const auto& r : tris_) {
    ts.push_back(r.v);
    ks.push_back(to_string(r.kind));
  }
  auto& bs = j["boundary_edges"] = nlohmann::json::array();
  for (const auto& e : edges_)
    if (e.boundary) bs.push_back({e.v[0], e.v[1], e.arc});
  return j;
}

CurvedTriangulation classify_and_validate(const ConicDomain& domain, const RawMesh& raw) {
  CurvedTriangulation m;
  m.domain_ = domain;
  m.vertices_ = raw.vertices;
  const int nv = static_cast<int>(raw.vertices.size());
  const int nt = static_cast<int>(raw.triangles.size());
  if (nt == 0) throw MeshError('-', "mesh", "no triangles");
  const double scale = std::max(domain.length_scale(), 1e-300);

  // Orientation.
  m.tris_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    auto v = raw.triangles[t];
    for (int id : v)
      if (id < 0 || id >= nv) throw MeshError('-', tri_name(t), "vertex index out of range");
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw MeshError('-', tri_name(t), "repeated vertex");
    const Triangle T{{raw.vertices[v[0]], raw.vertices[v[1]], raw.vertices[v[2]]}};
    const double a = T.signed_area();
    if (std::abs(a) <= 1e-14 * scale * scale) throw MeshError('-', tri_name(t), "degenerate triangle");
    if (a < 0) std::swap(v[1], v[2]);
    m.tris_[t].v = v;
    m.tris_[t].parent = raw.parents.empty() ? -1 : raw.parents[t];
  }

  // Edges and adjacency.
  auto build_edges = [&m, nv]() {
    // Rebuilding after re-rotation keeps the boundary flags and arcs.
    std::map<std::pair<int, int>, int> arcs;
    for (const auto& e : m.edges_) arcs[key(e.v[0], e.v[1])] = e.arc;
    m.edges_.clear();
    m.vertex_tris_.assign(nv, {});
    std::map<std::pair<int, int>, int> index;
    for (int t = 0; t < static_cast<int>(m.tris_.size()); ++t) {
      auto& r = m.tris_[t];
      for (int k = 0; k < 3; ++k) {
        m.vertex_tris_[r.v[k]].push_back(t);
        const int a = r.v[(k + 1) % 3], b = r.v[(k + 2) % 3];
        auto [it, fresh] = index.try_emplace(key(a, b), static_cast<int>(m.edges_.size()));
        if (fresh) {
          EdgeRecord e;
          e.v = {a, b};
          e.tri = {t, -1};
          if (auto f = arcs.find(key(a, b)); f != arcs.end()) e.arc = f->second;
          m.edges_.push_back(e);
        } else {
          auto& e = m.edges_[it->second];
          if (e.tri[1] >= 0) throw MeshError('-', edge_name(a, b), "edge shared by more than two triangles");
          if (e.v[0] != b || e.v[1] != a)
            throw MeshError('-', edge_name(a, b), "inconsistent orientation of neighbouring triangles");
          e.tri[1] = t;
        }
        r.edge[k] = it->second;
      }
    }
    for (auto& e : m.edges_) e.boundary = e.tri[1] < 0;
    for (auto& r : m.tris_) {
      for (int k = 0; k < 3; ++k) {
        const auto& e = m.edges_[r.edge[k]];
        const int self = &r - m.tris_.data();
        r.neighbor[k] = e.tri[0] == self ? e.tri[1] : e.tri[0];
      }
    }
  };
  build_edges();

  const int ne = static_cast<int>(m.edges_.size());
  if (nv - ne + nt != 1)
    throw MeshError('-', "mesh", "Euler characteristic " + std::to_string(nv - ne + nt) + " != 1");

  m.boundary_.assign(nv, false);
  for (auto& e : m.edges_) {
    e.boundary = e.tri[1] < 0;
    if (e.boundary) m.boundary_[e.v[0]] = m.boundary_[e.v[1]] = true;
  }
  for (int v = 0; v < nv; ++v)
    if (m.vertex_tris_[v].empty()) throw MeshError('-', vtx_name(v), "vertex not used by any triangle");

  // (a) corners are vertices.
  for (int j = 0; j < domain.num_arcs(); ++j) {
    const Point& z = domain.corners()[j];
    bool found = false;
    for (int v = 0; v < nv && !found; ++v)
      found = m.boundary_[v] && (m.vertices_[v] - z).norm() <= 1e-10 * scale;
    if (!found) throw MeshError('a', "corner " + std::to_string(j), "arc endpoint is not a mesh vertex");
  }

  // Arc of every boundary edge.
  std::map<std::pair<int, int>, int> given;
  for (const auto& be : raw.boundary_edges) given[key(be[0], be[1])] = be[2];
  for (auto& e : m.edges_) {
    if (!e.boundary) continue;
    const auto& r = m.tris_[e.tri[0]];
    int inner = -1;
    for (int id : r.v)
      if (id != e.v[0] && id != e.v[1]) inner = id;
    auto it = given.find(key(e.v[0], e.v[1]));
    if (it != given.end()) {
      e.arc = it->second;
      if (e.arc < 0 || e.arc >= domain.num_arcs())
        throw MeshError('-', edge_name(e.v[0], e.v[1]), "arc index out of range");
    } else {
      e.arc = infer_arc(domain, m.vertices_[e.v[0]], m.vertices_[e.v[1]], m.vertices_[inner]);
    }
    if (e.arc < 0)
      throw MeshError('-', edge_name(e.v[0], e.v[1]), "boundary edge endpoints do not lie on a common arc");
    const auto& arc = domain.arc(e.arc);
    for (int id : e.v) {
      if (std::abs(arc.conic(m.vertices_[id])) > 1e-9 * arc.conic.scale() * std::max(1.0, m.vertices_[id].squaredNorm()))
        throw MeshError('-', vtx_name(id), "boundary vertex is not on its arc");
    }
    if (arc.conic.degree() < 2) throw MeshError('f', edge_name(e.v[0], e.v[1]), "boundary edge is straight");
  }

  // (b) interior edges with both endpoints on the boundary.
  for (const auto& e : m.edges_)
    if (!e.boundary && m.boundary_[e.v[0]] && m.boundary_[e.v[1]])
      throw MeshError('b', edge_name(e.v[0], e.v[1]), "interior edge has both endpoints on the boundary");

  // Pie triangles.
  for (int t = 0; t < nt; ++t) {
    auto& r = m.tris_[t];
    int nb = 0, slot = -1;
    for (int k = 0; k < 3; ++k)
      if (m.edges_[r.edge[k]].boundary) {
        ++nb;
        slot = k;
      }
    if (nb > 1) throw MeshError('b', tri_name(t), "triangle has more than one boundary edge");
    if (nb == 1) {
      r.kind = TriKind::Pie;
      r.arc = m.edges_[r.edge[slot]].arc;
      r.v = rotate_to(r.v, slot);
    }
  }
  // (c) pie triangles do not share edges; buffers are their neighbours.
  build_edges();
  for (const auto& e : m.edges_) {
    if (e.tri[1] < 0) continue;
    if (m.tris_[e.tri[0]].kind == TriKind::Pie && m.tris_[e.tri[1]].kind == TriKind::Pie)
      throw MeshError('c', edge_name(e.v[0], e.v[1]), "two pie triangles share an edge");
  }
  for (int t = 0; t < nt; ++t) {
    auto& r = m.tris_[t];
    if (r.kind == TriKind::Pie) continue;
    for (int k = 0; k < 3; ++k)
      if (r.neighbor[k] >= 0 && m.tris_[r.neighbor[k]].kind == TriKind::Pie) r.kind = TriKind::Buffer;
  }
  // (g) buffers do not share edges.
  for (const auto& e : m.edges_) {
    if (e.tri[1] < 0) continue;
    if (m.tris_[e.tri[0]].kind == TriKind::Buffer && m.tris_[e.tri[1]].kind == TriKind::Buffer)
      throw MeshError('g', edge_name(e.v[0], e.v[1]), "two buffer triangles share an edge");
  }
  for (int t = 0; t < nt; ++t) {
    auto& r = m.tris_[t];
    if (r.kind == TriKind::Pie) continue;
    int nbv = 0, slot = -1;
    for (int k = 0; k < 3; ++k)
      if (m.boundary_[r.v[k]]) {
        ++nbv;
        slot = k;
      }
    if (r.kind == TriKind::Buffer) {
      if (nbv != 1) throw MeshError('g', tri_name(t), "buffer triangle must have exactly one boundary vertex");
      r.v = rotate_to(r.v, slot);
    } else if (nbv > 0) {
      throw MeshError('g', tri_name(t),
                      "ordinary triangle touches the boundary; boundary vertex fans must be pie-buffer-pie");
    }
  }
  build_edges();

  // Boundary vertex fans: exactly pie, buffer, pie.
  for (int v = 0; v < nv; ++v) {
    if (!m.boundary_[v]) continue;
    int np = 0, nbuf = 0;
    for (int t : m.vertex_tris_[v]) {
      if (m.tris_[t].kind == TriKind::Pie) ++np;
      if (m.tris_[t].kind == TriKind::Buffer) ++nbuf;
    }
    if (np != 2 || nbuf != 1 || m.vertex_tris_[v].size() != 3)
      throw MeshError('g', vtx_name(v), "boundary vertex fan is not pie-buffer-pie");
  }

  // (d) and (e) on every pie triangle.
  constexpr int kSamples = 50;
  for (int t = 0; t < nt; ++t) {
    const auto& r = m.tris_[t];
    if (r.kind != TriKind::Pie) continue;
    const auto& arc = domain.arc(r.arc);
    const Point w = m.vertices_[r.v[0]], z1 = m.vertices_[r.v[1]], z2 = m.vertices_[r.v[2]];
    Vector prev = z1 - w;
    for (int i = 0; i <= kSamples; ++i) {
      const double s = static_cast<double>(i) / kSamples;
      const Point c = (1 - s) * z1 + s * z2;
      Point x;
      try {
        x = arc_point_on_ray(arc, w, c);
      } catch (const GeometryError&) {
        throw MeshError('d', tri_name(t), "ray from the interior vertex misses the arc");
      }
      const double tol = 1e-8 * scale;
      if ((i == 0 && (x - z1).norm() > tol) || (i == kSamples && (x - z2).norm() > tol) ||
          (i > 0 && i < kSamples && !arc.contains(x, 1e-9)))
        throw MeshError('d', tri_name(t), "pie triangle is not star-shaped with respect to its interior vertex");
      if (i > 0 && cross(prev, x - w) <= 0)
        throw MeshError('d', tri_name(t), "arc is not monotone as seen from the interior vertex");
      prev = x - w;
      if (i == 0 || i == kSamples) continue;
      for (int k = 1; k < 10; ++k) {
        const Point y = w + (k / 10.0) * (x - w);
        if (!(arc.conic(y) > 0)) throw MeshError('e', tri_name(t), "conic is not positive inside the pie triangle");
      }
    }
  }

  // Derived sets.
  m.vb1_.assign(nv, false);
  m.tv_.assign(nv, -1);
  m.te_.assign(m.edges_.size(), -1);
  for (int v = 0; v < nv; ++v) {
    if (!m.boundary_[v]) {
      m.v_interior_.push_back(v);
      for (int t : m.vertex_tris_[v])
        if (m.tris_[t].kind == TriKind::Ordinary && (m.tv_[v] < 0 || t < m.tv_[v])) m.tv_[v] = t;
      if (m.tv_[v] < 0) throw MeshError('-', vtx_name(v), "interior vertex touches no ordinary triangle");
      continue;
    }
    m.v_boundary_.push_back(v);
    std::vector<int> arcs;
    for (int t : m.vertex_tris_[v]) {
      const auto& r = m.tris_[t];
      if (r.kind == TriKind::Pie) arcs.push_back(r.arc);
    }
    bool tangent = arcs[0] == arcs[1];
    if (!tangent) {
      const Vector g1 = domain.arc(arcs[0]).conic.gradient(m.vertices_[v]);
      const Vector g2 = domain.arc(arcs[1]).conic.gradient(m.vertices_[v]);
      tangent = std::abs(cross(g1, g2)) <= 1e-10 * g1.norm() * g2.norm() && g1.dot(g2) > 0;
    }
    m.vb1_[v] = tangent;
    if (tangent) {
      m.v_tangent_.push_back(v);
      for (int t : m.vertex_tris_[v])
        if (m.tris_[t].kind == TriKind::Pie && (m.tv_[v] < 0 || t < m.tv_[v])) m.tv_[v] = t;
    }
  }
  for (int e = 0; e < static_cast<int>(m.edges_.size()); ++e) {
    const auto& ed = m.edges_[e];
    if (ed.boundary || m.boundary_[ed.v[0]] || m.boundary_[ed.v[1]]) continue;
    m.e_interior0_.push_back(e);
    for (int t : ed.tri)
      if (t >= 0 && m.tris_[t].kind == TriKind::Ordinary && (m.te_[e] < 0 || t < m.te_[e])) m.te_[e] = t;
    if (m.te_[e] < 0)
      throw MeshError('g', edge_name(ed.v[0], ed.v[1]), "interior edge has no ordinary triangle");
  }
  return m;
}

CurvedTriangulation refine_uniform(const CurvedTriangulation& mesh) {
  RawMesh raw;
  raw.vertices = mesh.vertices();
  std::vector<int> mid(mesh.num_edges(), -1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(e);
    const Point a = mesh.vertex(ed.v[0]), b = mesh.vertex(ed.v[1]);
    Point m = 0.5 * (a + b);
    if (ed.boundary) {
      const auto& pie = mesh.tri(ed.tri[0]);
      m = arc_point_on_ray(mesh.domain().arc(ed.arc), mesh.vertex(pie.v[0]), m);
      raw.boundary_edges.push_back({ed.v[0], static_cast<int>(raw.vertices.size()), ed.arc});
      raw.boundary_edges.push_back({static_cast<int>(raw.vertices.size()), ed.v[1], ed.arc});
    }
    mid[e] = static_cast<int>(raw.vertices.size());
    raw.vertices.push_back(m);
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& r = mesh.tri(t);
    const int m0 = mid[r.edge[0]], m1 = mid[r.edge[1]], m2 = mid[r.edge[2]];
    raw.triangles.push_back({r.v[0], m2, m1});
    raw.triangles.push_back({m2, r.v[1], m0});
    raw.triangles.push_back({m1, m0, r.v[2]});
    raw.triangles.push_back({m0, m1, m2});
    for (int k = 0; k < 4; ++k) raw.parents.push_back(t);
  }
  return classify_and_validate(mesh.domain(), raw);
}

std::set<int> star(const CurvedTriangulation& mesh, const SimplexSet& a, int levels) {
  if (levels < 1) throw std::invalid_argument("star level must be positive");
  std::set<int> verts(a.vertices.begin(), a.vertices.end());
  for (int e : a.edges) verts.insert(mesh.edge(e).v.begin(), mesh.edge(e).v.end());
  for (int t : a.triangles) verts.insert(mesh.tri(t).v.begin(), mesh.tri(t).v.end());
  std::set<int> tris;
  for (int l = 0; l < levels; ++l) {
    for (int v : verts) tris.insert(mesh.vertex_triangles(v).begin(), mesh.vertex_triangles(v).end());
    for (int t : tris) verts.insert(mesh.tri(t).v.begin(), mesh.tri(t).v.end());
  }
  return tris;
}

bool triangle_contains(const CurvedTriangulation& mesh, int t, const Point& x, double tol) {
  const auto& r = mesh.tri(t);
  const Bary b = barycentric(mesh.triangle(t), x);
  if (r.kind != TriKind::Pie) return b[0] >= -tol && b[1] >= -tol && b[2] >= -tol;
  if (b[1] < -tol || b[2] < -tol) return false;
  const Point w = mesh.vertex(r.v[0]);
  if ((x - w).norm() <= tol * mesh.domain().length_scale()) return true;
  try {
    return arc_ray_parameter(mesh.domain().arc(r.arc), w, x) >= 1 - tol;
  } catch (const GeometryError&) {
    return false;
  }
}

int locate(const CurvedTriangulation& mesh, const Point& x, double tol) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle T = mesh.triangle(t);
    const double h = T.diameter();
    const Point lo = T.v[0].cwiseMin(T.v[1]).cwiseMin(T.v[2]).array() - h;
    const Point hi = T.v[0].cwiseMax(T.v[1]).cwiseMax(T.v[2]).array() + h;
    if ((x.array() < lo.array()).any() || (x.array() > hi.array()).any()) continue;
    if (triangle_contains(mesh, t, x, tol)) return t;
  }
  return -1;
}

RawMesh raw_mesh_from_json(const nlohmann::json& j) {
  RawMesh m;
  for (const auto& p : j.at("vertices")) m.vertices.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& t : j.at("triangles")) m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  if (j.contains("boundary_edges"))
    for (const auto& b : j.at("boundary_edges"))
      m.boundary_edges.push_back({b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>()});
  return m;
}

CurvedTriangulation load_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError('-', path.string(), "cannot open mesh file");
  const nlohmann::json j = nlohmann::json::parse(in);
  ConicDomain dom;
  if (j.contains("domain")) {
    dom = domain_from_json(j.at("domain"));
  } else if (j.contains("domain_file")) {
    dom = load_domain_file(path.parent_path() / j.at("domain_file").get<std::string>());
  } else {
    throw MeshError('-', path.string(), "mesh file has neither domain nor domain_file");
  }
  return classify_and_validate(dom, raw_mesh_from_json(j));
}

}  // namespace pcq
