#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "pcq/problems.hpp"

using namespace pcq;

namespace {

const std::filesystem::path kTestData = std::filesystem::path(__FILE__).parent_path() / "data";

char condition_of(const ConicDomain& dom, const RawMesh& raw) {
  try {
    classify_and_validate(dom, raw);
  } catch (const MeshError& e) {
    return e.condition();
  }
  return 0;
}

void check_invariants(const CurvedTriangulation& m) {
  CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
  for (int t = 0; t < m.num_triangles(); ++t) {
    CHECK(m.triangle(t).signed_area() > 0);
    const auto& r = m.tri(t);
    if (r.kind == TriKind::Pie) {
      CHECK_FALSE(m.is_boundary_vertex(r.v[0]));
      CHECK(m.edge(r.edge[0]).boundary);
    }
    if (r.kind == TriKind::Buffer) CHECK(m.is_boundary_vertex(r.v[0]));
  }
  for (int v : m.boundary_vertices()) CHECK(m.in_vb1(v));
}

}  // namespace

TEST_CASE("shipped meshes validate and classify") {
  for (ProblemId id : {ProblemId::Disk, ProblemId::EllipseExp, ProblemId::C2Domain}) {
    CAPTURE(to_string(id));
    const auto m = builtin_mesh(id);
    check_invariants(*m);
    CHECK(m->count(TriKind::Pie) == static_cast<int>(m->boundary_vertices().size()));
    CHECK(m->count(TriKind::Buffer) == static_cast<int>(m->boundary_vertices().size()));
  }
  const auto disk = builtin_mesh(ProblemId::Disk);
  CHECK(disk->interior_vertices().size() == 9);
  CHECK(disk->tangent_vertices().size() == 8);
}

TEST_CASE("violations are reported with their condition") {
  const ConicDomain disk = builtin_domain(ProblemId::Disk);
  RawMesh raw;
  raw.vertices = {Point(0, 0), Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)};
  raw.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
  CHECK(condition_of(disk, raw) == 'c');

  // Interior edge 1-3 joins two boundary vertices.
  RawMesh chord;
  chord.vertices = {Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)};
  chord.triangles = {{0, 1, 2}, {0, 2, 3}};
  CHECK(condition_of(disk, chord) == 'b');

  // Arc endpoints missing from the vertex set.
  const double s = std::sqrt(0.5);
  RawMesh corners;
  corners.vertices = {Point(0, 0), Point(s, s), Point(-s, s), Point(-s, -s), Point(s, -s)};
  corners.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
  CHECK(condition_of(disk, corners) == 'a');

  // A boundary edge on a straight piece: the cap of the unit disk above y = 1/2.
  const double h = std::sqrt(0.75);
  const ConicDomain cap({{Conic({-1, 0, -1, 0, 0, 1}), Point(h, 0.5), Point(-h, 0.5)},
                         {Conic({0, 0, 0, 0, 1, -0.5}), Point(-h, 0.5), Point(h, 0.5)}});
  RawMesh straight;
  straight.vertices = {Point(h, 0.5), Point(0, 1), Point(-h, 0.5), Point(0, 0.7)};
  straight.triangles = {{3, 0, 1}, {3, 1, 2}, {3, 2, 0}};
  CHECK(condition_of(cap, straight) == 'f');

  // Orientation and manifoldness problems are structural.
  RawMesh repeated = raw;
  repeated.triangles.push_back({0, 1, 2});
  CHECK(condition_of(disk, repeated) == '-');
}

TEST_CASE("buffer fans") {
  // Four boundary vertices, a ring of four interior vertices and a centre.
  const ConicDomain disk = builtin_domain(ProblemId::Disk);
  RawMesh s;
  s.vertices = {Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)};
  for (int i = 0; i < 4; ++i) {
    const double t = (i + 0.5) * M_PI / 2;
    s.vertices.emplace_back(0.5 * std::cos(t), 0.5 * std::sin(t));
  }
  s.vertices.emplace_back(0, 0);
  for (int i = 0; i < 4; ++i) {
    s.triangles.push_back({4 + i, i, (i + 1) % 4});
    s.triangles.push_back({i, 4 + i, 4 + (i + 3) % 4});
  }
  RawMesh fan = s;
  for (int i = 0; i < 4; ++i) fan.triangles.push_back({8, 4 + i, 4 + (i + 1) % 4});
  CHECK(condition_of(disk, fan) == 0);

  // Same ring, interior split along a diagonal without the centre.
  RawMesh quad = s;
  quad.vertices.pop_back();
  quad.triangles.push_back({4, 5, 6});
  quad.triangles.push_back({4, 6, 7});
  CHECK(condition_of(disk, quad) == 0);

  // Splitting the buffer at (1, 0) through an interior point leaves two
  // buffers sharing the edge from (1, 0) to that point.
  RawMesh split = fan;
  const int p = static_cast<int>(split.vertices.size());
  split.vertices.emplace_back(0.6, 0);
  const auto it = std::find(split.triangles.begin(), split.triangles.end(), std::array<int, 3>{0, 4, 7});
  REQUIRE(it != split.triangles.end());
  split.triangles.erase(it);
  split.triangles.push_back({0, 4, p});
  split.triangles.push_back({4, 7, p});
  split.triangles.push_back({7, 0, p});
  CHECK(condition_of(disk, split) == 'g');
}

TEST_CASE("loading a mesh with two adjacent pies fails with (c)") {
  CHECK_THROWS_AS(load_mesh_file(kTestData / "pie_pair.json"), MeshError);
  try {
    load_mesh_file(kTestData / "pie_pair.json");
  } catch (const MeshError& e) {
    CHECK(e.condition() == 'c');
    CHECK(std::string(e.what()).find("(c)") != std::string::npos);
  }
}

TEST_CASE("uniform refinement") {
  for (ProblemId id : {ProblemId::Disk, ProblemId::EllipseExp, ProblemId::C2Domain}) {
    CAPTURE(to_string(id));
    CurvedTriangulation m = *builtin_mesh(id);
    for (int level = 2; level <= 6; ++level) {
      const CurvedTriangulation f = refine_uniform(m);
      CHECK(f.num_triangles() == 4 * m.num_triangles());
      CHECK(f.count(TriKind::Pie) == 2 * m.count(TriKind::Pie));
      check_invariants(f);
      for (const auto& e : f.edges()) {
        if (!e.boundary) continue;
        const auto& q = f.domain().arc(e.arc).conic;
        for (int v : e.v) CHECK(std::abs(q(f.vertex(v))) <= 1e-13 * q.scale());
      }
      for (int t = 0; t < f.num_triangles(); ++t) {
        const Triangle T = f.triangle(t);
        const Point c = (T.v[0] + T.v[1] + T.v[2]) / 3;
        CHECK(triangle_contains(m, f.tri(t).parent, c, 1e-10));
      }
      m = f;
      if (id != ProblemId::Disk && level >= 4) break;  // keep the run short
    }
  }
}

TEST_CASE("refinement of single triangles") {
  const ConicDomain disk = builtin_domain(ProblemId::Disk);
  const CurvedTriangulation m = *builtin_mesh(ProblemId::Disk);
  const CurvedTriangulation f = refine_uniform(m);
  // Pie (w, b0, b1) with b0 = (1, 0), b1 = (s, s): midpoint on the ray through the chord midpoint.
  for (int t : m.triangles_of_kind(TriKind::Pie)) {
    const auto& r = m.tri(t);
    const Point w = m.vertex(r.v[0]);
    const Point mid = arc_point_on_ray(disk.arc(r.arc), w, 0.5 * (m.vertex(r.v[1]) + m.vertex(r.v[2])));
    bool found = false;
    for (const Point& v : f.vertices()) found = found || (v - mid).norm() < 1e-14;
    CHECK(found);
    CHECK(std::abs(mid.norm() - 1) < 1e-14);
  }
  // Straight triangle children.
  const ConicDomain dom = builtin_domain(ProblemId::Disk);
  RawMesh s;
  const double r = 0.5;
  s.vertices = {Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)};
  for (int i = 0; i < 4; ++i) {
    const double t = (i + 0.5) * M_PI / 2;
    s.vertices.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  for (int i = 0; i < 4; ++i) {
    s.triangles.push_back({4 + i, i, (i + 1) % 4});
    s.triangles.push_back({i, 4 + i, 4 + (i + 3) % 4});
  }
  s.triangles.push_back({4, 5, 6});
  s.triangles.push_back({4, 6, 7});
  const CurvedTriangulation sm = classify_and_validate(dom, s);
  const CurvedTriangulation sf = refine_uniform(sm);
  const Point a = sm.vertex(4), b = sm.vertex(5), c = sm.vertex(6);
  for (const Point& p : {Point(0.5 * (a + b)), Point(0.5 * (b + c)), Point(0.5 * (a + c))}) {
    bool found = false;
    for (const Point& v : sf.vertices()) found = found || (v - p).norm() < 1e-15;
    CHECK(found);
  }
}

TEST_CASE("stars") {
  const auto m = builtin_mesh(ProblemId::Disk);
  for (int v : m->interior_vertices()) {
    const auto st = star(*m, {{v}, {}, {}}, 1);
    CHECK(st == std::set<int>(m->vertex_triangles(v).begin(), m->vertex_triangles(v).end()));
  }
  for (int t = 0; t < m->num_triangles(); ++t) {
    const auto s1 = star(*m, {{}, {}, {t}}, 1);
    CHECK(s1.count(t) == 1);
    const auto s2 = star(*m, {{}, {}, {t}}, 2);
    for (int x : s1) CHECK(s2.count(x) == 1);
  }
  CHECK_THROWS(star(*m, {{0}, {}, {}}, 0));

  std::mt19937 rng(1);
  const CurvedTriangulation f = refine_uniform(*m);
  std::uniform_int_distribution<int> pick(0, f.num_triangles() - 1);
  for (int k = 0; k < 100; ++k) {
    const int t = pick(rng);
    const auto s1 = star(f, {{}, {}, {t}}, 1), s2 = star(f, {{}, {}, {t}}, 2);
    for (int x : s1) CHECK(s2.count(x) == 1);
  }
}

TEST_CASE("point location") {
  const auto m = builtin_mesh(ProblemId::EllipseExp);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ux(-1, 1), uy(-0.4, 0.4);
  int inside = 0;
  for (int k = 0; k < 500; ++k) {
    const Point x(ux(rng), uy(rng));
    const bool in = x.x() * x.x() + 6.25 * x.y() * x.y() < 1 - 1e-9;
    const int t = locate(*m, x);
    if (in) {
      ++inside;
      CHECK(t >= 0);
    } else if (x.x() * x.x() + 6.25 * x.y() * x.y() > 1 + 1e-9) {
      CHECK(t < 0);
    }
  }
  CHECK(inside > 100);
}

TEST_CASE("json round trip") {
  const auto m = builtin_mesh(ProblemId::C2Domain);
  const nlohmann::json j = m->to_json();
  const CurvedTriangulation r = classify_and_validate(domain_from_json(j.at("domain")), raw_mesh_from_json(j));
  CHECK(r.num_triangles() == m->num_triangles());
  for (int t = 0; t < r.num_triangles(); ++t) CHECK(r.tri(t).kind == m->tri(t).kind);
}
