#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcq/geometry.hpp"

namespace pcq {

/// Validation failure. `condition` is the letter of the violated mesh
/// condition ('a'..'g') or '-' for structural problems (orientation,
/// non-manifold edges, unsupported vertex fans).
class MeshError : public std::runtime_error {
 public:
  MeshError(char condition, std::string simplex, const std::string& what)
      : std::runtime_error("condition (" + std::string(1, condition) + ") violated at " + simplex +
                           ": " + what),
        condition_(condition),
        simplex_(std::move(simplex)) {}
  char condition() const { return condition_; }
  const std::string& simplex() const { return simplex_; }

 private:
  char condition_;
  std::string simplex_;
};

enum class TriKind { Ordinary, Buffer, Pie };
const char* to_string(TriKind k);

/// Straight-edge input triangulation of the chord polygon.
struct RawMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Optional explicit arc per boundary edge: (vertex a, vertex b, arc index).
  std::vector<std::array<int, 3>> boundary_edges;
  /// Optional parent triangle per triangle (set by refinement).
  std::vector<int> parents;
};

struct TriangleRecord {
  /// Counter-clockwise vertex ids. Pie: slot 0 is the interior vertex.
  /// Buffer: slot 0 is the boundary vertex.
  std::array<int, 3> v{};
  TriKind kind = TriKind::Ordinary;
  /// Arc carrying the curved edge (pie only), else -1.
  int arc = -1;
  /// edge[k] is opposite v[k]; neighbor[k] is the triangle across it or -1.
  std::array<int, 3> edge{-1, -1, -1};
  std::array<int, 3> neighbor{-1, -1, -1};
  int parent = -1;
};

struct EdgeRecord {
  std::array<int, 2> v{};
  std::array<int, 2> tri{-1, -1};
  bool boundary = false;
  int arc = -1;
};

/// Validated curved triangulation with the derived vertex and edge sets.
class CurvedTriangulation {
 public:
  const ConicDomain& domain() const { return domain_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<TriangleRecord>& triangles() const { return tris_; }
  const TriangleRecord& tri(int t) const { return tris_[static_cast<std::size_t>(t)]; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  const EdgeRecord& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  bool is_boundary_vertex(int v) const { return boundary_[static_cast<std::size_t>(v)]; }
  bool in_vb1(int v) const { return vb1_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& vertex_triangles(int v) const {
    return vertex_tris_[static_cast<std::size_t>(v)];
  }
  /// Triangle corners as points (chord triangle for pie triangles).
  Triangle triangle(int t) const;
  /// Slot of vertex v in triangle t, or -1.
  int slot_of(int t, int v) const;

  /// V_I, V_B, V_B^1, E_I^0 (interior edges with both endpoints interior).
  const std::vector<int>& interior_vertices() const { return v_interior_; }
  const std::vector<int>& boundary_vertices() const { return v_boundary_; }
  const std::vector<int>& tangent_vertices() const { return v_tangent_; }
  const std::vector<int>& interior_edges0() const { return e_interior0_; }
  std::vector<int> triangles_of_kind(TriKind k) const;
  int count(TriKind k) const;

  /// Designated triangle T_v (interior vertex or tangent boundary vertex), -1 otherwise.
  int designated_vertex_triangle(int v) const { return tv_[static_cast<std::size_t>(v)]; }
  /// Designated triangle T_e for e in E_I^0, -1 otherwise.
  int designated_edge_triangle(int e) const { return te_[static_cast<std::size_t>(e)]; }

  /// Finds the edge joining a and b, or -1.
  int find_edge(int a, int b) const;

  /// Re-exported raw form (used for refinement and file output).
  RawMesh raw() const;
  nlohmann::json to_json() const;

  friend CurvedTriangulation classify_and_validate(const ConicDomain& domain, const RawMesh& raw);

 private:
  ConicDomain domain_;
  std::vector<Point> vertices_;
  std::vector<TriangleRecord> tris_;
  std::vector<EdgeRecord> edges_;
  std::vector<std::vector<int>> vertex_tris_;
  std::vector<bool> boundary_;
  std::vector<bool> vb1_;
  std::vector<int> v_interior_, v_boundary_, v_tangent_, e_interior0_;
  std::vector<int> tv_, te_;
};

/// Builds adjacency, classifies triangles, and checks conditions (a)-(g).
/// Throws MeshError naming the first violated condition.
CurvedTriangulation classify_and_validate(const ConicDomain& domain, const RawMesh& raw);

/// Splits every triangle into four; curved edges are split on the arc along
/// the ray from the pie's interior vertex through the chord midpoint.
CurvedTriangulation refine_uniform(const CurvedTriangulation& mesh);

/// Simplices for star queries.
struct SimplexSet {
  std::vector<int> vertices;
  std::vector<int> edges;
  std::vector<int> triangles;
};

/// st^l(A): triangles meeting A, iterated l times.
std::set<int> star(const CurvedTriangulation& mesh, const SimplexSet& a, int levels);

/// True if x lies in the closed (curved) triangle t within tolerance.
bool triangle_contains(const CurvedTriangulation& mesh, int t, const Point& x, double tol = 1e-12);
/// Point location by bounding boxes and containment tests; -1 if outside.
int locate(const CurvedTriangulation& mesh, const Point& x, double tol = 1e-12);

RawMesh raw_mesh_from_json(const nlohmann::json& j);
/// Loads a mesh file; the domain comes from "domain" (inline) or
/// "domain_file" (relative to the mesh file).
CurvedTriangulation load_mesh_file(const std::filesystem::path& path);

}  // namespace pcq
