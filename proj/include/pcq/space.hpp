#pragma once

#include <array>
#include <memory>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "pcq/bernstein.hpp"
#include "pcq/linear_form.hpp"
#include "pcq/mesh.hpp"

namespace pcq {

class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DofCategory { Vertex, Edge, TangentVertex, Pie, Buffer };
const char* to_string(DofCategory c);

/// One coefficient-extraction functional of the determining set. The
/// functional reads the BB coefficient at `index` of `triangle`'s patch:
/// degree 5 (ordinary), 6 (buffer) or the degree-4 factor p (pie).
struct DofDescriptor {
  DofCategory category = DofCategory::Vertex;
  int owner = -1;  // vertex, edge or triangle id depending on the category
  int triangle = -1;
  MultiIndex index{};
  int degree = 5;
};

struct DofCounts {
  int vertex = 0, edge = 0, tangent = 0, pie = 0, buffer = 0;
  int total() const { return vertex + edge + tangent + pie + buffer; }
};

class MinimalDeterminingSet {
 public:
  MinimalDeterminingSet() = default;
  explicit MinimalDeterminingSet(std::shared_ptr<const CurvedTriangulation> mesh);

  const CurvedTriangulation& mesh() const { return *mesh_; }
  std::shared_ptr<const CurvedTriangulation> mesh_ptr() const { return mesh_; }
  const std::vector<DofDescriptor>& dofs() const { return dofs_; }
  const DofDescriptor& dof(int i) const { return dofs_[static_cast<std::size_t>(i)]; }
  int dimension() const { return static_cast<int>(dofs_.size()); }
  const DofCounts& counts() const { return counts_; }
  /// 6|V_I| + |E_I^0| + |V_B^1| + 5|pies| + 2|buffers|
  int formula_dimension() const;
  /// Domain point of a dof (on the chord triangle for pie dofs).
  Point domain_point(int i) const;

 private:
  std::shared_ptr<const CurvedTriangulation> mesh_;
  std::vector<DofDescriptor> dofs_;
  DofCounts counts_;
};

MinimalDeterminingSet build_mds(std::shared_ptr<const CurvedTriangulation> mesh);

/// Solves the lower-triangular system linking the six coefficients of q p
/// nearest to the pie's interior vertex (degree 6, order 600, 510, 501, 420,
/// 402, 411) with those of p (degree 4, order 400, 310, 301, 220, 202, 211).
/// Assumes q200 = 1 and q020 = q002 = 0.
template <class V>
std::array<V, 6> factor_ring_solve(const std::array<V, 6>& a, double q110, double q101, double q011) {
  const std::array<double, 6> q{1.0, q110, q101, 0.0, q011, 0.0};
  const auto r4 = d2_ring(4, 0);
  const auto r6 = d2_ring(6, 0);
  std::array<V, 6> c{};
  for (int k = 0; k < 6; ++k) {
    V rhs = a[k];
    for (const MultiIndex& b : domain_indices(2)) {
      if (b == MultiIndex{2, 0, 0}) continue;
      const double qb = q[bb_index(2, b)];
      if (qb == 0.0) continue;
      const MultiIndex al{r6[k][0] - b[0], r6[k][1] - b[1], r6[k][2] - b[2]};
      if (al[0] < 0 || al[1] < 0 || al[2] < 0) continue;
      int pos = -1;
      for (int j = 0; j < k; ++j)
        if (r4[j] == al) pos = j;
      if (pos < 0) throw SpaceError("factor_ring_solve: system is not triangular");
      rhs = rhs - (product_weight(al, b) * qb) * c[pos];
    }
    c[k] = (1.0 / product_weight(r4[k], {2, 0, 0})) * rhs;
  }
  return c;
}

/// Linear map from the global dofs touching a triangle to its BB coefficients.
struct LocalMap {
  std::vector<int> dofs;
  /// Coefficients of the evaluation polynomial (degree 5 ordinary, 6 otherwise;
  /// for pies this is the product q p over the chord triangle).
  Eigen::MatrixXd bb;
  /// Pie only: the degree-4 factor p.
  Eigen::MatrixXd p;
  int degree = 5;
};

/// The spline space with its determining set and the propagation maps.
class SplineSpace {
 public:
  static std::shared_ptr<const SplineSpace> build(std::shared_ptr<const CurvedTriangulation> mesh);

  const CurvedTriangulation& mesh() const { return mds_.mesh(); }
  std::shared_ptr<const CurvedTriangulation> mesh_ptr() const { return mds_.mesh_ptr(); }
  const MinimalDeterminingSet& mds() const { return mds_; }
  int dimension() const { return mds_.dimension(); }
  const LocalMap& local_map(int t) const { return maps_[static_cast<std::size_t>(t)]; }
  int degree(int t) const { return maps_[static_cast<std::size_t>(t)].degree; }
  /// Normalized conic BB form of a pie triangle (q(w) = 1).
  const std::array<double, 6>& pie_conic(int t) const { return pie_q_[static_cast<std::size_t>(t)]; }
  /// Normalized conic of a pie triangle as a function.
  double pie_conic_value(int t, const Point& x) const;
  /// Largest disagreement between overlapping coefficient assignments.
  double consistency_defect() const { return defect_; }
  /// Largest disagreement between the two routes to the pie coefficients
  /// next to a buffer dof 411.
  double pie_edge_defect() const { return defect5_; }

 private:
  MinimalDeterminingSet mds_;
  std::vector<LocalMap> maps_;
  std::vector<std::array<double, 6>> pie_q_;
  double defect_ = 0, defect5_ = 0;
};

/// A spline given by its dof vector, with all patches expanded.
class SplineFunction {
 public:
  SplineFunction() = default;
  SplineFunction(std::shared_ptr<const SplineSpace> space, Eigen::VectorXd dofs);

  const SplineSpace& space() const { return *space_; }
  std::shared_ptr<const SplineSpace> space_ptr() const { return space_; }
  const Eigen::VectorXd& dofs() const { return dofs_; }
  const BBPoly& patch(int t) const { return patches_[static_cast<std::size_t>(t)]; }
  /// Degree-4 factor of a pie patch.
  const BBPoly& pie_factor(int t) const { return factors_[static_cast<std::size_t>(t)]; }

  /// Value of functional i re-read from the patches.
  double functional(int i) const;

  double value(const Point& x) const;
  Vector gradient(const Point& x) const;
  Eigen::Matrix2d hessian(const Point& x) const;
  /// Evaluation on a known triangle.
  Jet2 jet(int t, const Point& x) const;
  Jet2 jet(const Point& x) const;

 private:
  int locate_or_throw(const Point& x) const;
  std::shared_ptr<const SplineSpace> space_;
  Eigen::VectorXd dofs_;
  std::vector<BBPoly> patches_;
  std::vector<BBPoly> factors_;
};

SplineFunction propagate(std::shared_ptr<const SplineSpace> space, const Eigen::VectorXd& dofs);

/// Triangles on which the dual basis function of dof i is nonzero.
std::set<int> basis_support(const SplineSpace& space, int i, double threshold = 1e-13);
/// Triangles whose closure contains the domain point of dof i.
std::vector<int> dof_triangles(const SplineSpace& space, int i);

/// Dimension of the spline space computed independently as the nullity of
/// the smoothness constraints on raw per-triangle coefficients.
struct RankOracle {
  int unknowns = 0;
  int constraints = 0;
  int rank = 0;
  int nullity() const { return unknowns - rank; }
};
RankOracle rank_oracle(const CurvedTriangulation& mesh, bool dense = false);

nlohmann::json spline_to_json(const SplineFunction& s, bool expand);
SplineFunction spline_from_json(std::shared_ptr<const SplineSpace> space, const nlohmann::json& j);

}  // namespace pcq
