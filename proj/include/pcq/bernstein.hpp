#pragma once

#include <array>
#include <span>
#include <vector>

#include "pcq/geometry.hpp"

namespace pcq {

/// Highest polynomial degree supported by the factorial and index tables.
inline constexpr int kMaxDegree = 10;

/// Exponents (i, j, k) with respect to the three triangle slots.
using MultiIndex = std::array<int, 3>;
/// Barycentric coordinates (or barycentric direction, summing to zero).
using Bary = std::array<double, 3>;

inline constexpr int num_coeffs(int d) { return (d + 1) * (d + 2) / 2; }

/// Lexicographic position of (i, j, k), descending in i then in j.
inline constexpr int bb_index(int d, const MultiIndex& a) {
  return (d - a[0]) * (d - a[0] + 1) / 2 + a[2];
}

/// All multi-indices of degree d in lexicographic order.
const std::vector<MultiIndex>& domain_indices(int d);

double factorial(int n);
/// d! / (i! j! k!)
double multinomial(const MultiIndex& a);

Point domain_point(const Triangle& tri, int d, const MultiIndex& a);

/// Barycentric coordinates of v; throws GeometryError on a degenerate triangle.
Bary barycentric(const Triangle& tri, const Point& v);
/// Barycentric coordinates of a direction vector (they sum to zero).
Bary barycentric_direction(const Triangle& tri, const Vector& u);
/// Cartesian gradients of the three barycentric coordinate functions.
std::array<Vector, 3> barycentric_gradients(const Triangle& tri);

/// Polynomial in BB form over a triangle.
struct BBPoly {
  int degree = 0;
  Triangle tri;
  std::vector<double> coeffs;

  BBPoly() = default;
  BBPoly(int d, const Triangle& t);
  BBPoly(int d, const Triangle& t, std::vector<double> c);

  double& operator[](const MultiIndex& a) { return coeffs[bb_index(degree, a)]; }
  double operator[](const MultiIndex& a) const { return coeffs[bb_index(degree, a)]; }
};

/// de Casteljau evaluation of BB coefficients at barycentric point b.
double de_casteljau(int d, std::span<const double> c, const Bary& b);
/// Coefficients (degree d-1) of the directional derivative along a
/// barycentric direction.
std::vector<double> directional_difference(int d, std::span<const double> c, const Bary& dir);

double eval_bb(const BBPoly& p, const Bary& b);
double eval_bb(const BBPoly& p, const Point& x);
/// Derivative of order directions.size() (at most 2) along Cartesian directions.
double eval_bb_derivative(const BBPoly& p, const Bary& b, std::span<const Vector> directions);
Vector eval_bb_gradient(const BBPoly& p, const Bary& b);
Eigen::Matrix2d eval_bb_hessian(const BBPoly& p, const Bary& b);

/// Value, gradient and Hessian at once.
struct Jet2 {
  double value = 0;
  Vector grad = Vector::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};
Jet2 eval_bb_jet(const BBPoly& p, const Bary& b);

BBPoly degree_raise(const BBPoly& p, int target);
/// Product of two BB polynomials over the same triangle.
BBPoly bb_product(const BBPoly& p, const BBPoly& q);
/// Weight of c_a q_b in the product coefficient of index a + b:
/// C(d1; a) C(d2; b) / C(d1 + d2; a + b).
double product_weight(const MultiIndex& a, const MultiIndex& b);

/// The six domain indices nearest to the vertex in `slot` (0, 1 or 2), ordered
/// like (d00, d-1 10, d-1 01, d-2 20, d-2 02, d-2 11) for slot 0.
std::array<MultiIndex, 6> d2_ring(int d, int slot);

/// Values of all Bernstein polynomials of degree d at b, in lexicographic order.
void bernstein_values(int d, const Bary& b, std::span<double> out);
/// Monomial-based matrix converting BB coefficients of degree d at the domain
/// points of degree `at_degree` (collocation matrix, rows = points).
Eigen::MatrixXd collocation_matrix(int d, int at_degree);

/// Jump of two polynomials across a shared edge: the largest C0 and C1
/// defects relative to the coefficient scale. Triangles are matched by vertex
/// position; both polynomials must have the same degree.
struct JoinDefect {
  double c0 = 0;
  double c1 = 0;
};
JoinDefect join_defect(const BBPoly& p, const BBPoly& q, double match_tol = 1e-12);
bool joins_c0(const BBPoly& p, const BBPoly& q, double tol = 1e-10);
bool joins_c1(const BBPoly& p, const BBPoly& q, double tol = 1e-10);

/// Slot correspondence between two triangles sharing an edge: for each slot
/// of `dst`, the slot of the same vertex in `src`, or -1 for the vertex of
/// `dst` opposite the shared edge.
using SlotMap = std::array<int, 3>;

/// Coefficient of the polynomial with BB coefficients `get` over `src`
/// re-expressed over a neighbouring triangle `dst` at multi-index `beta`
/// (indexed by dst slots). The exponent of the vertex of dst opposite the
/// shared edge is handled by repeated de Casteljau steps at that vertex, so
/// only coefficients of src within that many rows of the edge are read.
template <class V, class Get>
V extend_coefficient(Get&& get, const SlotMap& map, const Bary& opposite_bary,
                     const MultiIndex& beta) {
  int opp_slot = -1;
  MultiIndex alpha{0, 0, 0};
  for (int t = 0; t < 3; ++t) {
    if (map[t] < 0) {
      opp_slot = t;
    } else {
      alpha[map[t]] = beta[t];
    }
  }
  const int r = opp_slot < 0 ? 0 : beta[opp_slot];
  // Recursion over the r de Casteljau steps.
  auto rec = [&](auto&& self, MultiIndex a, int steps) -> V {
    if (steps == 0) return get(a);
    V acc{};
    for (int u = 0; u < 3; ++u) {
      if (opposite_bary[u] == 0.0) continue;
      MultiIndex b = a;
      ++b[u];
      acc = acc + opposite_bary[u] * self(self, b, steps - 1);
    }
    return acc;
  };
  return rec(rec, alpha, r);
}

/// Builds the slot map between two triangles given by vertex ids.
SlotMap slot_map(const std::array<int, 3>& src_ids, const std::array<int, 3>& dst_ids);

}  // namespace pcq
