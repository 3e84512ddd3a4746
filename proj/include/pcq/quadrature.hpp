#pragma once

#include <functional>
#include <vector>

#include "pcq/bernstein.hpp"
#include "pcq/mesh.hpp"

namespace pcq {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

/// Rule on the reference triangle: barycentric nodes, weights summing to one.
struct QuadratureRule {
  std::vector<Bary> nodes;
  std::vector<double> weights;
  int degree = 0;
};

/// Collapsed (Duffy) product of n-point Gauss rules; exact to degree 2n - 2.
const QuadratureRule& collapsed_rule(int n);
/// Default straight-triangle rule, exact to degree 16.
const QuadratureRule& triangle_rule();

/// Physical quadrature point with its weight (area or Jacobian included) and
/// barycentric coordinates with respect to the triangle's corner points.
struct QuadPoint {
  Point x;
  Bary b;
  double w;
};

/// Default tensor order on pie triangles.
inline constexpr int kPieOrder = 12;

/// Quadrature points of triangle t. Pie triangles use the radial map
/// (s, t) -> w + t (X(s) - w), X(s) the arc point on the ray through the chord
/// point (1 - s) z1 + s z2, with a tensor Gauss rule of the given order.
std::vector<QuadPoint> quadrature_points(const CurvedTriangulation& mesh, int t, int pie_order = kPieOrder);

double integrate(const CurvedTriangulation& mesh, int t, const std::function<double(const Point&)>& f,
                 int pie_order = kPieOrder);
double integrate(const CurvedTriangulation& mesh, const std::function<double(const Point&)>& f,
                 int pie_order = kPieOrder);

}  // namespace pcq
