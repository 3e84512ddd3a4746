#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace pcq {

using Point = Eigen::Vector2d;
using Vector = Eigen::Vector2d;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Straight triangle given by its three vertices (counter-clockwise in a mesh).
struct Triangle {
  std::array<Point, 3> v;

  /// Signed area, positive for counter-clockwise vertex order.
  double signed_area() const;
  double area() const { return std::abs(signed_area()); }
  double diameter() const;
};

/// Implicit curve of degree at most two:
/// q(x) = k1 x1^2 + k2 x1 x2 + k3 x2^2 + k4 x1 + k5 x2 + k6.
class Conic {
 public:
  Conic() = default;
  /// Throws GeometryError if the coefficients do not describe an admissible
  /// line or irreducible conic.
  explicit Conic(const std::array<double, 6>& k);

  const std::array<double, 6>& coeffs() const { return k_; }
  int degree() const { return degree_; }

  double operator()(const Point& x) const;
  Vector gradient(const Point& x) const;
  /// Constant Hessian of q.
  Eigen::Matrix2d hessian() const;
  /// Polar (blossom) form Q(x, y) with Q(x, x) = q(x).
  double polar(const Point& x, const Point& y) const;
  /// Largest coefficient magnitude.
  double scale() const;

  Conic scaled(double factor) const;

 private:
  std::array<double, 6> k_{0, 0, 0, 0, 0, 1};
  int degree_ = 0;
};

double eval_conic(const Conic& q, const Point& x);
Vector grad_conic(const Conic& q, const Point& x);

/// Piece of the zero set of a conic between two endpoints, traversed from
/// `from` to `to` with the domain on the left. After sign normalization the
/// conic is positive on the domain side.
struct BoundaryArc {
  Conic conic;
  Point from = Point::Zero();
  Point to = Point::Zero();

  /// Point of the arc on the perpendicular bisector of its chord.
  Point midpoint() const;
  /// Unit tangent in the traversal direction (valid after sign normalization).
  Vector tangent(const Point& x) const;
  /// Unit outer normal at a point of the arc (valid after sign normalization).
  Vector outer_normal(const Point& x) const;
  /// True if x lies on the conic within tolerance and on the arc side of
  /// the chord (arcs are assumed shorter than half of the conic).
  bool contains(const Point& x, double tol = 1e-10) const;
};

/// Flips the sign of the arc's conic when needed so that the outer normal
/// derivative is negative at the arc midpoint. Idempotent.
BoundaryArc normalize_arc_sign(BoundaryArc arc);

/// Intersection of the ray origin + t (through - origin), t > 0, with the
/// conic of `arc`, taking the smallest positive root.
Point arc_point_on_ray(const BoundaryArc& arc, const Point& origin, const Point& through);

/// Ray parameter t of arc_point_on_ray (the point is origin + t (through - origin)).
double arc_ray_parameter(const BoundaryArc& arc, const Point& origin, const Point& through);

/// Degree-2 BB coefficients of q over T in lexicographic order
/// (200, 110, 101, 020, 011, 002).
std::array<double, 6> conic_bb_form(const Conic& q, const Triangle& tri);

/// BB form of q over the chord triangle of a pie triangle, rescaled so that
/// the coefficient at the interior vertex (slot 0) equals one.
std::array<double, 6> pie_conic_bb_form(const Conic& q, const Triangle& chord);

/// Simply connected domain bounded by a closed counter-clockwise chain of arcs.
class ConicDomain {
 public:
  ConicDomain() = default;
  /// Validates endpoint-on-conic and chaining, applies sign normalization.
  explicit ConicDomain(std::vector<BoundaryArc> arcs);

  const std::vector<BoundaryArc>& arcs() const { return arcs_; }
  const BoundaryArc& arc(int j) const { return arcs_.at(static_cast<std::size_t>(j)); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  /// Corner z_j is the start point of arc j.
  const std::vector<Point>& corners() const { return corners_; }
  /// Interior angle at z_j between the tangents of arcs j-1 and j.
  const std::vector<double>& angles() const { return angles_; }
  /// Largest distance between consecutive corners; used as a length scale.
  double length_scale() const { return length_scale_; }
  /// Worst |q(z)| / scale(q) over all arc endpoints seen by the loader.
  double endpoint_defect() const { return endpoint_defect_; }

  nlohmann::json to_json() const;

 private:
  std::vector<BoundaryArc> arcs_;
  std::vector<Point> corners_;
  std::vector<double> angles_;
  double length_scale_ = 1.0;
  double endpoint_defect_ = 0.0;
};

/// Relative tolerance for an arc endpoint lying on its conic.
inline constexpr double kEndpointTolerance = 1e-12;

ConicDomain domain_from_json(const nlohmann::json& j);
ConicDomain load_domain_file(const std::filesystem::path& path);

}  // namespace pcq
