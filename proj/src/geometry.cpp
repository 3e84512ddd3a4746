#include "pcq/geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcq {

namespace {

double cross(const Vector& a, const Vector& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string fmt_point(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p.x() << ", " << p.y() << ")";
  return os.str();
}

}  // namespace

double Triangle::signed_area() const { return 0.5 * cross(v[1] - v[0], v[2] - v[0]); }

double Triangle::diameter() const {
  return std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
}

Conic::Conic(const std::array<double, 6>& k) : k_(k) {
  const double s = scale();
  if (s == 0.0 || !std::isfinite(s)) throw GeometryError("conic has no nonzero coefficients");
  const bool quadratic = std::abs(k[0]) > 1e-14 * s || std::abs(k[1]) > 1e-14 * s ||
                         std::abs(k[2]) > 1e-14 * s;
  if (quadratic) {
    degree_ = 2;
    // A conic factors into linear forms (over C) iff its 3x3 symmetric matrix
    // is singular; check on coefficients normalized to unit max norm.
    Eigen::Matrix3d m;
    m << k[0], k[1] / 2, k[3] / 2,  //
        k[1] / 2, k[2], k[4] / 2,   //
        k[3] / 2, k[4] / 2, k[5];
    m /= s;
    if (std::abs(m.determinant()) <= 1e-12) throw GeometryError("conic is reducible (degenerate)");
  } else {
    if (std::abs(k[3]) <= 1e-14 * s && std::abs(k[4]) <= 1e-14 * s)
      throw GeometryError("conic of degree zero");
    degree_ = 1;
  }
}

double Conic::operator()(const Point& x) const {
  const double a = x.x(), b = x.y();
  return k_[0] * a * a + k_[1] * a * b + k_[2] * b * b + k_[3] * a + k_[4] * b + k_[5];
}

Vector Conic::gradient(const Point& x) const {
  return {2 * k_[0] * x.x() + k_[1] * x.y() + k_[3], k_[1] * x.x() + 2 * k_[2] * x.y() + k_[4]};
}

Eigen::Matrix2d Conic::hessian() const {
  Eigen::Matrix2d h;
  h << 2 * k_[0], k_[1], k_[1], 2 * k_[2];
  return h;
}

double Conic::polar(const Point& x, const Point& y) const {
  return k_[0] * x.x() * y.x() + 0.5 * k_[1] * (x.x() * y.y() + x.y() * y.x()) +
         k_[2] * x.y() * y.y() + 0.5 * k_[3] * (x.x() + y.x()) + 0.5 * k_[4] * (x.y() + y.y()) +
         k_[5];
}

double Conic::scale() const {
  double s = 0;
  for (double c : k_) s = std::max(s, std::abs(c));
  return s;
}

Conic Conic::scaled(double factor) const {
  std::array<double, 6> k = k_;
  for (double& c : k) c *= factor;
  return Conic(k);
}

double eval_conic(const Conic& q, const Point& x) { return q(x); }
Vector grad_conic(const Conic& q, const Point& x) { return q.gradient(x); }

namespace {

// Real roots of a t^2 + b t + c = 0 in increasing order, computed without
// cancellation.
std::vector<double> quadratic_roots(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0) return {};
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale) return {};
    return {-c / b};
  }
  const double disc = b * b - 4 * a * c;
  if (disc < -1e-14 * b * b) return {};
  const double sq = std::sqrt(std::max(disc, 0.0));
  const double qq = -0.5 * (b + std::copysign(sq, b));
  std::vector<double> r;
  if (qq == 0) {
    r = {0.0, 0.0};
  } else {
    r = {qq / a, c / qq};
  }
  if (r[0] > r[1]) std::swap(r[0], r[1]);
  return r;
}

// Smallest positive root of q(origin + t dir) with one Newton polish step.
double ray_root(const Conic& q, const Point& origin, const Vector& dir) {
  const Eigen::Matrix2d h = q.hessian();
  const double a = 0.5 * dir.dot(h * dir);
  const double b = q.gradient(origin).dot(dir);
  const double c = q(origin);
  double best = std::numeric_limits<double>::infinity();
  for (double t : quadratic_roots(a, b, c)) {
    if (t > 1e-14 && t < best) best = t;
  }
  if (!std::isfinite(best)) throw GeometryError("ray does not meet the boundary conic");
  for (int it = 0; it < 2; ++it) {
    const Point x = origin + best * dir;
    const double d = q.gradient(x).dot(dir);
    if (d == 0) break;
    best -= q(x) / d;
  }
  return best;
}

}  // namespace

Point BoundaryArc::midpoint() const {
  const Point m = 0.5 * (from + to);
  const Vector chord = to - from;
  if (chord.norm() == 0) throw GeometryError("degenerate arc with coincident endpoints");
  const Vector n(chord.y(), -chord.x());  // right of the chord
  const Eigen::Matrix2d h = conic.hessian();
  const double a = 0.5 * n.dot(h * n);
  const double b = conic.gradient(m).dot(n);
  const double c = conic(m);
  const auto roots = quadratic_roots(a, b, c);
  if (roots.empty()) throw GeometryError("arc chord bisector does not meet the conic");
  double t = roots[0];
  for (double r : roots)
    if (std::abs(r) < std::abs(t)) t = r;
  return m + t * n;
}

Vector BoundaryArc::tangent(const Point& x) const {
  const Vector g = conic.gradient(x);
  Vector t(g.y(), -g.x());
  const double nrm = t.norm();
  if (nrm == 0) throw GeometryError("vanishing conic gradient on arc at " + fmt_point(x));
  // With q > 0 on the domain side the domain lies to the left of t.
  return t / nrm;
}

Vector BoundaryArc::outer_normal(const Point& x) const {
  const Vector g = conic.gradient(x);
  return -g / g.norm();
}

bool BoundaryArc::contains(const Point& x, double tol) const {
  const double s = conic.scale() * std::max(1.0, x.squaredNorm());
  if (std::abs(conic(x)) > tol * s) return false;
  const Vector chord = to - from;
  const double len2 = chord.squaredNorm();
  const double side_mid = cross(chord, midpoint() - from);
  const double side_x = cross(chord, x - from);
  if ((x - from).squaredNorm() <= tol * len2 || (x - to).squaredNorm() <= tol * len2) return true;
  if (std::abs(side_mid) <= 1e-14 * len2) {
    // Straight arc: x must lie between the endpoints.
    const double t = chord.dot(x - from) / len2;
    return t >= -tol && t <= 1 + tol;
  }
  return side_x * side_mid > 0;
}

BoundaryArc normalize_arc_sign(BoundaryArc arc) {
  if ((arc.to - arc.from).norm() == 0) throw GeometryError("degenerate arc with coincident endpoints");
  const Point m = arc.midpoint();
  const Vector g = arc.conic.gradient(m);
  if (g.norm() == 0) throw GeometryError("conic gradient vanishes at arc midpoint");
  // Chord orientation gives the traversal direction; outer normal is to the right.
  Vector tau(g.y(), -g.x());
  if (tau.dot(arc.to - arc.from) < 0) tau = -tau;
  const Vector outer(tau.y(), -tau.x());
  if (g.dot(outer) > 0) arc.conic = arc.conic.scaled(-1.0);
  return arc;
}

double arc_ray_parameter(const BoundaryArc& arc, const Point& origin, const Point& through) {
  const Vector dir = through - origin;
  if (dir.norm() == 0) throw GeometryError("ray direction is zero");
  return ray_root(arc.conic, origin, dir);
}

Point arc_point_on_ray(const BoundaryArc& arc, const Point& origin, const Point& through) {
  return origin + arc_ray_parameter(arc, origin, through) * (through - origin);
}

std::array<double, 6> conic_bb_form(const Conic& q, const Triangle& tri) {
  if (tri.area() <= 1e-14 * std::pow(tri.diameter(), 2)) throw GeometryError("degenerate triangle");
  const auto& v = tri.v;
  return {q.polar(v[0], v[0]), q.polar(v[0], v[1]), q.polar(v[0], v[2]),
          q.polar(v[1], v[1]), q.polar(v[1], v[2]), q.polar(v[2], v[2])};
}

std::array<double, 6> pie_conic_bb_form(const Conic& q, const Triangle& chord) {
  auto c = conic_bb_form(q, chord);
  const double at_interior = c[0];
  if (!(std::abs(at_interior) > 1e-14 * q.scale()))
    throw GeometryError("conic vanishes at the interior vertex of a pie triangle");
  for (double& x : c) x /= at_interior;
  // Endpoints lie on the conic.
  c[3] = 0.0;
  c[5] = 0.0;
  c[0] = 1.0;
  return c;
}

ConicDomain::ConicDomain(std::vector<BoundaryArc> arcs) {
  if (arcs.empty()) throw GeometryError("domain has no boundary arcs");
  const std::size_t n = arcs.size();
  double scale = 0;
  for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, (arcs[j].to - arcs[j].from).norm());
  length_scale_ = scale;
  for (std::size_t j = 0; j < n; ++j) {
    BoundaryArc& a = arcs[j];
    const BoundaryArc& next = arcs[(j + 1) % n];
    if ((a.to - next.from).norm() > 1e-12 * scale)
      throw GeometryError("arcs do not chain: end of arc " + std::to_string(j) + " " +
                          fmt_point(a.to) + " differs from start of arc " +
                          std::to_string((j + 1) % n) + " " + fmt_point(next.from));
    for (const Point& z : {a.from, a.to}) {
      const double rel = std::abs(a.conic(z)) / a.conic.scale();
      endpoint_defect_ = std::max(endpoint_defect_, rel);
      if (rel > kEndpointTolerance)
        throw GeometryError("arc " + std::to_string(j) + " endpoint " + fmt_point(z) +
                            " not on its conic (|q| = " + std::to_string(rel) + ")");
    }
    a = normalize_arc_sign(a);
    for (const Point& z : {a.from, a.midpoint(), a.to})
      if (a.conic.gradient(z).norm() == 0)
        throw GeometryError("conic gradient vanishes on arc " + std::to_string(j));
  }
  arcs_ = std::move(arcs);
  corners_.resize(n);
  angles_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const BoundaryArc& cur = arcs_[j];
    const BoundaryArc& prev = arcs_[(j + n - 1) % n];
    corners_[j] = cur.from;
    const Vector tau_plus = cur.tangent(cur.from);
    const Vector tau_minus = -prev.tangent(prev.to);
    double w = std::atan2(cross(tau_plus, tau_minus), tau_plus.dot(tau_minus));
    if (w <= 0) w += 2 * std::numbers::pi;
    angles_[j] = w;
    if (!(w > 0)) throw GeometryError("non-positive interior angle at corner " + std::to_string(j));
  }
}

nlohmann::json ConicDomain::to_json() const {
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& a : arcs_) {
    arcs.push_back({{"coeffs", a.conic.coeffs()},
                    {"from", {a.from.x(), a.from.y()}},
                    {"to", {a.to.x(), a.to.y()}}});
  }
  return {{"arcs", arcs}};
}

ConicDomain domain_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_array() ? j : j.at("arcs");
  std::vector<BoundaryArc> arcs;
  for (const auto& a : arr) {
    const auto k = a.at("coeffs").get<std::vector<double>>();
    if (k.size() != 6) throw GeometryError("conic needs six coefficients");
    const auto f = a.at("from").get<std::vector<double>>();
    const auto t = a.at("to").get<std::vector<double>>();
    if (f.size() != 2 || t.size() != 2) throw GeometryError("arc endpoints must be 2-vectors");
    BoundaryArc arc;
    arc.conic = Conic({k[0], k[1], k[2], k[3], k[4], k[5]});
    arc.from = Point(f[0], f[1]);
    arc.to = Point(t[0], t[1]);
    arcs.push_back(arc);
  }
  return ConicDomain(std::move(arcs));
}

ConicDomain load_domain_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open domain file " + path.string());
  return domain_from_json(nlohmann::json::parse(in));
}

}  // namespace pcq
