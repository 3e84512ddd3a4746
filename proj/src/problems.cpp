#include "pcq/problems.hpp"

#include <cmath>

namespace pcq {

ProblemId parse_problem_id(const std::string& s) {
  if (s == "disk") return ProblemId::Disk;
  if (s == "ellipse-exp") return ProblemId::EllipseExp;
  if (s == "ellipse-sin") return ProblemId::EllipseSin;
  if (s == "c2-domain") return ProblemId::C2Domain;
  if (s == "custom") return ProblemId::Custom;
  throw std::invalid_argument("unknown problem id '" + s + "'");
}

std::string to_string(ProblemId id) {
  switch (id) {
    case ProblemId::Disk: return "disk";
    case ProblemId::EllipseExp: return "ellipse-exp";
    case ProblemId::EllipseSin: return "ellipse-sin";
    case ProblemId::C2Domain: return "c2-domain";
    case ProblemId::Custom: return "custom";
  }
  return "?";
}

double ellipse_curvature(double a, double b, double t) {
  const double s = std::sin(t), c = std::cos(t);
  return a * b / std::pow(a * a * s * s + b * b * c * c, 1.5);
}

C2Parameters c2_parameters() {
  C2Parameters p;
  const double s = std::sin(p.t0), c = std::cos(p.t0);
  const Point x(p.a * c, p.b * s);
  const Vector d(-p.a * s, p.b * c);
  const Vector inward = Vector(-d.y(), d.x()).normalized();
  p.r = 1 / ellipse_curvature(p.a, p.b, p.t0);
  const Point centre = x + p.r * inward;
  p.c1 = centre.x();
  p.c2 = centre.y();
  return p;
}

namespace {

std::array<double, 6> circle(double cx, double cy, double r) {
  return {-1, 0, -1, 2 * cx, 2 * cy, r * r - cx * cx - cy * cy};
}

std::array<double, 6> ellipse(double a, double b, double cx, double cy) {
  const double ia = 1 / (a * a), ib = 1 / (b * b);
  return {-ia, 0, -ib, 2 * cx * ia, 2 * cy * ib, 1 - cx * cx * ia - cy * cy * ib};
}

std::vector<BoundaryArc> quarter_arcs(const std::array<double, 6>& k, double a, double b) {
  const std::array<Point, 4> z{Point(a, 0), Point(0, b), Point(-a, 0), Point(0, -b)};
  std::vector<BoundaryArc> arcs;
  for (int j = 0; j < 4; ++j) arcs.push_back({Conic(k), z[j], z[(j + 1) % 4]});
  return arcs;
}

}  // namespace

ConicDomain builtin_domain(ProblemId id) {
  switch (id) {
    case ProblemId::Disk:
      return ConicDomain(quarter_arcs(circle(0, 0, 1), 1, 1));
    case ProblemId::EllipseExp:
    case ProblemId::EllipseSin:
      return ConicDomain(quarter_arcs(ellipse(1, 0.4, 0, 0), 1, 0.4));
    case ProblemId::C2Domain: {
      const C2Parameters p = c2_parameters();
      auto top = [&](double t) { return Point(p.a * std::cos(t), p.b * std::sin(t) - p.c2); };
      const Point tr = top(M_PI - p.t0), tl = top(p.t0);
      const Point bl(tl.x(), -tl.y()), br(tr.x(), -tr.y());
      return ConicDomain({{Conic(ellipse(p.a, p.b, 0, -p.c2)), tr, tl},
                          {Conic(circle(p.c1, 0, p.r)), tl, bl},
                          {Conic(ellipse(p.a, p.b, 0, p.c2)), bl, br},
                          {Conic(circle(-p.c1, 0, p.r)), br, tr}});
    }
    case ProblemId::Custom:
      break;
  }
  throw std::invalid_argument("custom problems have no built-in domain");
}

std::filesystem::path builtin_mesh_path(ProblemId id) {
  const std::filesystem::path dir = std::filesystem::path(PCQ_DATA_DIR) / "meshes";
  switch (id) {
    case ProblemId::Disk: return dir / "disk.json";
    case ProblemId::EllipseExp:
    case ProblemId::EllipseSin: return dir / "ellipse.json";
    case ProblemId::C2Domain: return dir / "c2_domain.json";
    case ProblemId::Custom: break;
  }
  throw std::invalid_argument("custom problems have no built-in mesh");
}

std::shared_ptr<const CurvedTriangulation> builtin_mesh(ProblemId id) {
  return std::make_shared<const CurvedTriangulation>(load_mesh_file(builtin_mesh_path(id)));
}

ScalarField builtin_g(ProblemId id) {
  switch (id) {
    case ProblemId::Disk:
      return [](const Point& x) {
        const double r2 = x.squaredNorm();
        return std::exp(r2) * (1 + r2);
      };
    case ProblemId::EllipseExp:
      return [](const Point& x) { return std::exp(x.x()); };
    case ProblemId::EllipseSin:
      return [](const Point& x) { return std::sin(M_PI * std::abs(x.x())) + 1.1; };
    case ProblemId::C2Domain:
    case ProblemId::Custom:
      return [](const Point&) { return 1.0; };
  }
  return {};
}

ExactJet builtin_exact(ProblemId id) {
  if (id != ProblemId::Disk) return {};
  // u = exp(|x|^2 / 2) - exp(1/2)
  return [](const Point& x) {
    const double e = std::exp(0.5 * x.squaredNorm());
    Jet2 j;
    j.value = e - std::exp(0.5);
    j.grad = e * x;
    j.hess = e * (Eigen::Matrix2d::Identity() + x * x.transpose());
    return j;
  };
}

MongeAmpereProblem builtin_problem(ProblemId id) {
  MongeAmpereProblem p;
  p.name = to_string(id);
  p.mesh = builtin_mesh(id);
  p.g = builtin_g(id);
  p.exact = builtin_exact(id);
  return p;
}

}  // namespace pcq
