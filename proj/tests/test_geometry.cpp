#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pcq/bernstein.hpp"
#include "pcq/problems.hpp"

using namespace pcq;

namespace {
const Conic kCircle({-1, 0, -1, 0, 0, 1});
const Conic kEllipse({-1, 0, -6.25, 0, 0, 1});
}  // namespace

TEST_CASE("conic evaluation") {
  CHECK(eval_conic(kCircle, Point(0, 0)) == 1.0);
  CHECK(grad_conic(kCircle, Point(1, 0)).isApprox(Vector(-2, 0)));
  const Conic line({0, 0, 0, 0, -1, 1});
  CHECK(line.degree() == 1);
  CHECK(eval_conic(line, Point(0.3, 1)) == 0.0);
  CHECK(eval_conic(kEllipse, Point(0, 0.4)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("reducible conics are rejected") {
  CHECK_THROWS_AS(Conic({1, 0, -1, 0, 0, 0}), GeometryError);  // (x - y)(x + y)
  CHECK_THROWS_AS(Conic({1, 0, 0, 0, 0, -1}), GeometryError);  // (x - 1)(x + 1)
  CHECK_THROWS_AS(Conic({0, 0, 0, 0, 0, 1}), GeometryError);
  CHECK_NOTHROW(Conic({-1, 0, -1, 0, 0, 1}));
}

TEST_CASE("arc sign normalization") {
  BoundaryArc a{Conic({1, 0, 1, 0, 0, -1}), Point(1, 0), Point(0, 1)};
  const BoundaryArc n = normalize_arc_sign(a);
  CHECK(n.conic.coeffs()[0] == -1.0);
  CHECK(n.conic(Point(0, 0)) > 0);
  const BoundaryArc again = normalize_arc_sign(n);
  CHECK(again.conic.coeffs() == n.conic.coeffs());
  BoundaryArc degenerate{kCircle, Point(1, 0), Point(1, 0)};
  CHECK_THROWS_AS(normalize_arc_sign(degenerate), GeometryError);
}

TEST_CASE("C2 domain top arc is positive inside its pie triangles") {
  const auto mesh = builtin_mesh(ProblemId::C2Domain);
  for (int t : mesh->triangles_of_kind(TriKind::Pie)) {
    const Triangle T = mesh->triangle(t);
    const Point c = (T.v[0] + T.v[1] + T.v[2]) / 3;
    CHECK(mesh->domain().arc(mesh->tri(t).arc).conic(c) > 0);
  }
}

TEST_CASE("ray intersection") {
  const BoundaryArc arc = normalize_arc_sign({kCircle, Point(1, 0), Point(0, 1)});
  CHECK((arc_point_on_ray(arc, Point(0, 0), Point(0.5, 0)) - Point(1, 0)).norm() < 1e-15);
  CHECK((arc_point_on_ray(arc, Point(0, 0), Point(0.3, 0.3)) - Point(std::sqrt(0.5), std::sqrt(0.5))).norm() <
        1e-15);
  const BoundaryArc top = normalize_arc_sign({kEllipse, Point(1, 0), Point(0, 0.4)});
  const Point x = arc_point_on_ray(top, Point(0, 0), Point(0, 0.2));
  CHECK((x - Point(0, 0.4)).norm() < 1e-15);
  CHECK(std::abs(top.conic(x)) <= 1e-13);
  CHECK_THROWS_AS(arc_point_on_ray(arc, Point(3, 3), Point(4, 3)), GeometryError);
}

TEST_CASE("conic BB form") {
  const Triangle T{{Point(0, 0), Point(1, 0), Point(0, 1)}};
  const auto q = conic_bb_form(kCircle, T);
  // From q at the six degree-2 domain points: q(1/2, 1/2) = 1/2 = (0 + 2 q011 + 0) / 4.
  const std::array<double, 6> expect{1, 1, 1, 0, 1, 0};
  for (int k = 0; k < 6; ++k) CHECK(q[k] == doctest::Approx(expect[k]).epsilon(1e-15));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const Conic c({uni(rng), uni(rng), uni(rng), uni(rng), uni(rng), 1 + uni(rng)});
    const Triangle R{{Point(uni(rng), uni(rng)), Point(2 + uni(rng), uni(rng)), Point(uni(rng), 2 + uni(rng))}};
    const auto bb = conic_bb_form(c, R);
    const BBPoly p(2, R, {bb.begin(), bb.end()});
    for (int k = 0; k < 10; ++k) {
      const Point x(uni(rng), uni(rng));
      CHECK(eval_bb(p, x) == doctest::Approx(c(x)).epsilon(1e-13));
    }
  }
}

TEST_CASE("pie BB form is normalized") {
  const Triangle T{{Point(0, 0), Point(1, 0), Point(0, 1)}};
  const auto q = pie_conic_bb_form(kCircle, T);
  CHECK(q[0] == 1.0);
  CHECK(std::abs(q[3]) < 1e-15);
  CHECK(std::abs(q[5]) < 1e-15);
  const Triangle bad{{Point(1, 0), Point(0, 1), Point(-1, 0)}};
  CHECK_THROWS_AS(pie_conic_bb_form(kCircle, bad), GeometryError);
}

TEST_CASE("domain loading checks chaining and endpoints") {
  nlohmann::json j = nlohmann::json::parse(R"({"arcs": [
    {"coeffs": [-1, 0, -1, 0, 0, 1], "from": [1, 0], "to": [-1, 0]},
    {"coeffs": [-1, 0, -1, 0, 0, 1], "from": [-1, 0], "to": [1, 0]}]})");
  CHECK_NOTHROW(domain_from_json(j));
  j["arcs"][1]["to"] = {0.5, 0};
  CHECK_THROWS_AS(domain_from_json(j), GeometryError);
  j["arcs"][1]["to"] = {1, 1e-6};
  CHECK_THROWS_AS(domain_from_json(j), GeometryError);
}

TEST_CASE("built-in domains") {
  const ConicDomain disk = builtin_domain(ProblemId::Disk);
  CHECK(disk.num_arcs() == 4);
  for (double w : disk.angles()) CHECK(w == doctest::Approx(M_PI));
  const ConicDomain c2 = builtin_domain(ProblemId::C2Domain);
  for (double w : c2.angles()) CHECK(w == doctest::Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("osculating circle of the C2 domain") {
  const C2Parameters p = c2_parameters();
  // Finite-difference curvature of the parametrized ellipse.
  const double h = 1e-4, t = p.t0;
  auto X = [&](double s) { return Point(p.a * std::cos(s), p.b * std::sin(s)); };
  const Vector d1 = (X(t + h) - X(t - h)) / (2 * h);
  const Vector d2 = (X(t + h) - 2 * X(t) + X(t - h)) / (h * h);
  const double kfd = std::abs(d1.x() * d2.y() - d1.y() * d2.x()) / std::pow(d1.norm(), 3);
  CHECK(1 / p.r == doctest::Approx(kfd).epsilon(1e-7));
  CHECK((X(t) - Point(p.c1, p.c2)).norm() == doctest::Approx(p.r).epsilon(1e-14));

  // Curvature of the shifted top ellipse and the left circle agree at the join.
  const ConicDomain dom = builtin_domain(ProblemId::C2Domain);
  auto curvature = [](const Conic& q, const Point& x) {
    const Vector g = q.gradient(x);
    const Eigen::Matrix2d H = q.hessian();
    const Vector tng(-g.y(), g.x());
    return std::abs(tng.dot(H * tng)) / std::pow(g.norm(), 3);
  };
  for (int j = 0; j < 4; ++j) {
    const Point z = dom.corners()[j];
    const double k1 = curvature(dom.arc(j).conic, z);
    const double k0 = curvature(dom.arc((j + 3) % 4).conic, z);
    CHECK(std::abs(k1 - k0) <= 1e-8);
  }
}
