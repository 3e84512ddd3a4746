#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "pcq/bernstein.hpp"

using namespace pcq;

namespace {

std::mt19937 rng(5);
std::uniform_real_distribution<double> uni(-1, 1);

const Triangle kRef{{Point(0, 0), Point(1, 0), Point(0, 1)}};
const Triangle kSkew{{Point(0.2, -0.1), Point(1.3, 0.4), Point(-0.2, 0.9)}};

BBPoly random_poly(int d, const Triangle& T) {
  std::vector<double> c(num_coeffs(d));
  for (auto& x : c) x = uni(rng);
  return BBPoly(d, T, c);
}

Point random_point() { return Point(uni(rng), uni(rng)); }

// Direct multinomial evaluation, independent of de Casteljau.
double direct(const BBPoly& p, const Bary& b) {
  double s = 0;
  for (const MultiIndex& a : domain_indices(p.degree))
    s += p[a] * multinomial(a) * std::pow(b[0], a[0]) * std::pow(b[1], a[1]) * std::pow(b[2], a[2]);
  return s;
}

// Monomial coefficients of a BB polynomial on kRef, via x = b1, y = b2.
Eigen::MatrixXd to_monomial(const BBPoly& p) {
  const int d = p.degree;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, d + 1);
  // b0 = 1 - x - y; expand b0^i x^j y^k
  for (const MultiIndex& a : domain_indices(d)) {
    const double w = p[a] * multinomial(a);
    for (int r = 0; r <= a[0]; ++r)
      for (int s = 0; s <= a[0] - r; ++s) {
        const double coef = factorial(a[0]) / (factorial(r) * factorial(s) * factorial(a[0] - r - s)) *
                            ((r + s) % 2 ? -1.0 : 1.0);
        m(a[1] + r, a[2] + s) += w * coef;
      }
  }
  return m;
}

}  // namespace

TEST_CASE("barycentric coordinates") {
  const Bary v = barycentric(kRef, Point(0, 0));
  CHECK(v == Bary{1, 0, 0});
  const Bary c = barycentric(kRef, Point(1.0 / 3, 1.0 / 3));
  for (double x : c) CHECK(x == doctest::Approx(1.0 / 3));
  const Bary e = barycentric(kRef, Point(2, 0));
  CHECK(e[0] == doctest::Approx(-1));
  CHECK(e[1] == doctest::Approx(2));
  CHECK(e[2] == doctest::Approx(0));
  const Triangle flat{{Point(0, 0), Point(1, 0), Point(2, 0)}};
  CHECK_THROWS_AS(barycentric(flat, Point(0, 0)), GeometryError);
  for (int k = 0; k < 20; ++k) {
    const Point x = random_point();
    const Bary b = barycentric(kSkew, x);
    CHECK(b[0] + b[1] + b[2] == doctest::Approx(1).epsilon(1e-15));
    CHECK((b[0] * kSkew.v[0] + b[1] * kSkew.v[1] + b[2] * kSkew.v[2] - x).norm() < 1e-13);
  }
}

TEST_CASE("index tables") {
  for (int d = 0; d <= kMaxDegree; ++d) {
    const auto& idx = domain_indices(d);
    REQUIRE(static_cast<int>(idx.size()) == num_coeffs(d));
    for (int k = 0; k < num_coeffs(d); ++k) CHECK(bb_index(d, idx[k]) == k);
  }
  CHECK(domain_indices(2)[1] == MultiIndex{1, 1, 0});
  CHECK(domain_indices(2)[4] == MultiIndex{0, 1, 1});
}

TEST_CASE("partition of unity and de Casteljau against the direct formula") {
  for (int d = 0; d <= 8; ++d) {
    BBPoly one(d, kSkew, std::vector<double>(num_coeffs(d), 1.0));
    for (int k = 0; k < 100; ++k) CHECK(eval_bb(one, random_point()) == doctest::Approx(1).epsilon(1e-14));
    const BBPoly p = random_poly(d, kSkew);
    for (int k = 0; k < 10; ++k) {
      const Bary b = barycentric(kSkew, random_point());
      CHECK(eval_bb(p, b) == doctest::Approx(direct(p, b)).epsilon(1e-13));
    }
  }
}

TEST_CASE("derivatives") {
  // Hessian of the circle conic in BB form is constant -2 I.
  const std::array<double, 6> q{1, 1, 1, 0, 1, 0};
  const BBPoly c(2, kRef, {q.begin(), q.end()});
  CHECK((eval_bb_hessian(c, Bary{0.2, 0.3, 0.5}) - (-2) * Eigen::Matrix2d::Identity()).norm() < 1e-13);

  const BBPoly p = random_poly(3, kSkew);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const Point x = random_point();
    const Vector g = eval_bb_gradient(p, barycentric(kSkew, x));
    const double gx = (eval_bb(p, Point(x + Vector(h, 0))) - eval_bb(p, Point(x - Vector(h, 0)))) / (2 * h);
    const double gy = (eval_bb(p, Point(x + Vector(0, h))) - eval_bb(p, Point(x - Vector(0, h)))) / (2 * h);
    CHECK(std::abs(g.x() - gx) < 1e-7);
    CHECK(std::abs(g.y() - gy) < 1e-7);
    const Jet2 j = eval_bb_jet(p, barycentric(kSkew, x));
    CHECK(j.value == doctest::Approx(eval_bb(p, x)));
    CHECK((j.grad - g).norm() < 1e-12);
    CHECK((j.hess - eval_bb_hessian(p, barycentric(kSkew, x))).norm() < 1e-11);
  }
}

TEST_CASE("directional derivative along a mixed pair") {
  const BBPoly p = random_poly(5, kSkew);
  const std::array<Vector, 2> dirs{Vector(1, 0), Vector(0, 1)};
  const Bary b{0.3, 0.3, 0.4};
  CHECK(eval_bb_derivative(p, b, dirs) == doctest::Approx(eval_bb_hessian(p, b)(0, 1)).epsilon(1e-12));
}

TEST_CASE("degree raising") {
  BBPoly one(5, kRef, std::vector<double>(21, 1.0));
  for (double c : degree_raise(one, 6).coeffs) CHECK(c == doctest::Approx(1.0));
  const BBPoly b1(1, kRef, {1, 0, 0});
  const BBPoly r = degree_raise(b1, 2);
  const std::vector<double> expect{1, 0.5, 0.5, 0, 0, 0};
  for (int k = 0; k < 6; ++k) CHECK(r.coeffs[k] == doctest::Approx(expect[k]));
  const BBPoly p = random_poly(5, kSkew);
  const BBPoly p6 = degree_raise(p, 6);
  for (int k = 0; k < 20; ++k) {
    const Point x = random_point();
    CHECK(eval_bb(p6, x) == doctest::Approx(eval_bb(p, x)).epsilon(1e-13));
  }
}

TEST_CASE("products") {
  const BBPoly one(4, kRef, std::vector<double>(15, 1.0));
  const BBPoly q = random_poly(2, kRef);
  const BBPoly a = bb_product(one, q), q6 = degree_raise(q, 6);
  for (int k = 0; k < 28; ++k) CHECK(a.coeffs[k] == doctest::Approx(q6.coeffs[k]).epsilon(1e-14));

  const BBPoly l1(1, kRef, {0, 1, 0}), l2(1, kRef, {0, 0, 1});
  const BBPoly m = bb_product(BBPoly(1, kRef, {1, 0, 0}), BBPoly(1, kRef, {0, 1, 0}));
  const std::vector<double> expect{0, 0.5, 0, 0, 0, 0};
  for (int k = 0; k < 6; ++k) CHECK(m.coeffs[k] == doctest::Approx(expect[k]));

  // Monomial-basis oracle.
  const BBPoly p4 = random_poly(4, kRef), q2 = random_poly(2, kRef);
  const Eigen::MatrixXd mp = to_monomial(p4), mq = to_monomial(q2), mr = to_monomial(bb_product(p4, q2));
  Eigen::MatrixXd conv = Eigen::MatrixXd::Zero(7, 7);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j)
      for (int k = 0; k <= 2; ++k)
        for (int l = 0; l <= 2; ++l) conv(i + k, j + l) += mp(i, j) * mq(k, l);
  CHECK((conv - mr).cwiseAbs().maxCoeff() < 1e-12);

  const BBPoly pq = bb_product(l1, l2), qp = bb_product(l2, l1);
  for (int k = 0; k < 6; ++k) CHECK(pq.coeffs[k] == qp.coeffs[k]);
  const BBPoly other(2, kSkew, std::vector<double>(6, 1.0));
  CHECK_THROWS(bb_product(q, other));
}

TEST_CASE("vertex rings") {
  const auto r5 = d2_ring(5, 0);
  const std::array<MultiIndex, 6> e5{MultiIndex{5, 0, 0}, {4, 1, 0}, {4, 0, 1}, {3, 2, 0}, {3, 0, 2}, {3, 1, 1}};
  CHECK(r5 == e5);
  const auto r4 = d2_ring(4, 1);
  const std::set<MultiIndex> s4(r4.begin(), r4.end());
  CHECK(s4 == std::set<MultiIndex>{{0, 4, 0}, {1, 3, 0}, {0, 3, 1}, {2, 2, 0}, {0, 2, 2}, {1, 2, 1}});
  const auto r6 = d2_ring(6, 2);
  const std::set<MultiIndex> s6(r6.begin(), r6.end());
  CHECK(s6 == std::set<MultiIndex>{{0, 0, 6}, {1, 0, 5}, {0, 1, 5}, {2, 0, 4}, {0, 2, 4}, {1, 1, 4}});
}

TEST_CASE("smoothness predicates") {
  // Restrictions of one polynomial to two neighbouring triangles join smoothly.
  const Triangle A{{Point(0, 0), Point(1, 0), Point(0, 1)}};
  const Triangle B{{Point(1, 0), Point(1, 1), Point(0, 1)}};
  const BBPoly p = random_poly(5, A);
  const auto& idx = domain_indices(5);
  std::vector<double> vals(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = eval_bb(p, domain_point(B, 5, idx[k]));
  const Eigen::VectorXd c = collocation_matrix(5, 5).fullPivLu().solve(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  BBPoly q(5, B, {c.data(), c.data() + c.size()});
  CHECK(joins_c0(p, q));
  CHECK(joins_c1(p, q));
  q[MultiIndex{0, 1, 4}] += 1e-3;  // second row from the shared edge
  CHECK(joins_c0(p, q));
  CHECK_FALSE(joins_c1(p, q));
  q[MultiIndex{0, 1, 4}] -= 1e-3;
  q[MultiIndex{3, 0, 2}] += 1e-3;  // on the shared edge
  CHECK_FALSE(joins_c0(p, q));
}
