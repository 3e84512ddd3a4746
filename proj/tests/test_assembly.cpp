#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>

#include "pcq/problems.hpp"

using namespace pcq;

namespace {

double factorial_d(int n) { return n <= 1 ? 1.0 : n * factorial_d(n - 1); }

// Exact integral of x^a y^b over the unit reference triangle.
double monomial_integral(int a, int b) { return factorial_d(a) * factorial_d(b) / factorial_d(a + b + 2); }

double rule_integral(const QuadratureRule& r, int a, int b) {
  // Reference triangle area 1/2, so the weights (summing to one) are scaled.
  double s = 0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    s += r.weights[k] * std::pow(r.nodes[k][1], a) * std::pow(r.nodes[k][2], b);
  return 0.5 * s;
}

std::shared_ptr<const SplineSpace> space_of(ProblemId id, int level = 1) {
  auto m = builtin_mesh(id);
  for (int l = 1; l < level; ++l) m = std::make_shared<const CurvedTriangulation>(refine_uniform(*m));
  return SplineSpace::build(m);
}

LinearEllipticProblem mass_problem(const std::function<double(const Point&)>& f) {
  LinearEllipticProblem p;
  p.has_reaction = true;
  p.coefficients = [f](int, const Point& x) {
    EllipticCoefficients c;
    c.c = 1;
    c.f = f(x);
    return c;
  };
  return p;
}

LinearEllipticProblem laplace_problem(const std::function<double(const Point&)>& f) {
  LinearEllipticProblem p;
  p.coefficients = [f](int, const Point& x) {
    EllipticCoefficients c;
    c.A = Eigen::Matrix2d::Identity();
    c.f = f(x);
    return c;
  };
  return p;
}

// (r^2 - 1) / 2 on the unit disk.
Jet2 paraboloid(const Point& x) {
  Jet2 j;
  j.value = 0.5 * (x.squaredNorm() - 1);
  j.grad = x;
  j.hess = Eigen::Matrix2d::Identity();
  return j;
}

}  // namespace

TEST_CASE("collapsed Gauss rules are exact to degree 2n - 2") {
  for (int n : {2, 5, 9}) {
    const QuadratureRule& r = collapsed_rule(n);
    double wsum = 0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1).epsilon(1e-14));
    for (int a = 0; a <= 2 * n - 2; ++a)
      for (int b = 0; a + b <= 2 * n - 2; ++b) {
        CAPTURE(a);
        CAPTURE(b);
        CHECK(rule_integral(r, a, b) == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13));
      }
  }
  const QuadratureRule& t = triangle_rule();
  CHECK(t.degree >= 16);
  CHECK(rule_integral(t, 10, 6) == doctest::Approx(monomial_integral(10, 6)).epsilon(1e-13));
  CHECK(rule_integral(t, 0, 16) == doctest::Approx(monomial_integral(0, 16)).epsilon(1e-13));
}

TEST_CASE("curved quadrature reproduces areas and moments") {
  auto disk = builtin_mesh(ProblemId::Disk);
  auto ellipse = builtin_mesh(ProblemId::EllipseExp);
  auto one = [](const Point&) { return 1.0; };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  for (int level = 1; level <= 2; ++level) {
    CAPTURE(level);
    CHECK(rel(integrate(*disk, one), M_PI) < 1e-10);
    CHECK(rel(integrate(*ellipse, one), 0.4 * M_PI) < 1e-10);
    CHECK(rel(integrate(*disk, [](const Point& x) { return x.x() * x.x(); }), M_PI / 4) < 1e-10);
    disk = std::make_shared<const CurvedTriangulation>(refine_uniform(*disk));
    ellipse = std::make_shared<const CurvedTriangulation>(refine_uniform(*ellipse));
  }
}

TEST_CASE("basis evaluation matches single-coefficient polynomials") {
  const Triangle T{{Point(0.1, 0), Point(1.2, 0.3), Point(0.2, 0.8)}};
  const Bary b{0.2, 0.5, 0.3};
  const BasisEval e = bernstein_basis(5, T, b, true);
  for (int k = 0; k < num_coeffs(5); ++k) {
    std::vector<double> c(num_coeffs(5), 0.0);
    c[k] = 1;
    const Jet2 j = eval_bb_jet(BBPoly(5, T, c), b);
    CHECK(e.value[k] == doctest::Approx(j.value).epsilon(1e-13));
    CHECK(e.dx[k] == doctest::Approx(j.grad.x()).epsilon(1e-12));
    CHECK(e.dy[k] == doctest::Approx(j.grad.y()).epsilon(1e-12));
    CHECK(e.dxx[k] == doctest::Approx(j.hess(0, 0)).epsilon(1e-11));
    CHECK(e.dxy[k] == doctest::Approx(j.hess(0, 1)).epsilon(1e-11));
    CHECK(e.dyy[k] == doctest::Approx(j.hess(1, 1)).epsilon(1e-11));
  }
}

TEST_CASE("mass and stiffness matrices") {
  const auto space = space_of(ProblemId::Disk);
  const SparseSystem M = assemble(*space, mass_problem([](const Point&) { return 0.0; }));
  const SparseSystem K = assemble(*space, laplace_problem([](const Point&) { return 0.0; }));
  const Eigen::MatrixXd Md(M.matrix), Kd(K.matrix);
  CHECK((Md - Md.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * Md.cwiseAbs().maxCoeff());
  CHECK((Kd - Kd.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * Kd.cwiseAbs().maxCoeff());
  CHECK(Eigen::LLT<Eigen::MatrixXd>(Md).info() == Eigen::Success);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(Kd).info() == Eigen::Success);

  // Quadratic forms agree with direct integration of the spline.
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> uni(-1, 1);
  Eigen::VectorXd d(space->dimension());
  for (auto& x : d) x = uni(rng);
  const SplineFunction s(space, d);
  const auto& mesh = space->mesh();
  double l2 = 0, h1 = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (const auto& q : quadrature_points(mesh, t)) {
      const Jet2 j = eval_bb_jet(s.patch(t), q.b);
      l2 += q.w * j.value * j.value;
      h1 += q.w * j.grad.squaredNorm();
    }
  CHECK(d.dot(Md * d) == doctest::Approx(l2).epsilon(1e-11));
  CHECK(d.dot(Kd * d) == doctest::Approx(h1).epsilon(1e-11));
}

TEST_CASE("assembly does not depend on the thread count") {
  const auto space = space_of(ProblemId::EllipseExp);
  auto f = [](const Point& x) { return std::exp(x.x()); };
  AssemblyOptions one, four;
  four.threads = 4;
  const SparseSystem a = assemble(*space, laplace_problem(f), one);
  const SparseSystem b = assemble(*space, laplace_problem(f), four);
  CHECK((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(b.matrix)).cwiseAbs().maxCoeff() == 0);
  CHECK((a.rhs - b.rhs).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("sparse solves") {
  SparseSystem id;
  id.matrix.resize(5, 5);
  id.matrix.setIdentity();
  id.rhs = Eigen::VectorXd::LinSpaced(5, 1, 5);
  CHECK((solve_sparse(id) - id.rhs).norm() == 0);

  const auto space = space_of(ProblemId::Disk);
  SparseSystem K = assemble(*space, laplace_problem([](const Point&) { return 0.0; }));
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uni(-1, 1);
  Eigen::VectorXd x(space->dimension());
  for (auto& v : x) v = uni(rng);
  K.rhs = K.matrix * x;
  SolveReport rep;
  const Eigen::VectorXd y = solve_sparse(K, &rep);
  CHECK((y - x).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(rep.relative_residual < 1e-12);

  const SparseSystem M = assemble(*space, mass_problem([](const Point&) { return 0.0; }));
  SparseSystem mass{M.matrix, M.matrix * x};
  CHECK((solve_sparse(mass) - x).cwiseAbs().maxCoeff() < 1e-10);

  SparseSystem singular;
  singular.matrix.resize(2, 2);
  singular.matrix.insert(0, 0) = 1;
  singular.rhs = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_sparse(singular), SolverError);
  SparseSystem mismatch = id;
  mismatch.rhs = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_sparse(mismatch), SolverError);
}

TEST_CASE("error norms of the zero spline are the norms of the reference") {
  const auto space = space_of(ProblemId::Disk);
  const SplineFunction zero(space, Eigen::VectorXd::Zero(space->dimension()));
  const ErrorNorms e = error_norms(zero, [](int, const Point& x) { return paraboloid(x); });
  const double l2 = M_PI / 12, g2 = M_PI / 2, h2 = 2 * M_PI;  // squared
  CHECK(e.l2 == doctest::Approx(std::sqrt(l2)).epsilon(1e-10));
  CHECK(e.h1 == doctest::Approx(std::sqrt(l2 + g2)).epsilon(1e-10));
  CHECK(e.h2 == doctest::Approx(std::sqrt(l2 + g2 + h2)).epsilon(1e-10));
}

TEST_CASE("L2 projection reproduces a function in the space") {
  // (r^2 - 1) / 2 is a multiple of the boundary conic, so it lies in the space.
  const auto space = space_of(ProblemId::Disk);
  const SparseSystem M = assemble(*space, mass_problem([](const Point& x) { return paraboloid(x).value; }));
  const SplineFunction s(space, solve_sparse(M));
  const ErrorNorms e = error_norms(s, [](int, const Point& x) { return paraboloid(x); });
  CHECK(e.l2 < 1e-12);
  CHECK(e.h2 < 1e-10);
  CHECK(residual_norm(s, [](const Point&) { return 1.0; }) < 1e-10);
  CHECK(residual_norm(s, [](const Point&) { return 0.0; }) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("Galerkin orthogonality of a Poisson solve") {
  const auto space = space_of(ProblemId::EllipseExp);
  auto f = [](const Point& x) { return std::exp(x.x()) * (1 + x.y()); };
  const SparseSystem sys = assemble(*space, laplace_problem(f));
  const SplineFunction u(space, solve_sparse(sys));
  const auto& mesh = space->mesh();
  for (int i : {0, space->dimension() / 2, space->dimension() - 1}) {
    const SplineFunction v(space, Eigen::VectorXd::Unit(space->dimension(), i));
    double a = 0, l = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (const auto& q : quadrature_points(mesh, t)) {
        const Jet2 ju = eval_bb_jet(u.patch(t), q.b), jv = eval_bb_jet(v.patch(t), q.b);
        a += q.w * ju.grad.dot(jv.grad);
        l += q.w * f(q.x) * jv.value;
      }
    CHECK(std::abs(a - l) <= 1e-10 * std::max(1.0, std::abs(l)));
  }
}

TEST_CASE("Matrix Market output") {
  Eigen::SparseMatrix<double> m(3, 4);
  m.insert(0, 0) = 1.5;
  m.insert(2, 3) = -1.0 / 3;
  m.insert(1, 2) = 1e-300;
  m.makeCompressed();
  const auto path = std::filesystem::temp_directory_path() / "pcq_test_matrix.mtx";
  write_matrix_market(m, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  int r, c, nnz;
  in >> r >> c >> nnz;
  CHECK(r == 3);
  CHECK(c == 4);
  CHECK(nnz == 3);
  Eigen::MatrixXd back = Eigen::MatrixXd::Zero(3, 4);
  for (int k = 0; k < nnz; ++k) {
    int i, j;
    double v;
    in >> i >> j >> v;
    back(i - 1, j - 1) = v;
  }
  CHECK((back - Eigen::MatrixXd(m)).cwiseAbs().maxCoeff() == 0);
  std::filesystem::remove(path);
}

TEST_CASE("norms of the disk solution against radial integrals") {
  const auto space = space_of(ProblemId::Disk);
  const SplineFunction zero(space, Eigen::VectorXd::Zero(space->dimension()));
  const ExactJet u = builtin_exact(ProblemId::Disk);
  const ErrorNorms e = error_norms(zero, [&u](int, const Point& x) { return u(x); });
  const double E = std::exp(1.0);
  // With s = r^2 the integrals reduce to moments of e^s on [0, 1].
  const double l2 = 2 * M_PI * (2 * std::sqrt(E) - E - 0.5);
  const double g2 = M_PI;
  const double h2 = M_PI * ((3 * E - 2) - (E - 2) / 8);  // mixed derivative counted once
  CHECK(e.l2 == doctest::Approx(std::sqrt(l2)).epsilon(1e-8));
  CHECK(e.h1 == doctest::Approx(std::sqrt(l2 + g2)).epsilon(1e-8));
  CHECK(e.h2 == doctest::Approx(std::sqrt(l2 + g2 + h2)).epsilon(1e-8));
}
