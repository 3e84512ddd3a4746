#pragma once

#include <filesystem>
#include <functional>

#include <Eigen/Sparse>

#include "pcq/quadrature.hpp"
#include "pcq/space.hpp"

namespace pcq {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficients of -div(A grad u) + b . grad u + c u = f at one point.
struct EllipticCoefficients {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Vector b = Vector::Zero();
  double c = 0;
  double f = 0;
};

/// Coefficient fields evaluated per (triangle, point); the triangle lets
/// fields built from splines skip point location.
struct LinearEllipticProblem {
  std::function<EllipticCoefficients(int tri, const Point& x)> coefficients;
  bool has_advection = false;
  bool has_reaction = false;
};

struct AssemblyOptions {
  int pie_order = kPieOrder;
  /// Worker threads for the element loop; 1 gives a purely sequential run.
  /// The global reduction is always sequential in triangle order, so the
  /// result does not depend on this value.
  int threads = 1;
};

struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Bernstein basis values and Cartesian derivatives at one point.
struct BasisEval {
  Eigen::VectorXd value;
  Eigen::VectorXd dx, dy;
  Eigen::VectorXd dxx, dxy, dyy;
};
BasisEval bernstein_basis(int d, const Triangle& tri, const Bary& b, bool second = false);

/// Galerkin system for the weak form
///   int grad u . A grad v + int v b . grad u + int c u v = int f v
/// in the dof basis of the space.
SparseSystem assemble(const SplineSpace& space, const LinearEllipticProblem& problem,
                      const AssemblyOptions& opt = {});

struct SolveReport {
  double relative_residual = 0;
};
/// Sparse LU solve; throws SolverError on failure or a residual above 1e-10.
Eigen::VectorXd solve_sparse(const SparseSystem& sys, SolveReport* report = nullptr);

struct ErrorNorms {
  double l2 = 0, h1 = 0, h2 = 0;
};
using JetField = std::function<Jet2(int tri, const Point& x)>;
/// Full Sobolev norms of s - ref (H^k includes all lower-order terms).
ErrorNorms error_norms(const SplineFunction& s, const JetField& ref, int pie_order = kPieOrder);
/// || det(hess s) - g ||_{L2}
double residual_norm(const SplineFunction& s, const std::function<double(const Point&)>& g,
                     int pie_order = kPieOrder);

void write_matrix_market(const Eigen::SparseMatrix<double>& m, const std::filesystem::path& path);

}  // namespace pcq
