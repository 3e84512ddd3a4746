#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcq/assembly.hpp"

namespace pcq {

using ScalarField = std::function<double(const Point&)>;
using ExactJet = std::function<Jet2(const Point&)>;

/// det(hess u) = g in the domain, u = 0 on the boundary.
struct MongeAmpereProblem {
  std::string name;
  std::shared_ptr<const CurvedTriangulation> mesh;  // level 1
  ScalarField g;
  ExactJet exact;  // empty when unknown
};

/// Coefficients of the Newton step: A = cof(hess u), b = 0, c = 0, f = det(hess u) - g.
LinearEllipticProblem linearize_ma(const SplineFunction& u, const ScalarField& g);
/// Smallest eigenvalue of hess u (equal to that of its cofactor) over the
/// quadrature points. Negative values flag loss of ellipticity.
double ellipticity_monitor(const SplineFunction& u, int pie_order = kPieOrder);

/// Galerkin solution of lap u = 2 sqrt(g) with zero boundary values.
SplineFunction poisson_initial_guess(std::shared_ptr<const SplineSpace> space, const ScalarField& g,
                                     const AssemblyOptions& opt = {});

struct NewtonOptions {
  double tol = 1e-15;
  int max_iter = 20;
  /// The stopping threshold is max(tol, floor_factor * eps * ||u||_L2), so a
  /// tolerance below double rounding still terminates. Zero disables it.
  double floor_factor = 100.0;
  AssemblyOptions assembly;
};

struct NewtonState {
  SplineFunction u;
  int k = 0;
  std::vector<double> updates;  // ||u_j - u_{j+1}||_L2
  bool diverged = false;
};

/// One Newton step u_{k+1} = u_k + w, where w solves the linearized problem
/// with right-hand side -(det(hess u_k) - g).
NewtonState newton_step(const NewtonState& state, const ScalarField& g, const NewtonOptions& opt = {});

struct LevelReport {
  int level = 0;
  int triangles = 0;
  int dofs = 0;
  int m = 0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> updates;
  std::optional<ErrorNorms> error;    // against the exact solution
  std::optional<ErrorNorms> epsilon;  // u_l - u_{l+1}
  double residual = 0;
  double min_eigenvalue = 0;
  double transfer_residual = 0;
  double seconds = 0;
};

/// Newton iteration on one level until the update norm drops below the
/// threshold or max_iter steps were taken. m counts the Newton steps taken
/// before the step whose update met the threshold, and is at least one.
std::pair<SplineFunction, LevelReport> run_level(const MongeAmpereProblem& problem, int level,
                                                 const SplineFunction& initial, const NewtonOptions& opt = {});

/// Fine-level guess read off a coarse spline: vertex dofs from the 2-jet of
/// the coarse patch containing the designated triangle, other dofs from the
/// coarse restriction fitted on the fine triangle (least squares where the
/// restriction is not representable). Residual of those fits in `residual`.
SplineFunction transfer_guess(const SplineFunction& coarse, std::shared_ptr<const SplineSpace> fine,
                              double* residual = nullptr);

/// Jet of a coarse spline seen from fine triangle t (through the parent map).
Jet2 parent_jet(const SplineFunction& coarse, const CurvedTriangulation& fine, int t, const Point& x);

struct MultilevelResult {
  std::vector<LevelReport> levels;
  std::optional<ErrorNorms> init_error;
  double init_residual = 0;
  SplineFunction final_solution;
};

using ProgressCallback = std::function<void(const LevelReport&)>;

/// Levels 1..L: Poisson start on level 1, transferred guesses afterwards.
MultilevelResult multilevel_run(const MongeAmpereProblem& problem, int levels, const NewtonOptions& opt = {},
                                const ProgressCallback& progress = {});

/// log2(prev / cur), NaN when either is missing or non-positive.
double rate(double prev, double cur);

}  // namespace pcq
