#pragma once

#include <string>

#include "pcq/solver.hpp"

namespace pcq {

enum class ProblemId { Disk, EllipseExp, EllipseSin, C2Domain, Custom };

ProblemId parse_problem_id(const std::string& s);
std::string to_string(ProblemId id);

struct C2Parameters {
  double a = 4.0, b = 1.3, t0 = 0.85 * M_PI;
  double c1 = 0, c2 = 0, r = 0;
};
/// Osculating circle of x = (a cos t, b sin t) at t0.
C2Parameters c2_parameters();
/// Curvature of the ellipse (a cos t, b sin t).
double ellipse_curvature(double a, double b, double t);

ConicDomain builtin_domain(ProblemId id);
/// Shipped initial mesh, validated at load.
std::shared_ptr<const CurvedTriangulation> builtin_mesh(ProblemId id);
std::filesystem::path builtin_mesh_path(ProblemId id);

/// Right-hand side and (where known) exact solution of a built-in problem.
ScalarField builtin_g(ProblemId id);
ExactJet builtin_exact(ProblemId id);

MongeAmpereProblem builtin_problem(ProblemId id);

}  // namespace pcq
