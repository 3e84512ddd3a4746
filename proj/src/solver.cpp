#include "pcq/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace pcq {

namespace {

Eigen::Matrix2d cofactor(const Eigen::Matrix2d& h) {
  Eigen::Matrix2d c;
  c << h(1, 1), -h(1, 0), -h(0, 1), h(0, 0);
  return c;
}

double l2_norm(const SplineFunction& s, int pie_order) {
  const auto& mesh = s.space().mesh();
  double r = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const BBPoly& p = s.patch(t);
    for (const auto& q : quadrature_points(mesh, t, pie_order)) {
      const double v = eval_bb(p, q.b);
      r += q.w * v * v;
    }
  }
  return std::sqrt(r);
}

}  // namespace

LinearEllipticProblem linearize_ma(const SplineFunction& u, const ScalarField& g) {
  LinearEllipticProblem pb;
  pb.coefficients = [&u, g](int t, const Point& x) {
    const BBPoly& p = u.patch(t);
    const Eigen::Matrix2d h = eval_bb_hessian(p, barycentric(p.tri, x));
    EllipticCoefficients c;
    c.A = cofactor(h);
    c.f = h.determinant() - g(x);
    return c;
  };
  return pb;
}

double ellipticity_monitor(const SplineFunction& u, int pie_order) {
  const auto& mesh = u.space().mesh();
  double lo = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const BBPoly& p = u.patch(t);
    for (const auto& q : quadrature_points(mesh, t, pie_order)) {
      const Eigen::Matrix2d h = eval_bb_hessian(p, q.b);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues()[0]);
    }
  }
  return lo;
}

SplineFunction poisson_initial_guess(std::shared_ptr<const SplineSpace> space, const ScalarField& g,
                                     const AssemblyOptions& opt) {
  LinearEllipticProblem pb;
  pb.coefficients = [&g](int, const Point& x) {
    const double gx = g(x);
    if (gx < 0) throw std::invalid_argument("g must be positive");
    EllipticCoefficients c;
    c.A = Eigen::Matrix2d::Identity();
    // lap u = 2 sqrt(g) in weak form: int grad u . grad v = -int 2 sqrt(g) v.
    c.f = -2 * std::sqrt(gx);
    return c;
  };
  const SparseSystem sys = assemble(*space, pb, opt);
  if (sys.rhs.norm() == 0) return SplineFunction(space, Eigen::VectorXd::Zero(space->dimension()));
  return SplineFunction(space, solve_sparse(sys));
}

NewtonState newton_step(const NewtonState& state, const ScalarField& g, const NewtonOptions& opt) {
  const auto space = state.u.space_ptr();
  const SparseSystem sys = assemble(*space, linearize_ma(state.u, g), opt.assembly);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(space->dimension());
  if (sys.rhs.norm() > 0) w = solve_sparse(sys);
  NewtonState next;
  next.u = SplineFunction(space, state.u.dofs() + w);
  next.k = state.k + 1;
  next.updates = state.updates;
  next.updates.push_back(l2_norm(SplineFunction(space, w), opt.assembly.pie_order));
  const auto& up = next.updates;
  next.diverged = up.size() >= 4 && up[up.size() - 1] > up[up.size() - 2] &&
                  up[up.size() - 2] > up[up.size() - 3] && up[up.size() - 3] > up[up.size() - 4];
  return next;
}

std::pair<SplineFunction, LevelReport> run_level(const MongeAmpereProblem& problem, int level,
                                                 const SplineFunction& initial, const NewtonOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  LevelReport rep;
  rep.level = level;
  rep.triangles = initial.space().mesh().num_triangles();
  rep.dofs = initial.space().dimension();
  NewtonState st;
  st.u = initial;
  while (st.k < opt.max_iter) {
    st = newton_step(st, problem.g, opt);
    const double floor =
        opt.floor_factor * std::numeric_limits<double>::epsilon() * l2_norm(st.u, opt.assembly.pie_order);
    if (st.updates.back() < std::max(opt.tol, floor)) {
      rep.converged = true;
      break;
    }
    if (st.diverged) break;
  }
  rep.diverged = st.diverged;
  rep.updates = st.updates;
  rep.m = rep.converged ? std::max(1, st.k - 1) : st.k;
  rep.residual = residual_norm(st.u, problem.g, opt.assembly.pie_order);
  rep.min_eigenvalue = ellipticity_monitor(st.u, opt.assembly.pie_order);
  if (problem.exact) {
    const auto& ex = problem.exact;
    rep.error = error_norms(st.u, [&ex](int, const Point& x) { return ex(x); }, opt.assembly.pie_order);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {st.u, rep};
}

Jet2 parent_jet(const SplineFunction& coarse, const CurvedTriangulation& fine, int t, const Point& x) {
  const int parent = fine.tri(t).parent;
  if (parent < 0 || parent >= coarse.space().mesh().num_triangles())
    throw SpaceError("fine triangle has no parent in the coarse mesh");
  return coarse.jet(parent, x);
}

namespace {

// Fits BB coefficients of degree d on T to values of `f` at the domain
// points of degree `at` (least squares when at > d); returns the residual.
std::vector<double> fit(int d, int at, const Triangle& T, const std::function<double(const Point&)>& f,
                        double* residual) {
  static thread_local std::map<std::pair<int, int>, Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> qrs;
  static thread_local std::map<std::pair<int, int>, Eigen::MatrixXd> mats;
  const auto key = std::make_pair(d, at);
  if (!qrs.count(key)) {
    mats[key] = collocation_matrix(d, at);
    qrs.emplace(key, Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(mats[key]));
  }
  const auto& idx = domain_indices(at);
  Eigen::VectorXd vals(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) vals[static_cast<Eigen::Index>(k)] = f(domain_point(T, at, idx[k]));
  const Eigen::VectorXd c = qrs.at(key).solve(vals);
  if (residual) {
    const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
    *residual = std::max(*residual, (mats.at(key) * c - vals).cwiseAbs().maxCoeff() / scale);
  }
  return {c.data(), c.data() + c.size()};
}

}  // namespace

SplineFunction transfer_guess(const SplineFunction& coarse, std::shared_ptr<const SplineSpace> fine,
                              double* residual) {
  const auto& fm = fine->mesh();
  const auto& cm = coarse.space().mesh();
  std::vector<std::optional<BBPoly>> fitted(fm.num_triangles());
  double res = 0;
  auto parent_of = [&](int t) {
    const int p = fm.tri(t).parent;
    if (p < 0 || p >= cm.num_triangles()) throw SpaceError("fine mesh is not a refinement of the coarse mesh");
    return p;
  };
  auto fitted_patch = [&](int t) -> const BBPoly& {
    if (fitted[t]) return *fitted[t];
    const int p = parent_of(t);
    const Triangle T = fm.triangle(t);
    const BBPoly& pp = coarse.patch(p);
    auto value = [&pp](const Point& x) { return eval_bb(pp, x); };
    switch (fm.tri(t).kind) {
      case TriKind::Ordinary:
        fitted[t] = BBPoly(5, T, fit(5, pp.degree, T, value, &res));
        break;
      case TriKind::Buffer:
        fitted[t] = BBPoly(6, T, fit(6, 6, T, value, &res));
        break;
      case TriKind::Pie: {
        if (cm.tri(p).kind != TriKind::Pie) throw SpaceError("pie triangle refined from a non-pie parent");
        const BBPoly& pf = coarse.pie_factor(p);
        const double scale = coarse.space().pie_conic_value(p, fm.vertex(fm.tri(t).v[0]));
        auto pv = [&pf, scale](const Point& x) { return scale * eval_bb(pf, x); };
        fitted[t] = BBPoly(4, T, fit(4, 4, T, pv, &res));
        break;
      }
    }
    return *fitted[t];
  };

  const auto& mds = fine->mds();
  Eigen::VectorXd dofs(mds.dimension());
  std::map<int, BBPoly> taylor;  // by fine vertex
  for (int i = 0; i < mds.dimension(); ++i) {
    const auto& d = mds.dof(i);
    if (d.category == DofCategory::Vertex) {
      auto it = taylor.find(d.owner);
      if (it == taylor.end()) {
        const Point v = fm.vertex(d.owner);
        const Jet2 j = coarse.jet(parent_of(d.triangle), v);
        auto quad = [&j, &v](const Point& x) {
          const Vector h = x - v;
          return j.value + j.grad.dot(h) + 0.5 * h.dot(j.hess * h);
        };
        const Triangle T = fm.triangle(d.triangle);
        it = taylor.emplace(d.owner, BBPoly(5, T, fit(5, 5, T, quad, nullptr))).first;
      }
      dofs[i] = it->second[d.index];
    } else {
      dofs[i] = fitted_patch(d.triangle)[d.index];
    }
  }
  if (residual) *residual = res;
  return SplineFunction(std::move(fine), dofs);
}

double rate(double prev, double cur) {
  if (!(prev > 0) || !(cur > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(prev / cur);
}

MultilevelResult multilevel_run(const MongeAmpereProblem& problem, int levels, const NewtonOptions& opt,
                                const ProgressCallback& progress) {
  if (levels < 1) throw std::invalid_argument("levels must be at least 1");
  MultilevelResult out;
  std::shared_ptr<const CurvedTriangulation> mesh = problem.mesh;
  std::optional<SplineFunction> prev;
  for (int l = 1; l <= levels; ++l) {
    if (l > 1) mesh = std::make_shared<const CurvedTriangulation>(refine_uniform(*mesh));
    const auto space = SplineSpace::build(mesh);
    SplineFunction guess;
    double tres = 0;
    if (l == 1) {
      guess = poisson_initial_guess(space, problem.g, opt.assembly);
      out.init_residual = residual_norm(guess, problem.g, opt.assembly.pie_order);
      if (problem.exact) {
        const auto& ex = problem.exact;
        out.init_error = error_norms(guess, [&ex](int, const Point& x) { return ex(x); }, opt.assembly.pie_order);
      }
    } else {
      guess = transfer_guess(*prev, space, &tres);
    }
    auto [u, rep] = run_level(problem, l, guess, opt);
    rep.transfer_residual = tres;
    if (prev) {
      const SplineFunction& coarse = *prev;
      const auto& fm = space->mesh();
      out.levels.back().epsilon = error_norms(
          u, [&](int t, const Point& x) { return parent_jet(coarse, fm, t, x); }, opt.assembly.pie_order);
      if (progress) progress(out.levels.back());
    }
    out.levels.push_back(rep);
    prev = u;
  }
  if (progress) progress(out.levels.back());
  out.final_solution = *prev;
  return out;
}

}  // namespace pcq
