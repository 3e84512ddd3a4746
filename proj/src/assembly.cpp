#include "pcq/assembly.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <Eigen/UmfPackSupport>

namespace pcq {

BasisEval bernstein_basis(int d, const Triangle& tri, const Bary& b, bool second) {
  const int n = num_coeffs(d);
  BasisEval e;
  e.value.resize(n);
  bernstein_values(d, b, std::span(e.value.data(), n));
  const auto g = barycentric_gradients(tri);
  e.dx = Eigen::VectorXd::Zero(n);
  e.dy = Eigen::VectorXd::Zero(n);
  const auto& idx = domain_indices(d);
  if (d >= 1) {
    std::vector<double> lower(num_coeffs(d - 1));
    bernstein_values(d - 1, b, lower);
    for (int k = 0; k < n; ++k) {
      for (int s = 0; s < 3; ++s) {
        if (idx[k][s] == 0) continue;
        MultiIndex a = idx[k];
        --a[s];
        const double v = d * lower[bb_index(d - 1, a)];
        e.dx[k] += v * g[s].x();
        e.dy[k] += v * g[s].y();
      }
    }
  }
  if (second) {
    e.dxx = Eigen::VectorXd::Zero(n);
    e.dxy = Eigen::VectorXd::Zero(n);
    e.dyy = Eigen::VectorXd::Zero(n);
    if (d >= 2) {
      std::vector<double> lower(num_coeffs(d - 2));
      bernstein_values(d - 2, b, lower);
      for (int k = 0; k < n; ++k)
        for (int s = 0; s < 3; ++s)
          for (int r = 0; r < 3; ++r) {
            MultiIndex a = idx[k];
            --a[s];
            --a[r];
            if (a[0] < 0 || a[1] < 0 || a[2] < 0) continue;
            const double v = d * (d - 1.0) * lower[bb_index(d - 2, a)];
            e.dxx[k] += v * g[s].x() * g[r].x();
            e.dxy[k] += v * g[s].x() * g[r].y();
            e.dyy[k] += v * g[s].y() * g[r].y();
          }
    }
  }
  return e;
}

namespace {

struct Element {
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
};

Element element(const SplineSpace& space, int t, const LinearEllipticProblem& pb, int pie_order) {
  const auto& mesh = space.mesh();
  const LocalMap& lm = space.local_map(t);
  const Triangle T = mesh.triangle(t);
  const auto pts = quadrature_points(mesh, t, pie_order);
  const int nq = static_cast<int>(pts.size());
  const int n = num_coeffs(lm.degree);
  Eigen::MatrixXd B(nq, n), Gx(nq, n), Gy(nq, n);
  Eigen::VectorXd a11(nq), a12(nq), a21(nq), a22(nq), bx(nq), by(nq), cc(nq), ff(nq);
  for (int q = 0; q < nq; ++q) {
    const BasisEval e = bernstein_basis(lm.degree, T, pts[q].b);
    B.row(q) = e.value;
    Gx.row(q) = e.dx;
    Gy.row(q) = e.dy;
    const EllipticCoefficients c = pb.coefficients(t, pts[q].x);
    const double w = pts[q].w;
    a11[q] = w * c.A(0, 0);
    a12[q] = w * c.A(0, 1);
    a21[q] = w * c.A(1, 0);
    a22[q] = w * c.A(1, 1);
    bx[q] = w * c.b.x();
    by[q] = w * c.b.y();
    cc[q] = w * c.c;
    ff[q] = w * c.f;
  }
  // Rows index the test function v, columns the trial function u:
  // grad u . A grad v = sum_ij d_i u A_ij d_j v.
  Eigen::MatrixXd K = Gx.transpose() * (a11.asDiagonal() * Gx + a21.asDiagonal() * Gy) +
                      Gy.transpose() * (a12.asDiagonal() * Gx + a22.asDiagonal() * Gy);
  if (pb.has_advection) K += B.transpose() * (bx.asDiagonal() * Gx + by.asDiagonal() * Gy);
  if (pb.has_reaction) K += B.transpose() * (cc.asDiagonal() * B);
  const Eigen::VectorXd F = B.transpose() * ff;
  return {lm.bb.transpose() * K * lm.bb, lm.bb.transpose() * F};
}

}  // namespace

SparseSystem assemble(const SplineSpace& space, const LinearEllipticProblem& problem,
                      const AssemblyOptions& opt) {
  const auto& mesh = space.mesh();
  const int nt = mesh.num_triangles();
  const int dim = space.dimension();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  const int threads = std::max(1, opt.threads);
  const int block = 256;
  std::vector<Element> els(block);
  for (int start = 0; start < nt; start += block) {
    const int stop = std::min(nt, start + block);
    auto work = [&](int first, int step) {
      for (int t = start + first; t < stop; t += step) els[t - start] = element(space, t, problem, opt.pie_order);
    };
    if (threads == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (int k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
      for (auto& th : pool) th.join();
    }
    for (int t = start; t < stop; ++t) {
      const auto& dofs = space.local_map(t).dofs;
      const Element& e = els[t - start];
      for (std::size_t i = 0; i < dofs.size(); ++i) {
        rhs[dofs[i]] += e.F[static_cast<Eigen::Index>(i)];
        for (std::size_t j = 0; j < dofs.size(); ++j)
          trip.emplace_back(dofs[i], dofs[j], e.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  }
  SparseSystem sys;
  sys.matrix.resize(dim, dim);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

Eigen::VectorXd solve_sparse(const SparseSystem& sys, SolveReport* report) {
  const auto& A = sys.matrix;
  if (A.rows() != A.cols() || A.rows() != sys.rhs.size()) throw SolverError("system dimensions do not match");
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  auto cond_estimate = [&]() {
    const auto U = lu.matrixU();
    double lo = INFINITY, hi = 0;
    for (Eigen::Index k = 0; k < U.outerSize(); ++k)
      for (typename std::decay_t<decltype(U)>::InnerIterator it(U, k); it; ++it)
        if (it.row() == it.col()) {
          lo = std::min(lo, std::abs(it.value()));
          hi = std::max(hi, std::abs(it.value()));
        }
    return lo > 0 ? hi / lo : INFINITY;
  };
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sparse factorization failed (pivot ratio estimate " << cond_estimate() << ")";
    throw SolverError(msg.str());
  }
  Eigen::VectorXd x = lu.solve(sys.rhs);
  const double bn = sys.rhs.norm();
  const double res = bn > 0 ? (A * x - sys.rhs).norm() / bn : (A * x - sys.rhs).norm();
  if (report) report->relative_residual = res;
  if (!x.allFinite() || res > 1e-10) {
    std::ostringstream msg;
    msg << "sparse solve residual " << res << " above 1e-10 (pivot ratio estimate " << cond_estimate() << ")";
    throw SolverError(msg.str());
  }
  return x;
}

ErrorNorms error_norms(const SplineFunction& s, const JetField& ref, int pie_order) {
  const auto& mesh = s.space().mesh();
  double l2 = 0, h1 = 0, h2 = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const BBPoly& p = s.patch(t);
    for (const auto& q : quadrature_points(mesh, t, pie_order)) {
      const Jet2 a = eval_bb_jet(p, q.b);
      const Jet2 r = ref(t, q.x);
      const double dv = a.value - r.value;
      const Vector dg = a.grad - r.grad;
      const Eigen::Matrix2d dh = a.hess - r.hess;
      l2 += q.w * dv * dv;
      h1 += q.w * dg.squaredNorm();
      h2 += q.w * (dh(0, 0) * dh(0, 0) + dh(0, 1) * dh(0, 1) + dh(1, 1) * dh(1, 1));
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + h1), std::sqrt(l2 + h1 + h2)};
}

double residual_norm(const SplineFunction& s, const std::function<double(const Point&)>& g, int pie_order) {
  const auto& mesh = s.space().mesh();
  double r = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const BBPoly& p = s.patch(t);
    for (const auto& q : quadrature_points(mesh, t, pie_order)) {
      const double d = eval_bb_hessian(p, q.b).determinant() - g(q.x);
      r += q.w * d * d;
    }
  }
  return std::sqrt(r);
}

void write_matrix_market(const Eigen::SparseMatrix<double>& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace pcq
