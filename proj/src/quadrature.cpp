#include "pcq/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace pcq {

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    r.x[i] = 0.5 * (1 - z);
    r.w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

const QuadratureRule& collapsed_rule(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  const GaussRule& g = gauss_legendre(n);
  QuadratureRule r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = g.x[i];
      const double v = g.x[j] * (1 - u);
      r.nodes.push_back({1 - u - v, u, v});
      // Reference measure normalized to one: factor 2 for the half-square.
      r.weights.push_back(2 * g.w[i] * g.w[j] * (1 - u));
    }
  std::lock_guard lock(mu);
  return cache.emplace(n, std::move(r)).first->second;
}

const QuadratureRule& triangle_rule() { return collapsed_rule(9); }

std::vector<QuadPoint> quadrature_points(const CurvedTriangulation& mesh, int t, int pie_order) {
  const auto& r = mesh.tri(t);
  const Triangle T = mesh.triangle(t);
  std::vector<QuadPoint> pts;
  if (r.kind != TriKind::Pie) {
    const auto& rule = triangle_rule();
    const double area = T.area();
    pts.reserve(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const Bary& b = rule.nodes[k];
      pts.push_back({b[0] * T.v[0] + b[1] * T.v[1] + b[2] * T.v[2], b, rule.weights[k] * area});
    }
    return pts;
  }
  const auto& arc = mesh.domain().arc(r.arc);
  const GaussRule& g = gauss_legendre(pie_order);
  const Point& w = T.v[0];
  const double area2 = 2 * T.area();
  pts.reserve(g.x.size() * g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double s = g.x[i];
    const Point c = (1 - s) * T.v[1] + s * T.v[2];
    const double rho = arc_ray_parameter(arc, w, c);
    const Point X = w + rho * (c - w);
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      const double tt = g.x[j];
      const double jac = tt * rho * rho * area2;
      if (!(jac > 0)) throw GeometryError("non-positive Jacobian in pie map of triangle " + std::to_string(t));
      const Point x = w + tt * (X - w);
      // Barycentric coordinates with respect to the chord triangle.
      const double bw = 1 - tt * rho;
      const double b1 = tt * rho * (1 - s), b2 = tt * rho * s;
      pts.push_back({x, {bw, b1, b2}, g.w[i] * g.w[j] * jac});
    }
  }
  return pts;
}

double integrate(const CurvedTriangulation& mesh, int t, const std::function<double(const Point&)>& f,
                 int pie_order) {
  double s = 0;
  for (const auto& p : quadrature_points(mesh, t, pie_order)) s += p.w * f(p.x);
  return s;
}

double integrate(const CurvedTriangulation& mesh, const std::function<double(const Point&)>& f,
                 int pie_order) {
  double s = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) s += integrate(mesh, t, f, pie_order);
  return s;
}

}  // namespace pcq
