#include "ellfem/implicit_surface.hpp"

#include <algorithm>
#include <cmath>

namespace ellfem {

ImplicitSurface ImplicitSurface::sphere(double radius) {
  ImplicitSurface s;
  s.distance = [radius](const Eigen::Ref<const Eigen::VectorXd>& x) { return x.norm() - radius; };
  s.gradient = [](const Eigen::Ref<const Eigen::VectorXd>& x) -> Eigen::VectorXd {
    const double n = x.norm();
    if (n == 0.0) return Eigen::VectorXd::Zero(x.size());
    return x / n;
  };
  return s;
}

ImplicitSurface ImplicitSurface::torus(double major_radius, double minor_radius) {
  ImplicitSurface s;
  s.distance = [=](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double rho = std::hypot(x(0), x(1));
    return std::hypot(rho - major_radius, x(2)) - minor_radius;
  };
  return s;
}

Eigen::VectorXd ImplicitSurface::gradient_at(const Eigen::Ref<const Eigen::VectorXd>& x,
                                             double fd_step) const {
  if (gradient) return gradient(x);
  const double h = fd_step * std::max(1.0, x.cwiseAbs().maxCoeff());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    y(k) = x(k) + h;
    const double fp = distance(y);
    y(k) = x(k) - h;
    const double fm = distance(y);
    y(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

LiftResult lift_nodes(const NodeArray& x, const ImplicitSurface& surface,
                      const LiftOptions& options) {
  LiftResult result;
  result.points = x;
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd y = x.row(i).transpose();
    double d = surface.distance(y);
    double step = 1.0;
    int iter = 0;
    while (std::abs(d) > options.tol && iter < options.max_iter) {
      ++iter;
      const Eigen::VectorXd g = surface.gradient_at(y, options.fd_step);
      const double g2 = g.squaredNorm();
      if (!(g2 > 0.0)) break;
      Eigen::VectorXd candidate = y - step * d / g2 * g;
      double dc = surface.distance(candidate);
      while (std::abs(dc) > std::abs(d) && step > 1e-8) {
        step *= 0.5;
        candidate = y - step * d / g2 * g;
        dc = surface.distance(candidate);
      }
      y = candidate;
      d = dc;
      step = std::min(1.0, 2.0 * step);
    }
    result.points.row(i) = y.transpose();
    if (!(std::abs(d) <= options.tol)) {
#pragma omp critical
      result.failures.push_back({static_cast<Index>(i), std::abs(d)});
    }
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const LiftFailure& a, const LiftFailure& b) { return a.point < b.point; });
  return result;
}

}  // namespace ellfem
