#pragma once

#include <vector>

#include <Eigen/Core>

#include "ellfem/types.hpp"

namespace ellfem {

/// Zero level set of a signed-distance-like function.
struct ImplicitSurface {
  ScalarFunction distance;
  /// Optional; central finite differences of `distance` are used when empty.
  VectorFunction gradient;

  /// |x - center| - radius in any ambient dimension (circle in R^2, sphere in R^3).
  static ImplicitSurface sphere(double radius = 1.0);
  /// Torus around the x3 axis with major radius R and minor radius r.
  static ImplicitSurface torus(double major_radius, double minor_radius);

  Eigen::VectorXd gradient_at(const Eigen::Ref<const Eigen::VectorXd>& x,
                              double fd_step = 1e-6) const;
};

struct LiftOptions {
  double tol = 1e-12;
  int max_iter = 100;
  double fd_step = 1e-6;
};

struct LiftFailure {
  Index point = 0;
  double residual = 0.0;
};

struct LiftResult {
  NodeArray points;
  std::vector<LiftFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Projects each row of x onto the surface by the damped iteration
/// y <- y - a d(y) grad d(y) / |grad d(y)|^2, halving a whenever |d| grows.
/// Points already within tol are returned unchanged.
LiftResult lift_nodes(const NodeArray& x, const ImplicitSurface& surface,
                      const LiftOptions& options = {});

}  // namespace ellfem
