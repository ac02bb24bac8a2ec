#pragma once

// Shared meshes and comparison helpers for the test binaries.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellfem/implicit_surface.hpp"
#include "ellfem/mesh.hpp"
#include "ellfem/sparse.hpp"

namespace ellfem::fixtures {

struct NamedMesh {
  std::string name;
  Mesh mesh;
};

inline Mesh lifted_p2(const Mesh& p1) {
  const ImplicitSurface sphere = ImplicitSurface::sphere(1.0);
  return mesh_preprocess(p1, 2, &sphere).mesh;
}

inline Eigen::MatrixXd rotation(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// Thirteen small meshes; every (kind, dim, order) cell appears at least once.
inline std::vector<NamedMesh> corpus() {
  std::vector<NamedMesh> out;
  out.push_back({"half_disk_p2", half_disk_example()});
  out.push_back({"disk_p1", generate_disk(0.3)});
  out.push_back({"disk_p2", lifted_p2(generate_disk(0.3))});
  out.push_back({"disk_p1_jitter", jitter_nodes(generate_disk(0.25), 0.02, 7)});
  out.push_back({"ball_p1", generate_ball(0.5)});
  out.push_back({"ball_p2", lifted_p2(generate_ball(0.5))});
  out.push_back({"ball_p2_jitter", jitter_nodes(lifted_p2(generate_ball(0.6)), 0.005, 3)});
  out.push_back({"circle_p1", generate_circle(12, 1)});
  out.push_back({"circle_p2_jitter", jitter_nodes(generate_circle(10, 2), 0.02, 11)});
  out.push_back({"sphere_p1", generate_sphere(1, 1)});
  out.push_back({"sphere_p2", generate_sphere(1, 2)});
  out.push_back({"sphere_p2_jitter", jitter_nodes(generate_sphere(2, 2), 0.01, 5)});
  out.push_back({"sphere_p1_moved", transform_nodes(generate_sphere(2, 1), 2.0 * rotation(0.3, -0.7, 1.1),
                                                    Eigen::Vector3d(1.0, -2.0, 0.5))});
  return out;
}

/// max |a - b| / max |a|, on dense copies.
inline double relative_difference(const CsrMatrix& a, const CsrMatrix& b) {
  const Eigen::MatrixXd da = a.to_dense();
  const Eigen::MatrixXd db = b.to_dense();
  const double scale = da.cwiseAbs().maxCoeff();
  return (da - db).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

inline bool same_bits(const CsrMatrix& a, const CsrMatrix& b) {
  return a.n == b.n && a.row_ptr == b.row_ptr && a.col_idx == b.col_idx && a.vals == b.vals;
}

}  // namespace ellfem::fixtures
