#include <cmath>

#include "kernels.hpp"

namespace ellfem {

Eigen::MatrixXd quadrature_points(const Mesh& mesh) {
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const int Q = pack.num_points();
  Eigen::MatrixXd out(mesh.ambient, static_cast<Eigen::Index>(Q) * mesh.num_elements());
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Eigen::MatrixXd X(pack.dofs, mesh.ambient);
    for (int j = 0; j < pack.dofs; ++j) X.row(j) = mesh.nodes.row(mesh.elements(e, j));
    out.middleCols(static_cast<Eigen::Index>(e) * Q, Q).noalias() = X.transpose() * pack.values;
  }
  return out;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarFunction& f, LoadMode mode) {
  if (mode == LoadMode::Nodal) {
    Eigen::VectorXd nodal(mesh.num_nodes());
    for (Index i = 0; i < mesh.num_nodes(); ++i) {
      nodal(i) = f(mesh.nodes.row(i).transpose());
      if (!std::isfinite(nodal(i)))
        throw EvaluationError(-1, "non-finite value at node " + std::to_string(i));
    }
    return spmv(assemble_batched(mesh).mass_matrix(), nodal);
  }

  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const int Q = pack.num_points();
  const Index ne = mesh.num_elements();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  const Index chunk = 4096;
  for (Index first = 0; first < ne; first += chunk) {
    const Index count = std::min(chunk, ne - first);
    const ElementBatch batch = element_geometry(mesh, first, count);
    for (Index k = 0; k < count; ++k) {
      const Index e = first + k;
      const Eigen::MatrixXd x = batch.node_page(k).transpose() * pack.values;
      Eigen::VectorXd local = Eigen::VectorXd::Zero(pack.dofs);
      for (int q = 0; q < Q; ++q) {
        const double fx = f(x.col(q));
        if (!std::isfinite(fx)) throw EvaluationError(e, "load function returned a non-finite value");
        local += (pack.weights(q) * fx * batch.det(q, k)) * pack.values.col(q);
      }
      for (int j = 0; j < pack.dofs; ++j) b(mesh.elements(e, j)) += local(j);
    }
  }
  return b;
}

}  // namespace ellfem
