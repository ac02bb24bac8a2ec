#include <cmath>

#include <Eigen/Dense>

#include "ellfem/assembly.hpp"

namespace ellfem {

AssemblyOutput assemble_naive(const Mesh& mesh) {
  const int d = mesh.dim;
  const int m = mesh.ambient;
  const int n = mesh.dofs_per_element();
  const QuadratureRule& rule = quadrature_rule(d);

  AssemblyOutput out;
  out.n = mesh.num_nodes();
  const std::size_t total = static_cast<std::size_t>(n) * n * mesh.num_elements();
  out.rows.resize(total);
  out.cols.resize(total);
  out.mass.resize(total);
  out.stiffness.resize(total);
  std::size_t pos = 0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    Eigen::MatrixXd X(n, m);
    for (int j = 0; j < n; ++j) X.row(j) = mesh.nodes.row(mesh.elements(e, j));
    double h = 0.0;
    for (int a = 0; a <= d; ++a)
      for (int b = a + 1; b <= d; ++b) h = std::max(h, (X.row(a) - X.row(b)).norm());

    Eigen::MatrixXd Mloc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Aloc = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd xi = rule.points.col(q);
      const Eigen::VectorXd phi = basis_eval(d, mesh.order, xi);
      const Eigen::MatrixXd G = basis_grad(d, mesh.order, xi);

      Eigen::MatrixXd L(m, m);
      L.leftCols(d) = X.transpose() * G.transpose();
      double det = 0.0;
      if (m == d) {
        det = std::abs(L.determinant());
      } else if (d == 2) {
        const Eigen::Vector3d t1 = L.col(0);
        const Eigen::Vector3d t2 = L.col(1);
        L.col(2) = t1.cross(t2);
        det = L.col(2).norm();
      } else {
        L(0, 1) = -L(1, 0);
        L(1, 1) = L(0, 0);
        det = L.col(0).norm();
      }
      if (!(det > 1e-14 * std::pow(h, d))) throw SingularElement(e, "element measure below tolerance");
      const Eigen::MatrixXd C = L.inverse();

      Eigen::MatrixXd Gpad = Eigen::MatrixXd::Zero(m, n);
      Gpad.topRows(d) = G;
      const Eigen::MatrixXd grad = C.transpose() * Gpad;
      const double wdet = rule.weights(q) * det;
      Mloc += wdet * phi * phi.transpose();
      Aloc += wdet * grad.transpose() * grad;
    }

    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        out.rows[pos] = mesh.elements(e, k);
        out.cols[pos] = mesh.elements(e, j);
        out.mass[pos] = Mloc(k, j);
        out.stiffness[pos++] = Aloc(k, j);
      }
  }
  return out;
}

}  // namespace ellfem
