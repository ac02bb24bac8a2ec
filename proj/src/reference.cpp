#include "ellfem/reference.hpp"

#include <map>
#include <mutex>

namespace ellfem {

std::span<const std::array<int, 2>> edge_table(int dim) {
  switch (dim) {
    case 1: return detail::kEdges1;
    case 2: return detail::kEdges2;
    case 3: return detail::kEdges3;
    default: throw UnsupportedElement(dim, 2);
  }
}

ReferenceElement reference_element(int dim, int order) {
  detail::check_supported(dim, order);
  ReferenceElement ref;
  ref.dim = dim;
  ref.order = order;
  ref.dofs = dof_count(dim, order);
  ref.nodes = Eigen::MatrixXd::Zero(dim, ref.dofs);
  for (int k = 0; k < dim; ++k) ref.nodes(k, k + 1) = 1.0;
  if (order == 2) {
    const auto edges = edge_table(dim);
    for (std::size_t k = 0; k < edges.size(); ++k)
      ref.nodes.col(dim + 1 + static_cast<int>(k)) =
          0.5 * (ref.nodes.col(edges[k][0]) + ref.nodes.col(edges[k][1]));
  }
  return ref;
}

namespace {

// Exact P1 reference mass matrix: |E| (1 + delta_ij) / ((d + 1)(d + 2)).
Eigen::MatrixXd exact_p1_mass(int dim) {
  const int n = dim + 1;
  const double scale = reference_measure(dim) / ((dim + 1) * (dim + 2));
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, scale);
  m.diagonal().array() *= 2.0;
  return m;
}

// Barycentric gradients are constant, so int d_m phi_k d_n phi_j = |E| g_mk g_nj.
std::vector<Eigen::MatrixXd> exact_p1_stiffness(int dim) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(dim);
  const Eigen::MatrixXd g = basis_grad(dim, 1, xi);
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(dim * dim);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n)
      blocks.push_back(reference_measure(dim) * g.row(m).transpose() * g.row(n));
  return blocks;
}

}  // namespace

ReferencePack precompute(int dim, int order) {
  detail::check_supported(dim, order);
  ReferencePack pack;
  pack.dim = dim;
  pack.order = order;
  pack.dofs = dof_count(dim, order);
  pack.rule = quadrature_rule(dim);
  pack.weights = pack.rule.weights;

  const int nq = pack.rule.size();
  const int n = pack.dofs;
  pack.values.resize(n, nq);
  pack.gradients.resize(dim, n * nq);
  pack.products.resize(n * n, nq);
  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd xi = pack.rule.points.col(q);
    pack.values.col(q) = basis_eval(dim, order, xi);
    pack.gradients.middleCols(q * n, n) = basis_grad(dim, order, xi);
    const Eigen::MatrixXd outer = pack.values.col(q) * pack.values.col(q).transpose();
    pack.products.col(q) = outer.reshaped();
  }
  if (order == 1) {
    pack.mass_ref = exact_p1_mass(dim);
    pack.stiffness_ref = exact_p1_stiffness(dim);
  }
  return pack;
}

const ReferencePack& reference_pack(int dim, int order) {
  detail::check_supported(dim, order);
  static std::mutex mutex;
  static std::map<int, ReferencePack> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace(dim * 10 + order);
  if (inserted) it->second = precompute(dim, order);
  return it->second;
}

}  // namespace ellfem
