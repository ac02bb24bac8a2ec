#include "kernels.hpp"

namespace ellfem {

namespace detail {

void reserve_batch(ElementBatch& batch, const Mesh& mesh, Index first, Index count) {
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const int m = mesh.ambient;
  const int Q = pack.num_points();
  batch.first = first;
  batch.count = count;
  batch.dim = mesh.dim;
  batch.ambient = m;
  batch.nref = pack.dofs;
  batch.num_points = Q;
  batch.X.resize(pack.dofs, static_cast<Eigen::Index>(count) * m);
  batch.L.resize(m, static_cast<Eigen::Index>(count) * Q * m);
  batch.C.resize(m, static_cast<Eigen::Index>(count) * Q * m);
  batch.det.resize(Q, count);
}

}  // namespace detail

std::size_t batch_memory(const Mesh& mesh, Index batch_size) {
  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  const std::size_t m = static_cast<std::size_t>(mesh.ambient);
  const std::size_t q = static_cast<std::size_t>(pack.num_points());
  const std::size_t per_element = pack.dofs * m + 2 * q * m * m + q;
  return per_element * sizeof(double) * static_cast<std::size_t>(batch_size);
}

ElementBatch element_geometry(const Mesh& mesh, Index first, Index count) {
  if (first < 0 || count < 0 || first + count > mesh.num_elements())
    throw DomainError("element range out of bounds");
  ElementBatch batch;
  detail::reserve_batch(batch, mesh, first, count);
  detail::dispatch(mesh, [&](auto kernel) {
    decltype(kernel)::geometry(mesh, reference_pack(mesh.dim, mesh.order), first, count, batch);
  });
  return batch;
}

PointGeometry element_geometry(const Eigen::Ref<const Eigen::MatrixXd>& X, int dim, int order,
                               MeshKind kind, Index element) {
  const int m = kind == MeshKind::Bulk ? dim : dim + 1;
  if (!is_supported_mesh_type(kind, dim, order)) throw UnsupportedElement(dim, order);
  const ReferencePack& pack = reference_pack(dim, order);
  if (X.rows() != pack.dofs || X.cols() != m)
    throw DimensionMismatch("node page must be " + std::to_string(pack.dofs) + " x " +
                            std::to_string(m));
  const int Q = pack.num_points();
  PointGeometry out;
  out.L.resize(m, Q * m);
  out.C.resize(m, Q * m);
  out.det.resize(Q);
  detail::dispatch(kind, dim, order, [&](auto kernel) {
    using K = decltype(kernel);
    const typename K::NodePage page = X;
    const double h = K::corner_size(page);
    for (int q = 0; q < Q; ++q) {
      Eigen::Map<typename K::Square> L(out.L.data() + q * m * m);
      out.det(q) = K::jacobian(page, pack.gradient_page(q), L);
      K::check_measure(out.det(q), h, element);
      Eigen::Map<typename K::Square>(out.C.data() + q * m * m) = L.inverse();
    }
  });
  return out;
}

}  // namespace ellfem
