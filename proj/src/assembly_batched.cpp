#include <algorithm>
#include <array>
#include <cmath>

#include "kernels.hpp"

namespace ellfem {

namespace {

AssemblyOutput allocate_output(const Mesh& mesh) {
  const std::size_t nref = static_cast<std::size_t>(mesh.dofs_per_element());
  const std::size_t total = nref * nref * static_cast<std::size_t>(mesh.num_elements());
  AssemblyOutput out;
  out.n = mesh.num_nodes();
  out.rows.resize(total);
  out.cols.resize(total);
  out.mass.resize(total);
  out.stiffness.resize(total);
  return out;
}

// Index pages: entry k + N j of element e couples elements(e, k) and elements(e, j).
void write_indices(const Mesh& mesh, Index first, Index count, AssemblyOutput& out) {
  const int N = mesh.dofs_per_element();
  const std::size_t NN = static_cast<std::size_t>(N) * N;
#pragma omp parallel for schedule(static)
  for (Index e = first; e < first + count; ++e) {
    Index* rows = out.rows.data() + NN * e;
    Index* cols = out.cols.data() + NN * e;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        rows[k + N * j] = mesh.elements(e, k);
        cols[k + N * j] = mesh.elements(e, j);
      }
  }
}

}  // namespace

AssemblyOutput assemble_batched(const Mesh& mesh, const AssemblyOptions& options) {
  return detail::assemble_batched(mesh, options, {});
}

AssemblyOutput detail::assemble_batched(const Mesh& mesh, const AssemblyOptions& options,
                                        const ElementVisitor& visit) {
  if (options.batch_size < 1) throw DomainError("batch size must be at least 1");
  const Index ne = mesh.num_elements();
  const Index batch_size = std::min(options.batch_size, std::max<Index>(ne, 1));
  const std::size_t needed = batch_memory(mesh, batch_size);
  if (needed > options.memory_budget) {
    const std::size_t per_element = batch_memory(mesh, 1);
    throw ResourceError("batch of " + std::to_string(batch_size) + " elements needs " +
                        std::to_string(needed >> 20) + " MiB; use a batch size of at most " +
                        std::to_string(options.memory_budget / per_element));
  }

  const ReferencePack& pack = reference_pack(mesh.dim, mesh.order);
  AssemblyOutput out = allocate_output(mesh);
  write_indices(mesh, 0, ne, out);
  const std::size_t NN = static_cast<std::size_t>(pack.dofs) * pack.dofs;

  detail::dispatch(mesh, [&](auto kernel) {
    using K = decltype(kernel);
    ElementBatch batch;
    for (Index first = 0; first < ne; first += batch_size) {
      const Index count = std::min(batch_size, ne - first);
      if (batch.count != count) detail::reserve_batch(batch, mesh, first, count);
      batch.first = first;
      K::geometry(mesh, pack, first, count, batch);
#pragma omp parallel for schedule(static)
      for (Index b = 0; b < count; ++b) {
        const std::size_t offset = NN * static_cast<std::size_t>(first + b);
        K::local_matrices(pack, batch, b, out.mass.data() + offset, out.stiffness.data() + offset);
        if (visit) visit(batch, b);
      }
    }
  });
  return out;
}

AssemblyOutput assemble_p1_fast(const Mesh& mesh) {
  if (mesh.order != 1) throw PreconditionError("assemble_p1_fast needs a P1 mesh");
  const ReferencePack& pack = reference_pack(mesh.dim, 1);
  const Index ne = mesh.num_elements();
  AssemblyOutput out = allocate_output(mesh);
  write_indices(mesh, 0, ne, out);

  detail::dispatch(mesh, [&](auto kernel) {
    using K = decltype(kernel);
    constexpr int D = K::GradPage::RowsAtCompileTime;
    constexpr int N = K::N;
    const typename K::Local mass_ref = pack.mass_ref;
    std::array<typename K::Local, D * D> stiffness_ref;
    for (int i = 0; i < D * D; ++i) stiffness_ref[i] = pack.stiffness_ref[i];
    Index bad = ne;

#pragma omp parallel for schedule(static)
    for (Index e = 0; e < ne; ++e) {
      typename K::NodePage X;
      K::gather(mesh, e, Eigen::Map<typename K::NodePage>(X.data()));
      typename K::Square L;
      const double det = K::jacobian(X, pack.gradient_page(0), Eigen::Map<typename K::Square>(L.data()));
      if (!(det > 1e-14 * std::pow(K::corner_size(X), D))) {
#pragma omp critical
        bad = std::min(bad, e);
        continue;
      }
      const typename K::Square C = L.inverse();
      const Eigen::Matrix<double, D, D> CCt =
          C.template topRows<D>() * C.template topRows<D>().transpose();
      const std::size_t offset = static_cast<std::size_t>(N) * N * e;
      Eigen::Map<typename K::Local>(out.mass.data() + offset) = det * mass_ref;
      Eigen::Map<typename K::Local> A(out.stiffness.data() + offset);
      A.setZero();
      for (int m = 0; m < D; ++m)
        for (int n = 0; n < D; ++n) A += (CCt(m, n) * det) * stiffness_ref[m * D + n];
    }
    if (bad < ne) throw SingularElement(bad, "element measure below tolerance");
  });
  return out;
}

}  // namespace ellfem
