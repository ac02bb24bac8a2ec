#pragma once

// Fixed-size element kernels shared by the assemblers and the flow module.

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "ellfem/assembly.hpp"
#include "ellfem/errors.hpp"
#include "ellfem/mesh.hpp"
#include "ellfem/reference.hpp"

namespace ellfem::detail {

template <int D, int M, int P>
struct Kernel {
  static constexpr int N = dof_count(D, P);
  using NodePage = Eigen::Matrix<double, N, M>;
  using Square = Eigen::Matrix<double, M, M>;
  using GradPage = Eigen::Matrix<double, D, N>;
  using Local = Eigen::Matrix<double, N, N>;
  using LocalVector = Eigen::Matrix<double, N, 1>;

  static void gather(const Mesh& mesh, Index e, Eigen::Map<NodePage> X) {
    for (int j = 0; j < N; ++j) {
      const Index node = mesh.elements(e, j);
      for (int k = 0; k < M; ++k) X(j, k) = mesh.nodes(node, k);
    }
  }

  /// Fills L from the node page and the reference gradients; returns the measure.
  template <typename XType>
  static double jacobian(const XType& X, const Eigen::Ref<const Eigen::MatrixXd>& G,
                         Eigen::Map<Square> L) {
    L.template leftCols<D>().noalias() =
        X.transpose() * Eigen::Map<const GradPage>(G.data()).transpose();
    if constexpr (M == D) {
      return std::abs(L.determinant());
    } else if constexpr (D == 2) {
      L.col(2) = L.col(0).cross(L.col(1));
      return L.col(2).norm();
    } else {
      L(0, 1) = -L(1, 0);
      L(1, 1) = L(0, 0);
      return L.col(0).norm();
    }
  }

  /// Largest corner-to-corner distance, used to scale the singularity test.
  template <typename XType>
  static double corner_size(const XType& X) {
    double h = 0.0;
    for (int a = 0; a <= D; ++a)
      for (int b = a + 1; b <= D; ++b) h = std::max(h, (X.row(a) - X.row(b)).norm());
    return h;
  }

  static void check_measure(double det, double h, Index e) {
    if (!(det > 1e-14 * std::pow(h, D)))
      throw SingularElement(e, "element measure " + std::to_string(det) +
                                   " below tolerance");
  }

  /// Geometry of elements [first, first + count) into the page buffers.
  static void geometry(const Mesh& mesh, const ReferencePack& pack, Index first, Index count,
                       ElementBatch& batch) {
    const int Q = pack.num_points();
    double* X = batch.X.data();
    double* L = batch.L.data();
    double* C = batch.C.data();
    double* det = batch.det.data();
    bool failed = false;
    Index bad = -1;
    std::string message;
#pragma omp parallel for schedule(static)
    for (Index b = 0; b < count; ++b) {
      const Index e = first + b;
      Eigen::Map<NodePage> Xb(X + static_cast<std::ptrdiff_t>(b) * N * M);
      gather(mesh, e, Xb);
      const double h = corner_size(Xb);
      for (int q = 0; q < Q; ++q) {
        const std::ptrdiff_t page = (static_cast<std::ptrdiff_t>(b) * Q + q) * M * M;
        Eigen::Map<Square> Lq(L + page);
        Eigen::Map<Square> Cq(C + page);
        const double d = jacobian(Xb, pack.gradient_page(q), Lq);
        det[static_cast<std::ptrdiff_t>(b) * Q + q] = d;
        if (!(d > 1e-14 * std::pow(h, D))) {
#pragma omp critical
          if (!failed || e < bad) {
            failed = true;
            bad = e;
            message = "element measure " + std::to_string(d) + " below tolerance";
          }
          Cq.setZero();
          continue;
        }
        Cq = Lq.inverse();
      }
    }
    if (failed) throw SingularElement(bad, message);
  }

  /// Local mass and stiffness of batch element b, summed over points in ascending order.
  static void local_matrices(const ReferencePack& pack, const ElementBatch& batch, Index b,
                             double* mass, double* stiffness) {
    const int Q = pack.num_points();
    Eigen::Map<Local> Mloc(mass);
    Eigen::Map<Local> Aloc(stiffness);
    Mloc.setZero();
    Aloc.setZero();
    for (int q = 0; q < Q; ++q) {
      const double wdet = pack.weights(q) * batch.det(q, b);
      const std::ptrdiff_t page = (static_cast<std::ptrdiff_t>(b) * Q + q) * M * M;
      Eigen::Map<const Square> Cq(batch.C.data() + page);
      Eigen::Map<const GradPage> G(pack.gradients.data() + static_cast<std::ptrdiff_t>(q) * D * N);
      Eigen::Map<const Eigen::Matrix<double, N * N, 1>> phiphi(pack.products.col(q).data());
      // grad^T grad = G^T (C_d C_d^T) G with C_d the first d rows of C
      const Eigen::Matrix<double, D, D> K =
          wdet * (Cq.template topRows<D>() * Cq.template topRows<D>().transpose());
      const Eigen::Matrix<double, D, N> KG = K * G;
      Eigen::Map<Eigen::Matrix<double, N * N, 1>>(mass) += wdet * phiphi;
      Aloc.noalias() += G.transpose() * KG;
    }
  }
};

/// Calls fn(Kernel<D, M, P>{}) for the element type of the mesh.
template <typename Fn>
decltype(auto) dispatch(MeshKind kind, int dim, int order, Fn&& fn) {
  const bool surface = kind == MeshKind::Surface;
  if (!surface && dim == 2 && order == 1) return fn(Kernel<2, 2, 1>{});
  if (!surface && dim == 2 && order == 2) return fn(Kernel<2, 2, 2>{});
  if (!surface && dim == 3 && order == 1) return fn(Kernel<3, 3, 1>{});
  if (!surface && dim == 3 && order == 2) return fn(Kernel<3, 3, 2>{});
  if (surface && dim == 1 && order == 1) return fn(Kernel<1, 2, 1>{});
  if (surface && dim == 1 && order == 2) return fn(Kernel<1, 2, 2>{});
  if (surface && dim == 2 && order == 1) return fn(Kernel<2, 3, 1>{});
  if (surface && dim == 2 && order == 2) return fn(Kernel<2, 3, 2>{});
  throw UnsupportedElement(dim, order);
}

template <typename Fn>
decltype(auto) dispatch(const Mesh& mesh, Fn&& fn) {
  return dispatch(mesh.kind, mesh.dim, mesh.order, std::forward<Fn>(fn));
}

/// Called once per element after its batch geometry is available.
using ElementVisitor = std::function<void(const ElementBatch& batch, Index b)>;

/// assemble_batched with a per-element hook sharing the batch geometry.
AssemblyOutput assemble_batched(const Mesh& mesh, const AssemblyOptions& options,
                                const ElementVisitor& visit);

/// Sizes the page buffers of batch for count elements.
void reserve_batch(ElementBatch& batch, const Mesh& mesh, Index first, Index count);

}  // namespace ellfem::detail
