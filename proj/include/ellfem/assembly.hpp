#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ellfem/mesh.hpp"
#include "ellfem/reference.hpp"
#include "ellfem/sparse.hpp"
#include "ellfem/types.hpp"

namespace ellfem {

/// Geometry of a contiguous run of elements, stored page-wise. All pages are
/// contiguous column-major blocks of the underlying matrices.
///
/// X    nref x m per element:           X.middleCols(b * m, m)
/// L, C m x m per (element, point):     L.middleCols((b * Q + q) * m, m)
/// det  one value per (element, point): det(q, b)
///
/// The first d columns of L are the tangent vectors dF e_k at the point; the
/// last column of a surface page is the unnormalised normal (t1 x t2, or the
/// rotated tangent (-t2, t1) on curves). C = L^{-1}.
struct ElementBatch {
  Index first = 0;
  Index count = 0;
  int dim = 0;
  int ambient = 0;
  int nref = 0;
  int num_points = 0;
  Eigen::MatrixXd X;
  Eigen::MatrixXd L;
  Eigen::MatrixXd C;
  Eigen::MatrixXd det;

  auto node_page(Index b) const { return X.middleCols(b * ambient, ambient); }
  auto jacobian_page(Index b, int q) const {
    return L.middleCols((b * num_points + q) * ambient, ambient);
  }
  auto inverse_page(Index b, int q) const {
    return C.middleCols((b * num_points + q) * ambient, ambient);
  }
};

/// Gathers node coordinates of elements [first, first + count) and evaluates
/// their geometry at every quadrature point. Throws SingularElement (with the
/// global element index) for degenerate elements.
ElementBatch element_geometry(const Mesh& mesh, Index first, Index count);

/// Geometry of a single element given its nref x m node page.
struct PointGeometry {
  /// m x (m Q): Jacobian pages
  Eigen::MatrixXd L;
  /// m x (m Q): inverse pages
  Eigen::MatrixXd C;
  /// Q measure values
  Eigen::VectorXd det;
};
PointGeometry element_geometry(const Eigen::Ref<const Eigen::MatrixXd>& X, int dim, int order,
                               MeshKind kind, Index element = -1);

/// Triplet output of an assembler. Mass and stiffness share the index pattern:
/// entry k + nref * j of element e sits at position e * nref^2 + k + nref * j and
/// couples global rows elements(e, k) with columns elements(e, j).
struct AssemblyOutput {
  Index n = 0;
  Buffer<Index> rows;
  Buffer<Index> cols;
  Buffer<double> mass;
  Buffer<double> stiffness;

  std::size_t size() const { return rows.size(); }
  Triplets mass_triplets() const {
    return {n, {rows.begin(), rows.end()}, {cols.begin(), cols.end()}, {mass.begin(), mass.end()}};
  }
  Triplets stiffness_triplets() const {
    return {n, {rows.begin(), rows.end()}, {cols.begin(), cols.end()},
            {stiffness.begin(), stiffness.end()}};
  }
  CsrMatrix mass_matrix() const { return finalize(n, rows, cols, mass); }
  CsrMatrix stiffness_matrix() const { return finalize(n, rows, cols, stiffness); }
  /// Both matrices from one shared sparsity computation.
  std::pair<CsrMatrix, CsrMatrix> matrices() const {
    const TripletPattern pattern(n, rows, cols);
    return {pattern.compress(mass), pattern.compress(stiffness)};
  }
};

struct AssemblyOptions {
  Index batch_size = 1'000'000;
  /// Upper bound for the per-batch page buffers.
  std::size_t memory_budget = std::size_t{3} << 30;
};

/// Bytes of page buffers for one batch of the given size.
std::size_t batch_memory(const Mesh& mesh, Index batch_size);

/// Batched assembly of mass and stiffness triplets. The result does not depend on
/// batch_size. Throws ResourceError when one batch exceeds the memory budget.
AssemblyOutput assemble_batched(const Mesh& mesh, const AssemblyOptions& options = {});

/// Element-by-element, point-by-point reference implementation on dynamic-size
/// matrices. Slow; used as oracle and baseline.
AssemblyOutput assemble_naive(const Mesh& mesh);

/// Quadrature-free assembly for P1 meshes from the exact reference matrices.
AssemblyOutput assemble_p1_fast(const Mesh& mesh);

enum class LoadMode { Quadrature, Nodal };

/// b_j = int f phi_j. Quadrature mode evaluates f at mapped quadrature points;
/// nodal mode returns M times the nodal interpolant of f.
Eigen::VectorXd assemble_load(const Mesh& mesh, const ScalarFunction& f,
                              LoadMode mode = LoadMode::Quadrature);

/// Positions of the quadrature points of every element: m x (Q |E|), element-major.
Eigen::MatrixXd quadrature_points(const Mesh& mesh);

}  // namespace ellfem
