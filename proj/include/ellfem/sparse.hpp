#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ellfem/errors.hpp"
#include "ellfem/types.hpp"

namespace ellfem {

/// Unsorted (row, col, value) contributions of an n x n matrix. Duplicates allowed.
struct Triplets {
  Index n = 0;
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> vals;

  std::size_t size() const { return vals.size(); }
  void push(Index r, Index c, double v) {
    rows.push_back(r);
    cols.push_back(c);
    vals.push_back(v);
  }
};

/// Square compressed-sparse-row matrix; column indices strictly increasing per row.
struct CsrMatrix {
  Index n = 0;
  std::vector<Index> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<double> vals;

  std::size_t nnz() const { return vals.size(); }
  /// Entry (i, j), zero when not stored. O(log row length).
  double coeff(Index i, Index j) const;
  Eigen::MatrixXd to_dense() const;
  static CsrMatrix identity(Index n);
  static CsrMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);
};

/// Sorted structure of a triplet index list. Compresses any number of value
/// arrays that share the same (row, col) sequence.
class TripletPattern {
 public:
  TripletPattern(Index n, std::span<const Index> rows, std::span<const Index> cols);

  /// Sums the duplicates of each (row, col) in ascending value order.
  CsrMatrix compress(std::span<const double> vals) const;
  std::size_t size() const { return size_; }

 private:
  Index n_ = 0;
  std::size_t size_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  // triplets of CSR entry s are order_[group_ptr_[s] .. group_ptr_[s + 1])
  std::vector<std::uint32_t> group_ptr_;
  std::vector<std::uint32_t> order_;
};

/// Sums duplicates and compresses. Entries are ordered by (row, col); each group
/// of duplicates is summed in ascending value order, so the result does not depend
/// on the order of the input triplets.
CsrMatrix finalize(Index n, std::span<const Index> rows, std::span<const Index> cols,
                   std::span<const double> vals);
CsrMatrix finalize(const Triplets& triplets);

/// y = A x, parallel over rows.
Eigen::VectorXd spmv(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& x);
void spmv(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& x,
          Eigen::Ref<Eigen::VectorXd> y);
/// A + alpha B on the union pattern.
CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha);
Eigen::VectorXd diag(const CsrMatrix& a);
/// Largest absolute entry.
double max_abs(const CsrMatrix& a);

enum class Preconditioner { None, Jacobi };

struct CgOptions {
  double tol = 1e-10;
  /// 0 selects 10 n.
  int max_iter = 0;
  Preconditioner precond = Preconditioner::Jacobi;
  /// Called with (iteration, iterate) after every update, including iteration 0.
  std::function<void(int, const Eigen::VectorXd&)> observer;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  /// ||b - A x|| / ||b|| at exit (0 when b = 0).
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// Throws SolverError when a direction of non-positive curvature is met.
CgResult cg_solve(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  const CgOptions& options = {},
                  const Eigen::VectorXd* initial_guess = nullptr);

/// Solves A x = b on a closed surface where A 1 = 0. b is projected onto the
/// range of A (its mean is removed) and every iterate is kept in the subspace
/// 1^T M x = 0, which realises the mean-free bordered system.
CgResult cg_solve_meanfree(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                           const CsrMatrix& mass, const CgOptions& options = {});

struct DirichletSystem {
  CsrMatrix matrix;
  Eigen::VectorXd rhs;
};

/// Symmetric elimination of u(boundary[i]) = values[i]: constrained rows and
/// columns are zeroed with unit diagonal, and the right-hand side is corrected
/// by the eliminated columns.
DirichletSystem apply_dirichlet(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                                std::span<const Index> boundary,
                                const Eigen::Ref<const Eigen::VectorXd>& values);

/// MatrixMarket coordinate (real general) export, 1-based.
void write_matrix_market(const CsrMatrix& a, std::ostream& out);
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);
CsrMatrix read_matrix_market(std::istream& in);

}  // namespace ellfem
