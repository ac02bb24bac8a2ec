#include <cmath>

#include "ellfem/sparse.hpp"

namespace ellfem {

namespace {

// Shared PCG loop; project (possibly empty) is applied to every preconditioned
// residual and every iterate.
template <typename Project>
CgResult pcg(const CsrMatrix& a, const Eigen::VectorXd& b, const CgOptions& options,
             Eigen::VectorXd x, Project&& project) {
  const Index n = a.n;
  const int max_iter = options.max_iter > 0 ? options.max_iter : std::max(1, 10 * n);
  Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
  if (options.precond == Preconditioner::Jacobi) {
    inv_diag = diag(a);
    for (Index i = 0; i < n; ++i) {
      if (!(inv_diag(i) > 0.0)) throw SolverError("Jacobi preconditioner needs a positive diagonal");
      inv_diag(i) = 1.0 / inv_diag(i);
    }
  }

  CgResult result;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    result.x = Eigen::VectorXd::Zero(n);
    result.converged = true;
    if (options.observer) options.observer(0, result.x);
    return result;
  }

  Eigen::VectorXd ax(n);
  spmv(a, x, ax);
  Eigen::VectorXd r = b - ax;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  project(z);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(n);
  double rz = r.dot(z);
  if (options.observer) options.observer(0, x);

  int it = 0;
  double rel = r.norm() / bnorm;
  while (rel > options.tol && it < max_iter) {
    spmv(a, p, ap);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0))
      throw SolverError("conjugate gradients met non-positive curvature at iteration " +
                        std::to_string(it + 1));
    const double alpha = rz / curvature;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    project(x);
    ++it;
    if (options.observer) options.observer(it, x);
    rel = r.norm() / bnorm;
    if (rel <= options.tol) break;
    z = inv_diag.cwiseProduct(r);
    project(z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  // recompute the true residual once at exit
  spmv(a, x, ax);
  result.relative_residual = (b - ax).norm() / bnorm;
  result.iterations = it;
  result.converged = rel <= options.tol;
  result.x = std::move(x);
  return result;
}

}  // namespace

CgResult cg_solve(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                  const CgOptions& options, const Eigen::VectorXd* initial_guess) {
  if (b.size() != a.n) throw DimensionMismatch("right-hand side size mismatch");
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(a.n);
  if (initial_guess != nullptr) {
    if (initial_guess->size() != a.n) throw DimensionMismatch("initial guess size mismatch");
    x0 = *initial_guess;
  }
  return pcg(a, b, options, std::move(x0), [](Eigen::VectorXd&) {});
}

CgResult cg_solve_meanfree(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                           const CsrMatrix& mass, const CgOptions& options) {
  if (b.size() != a.n || mass.n != a.n) throw DimensionMismatch("mean-free solve size mismatch");
  const Eigen::VectorXd weights = spmv(mass, Eigen::VectorXd::Ones(a.n));
  const double total = weights.sum();
  if (!(total > 0.0)) throw SolverError("mass matrix has non-positive total");
  const Eigen::VectorXd rhs = b.array() - b.mean();
  return pcg(a, rhs, options, Eigen::VectorXd::Zero(a.n), [&](Eigen::VectorXd& v) {
    v.array() -= weights.dot(v) / total;
  });
}

}  // namespace ellfem
