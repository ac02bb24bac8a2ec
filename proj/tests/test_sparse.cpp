#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "ellfem/errors.hpp"
#include "ellfem/sparse.hpp"

using namespace ellfem;

namespace {

// Dense oracle for a triplet list.
Eigen::MatrixXd dense_sum(Index n, const std::vector<Index>& r, const std::vector<Index>& c,
                          const std::vector<double>& v) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < v.size(); ++k) d(r[k], c[k]) += v[k];
  return d;
}

Eigen::MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = dist(gen);
  return b * b.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

// 1D Laplacian with Dirichlet ends: tridiag(-1, 2, -1).
CsrMatrix laplace_1d(int n) {
  Triplets t;
  t.n = n;
  for (int i = 0; i < n; ++i) {
    t.push(i, i, 2.0);
    if (i > 0) t.push(i, i - 1, -1.0);
    if (i + 1 < n) t.push(i, i + 1, -1.0);
  }
  return finalize(t);
}

}  // namespace

TEST(Finalize, SumsDuplicates) {
  const CsrMatrix a = finalize(Triplets{3, {0, 0, 2, 0, 1}, {0, 2, 1, 0, 1}, {1.0, 2.0, 3.0, 4.0, 5.0}});
  EXPECT_EQ(a.nnz(), 4u);
  EXPECT_EQ(a.row_ptr, (std::vector<Index>{0, 2, 3, 4}));
  EXPECT_EQ(a.col_idx, (std::vector<Index>{0, 2, 1, 1}));
  EXPECT_EQ(a.vals, (std::vector<double>{5.0, 2.0, 5.0, 3.0}));
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(a.coeff(1, 2), 0.0);
}

TEST(Finalize, EmptyAndErrors) {
  const CsrMatrix a = finalize(Triplets{4, {}, {}, {}});
  EXPECT_EQ(a.nnz(), 0u);
  EXPECT_EQ(a.row_ptr.size(), 5u);
  EXPECT_THROW(finalize(Triplets{2, {0, 2}, {0, 0}, {1.0, 1.0}}), DomainError);
  EXPECT_THROW(finalize(Triplets{2, {0, -1}, {0, 0}, {1.0, 1.0}}), DomainError);
  EXPECT_THROW(finalize(Triplets{2, {0, 1}, {0}, {1.0, 1.0}}), DimensionMismatch);
}

TEST(Finalize, MatchesDenseOracleAndIsPermutationInvariant) {
  std::mt19937 gen(17);
  const Index n = 40;
  std::uniform_int_distribution<Index> idx(0, n - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<Index> r(3000), c(3000);
  std::vector<double> v(3000);
  for (std::size_t k = 0; k < v.size(); ++k) {
    r[k] = idx(gen);
    c[k] = idx(gen);
    v[k] = val(gen);
  }
  const CsrMatrix a = finalize(n, r, c, v);
  EXPECT_LT((a.to_dense() - dense_sum(n, r, c, v)).cwiseAbs().maxCoeff(), 1e-13);
  for (Index i = 0; i < n; ++i)
    EXPECT_TRUE(std::is_sorted(a.col_idx.begin() + a.row_ptr[i], a.col_idx.begin() + a.row_ptr[i + 1]));

  std::vector<std::size_t> perm(v.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 3; ++trial) {
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<Index> rp(v.size()), cp(v.size());
    std::vector<double> vp(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      rp[k] = r[perm[k]];
      cp[k] = c[perm[k]];
      vp[k] = v[perm[k]];
    }
    const CsrMatrix b = finalize(n, rp, cp, vp);
    EXPECT_EQ(a.col_idx, b.col_idx);
    EXPECT_EQ(a.vals, b.vals);
  }
}

TEST(Finalize, SharedPatternCompressesSeveralArrays) {
  const std::vector<Index> r{1, 0, 1, 1}, c{0, 1, 0, 1};
  const std::vector<double> v1{1, 2, 3, 4}, v2{-1, -2, -3, -4};
  const TripletPattern pattern(2, r, c);
  EXPECT_EQ(pattern.size(), 4u);
  const CsrMatrix a = pattern.compress(v1);
  const CsrMatrix b = pattern.compress(v2);
  EXPECT_EQ(a.vals, (std::vector<double>{2, 4, 4}));
  EXPECT_EQ(b.vals, (std::vector<double>{-2, -4, -4}));
  EXPECT_THROW(pattern.compress(std::vector<double>{1.0}), DimensionMismatch);
}

TEST(SparseOps, SpmvAddDiag) {
  const Eigen::MatrixXd d = random_spd(7, 3);
  const CsrMatrix a = CsrMatrix::from_dense(d);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(7, -1.0, 2.0);
  EXPECT_LT((spmv(a, x) - d * x).norm(), 1e-12);
  const CsrMatrix s = add_scaled(a, CsrMatrix::identity(7), 2.5);
  EXPECT_LT((s.to_dense() - d - 2.5 * Eigen::MatrixXd::Identity(7, 7)).norm(), 1e-13);
  EXPECT_LT((diag(a) - d.diagonal()).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(max_abs(a), d.cwiseAbs().maxCoeff());
  EXPECT_THROW(spmv(a, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(Cg, IdentityConvergesInOneStep) {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(10, 1.0, 10.0);
  const CgResult r = cg_solve(CsrMatrix::identity(10), b);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_LT((r.x - b).norm(), 1e-14);
}

TEST(Cg, RandomSpdMatchesDenseSolve) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXd d = random_spd(30, seed);
    const Eigen::VectorXd b = Eigen::VectorXd::Random(30);
    for (Preconditioner p : {Preconditioner::None, Preconditioner::Jacobi}) {
      CgOptions opt;
      opt.precond = p;
      const CgResult r = cg_solve(CsrMatrix::from_dense(d), b, opt);
      ASSERT_TRUE(r.converged);
      EXPECT_LE(r.relative_residual, 1e-10);
      const Eigen::VectorXd exact = d.llt().solve(b);
      EXPECT_LT((r.x - exact).norm() / exact.norm(), 1e-9);
    }
  }
}

TEST(Cg, EnergyErrorDecreasesMonotonically) {
  const int n = 60;
  const CsrMatrix a = laplace_1d(n);
  const Eigen::MatrixXd d = a.to_dense();
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd exact = d.ldlt().solve(b);
  std::vector<double> energy;
  CgOptions opt;
  opt.precond = Preconditioner::None;
  opt.observer = [&](int, const Eigen::VectorXd& x) {
    const Eigen::VectorXd e = x - exact;
    energy.push_back(std::sqrt(e.dot(d * e)));
  };
  const CgResult r = cg_solve(a, b, opt);
  ASSERT_TRUE(r.converged);
  ASSERT_GE(energy.size(), 3u);
  for (std::size_t k = 1; k < energy.size(); ++k) EXPECT_LE(energy[k], energy[k - 1] * (1 + 1e-12));
  // exact arithmetic needs at most n steps for this matrix
  EXPECT_LE(r.iterations, n);
}

TEST(Cg, ZeroRightHandSide) {
  const CgResult r = cg_solve(laplace_1d(5), Eigen::VectorXd::Zero(5));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Cg, IndefiniteMatrixThrows) {
  Eigen::Matrix2d d;
  d << 1, 0, 0, -1;
  CgOptions opt;
  opt.precond = Preconditioner::None;
  EXPECT_THROW(cg_solve(CsrMatrix::from_dense(d), Eigen::Vector2d(1.0, 1.0), opt), SolverError);
}

TEST(Cg, ReportsNonConvergence) {
  CgOptions opt;
  opt.max_iter = 2;
  opt.precond = Preconditioner::None;
  const CgResult r = cg_solve(laplace_1d(50), Eigen::VectorXd::Ones(50), opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
}

TEST(Cg, MeanFreeOnSingularSystem) {
  // periodic 1D Laplacian: kernel = constants
  const int n = 20;
  Triplets t;
  t.n = n;
  for (int i = 0; i < n; ++i) {
    t.push(i, i, 2.0);
    t.push(i, (i + 1) % n, -1.0);
    t.push(i, (i + n - 1) % n, -1.0);
  }
  const CsrMatrix a = finalize(t);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = 1.0 + 0.5 * (i % 3);
  Triplets mt;
  mt.n = n;
  for (int i = 0; i < n; ++i) mt.push(i, i, w(i));
  const CsrMatrix mass = finalize(mt);

  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = std::sin(2 * 3.141592653589793 * i / n) + 0.3;
  const CgResult r = cg_solve_meanfree(a, b, mass);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(w.dot(r.x), 0.0, 1e-10);
  const Eigen::VectorXd bc = b.array() - b.mean();
  EXPECT_LT((spmv(a, r.x) - bc).norm() / bc.norm(), 1e-9);
}

TEST(Dirichlet, HandComputedThreeByThree) {
  Eigen::Matrix3d d;
  d << 4, -1, 0, -1, 4, -1, 0, -1, 4;
  const Eigen::Vector3d b(1, 2, 3);
  const std::vector<Index> bd{0};
  const DirichletSystem s = apply_dirichlet(CsrMatrix::from_dense(d), b, bd, Eigen::VectorXd::Constant(1, 2.0));
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 4, -1, 0, -1, 4;
  EXPECT_LT((s.matrix.to_dense() - expected).norm(), 1e-15);
  EXPECT_LT((s.rhs - Eigen::Vector3d(2, 4, 3)).norm(), 1e-15);
  const CgResult r = cg_solve(s.matrix, s.rhs);
  // 4 u1 - u2 = 4, -u1 + 4 u2 = 3
  EXPECT_NEAR(r.x(0), 2.0, 1e-10);
  EXPECT_NEAR(r.x(1), 19.0 / 15, 1e-10);
  EXPECT_NEAR(r.x(2), 16.0 / 15, 1e-10);
}

TEST(Dirichlet, Errors) {
  const CsrMatrix a = laplace_1d(3);
  const std::vector<Index> bad{5};
  EXPECT_THROW(apply_dirichlet(a, Eigen::Vector3d::Zero(), bad, Eigen::VectorXd::Zero(1)), DomainError);
  const std::vector<Index> ok{0};
  EXPECT_THROW(apply_dirichlet(a, Eigen::Vector3d::Zero(), ok, Eigen::VectorXd::Zero(2)), DimensionMismatch);
}

TEST(MatrixMarket, RoundTrip) {
  const CsrMatrix a = CsrMatrix::from_dense(random_spd(6, 9));
  std::stringstream buf;
  write_matrix_market(a, buf);
  EXPECT_EQ(buf.str().rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  const CsrMatrix b = read_matrix_market(buf);
  EXPECT_EQ(a.col_idx, b.col_idx);
  EXPECT_EQ(a.vals, b.vals);
}
