#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "ellfem/sparse.hpp"

namespace ellfem {

double CsrMatrix::coeff(Index i, Index j) const {
  const auto first = col_idx.begin() + row_ptr[i];
  const auto last = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return it != last && *it == j ? vals[static_cast<std::size_t>(it - col_idx.begin())] : 0.0;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = row_ptr[i]; k < row_ptr[i + 1]; ++k) dense(i, col_idx[k]) = vals[k];
  return dense;
}

CsrMatrix CsrMatrix::identity(Index n) {
  CsrMatrix a;
  a.n = n;
  a.row_ptr.resize(n + 1);
  std::iota(a.row_ptr.begin(), a.row_ptr.end(), 0);
  a.col_idx.resize(n);
  std::iota(a.col_idx.begin(), a.col_idx.end(), 0);
  a.vals.assign(n, 1.0);
  return a;
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol) {
  if (dense.rows() != dense.cols()) throw DimensionMismatch("matrix must be square");
  CsrMatrix a;
  a.n = static_cast<Index>(dense.rows());
  for (Index i = 0; i < a.n; ++i) {
    for (Index j = 0; j < a.n; ++j)
      if (std::abs(dense(i, j)) > drop_tol) {
        a.col_idx.push_back(j);
        a.vals.push_back(dense(i, j));
      }
    a.row_ptr.push_back(static_cast<Index>(a.vals.size()));
  }
  return a;
}

TripletPattern::TripletPattern(Index n, std::span<const Index> rows, std::span<const Index> cols)
    : n_(n), size_(rows.size()) {
  if (rows.size() != cols.size()) throw DimensionMismatch("triplet arrays differ in length");
  if (n < 0) throw DomainError("negative matrix dimension");
  for (std::size_t k = 0; k < size_; ++k)
    if (rows[k] < 0 || rows[k] >= n || cols[k] < 0 || cols[k] >= n)
      throw DomainError("triplet index (" + std::to_string(rows[k]) + ", " +
                        std::to_string(cols[k]) + ") out of range for n = " + std::to_string(n));

  if (size_ >> 32) throw ResourceError("more than 2^32 triplets");

  // bucket (col << 32 | triplet) keys by row, then sort each row
  std::vector<std::size_t> start(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t k = 0; k < size_; ++k) ++start[rows[k] + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::uint64_t> keys(size_);
  {
    std::vector<std::size_t> next(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < size_; ++k)
      keys[next[rows[k]]++] = (static_cast<std::uint64_t>(cols[k]) << 32) | k;
  }

  row_ptr_.assign(1, 0);
  row_ptr_.reserve(static_cast<std::size_t>(n) + 1);
  group_ptr_.clear();
  order_.resize(size_);
  for (Index i = 0; i < n; ++i) {
    std::sort(keys.begin() + static_cast<std::ptrdiff_t>(start[i]),
              keys.begin() + static_cast<std::ptrdiff_t>(start[i + 1]));
    for (std::size_t p = start[i]; p < start[i + 1]; ++p) {
      order_[p] = static_cast<std::uint32_t>(keys[p]);
      const Index col = static_cast<Index>(keys[p] >> 32);
      if (p == start[i] || col != col_idx_.back()) {
        group_ptr_.push_back(static_cast<std::uint32_t>(p));
        col_idx_.push_back(col);
      }
    }
    row_ptr_.push_back(static_cast<Index>(col_idx_.size()));
  }
  group_ptr_.push_back(static_cast<std::uint32_t>(size_));
}

CsrMatrix TripletPattern::compress(std::span<const double> vals) const {
  if (vals.size() != size_) throw DimensionMismatch("value array does not match the pattern");
  CsrMatrix a;
  a.n = n_;
  a.row_ptr = row_ptr_;
  a.col_idx = col_idx_;
  a.vals.resize(col_idx_.size());
  std::vector<double> group;
  for (std::size_t s = 0; s < col_idx_.size(); ++s) {
    const std::size_t first = group_ptr_[s];
    const std::size_t len = group_ptr_[s + 1] - first;
    if (len == 1) {
      a.vals[s] = vals[order_[first]];
    } else if (len == 2) {
      a.vals[s] = vals[order_[first]] + vals[order_[first + 1]];
    } else {
      group.resize(len);
      for (std::size_t p = 0; p < len; ++p) group[p] = vals[order_[first + p]];
      std::sort(group.begin(), group.end());
      double sum = 0.0;
      for (double v : group) sum += v;
      a.vals[s] = sum;
    }
  }
  return a;
}

CsrMatrix finalize(Index n, std::span<const Index> rows, std::span<const Index> cols,
                   std::span<const double> vals) {
  if (rows.size() != vals.size()) throw DimensionMismatch("triplet arrays differ in length");
  return TripletPattern(n, rows, cols).compress(vals);
}

CsrMatrix finalize(const Triplets& t) { return finalize(t.n, t.rows, t.cols, t.vals); }

void spmv(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& x,
          Eigen::Ref<Eigen::VectorXd> y) {
  if (x.size() != a.n || y.size() != a.n) throw DimensionMismatch("spmv size mismatch");
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (Index k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.vals[k] * x(a.col_idx[k]);
    y(i) = s;
  }
}

Eigen::VectorXd spmv(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd y(a.n);
  spmv(a, x, y);
  return y;
}

CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha) {
  if (a.n != b.n) throw DimensionMismatch("add_scaled size mismatch");
  CsrMatrix c;
  c.n = a.n;
  c.col_idx.reserve(std::max(a.nnz(), b.nnz()));
  c.vals.reserve(std::max(a.nnz(), b.nnz()));
  for (Index i = 0; i < a.n; ++i) {
    Index p = a.row_ptr[i];
    Index q = b.row_ptr[i];
    while (p < a.row_ptr[i + 1] || q < b.row_ptr[i + 1]) {
      const Index ca = p < a.row_ptr[i + 1] ? a.col_idx[p] : a.n;
      const Index cb = q < b.row_ptr[i + 1] ? b.col_idx[q] : b.n;
      if (ca == cb) {
        c.col_idx.push_back(ca);
        c.vals.push_back(a.vals[p++] + alpha * b.vals[q++]);
      } else if (ca < cb) {
        c.col_idx.push_back(ca);
        c.vals.push_back(a.vals[p++]);
      } else {
        c.col_idx.push_back(cb);
        c.vals.push_back(alpha * b.vals[q++]);
      }
    }
    c.row_ptr.push_back(static_cast<Index>(c.vals.size()));
  }
  return c;
}

Eigen::VectorXd diag(const CsrMatrix& a) {
  Eigen::VectorXd d(a.n);
  for (Index i = 0; i < a.n; ++i) d(i) = a.coeff(i, i);
  return d;
}

double max_abs(const CsrMatrix& a) {
  double m = 0.0;
  for (double v : a.vals) m = std::max(m, std::abs(v));
  return m;
}

DirichletSystem apply_dirichlet(const CsrMatrix& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                                std::span<const Index> boundary,
                                const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (b.size() != a.n) throw DimensionMismatch("right-hand side size mismatch");
  if (values.size() != static_cast<Eigen::Index>(boundary.size()))
    throw DimensionMismatch("one boundary value per boundary node expected");
  std::vector<char> fixed(a.n, 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(a.n);
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    if (boundary[k] < 0 || boundary[k] >= a.n) throw DomainError("boundary index out of range");
    fixed[boundary[k]] = 1;
    g(boundary[k]) = values(static_cast<Eigen::Index>(k));
  }

  DirichletSystem sys{a, b - spmv(a, g)};
  for (Index i = 0; i < a.n; ++i)
    for (Index k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const Index j = a.col_idx[k];
      if (fixed[i] || fixed[j]) sys.matrix.vals[k] = i == j ? 1.0 : 0.0;
    }
  for (Index i = 0; i < a.n; ++i)
    if (fixed[i]) {
      if (sys.matrix.coeff(i, i) != 1.0)
        throw PreconditionError("constrained row without a stored diagonal");
      sys.rhs(i) = g(i);
    }
  return sys;
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < a.n; ++i)
    for (Index k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      out << i + 1 << ' ' << a.col_idx[k] + 1 << ' ' << a.vals[k] << '\n';
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_market(a, out);
}

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] != '%') return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(line_no, "missing size line");
  long long r = 0, c = 0, nnz = 0;
  if (!(std::istringstream(line) >> r >> c >> nnz) || r != c || r < 0 || nnz < 0)
    throw ParseError(line_no, "expected '<n> <n> <nnz>'");
  Triplets t;
  t.n = static_cast<Index>(r);
  for (long long k = 0; k < nnz; ++k) {
    if (!next_line()) throw ParseError(line_no, "unexpected end of file");
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(std::istringstream(line) >> i >> j >> v)) throw ParseError(line_no, "bad entry");
    if (i < 1 || i > r || j < 1 || j > r) throw ParseError(line_no, "index out of range");
    t.push(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
  }
  return finalize(t);
}

}  // namespace ellfem
