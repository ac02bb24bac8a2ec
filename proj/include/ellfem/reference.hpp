#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ellfem/errors.hpp"
#include "ellfem/types.hpp"

namespace ellfem {

/// Element dimensions and orders with an isoparametric implementation.
constexpr bool is_supported(int dim, int order) {
  return dim >= 1 && dim <= 3 && order >= 1 && order <= 2;
}

/// Number of Lagrange dofs on the reference simplex, binom(order + dim, dim).
constexpr int dof_count(int dim, int order) {
  int num = 1;
  int den = 1;
  for (int i = 1; i <= dim; ++i) {
    num *= order + i;
    den *= i;
  }
  return num / den;
}

/// Measure of the unit reference simplex: 1, 1/2, 1/6.
constexpr double reference_measure(int dim) {
  return dim == 1 ? 1.0 : dim == 2 ? 0.5 : 1.0 / 6.0;
}

/// Corner pairs spanned by the edge nodes of a P2 element, in local node order
/// (edge node k has local index dim + 1 + k).
std::span<const std::array<int, 2>> edge_table(int dim);

namespace detail {

inline void check_supported(int dim, int order) {
  if (!is_supported(dim, order)) throw UnsupportedElement(dim, order);
}

template <typename Derived>
void check_reference_point(int dim, const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  if (xi.size() != dim) throw DimensionMismatch("reference point has wrong dimension");
  const Scalar tol(1e-12);
  Scalar sum(0);
  for (int k = 0; k < dim; ++k) {
    if (!(xi(k) >= -tol)) throw DomainError("reference point outside element");
    sum += xi(k);
  }
  if (!(sum <= Scalar(1) + tol)) throw DomainError("reference point outside element");
}

inline constexpr std::array<std::array<int, 2>, 6> kEdges3{
    {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 2>, 3> kEdges2{{{0, 1}, {1, 2}, {2, 0}}};
inline constexpr std::array<std::array<int, 2>, 1> kEdges1{{{0, 1}}};

template <int Dim>
constexpr auto& edges() {
  if constexpr (Dim == 1) {
    return kEdges1;
  } else if constexpr (Dim == 2) {
    return kEdges2;
  } else {
    return kEdges3;
  }
}

}  // namespace detail

/// Lagrange basis on the unit simplex with compile-time sizes.
///
/// Corner functions come first (barycentric lambda_0 = 1 - sum xi, lambda_k = xi_k),
/// followed for Order == 2 by one function per edge of edge_table(Dim).
/// Quadratic corner functions are lambda (2 lambda - 1), edge functions are
/// 4 lambda_a lambda_b; both are nodal (phi_j(x_i) = delta_ji).
template <int Dim, int Order>
struct LagrangeBasis {
  static_assert(is_supported(Dim, Order));
  static constexpr int kDim = Dim;
  static constexpr int kOrder = Order;
  static constexpr int kDofs = dof_count(Dim, Order);

  template <typename Scalar>
  using Point = Eigen::Matrix<Scalar, Dim, 1>;
  template <typename Scalar>
  using Values = Eigen::Matrix<Scalar, kDofs, 1>;
  template <typename Scalar>
  using Gradients = Eigen::Matrix<Scalar, Dim, kDofs>;

  template <typename Scalar>
  static Values<Scalar> values(const Point<Scalar>& xi) {
    Eigen::Matrix<Scalar, Dim + 1, 1> lambda;
    lambda(0) = Scalar(1) - xi.sum();
    lambda.template tail<Dim>() = xi;
    Values<Scalar> phi;
    if constexpr (Order == 1) {
      phi = lambda;
    } else {
      for (int i = 0; i <= Dim; ++i) phi(i) = lambda(i) * (Scalar(2) * lambda(i) - Scalar(1));
      const auto& e = detail::edges<Dim>();
      for (std::size_t k = 0; k < e.size(); ++k)
        phi(Dim + 1 + static_cast<int>(k)) = Scalar(4) * lambda(e[k][0]) * lambda(e[k][1]);
    }
    return phi;
  }

  template <typename Scalar>
  static Gradients<Scalar> gradients(const Point<Scalar>& xi) {
    Eigen::Matrix<Scalar, Dim, Dim + 1> dlambda;
    dlambda.col(0).setConstant(Scalar(-1));
    dlambda.template rightCols<Dim>().setIdentity();
    Gradients<Scalar> grad;
    if constexpr (Order == 1) {
      grad = dlambda;
    } else {
      Eigen::Matrix<Scalar, Dim + 1, 1> lambda;
      lambda(0) = Scalar(1) - xi.sum();
      lambda.template tail<Dim>() = xi;
      for (int i = 0; i <= Dim; ++i)
        grad.col(i) = (Scalar(4) * lambda(i) - Scalar(1)) * dlambda.col(i);
      const auto& e = detail::edges<Dim>();
      for (std::size_t k = 0; k < e.size(); ++k) {
        const int a = e[k][0];
        const int b = e[k][1];
        grad.col(Dim + 1 + static_cast<int>(k)) =
            Scalar(4) * (lambda(a) * dlambda.col(b) + lambda(b) * dlambda.col(a));
      }
    }
    return grad;
  }
};

namespace detail {

template <typename Fn>
decltype(auto) dispatch_basis(int dim, int order, Fn&& fn) {
  check_supported(dim, order);
  switch (dim * 10 + order) {
    case 11: return fn(LagrangeBasis<1, 1>{});
    case 12: return fn(LagrangeBasis<1, 2>{});
    case 21: return fn(LagrangeBasis<2, 1>{});
    case 22: return fn(LagrangeBasis<2, 2>{});
    case 31: return fn(LagrangeBasis<3, 1>{});
    default: return fn(LagrangeBasis<3, 2>{});
  }
}

}  // namespace detail

/// Values of all reference basis functions at xi.
template <typename Derived>
VectorX<typename Derived::Scalar> basis_eval(int dim, int order,
                                             const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  detail::check_supported(dim, order);
  detail::check_reference_point(dim, xi);
  const VectorX<Scalar> x = xi;
  return detail::dispatch_basis(dim, order, [&](auto basis) -> VectorX<Scalar> {
    using B = decltype(basis);
    typename B::template Point<Scalar> p = x;
    return B::values(p);
  });
}

/// Gradients (dim x dofs) of all reference basis functions at xi.
template <typename Derived>
MatrixX<typename Derived::Scalar> basis_grad(int dim, int order,
                                             const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  detail::check_supported(dim, order);
  detail::check_reference_point(dim, xi);
  const VectorX<Scalar> x = xi;
  return detail::dispatch_basis(dim, order, [&](auto basis) -> MatrixX<Scalar> {
    using B = decltype(basis);
    typename B::template Point<Scalar> p = x;
    return B::gradients(p);
  });
}

struct ReferenceElement {
  int dim = 0;
  int order = 0;
  int dofs = 0;
  /// dim x dofs reference node positions: corners, then edge midpoints.
  Eigen::MatrixXd nodes;
};

ReferenceElement reference_element(int dim, int order);

struct QuadratureRule {
  int dim = 0;
  /// Polynomial degree integrated exactly.
  int degree = 0;
  /// dim x Q
  Eigen::MatrixXd points;
  /// Q positive weights summing to the reference measure.
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Hardcoded rule used for all element integrals in dimension dim:
/// 6-point Gauss-Legendre (degree 11), 16-point Dunavant (degree 8) and a
/// 35-point fully symmetric tetrahedral rule (degree 7).
const QuadratureRule& quadrature_rule(int dim);

/// Element-independent tables shared by every element of one type.
struct ReferencePack {
  int dim = 0;
  int order = 0;
  int dofs = 0;
  QuadratureRule rule;
  /// dofs x Q basis values at the quadrature points.
  Eigen::MatrixXd values;
  /// dim x (dofs * Q); columns [q * dofs, (q + 1) * dofs) hold the gradients at point q.
  Eigen::MatrixXd gradients;
  /// dofs^2 x Q; column q is the column-major flattening of values(:,q) values(:,q)^T.
  Eigen::MatrixXd products;
  /// Q quadrature weights.
  Eigen::VectorXd weights;

  /// Exact reference mass matrix (order 1 only, empty otherwise).
  Eigen::MatrixXd mass_ref;
  /// Exact stiffness building blocks int d_m phi_k d_n phi_j, stored at m * dim + n
  /// (order 1 only).
  std::vector<Eigen::MatrixXd> stiffness_ref;

  int num_points() const { return static_cast<int>(weights.size()); }

  auto gradient_page(int q) const { return gradients.middleCols(q * dofs, dofs); }
};

/// Builds the tables for (dim, order). Deterministic.
ReferencePack precompute(int dim, int order);

/// Process-wide immutable copy of precompute(dim, order).
const ReferencePack& reference_pack(int dim, int order);

}  // namespace ellfem
