#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ellfem {

/// Node / element index type used in connectivity tables and sparse indices.
using Index = std::int32_t;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One row per node, one column per ambient coordinate.
using NodeArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// One row per element, one column per local dof.
using ElementArray = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Allocator whose resize() leaves trivially constructible elements uninitialised.
template <typename T>
struct DefaultInitAllocator : std::allocator<T> {
  template <typename U>
  struct rebind {
    using other = DefaultInitAllocator<U>;
  };
  using std::allocator<T>::allocator;

  template <typename U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(p)) U;
  }
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

/// Contiguous buffer that is filled right after allocation.
template <typename T>
using Buffer = std::vector<T, DefaultInitAllocator<T>>;

/// Scalar field on ambient coordinates.
using ScalarFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;
/// Vector field on ambient coordinates (same length as the argument).
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

}  // namespace ellfem
