#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ellfem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (d, p) pair outside the supported element table.
class UnsupportedElement : public Error {
 public:
  UnsupportedElement(int dim, int order)
      : Error("unsupported element: dim " + std::to_string(dim) + ", order " +
              std::to_string(order)),
        dim(dim),
        order(order) {}
  int dim;
  int order;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or inverted element encountered during geometry evaluation.
class SingularElement : public Error {
 public:
  SingularElement(std::ptrdiff_t element, const std::string& what)
      : Error("element " + std::to_string(element) + ": " + what), element(element) {}
  std::ptrdiff_t element;
};

/// Non-finite value returned by a user callable.
class EvaluationError : public Error {
 public:
  EvaluationError(std::ptrdiff_t element, const std::string& what)
      : Error("element " + std::to_string(element) + ": " + what), element(element) {}
  std::ptrdiff_t element;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ellfem
