#pragma once

#include <string_view>

#include "ellfem/types.hpp"

namespace ellfem::cli {

/// Parses a polynomial in the ambient coordinates.
///
///   expr   := term (('+' | '-') term)*
///   term   := factor ('*' factor)*
///   factor := unary ('^' integer)?
///   unary  := '-' unary | '+' unary | primary
///   primary:= number | x1 | x2 | x3 | x | y | z | '(' expr ')'
///
/// Throws DomainError with the offending column on malformed input.
ScalarFunction parse_polynomial(std::string_view text);

}  // namespace ellfem::cli
