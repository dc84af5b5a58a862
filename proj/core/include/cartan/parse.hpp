#pragma once

#include <string_view>

#include "cartan/expr.hpp"

namespace cartan {

/// Parse infix text: `^` binds tighter than unary minus, which binds tighter
/// than `*` and `/`, then `+` and `-`. Identifiers are [A-Za-z][A-Za-z0-9_]*;
/// numbers are integers or decimals (read exactly); sin, cos, exp and ln are
/// the only function names. Throws ParseError with the byte offset.
Expr parse_expr(std::string_view text);

}  // namespace cartan
