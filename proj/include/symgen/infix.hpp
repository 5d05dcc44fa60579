#pragma once

#include <string_view>

#include "symgen/expr.hpp"

namespace symgen {

/// Reads conventional infix (+ - * / ^, function calls, parentheses), mainly
/// for tests and command-line input. Chains associate to the left. A minus
/// sign directly followed by digits is a negative literal. Throws
/// MalformedSequence.
Expression parse_infix(std::string_view text);

}  // namespace symgen
