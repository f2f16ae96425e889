#pragma once

#include <string>
#include <string_view>

#include "edagent/miniscript/ast.hpp"

namespace edagent::miniscript {

/// Parses the script subset described in docs/grammar.ebnf. Reports the
/// first error only, as a SyntaxError carrying line and column.
Program parse(std::string_view source);

/// Canonical text for a program: 4-space indentation, one statement per
/// line, operator subexpressions fully parenthesized. parse(unparse(p)) is
/// structurally identical to p.
std::string unparse(const Program& program);
std::string unparse(const Expr& expr);

}  // namespace edagent::miniscript
