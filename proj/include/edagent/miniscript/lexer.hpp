#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "edagent/miniscript/ast.hpp"

namespace edagent::miniscript {

enum class TokenKind { Name, Keyword, Int, Real, String, Op, Newline, Indent, Dedent, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier, keyword, operator, or decoded string value
  Span span;
  std::int64_t int_value = 0;
  double real_value = 0.0;
};

/// Splits source into tokens with Python-style INDENT/DEDENT tracking.
/// Newlines inside (), [] and {} are ignored. Throws SyntaxError.
std::vector<Token> tokenize(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace edagent::miniscript
