#include "edagent/miniscript/lexer.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>

namespace edagent::miniscript {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "def",   "return", "for",    "in",    "while",  "if",      "elif",     "else",   "break",
    "continue", "pass", "import", "from", "as",     "and",     "or",       "not",    "True",
    "False", "None",   "class",  "try",   "except", "finally", "with",     "lambda", "yield",
    "global", "nonlocal", "del", "assert", "raise", "is",      "async",    "await"};

// Longest first so "**" wins over "*".
constexpr std::array<std::string_view, 33> kOperators = {
    "**=", "//=", "**", "//", "<=", ">=", "==", "!=", "+=", "-=", "*=", "/=", "%=", "->", "(",
    ")",   "[",   "]",  "{",  "}",  ",",  ":",  ".",  "=",  "+",  "-",  "*",  "/",  "%",  "<",
    ">",   ";",   "@"};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    indents_.push_back(0);
    at_line_start_ = true;
    while (true) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) break;
      }
      skip_inline_space();
      if (eof()) break;
      const char c = peek();
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '\\' && (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n'))) {
        advance();
        if (peek() == '\r') advance();
        advance();
        continue;
      }
      if (c == '\n' || c == '\r') {
        const Span sp = here();
        if (c == '\r') advance();
        if (peek() == '\n') advance();
        if (depth_ == 0) {
          emit_newline(sp);
          at_line_start_ = true;
        }
        continue;
      }
      if (is_ident_start(c)) {
        lex_name();
      } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
        lex_number();
      } else if (c == '"' || c == '\'') {
        lex_string(here());
      } else {
        lex_operator();
      }
    }
    const Span end = here();
    if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline &&
        tokens_.back().kind != TokenKind::Dedent) {
      emit_newline(end);
    }
    if (depth_ > 0) throw SyntaxError(bracket_spans_.back(), "unclosed bracket");
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokenKind::Dedent, "", end);
    }
    push(TokenKind::End, "", end);
    return std::move(tokens_);
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  Span here() const { return Span{line_, col_}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void push(TokenKind kind, std::string text, Span span) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.span = span;
    tokens_.push_back(std::move(t));
  }

  void emit_newline(Span sp) {
    if (tokens_.empty() || tokens_.back().kind == TokenKind::Newline) return;
    if (tokens_.back().kind == TokenKind::Indent || tokens_.back().kind == TokenKind::Dedent) return;
    push(TokenKind::Newline, "", sp);
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\f')) advance();
  }

  void skip_comment() {
    while (!eof() && peek() != '\n' && peek() != '\r') advance();
  }

  // Measures the indentation of the next logical line and emits INDENT or
  // DEDENT tokens. Blank and comment-only lines are consumed silently.
  // Returns false at end of input.
  bool handle_indentation() {
    while (true) {
      int width = 0;
      while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\f')) {
        if (peek() == '\t') {
          width = (width / 8 + 1) * 8;
        } else if (peek() == ' ') {
          ++width;
        }
        advance();
      }
      if (eof()) return false;
      const char c = peek();
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (c == '\r') advance();
        if (peek() == '\n') advance();
        continue;
      }
      at_line_start_ = false;
      const Span sp = here();
      if (width > indents_.back()) {
        indents_.push_back(width);
        push(TokenKind::Indent, "", sp);
      } else {
        while (width < indents_.back()) {
          indents_.pop_back();
          push(TokenKind::Dedent, "", sp);
        }
        if (width != indents_.back()) {
          throw SyntaxError(sp, "unindent does not match any outer indentation level");
        }
      }
      return true;
    }
  }

  void lex_name() {
    const Span sp = here();
    const std::size_t start = pos_;
    while (!eof() && is_ident_char(peek())) advance();
    std::string word(src_.substr(start, pos_ - start));
    if (peek() == '"' || peek() == '\'') {
      std::string lower = word;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (lower.size() <= 2 && lower.find_first_not_of("frbu") == std::string::npos) {
        if (lower.find('f') != std::string::npos) {
          throw SyntaxError(sp, "f-strings are not supported");
        }
        throw SyntaxError(sp, "string prefix '" + word + "' is not supported");
      }
    }
    const TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Name;
    push(kind, std::move(word), sp);
  }

  void lex_number() {
    const Span sp = here();
    const std::size_t start = pos_;
    bool real = false;
    while (is_digit(peek())) advance();
    if (peek() == '.') {
      real = true;
      advance();
      while (is_digit(peek())) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      const char sign = peek(1);
      const bool has_digits = is_digit(sign) || ((sign == '+' || sign == '-') && is_digit(peek(2)));
      if (has_digits) {
        real = true;
        advance();
        if (peek() == '+' || peek() == '-') advance();
        while (is_digit(peek())) advance();
      }
    }
    if (is_ident_char(peek())) throw SyntaxError(here(), "invalid numeric literal");
    const std::string text(src_.substr(start, pos_ - start));
    Token t;
    t.span = sp;
    t.text = text;
    if (real) {
      errno = 0;
      const double v = std::strtod(text.c_str(), nullptr);
      if (errno == ERANGE && std::isinf(v)) throw SyntaxError(sp, "numeric literal out of range");
      t.kind = TokenKind::Real;
      t.real_value = v;
    } else {
      errno = 0;
      const long long v = std::strtoll(text.c_str(), nullptr, 10);
      if (errno == ERANGE) throw SyntaxError(sp, "integer literal out of range");
      t.kind = TokenKind::Int;
      t.int_value = v;
    }
    tokens_.push_back(std::move(t));
  }

  void lex_string(Span sp) {
    const char quote = peek();
    const bool triple = peek(1) == quote && peek(2) == quote;
    const std::size_t qlen = triple ? 3 : 1;
    for (std::size_t i = 0; i < qlen; ++i) advance();
    std::string value;
    while (true) {
      if (eof()) throw SyntaxError(sp, "unterminated string literal");
      const char c = peek();
      if (c == quote && (!triple || (peek(1) == quote && peek(2) == quote))) {
        for (std::size_t i = 0; i < qlen; ++i) advance();
        break;
      }
      if ((c == '\n' || c == '\r') && !triple) throw SyntaxError(sp, "unterminated string literal");
      if (c == '\\') {
        const Span esc = here();
        advance();
        if (eof()) throw SyntaxError(sp, "unterminated string literal");
        const char e = peek();
        advance();
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          case '0': value += '\0'; break;
          case '\\': value += '\\'; break;
          case '\'': value += '\''; break;
          case '"': value += '"'; break;
          case '\n': break;  // line continuation inside the literal
          case 'x': {
            const int hi = hex_value(peek());
            const int lo = hex_value(peek(1));
            if (hi < 0 || lo < 0) throw SyntaxError(esc, "invalid \\x escape");
            advance();
            advance();
            value += static_cast<char>(hi * 16 + lo);
            break;
          }
          default:
            value += '\\';
            value += e;
        }
        continue;
      }
      value += c;
      advance();
    }
    push(TokenKind::String, std::move(value), sp);
  }

  void lex_operator() {
    const Span sp = here();
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        if (op == "(" || op == "[" || op == "{") {
          ++depth_;
          bracket_spans_.push_back(sp);
        } else if (op == ")" || op == "]" || op == "}") {
          if (depth_ == 0) throw SyntaxError(sp, "unmatched '" + std::string(op) + "'");
          --depth_;
          bracket_spans_.pop_back();
        }
        push(TokenKind::Op, std::string(op), sp);
        return;
      }
    }
    const unsigned char c = static_cast<unsigned char>(peek());
    if (c >= 0x80) throw SyntaxError(sp, "non-ASCII character outside string or comment");
    throw SyntaxError(sp, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_;
  std::vector<Span> bracket_spans_;
  std::vector<Token> tokens_;
};

}  // namespace

SyntaxError::SyntaxError(Span span, std::string message)
    : std::runtime_error("SyntaxError(" + std::to_string(span.line) + ":" +
                         std::to_string(span.column) + "): " + message),
      span_(span),
      message_(std::move(message)) {}

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace edagent::miniscript
