#include "edagent/miniscript/parser.hpp"

#include <optional>
#include <set>

#include "edagent/miniscript/lexer.hpp"

namespace edagent::miniscript {

namespace {

constexpr int kMaxNesting = 100;

template <typename Node>
ExprPtr make_expr(Span span, Node node) {
  auto e = std::make_unique<Expr>();
  e->span = span;
  e->node = std::move(node);
  return e;
}

template <typename Node>
StmtPtr make_stmt(Span span, Node node) {
  auto s = std::make_unique<Stmt>();
  s->span = span;
  s->node = std::move(node);
  return s;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (!at(TokenKind::End)) {
      if (accept(TokenKind::Newline)) continue;
      if (at(TokenKind::Indent)) throw error("unexpected indent");
      p.body.push_back(statement());
    }
    return p;
  }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_op(std::string_view op) const { return cur().kind == TokenKind::Op && cur().text == op; }
  bool at_kw(std::string_view kw) const {
    return cur().kind == TokenKind::Keyword && cur().text == kw;
  }

  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    next();
    return true;
  }

  SyntaxError error(const std::string& msg) const { return SyntaxError(cur().span, msg); }

  std::string describe(const Token& t) const {
    switch (t.kind) {
      case TokenKind::Newline: return "end of line";
      case TokenKind::Indent: return "indent";
      case TokenKind::Dedent: return "dedent";
      case TokenKind::End: return "end of input";
      case TokenKind::String: return "string literal";
      default: return "'" + t.text + "'";
    }
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) throw error("expected '" + std::string(op) + "' but found " + describe(cur()));
  }

  std::string expect_name(const char* what) {
    if (!at(TokenKind::Name)) {
      throw error(std::string("expected ") + what + " but found " + describe(cur()));
    }
    return next().text;
  }

  void expect_newline() {
    if (accept(TokenKind::Newline) || at(TokenKind::End)) return;
    if (at_op(";")) throw error("multiple statements on one line are not supported");
    throw error("expected end of line but found " + describe(cur()));
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxNesting) throw parser.error("expression nested too deeply");
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  // -- statements ----------------------------------------------------------

  StmtPtr statement() {
    const Token& t = cur();
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "def") return def_statement();
      if (t.text == "for") return for_statement();
      if (t.text == "while") return while_statement();
      if (t.text == "if") return if_statement();
      if (t.text == "elif" || t.text == "else") throw error("'" + t.text + "' without matching 'if'");
    }
    auto s = simple_statement();
    expect_newline();
    return s;
  }

  StmtPtr simple_statement() {
    const Token& t = cur();
    const Span sp = t.span;
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "pass") {
        next();
        return make_stmt(sp, PassStmt{});
      }
      if (t.text == "break" || t.text == "continue") {
        if (loop_depth_ == 0) throw error("'" + t.text + "' outside loop");
        const bool is_break = t.text == "break";
        next();
        if (is_break) return make_stmt(sp, BreakStmt{});
        return make_stmt(sp, ContinueStmt{});
      }
      if (t.text == "return") {
        if (function_depth_ == 0) throw error("'return' outside function");
        next();
        ReturnStmt r;
        if (!at(TokenKind::Newline) && !at(TokenKind::End)) r.value = expression();
        return make_stmt(sp, std::move(r));
      }
      if (t.text == "import" || t.text == "from") return import_statement();
      if (t.text == "class" || t.text == "try" || t.text == "with" || t.text == "lambda" ||
          t.text == "global" || t.text == "nonlocal" || t.text == "del" || t.text == "assert" ||
          t.text == "raise" || t.text == "yield" || t.text == "async" || t.text == "await" ||
          t.text == "except" || t.text == "finally") {
        throw error("'" + t.text + "' is not supported");
      }
    }
    ExprPtr lhs = expression();
    if (at_op("+=") || at_op("-=") || at_op("*=") || at_op("/=") || at_op("//=") || at_op("%=") ||
        at_op("**=")) {
      throw error("augmented assignment '" + cur().text + "' is not supported");
    }
    if (at_op(",")) throw error("tuple expressions are not supported");
    if (accept_op("=")) {
      check_target(*lhs);
      ExprPtr value = expression();
      if (at_op("=")) throw error("chained assignment is not supported");
      if (at_op(",")) throw error("tuple expressions are not supported");
      return make_stmt(sp, AssignStmt{std::move(lhs), std::move(value)});
    }
    return make_stmt(sp, ExprStmt{std::move(lhs)});
  }

  void check_target(const Expr& e) {
    if (std::holds_alternative<NameExpr>(e.node) || std::holds_alternative<IndexExpr>(e.node) ||
        std::holds_alternative<AttrExpr>(e.node)) {
      return;
    }
    throw SyntaxError(e.span, "cannot assign to expression");
  }

  StmtPtr import_statement() {
    const Span sp = cur().span;
    std::string text;
    const bool from = at_kw("from");
    auto append = [&](const std::string& piece) {
      if (!text.empty() && piece != "." && piece != "," && text.back() != '.') text += ' ';
      text += piece;
    };
    append(next().text);
    bool saw_import = !from;
    bool want_name = true;
    while (!at(TokenKind::Newline) && !at(TokenKind::End)) {
      const Token& t = cur();
      if (t.kind == TokenKind::Name) {
        if (!want_name) throw error("unexpected " + describe(t) + " in import");
        append(t.text);
        want_name = false;
      } else if (t.kind == TokenKind::Op && (t.text == "." || t.text == ",")) {
        if (want_name && t.text == ",") throw error("unexpected ',' in import");
        append(t.text);
        want_name = true;
      } else if (t.kind == TokenKind::Op && t.text == "*" && saw_import) {
        append("*");
        want_name = false;
      } else if (t.kind == TokenKind::Keyword && t.text == "as") {
        if (want_name) throw error("unexpected 'as' in import");
        append("as");
        want_name = true;
      } else if (t.kind == TokenKind::Keyword && t.text == "import" && from && !saw_import) {
        if (want_name) throw error("expected module name");
        append("import");
        saw_import = true;
        want_name = true;
      } else {
        throw error("unexpected " + describe(t) + " in import");
      }
      next();
    }
    if (want_name || !saw_import) throw error("incomplete import statement");
    return make_stmt(sp, ImportStmt{std::move(text)});
  }

  Block suite() {
    expect_op(":");
    Block body;
    if (!accept(TokenKind::Newline)) {
      body.push_back(simple_statement());
      expect_newline();
      return body;
    }
    if (!accept(TokenKind::Indent)) throw error("expected an indented block");
    while (!accept(TokenKind::Dedent)) {
      if (at(TokenKind::End)) break;
      if (accept(TokenKind::Newline)) continue;
      body.push_back(statement());
    }
    return body;
  }

  StmtPtr def_statement() {
    const Span sp = next().span;
    DefStmt d;
    d.name = expect_name("function name");
    expect_op("(");
    std::set<std::string> seen;
    bool saw_default = false;
    while (!at_op(")")) {
      if (at_op("*") || at_op("**")) throw error("star parameters are not supported");
      Param p;
      const Span psp = cur().span;
      p.name = expect_name("parameter name");
      if (!seen.insert(p.name).second) {
        throw SyntaxError(psp, "duplicate parameter '" + p.name + "'");
      }
      if (accept_op("=")) {
        p.default_value = expression();
        saw_default = true;
      } else if (saw_default) {
        throw SyntaxError(psp, "non-default parameter follows default parameter");
      }
      d.params.push_back(std::move(p));
      if (!accept_op(",")) break;
    }
    expect_op(")");
    if (at_op("->")) throw error("return annotations are not supported");
    ++function_depth_;
    const int saved_loops = loop_depth_;
    loop_depth_ = 0;
    d.body = suite();
    loop_depth_ = saved_loops;
    --function_depth_;
    return make_stmt(sp, std::move(d));
  }

  StmtPtr for_statement() {
    const Span sp = next().span;
    ForStmt f;
    if (!at(TokenKind::Name)) throw error("expected loop variable but found " + describe(cur()));
    f.var = next().text;
    if (at_op(",")) throw error("tuple unpacking in for loops is not supported");
    if (!at_kw("in")) throw error("expected 'in' but found " + describe(cur()));
    next();
    if (at_op(":")) throw error("expected an expression after 'in'");
    f.iterable = expression();
    ++loop_depth_;
    f.body = suite();
    --loop_depth_;
    if (at_kw("else")) throw error("'else' on loops is not supported");
    return make_stmt(sp, std::move(f));
  }

  StmtPtr while_statement() {
    const Span sp = next().span;
    WhileStmt w;
    w.cond = expression();
    ++loop_depth_;
    w.body = suite();
    --loop_depth_;
    if (at_kw("else")) throw error("'else' on loops is not supported");
    return make_stmt(sp, std::move(w));
  }

  StmtPtr if_statement() {
    const Span sp = next().span;  // 'if' or 'elif'
    IfStmt s;
    s.cond = expression();
    s.then_body = suite();
    if (at_kw("elif")) {
      s.else_body.push_back(if_statement());
    } else if (at_kw("else")) {
      next();
      s.else_body = suite();
    }
    return make_stmt(sp, std::move(s));
  }

  // -- expressions ---------------------------------------------------------

  ExprPtr expression() {
    DepthGuard guard(*this);
    if (at_kw("lambda")) throw error("'lambda' is not supported");
    return or_test();
  }

  ExprPtr or_test() {
    ExprPtr lhs = and_test();
    while (at_kw("or")) {
      const Span sp = next().span;
      ExprPtr rhs = and_test();
      lhs = make_expr(sp, LogicExpr{LogicOp::Or, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr and_test() {
    ExprPtr lhs = not_test();
    while (at_kw("and")) {
      const Span sp = next().span;
      ExprPtr rhs = not_test();
      lhs = make_expr(sp, LogicExpr{LogicOp::And, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr not_test() {
    if (at_kw("not")) {
      DepthGuard guard(*this);
      const Span sp = next().span;
      ExprPtr operand = not_test();
      return make_expr(sp, UnaryExpr{UnaryOp::Not, std::move(operand)});
    }
    return comparison();
  }

  std::optional<CompareOp> compare_op() const {
    if (cur().kind != TokenKind::Op) {
      if (at_kw("in") || at_kw("is")) throw error("'" + cur().text + "' comparisons are not supported");
      if (at_kw("not") && toks_[pos_ + 1].kind == TokenKind::Keyword &&
          toks_[pos_ + 1].text == "in") {
        throw error("'not in' comparisons are not supported");
      }
      return std::nullopt;
    }
    const std::string& t = cur().text;
    if (t == "<") return CompareOp::Lt;
    if (t == "<=") return CompareOp::Le;
    if (t == ">") return CompareOp::Gt;
    if (t == ">=") return CompareOp::Ge;
    if (t == "==") return CompareOp::Eq;
    if (t == "!=") return CompareOp::Ne;
    return std::nullopt;
  }

  ExprPtr comparison() {
    ExprPtr first = arith();
    auto op = compare_op();
    if (!op) return first;
    const Span sp = first->span;
    CompareExpr c;
    c.first = std::move(first);
    while (op) {
      next();
      c.rest.emplace_back(*op, arith());
      op = compare_op();
    }
    return make_expr(sp, std::move(c));
  }

  ExprPtr arith() {
    ExprPtr lhs = term();
    while (at_op("+") || at_op("-")) {
      const Token& t = next();
      const BinaryOp op = t.text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      ExprPtr rhs = term();
      lhs = make_expr(t.span, BinaryExpr{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    while (at_op("*") || at_op("/") || at_op("//") || at_op("%") || at_op("@")) {
      if (at_op("@")) throw error("'@' is not supported");
      const Token& t = next();
      BinaryOp op = BinaryOp::Mul;
      if (t.text == "/") op = BinaryOp::Div;
      if (t.text == "//") op = BinaryOp::FloorDiv;
      if (t.text == "%") op = BinaryOp::Mod;
      ExprPtr rhs = factor();
      lhs = make_expr(t.span, BinaryExpr{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr factor() {
    if (at_op("-")) {
      DepthGuard guard(*this);
      const Span sp = next().span;
      ExprPtr operand = factor();
      return make_expr(sp, UnaryExpr{UnaryOp::Neg, std::move(operand)});
    }
    if (at_op("+")) throw error("unary '+' is not supported");
    return power();
  }

  ExprPtr power() {
    ExprPtr base = postfix();
    if (at_op("**")) {
      DepthGuard guard(*this);
      const Span sp = next().span;
      ExprPtr exponent = factor();
      return make_expr(sp, BinaryExpr{BinaryOp::Pow, std::move(base), std::move(exponent)});
    }
    return base;
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    int chain = 0;
    while (true) {
      if (++chain > kMaxNesting) throw error("expression nested too deeply");
      if (at_op("(")) {
        const Span sp = next().span;
        CallExpr call;
        call.callee = std::move(e);
        arguments(call);
        e = make_expr(sp, std::move(call));
      } else if (at_op("[")) {
        const Span sp = next().span;
        if (at_op(":")) throw error("slices are not supported");
        ExprPtr index = expression();
        if (at_op(":")) throw error("slices are not supported");
        expect_op("]");
        e = make_expr(sp, IndexExpr{std::move(e), std::move(index)});
      } else if (at_op(".")) {
        const Span sp = next().span;
        std::string attr = expect_name("attribute name");
        e = make_expr(sp, AttrExpr{std::move(e), std::move(attr)});
      } else {
        return e;
      }
    }
  }

  void arguments(CallExpr& call) {
    std::set<std::string> seen;
    while (!at_op(")")) {
      if (at_op("*") || at_op("**")) throw error("star arguments are not supported");
      if (at(TokenKind::Name) && toks_[pos_ + 1].kind == TokenKind::Op && toks_[pos_ + 1].text == "=") {
        const Span sp = cur().span;
        KeywordArg kw;
        kw.name = next().text;
        next();  // '='
        if (!seen.insert(kw.name).second) {
          throw SyntaxError(sp, "keyword argument repeated: '" + kw.name + "'");
        }
        kw.value = expression();
        call.keywords.push_back(std::move(kw));
      } else {
        if (!call.keywords.empty()) throw error("positional argument follows keyword argument");
        call.args.push_back(expression());
        if (at_kw("for")) throw error("comprehensions are not supported");
      }
      if (!accept_op(",")) break;
    }
    expect_op(")");
  }

  ExprPtr atom() {
    const Token& t = cur();
    const Span sp = t.span;
    switch (t.kind) {
      case TokenKind::Int: next(); return make_expr(sp, IntLit{t.int_value});
      case TokenKind::Real: next(); return make_expr(sp, RealLit{t.real_value});
      case TokenKind::String: {
        std::string value;
        while (at(TokenKind::String)) value += next().text;
        return make_expr(sp, StrLit{std::move(value)});
      }
      case TokenKind::Name: next(); return make_expr(sp, NameExpr{t.text});
      case TokenKind::Keyword:
        if (t.text == "True" || t.text == "False") {
          const bool v = t.text == "True";
          next();
          return make_expr(sp, BoolLit{v});
        }
        if (t.text == "None") {
          next();
          return make_expr(sp, NoneLit{});
        }
        if (t.text == "lambda") throw error("'lambda' is not supported");
        throw error("unexpected keyword '" + t.text + "'");
      case TokenKind::Op:
        if (t.text == "(") {
          next();
          if (at_op(")")) throw error("tuple expressions are not supported");
          ExprPtr inner = expression();
          if (at_op(",")) throw error("tuple expressions are not supported");
          if (at_kw("for")) throw error("comprehensions are not supported");
          expect_op(")");
          return inner;
        }
        if (t.text == "[") return list_display();
        if (t.text == "{") return dict_display();
        break;
      default:
        break;
    }
    throw error("unexpected " + describe(t));
  }

  ExprPtr list_display() {
    const Span sp = next().span;
    ListExpr list;
    while (!at_op("]")) {
      list.items.push_back(expression());
      if (at_kw("for")) throw error("comprehensions are not supported");
      if (!accept_op(",")) break;
    }
    expect_op("]");
    return make_expr(sp, std::move(list));
  }

  ExprPtr dict_display() {
    const Span sp = next().span;
    DictExpr dict;
    while (!at_op("}")) {
      ExprPtr key = expression();
      if (!at_op(":")) throw error("set displays are not supported; expected ':'");
      next();
      ExprPtr value = expression();
      if (at_kw("for")) throw error("comprehensions are not supported");
      dict.entries.emplace_back(std::move(key), std::move(value));
      if (!accept_op(",")) break;
    }
    expect_op("}");
    return make_expr(sp, std::move(dict));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int loop_depth_ = 0;
  int function_depth_ = 0;
};

}  // namespace

Program parse(std::string_view source) { return Parser(tokenize(source)).program(); }

}  // namespace edagent::miniscript
