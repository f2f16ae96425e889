#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace edagent::miniscript {

/// 1-based position of a node's first character in the source text.
struct Span {
  int line = 1;
  int column = 1;

  friend bool operator==(const Span&, const Span&) = default;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(Span span, std::string message);
  const Span& span() const noexcept { return span_; }
  int line() const noexcept { return span_.line; }
  int column() const noexcept { return span_.column; }
  const std::string& message() const noexcept { return message_; }

 private:
  Span span_;
  std::string message_;
};

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, FloorDiv, Mod, Pow };
enum class CompareOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class LogicOp { And, Or };

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct IntLit {
  std::int64_t value = 0;
};
struct RealLit {
  double value = 0.0;
};
struct StrLit {
  std::string value;
};
struct BoolLit {
  bool value = false;
};
struct NoneLit {};
struct ListExpr {
  std::vector<ExprPtr> items;
};
struct DictExpr {
  std::vector<std::pair<ExprPtr, ExprPtr>> entries;
};
struct NameExpr {
  std::string id;
};
struct AttrExpr {
  ExprPtr object;
  std::string attr;
};
struct KeywordArg {
  std::string name;
  ExprPtr value;
};
struct CallExpr {
  ExprPtr callee;
  std::vector<ExprPtr> args;
  std::vector<KeywordArg> keywords;
};
struct IndexExpr {
  ExprPtr object;
  ExprPtr index;
};
struct UnaryExpr {
  UnaryOp op;
  ExprPtr operand;
};
struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
/// a < b <= c is one node with first = a and rest = [(<, b), (<=, c)].
struct CompareExpr {
  ExprPtr first;
  std::vector<std::pair<CompareOp, ExprPtr>> rest;
};
struct LogicExpr {
  LogicOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expr {
  Span span;
  std::variant<IntLit, RealLit, StrLit, BoolLit, NoneLit, ListExpr, DictExpr, NameExpr, AttrExpr,
               CallExpr, IndexExpr, UnaryExpr, BinaryExpr, CompareExpr, LogicExpr>
      node;
};

struct AssignStmt {
  ExprPtr target;  // NameExpr, IndexExpr or AttrExpr
  ExprPtr value;
};
struct ExprStmt {
  ExprPtr expr;
};
struct Param {
  std::string name;
  ExprPtr default_value;  // may be null
};
struct DefStmt {
  std::string name;
  std::vector<Param> params;
  Block body;
};
struct ReturnStmt {
  ExprPtr value;  // may be null
};
struct ForStmt {
  std::string var;
  ExprPtr iterable;
  Block body;
};
struct WhileStmt {
  ExprPtr cond;
  Block body;
};
/// `elif` chains are nested IfStmts inside else_body.
struct IfStmt {
  ExprPtr cond;
  Block then_body;
  Block else_body;
};
struct BreakStmt {};
struct ContinueStmt {};
struct PassStmt {};
/// Retained but never executed. `text` is the statement with single spaces
/// between tokens, e.g. "import numpy as np".
struct ImportStmt {
  std::string text;
};

struct Stmt {
  Span span;
  std::variant<AssignStmt, ExprStmt, DefStmt, ReturnStmt, ForStmt, WhileStmt, IfStmt, BreakStmt,
               ContinueStmt, PassStmt, ImportStmt>
      node;
};

struct Program {
  Block body;
};

/// Node-by-node comparison ignoring source spans.
bool same_structure(const Program& a, const Program& b);
bool same_structure(const Expr& a, const Expr& b);

}  // namespace edagent::miniscript
