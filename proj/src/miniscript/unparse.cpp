#include <cstdio>

#include "edagent/miniscript/parser.hpp"
#include "edagent/miniscript/value.hpp"

namespace edagent::miniscript {

namespace {

const char* binary_token(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::FloorDiv: return "//";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Pow: return "**";
  }
  return "?";
}

const char* compare_token(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
  }
  return "?";
}

bool is_operator(const Expr& e) {
  return std::holds_alternative<UnaryExpr>(e.node) || std::holds_alternative<BinaryExpr>(e.node) ||
         std::holds_alternative<CompareExpr>(e.node) || std::holds_alternative<LogicExpr>(e.node);
}

bool is_primary(const Expr& e) {
  return std::holds_alternative<NameExpr>(e.node) || std::holds_alternative<CallExpr>(e.node) ||
         std::holds_alternative<IndexExpr>(e.node) || std::holds_alternative<AttrExpr>(e.node) ||
         std::holds_alternative<ListExpr>(e.node) || std::holds_alternative<DictExpr>(e.node) ||
         std::holds_alternative<StrLit>(e.node);
}

class Writer {
 public:
  std::string out;

  void expr(const Expr& e) {
    std::visit([this](const auto& n) { node(n); }, e.node);
  }

  void operand(const Expr& e) {
    if (is_operator(e)) {
      out += '(';
      expr(e);
      out += ')';
    } else {
      expr(e);
    }
  }

  void postfix_object(const Expr& e) {
    if (is_primary(e)) {
      expr(e);
    } else {
      out += '(';
      expr(e);
      out += ')';
    }
  }

  void node(const IntLit& n) { out += std::to_string(n.value); }
  void node(const RealLit& n) { out += format_real(n.value); }
  void node(const StrLit& n) { out += quote_string(n.value); }
  void node(const BoolLit& n) { out += n.value ? "True" : "False"; }
  void node(const NoneLit&) { out += "None"; }
  void node(const NameExpr& n) { out += n.id; }

  void node(const ListExpr& n) {
    out += '[';
    for (std::size_t i = 0; i < n.items.size(); ++i) {
      if (i) out += ", ";
      expr(*n.items[i]);
    }
    out += ']';
  }

  void node(const DictExpr& n) {
    out += '{';
    for (std::size_t i = 0; i < n.entries.size(); ++i) {
      if (i) out += ", ";
      expr(*n.entries[i].first);
      out += ": ";
      expr(*n.entries[i].second);
    }
    out += '}';
  }

  void node(const AttrExpr& n) {
    postfix_object(*n.object);
    out += '.';
    out += n.attr;
  }

  void node(const KeywordArg&) {}

  void node(const CallExpr& n) {
    postfix_object(*n.callee);
    out += '(';
    bool first = true;
    for (const auto& a : n.args) {
      if (!first) out += ", ";
      first = false;
      expr(*a);
    }
    for (const auto& kw : n.keywords) {
      if (!first) out += ", ";
      first = false;
      out += kw.name;
      out += '=';
      expr(*kw.value);
    }
    out += ')';
  }

  void node(const IndexExpr& n) {
    postfix_object(*n.object);
    out += '[';
    expr(*n.index);
    out += ']';
  }

  void node(const UnaryExpr& n) {
    out += n.op == UnaryOp::Neg ? "-" : "not ";
    operand(*n.operand);
  }

  void node(const BinaryExpr& n) {
    operand(*n.lhs);
    out += ' ';
    out += binary_token(n.op);
    out += ' ';
    operand(*n.rhs);
  }

  void node(const CompareExpr& n) {
    operand(*n.first);
    for (const auto& [op, rhs] : n.rest) {
      out += ' ';
      out += compare_token(op);
      out += ' ';
      operand(*rhs);
    }
  }

  void node(const LogicExpr& n) {
    operand(*n.lhs);
    out += n.op == LogicOp::And ? " and " : " or ";
    operand(*n.rhs);
  }

  void block(const Block& body, int indent) {
    for (const auto& s : body) stmt(*s, indent);
  }

  void line_start(int indent) { out.append(static_cast<std::size_t>(indent) * 4, ' '); }

  void stmt(const Stmt& s, int indent) {
    line_start(indent);
    std::visit([&](const auto& n) { statement(n, indent); }, s.node);
  }

  void statement(const AssignStmt& n, int) {
    expr(*n.target);
    out += " = ";
    expr(*n.value);
    out += '\n';
  }
  void statement(const ExprStmt& n, int) {
    expr(*n.expr);
    out += '\n';
  }
  void statement(const DefStmt& n, int indent) {
    out += "def " + n.name + "(";
    for (std::size_t i = 0; i < n.params.size(); ++i) {
      if (i) out += ", ";
      out += n.params[i].name;
      if (n.params[i].default_value) {
        out += '=';
        expr(*n.params[i].default_value);
      }
    }
    out += "):\n";
    body(n.body, indent + 1);
  }
  void statement(const ReturnStmt& n, int) {
    out += "return";
    if (n.value) {
      out += ' ';
      expr(*n.value);
    }
    out += '\n';
  }
  void statement(const ForStmt& n, int indent) {
    out += "for " + n.var + " in ";
    expr(*n.iterable);
    out += ":\n";
    body(n.body, indent + 1);
  }
  void statement(const WhileStmt& n, int indent) {
    out += "while ";
    expr(*n.cond);
    out += ":\n";
    body(n.body, indent + 1);
  }
  void statement(const IfStmt& n, int indent) {
    out += "if ";
    if_chain(n, indent);
  }
  void if_chain(const IfStmt& n, int indent) {
    expr(*n.cond);
    out += ":\n";
    body(n.then_body, indent + 1);
    if (n.else_body.empty()) return;
    if (n.else_body.size() == 1) {
      if (const auto* nested = std::get_if<IfStmt>(&n.else_body.front()->node)) {
        line_start(indent);
        out += "elif ";
        if_chain(*nested, indent);
        return;
      }
    }
    line_start(indent);
    out += "else:\n";
    body(n.else_body, indent + 1);
  }
  void statement(const BreakStmt&, int) { out += "break\n"; }
  void statement(const ContinueStmt&, int) { out += "continue\n"; }
  void statement(const PassStmt&, int) { out += "pass\n"; }
  void statement(const ImportStmt& n, int) { out += n.text + "\n"; }

  void body(const Block& b, int indent) {
    if (b.empty()) {
      line_start(indent);
      out += "pass\n";
      return;
    }
    block(b, indent);
  }
};

// -- structural comparison ---------------------------------------------------

bool same(const ExprPtr& a, const ExprPtr& b);
bool same_block(const Block& a, const Block& b);

bool same_node(const IntLit& a, const IntLit& b) { return a.value == b.value; }
bool same_node(const RealLit& a, const RealLit& b) {
  return a.value == b.value || (a.value != a.value && b.value != b.value);
}
bool same_node(const StrLit& a, const StrLit& b) { return a.value == b.value; }
bool same_node(const BoolLit& a, const BoolLit& b) { return a.value == b.value; }
bool same_node(const NoneLit&, const NoneLit&) { return true; }
bool same_node(const NameExpr& a, const NameExpr& b) { return a.id == b.id; }
bool same_node(const ListExpr& a, const ListExpr& b) {
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (!same(a.items[i], b.items[i])) return false;
  }
  return true;
}
bool same_node(const DictExpr& a, const DictExpr& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (!same(a.entries[i].first, b.entries[i].first)) return false;
    if (!same(a.entries[i].second, b.entries[i].second)) return false;
  }
  return true;
}
bool same_node(const AttrExpr& a, const AttrExpr& b) {
  return a.attr == b.attr && same(a.object, b.object);
}
bool same_node(const CallExpr& a, const CallExpr& b) {
  if (!same(a.callee, b.callee)) return false;
  if (a.args.size() != b.args.size() || a.keywords.size() != b.keywords.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same(a.args[i], b.args[i])) return false;
  }
  for (std::size_t i = 0; i < a.keywords.size(); ++i) {
    if (a.keywords[i].name != b.keywords[i].name) return false;
    if (!same(a.keywords[i].value, b.keywords[i].value)) return false;
  }
  return true;
}
bool same_node(const IndexExpr& a, const IndexExpr& b) {
  return same(a.object, b.object) && same(a.index, b.index);
}
bool same_node(const UnaryExpr& a, const UnaryExpr& b) {
  return a.op == b.op && same(a.operand, b.operand);
}
bool same_node(const BinaryExpr& a, const BinaryExpr& b) {
  return a.op == b.op && same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
}
bool same_node(const CompareExpr& a, const CompareExpr& b) {
  if (!same(a.first, b.first) || a.rest.size() != b.rest.size()) return false;
  for (std::size_t i = 0; i < a.rest.size(); ++i) {
    if (a.rest[i].first != b.rest[i].first || !same(a.rest[i].second, b.rest[i].second)) {
      return false;
    }
  }
  return true;
}
bool same_node(const LogicExpr& a, const LogicExpr& b) {
  return a.op == b.op && same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
}

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_structure(*a, *b);
}

bool same_stmt(const AssignStmt& a, const AssignStmt& b) {
  return same(a.target, b.target) && same(a.value, b.value);
}
bool same_stmt(const ExprStmt& a, const ExprStmt& b) { return same(a.expr, b.expr); }
bool same_stmt(const DefStmt& a, const DefStmt& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name) return false;
    if (!same(a.params[i].default_value, b.params[i].default_value)) return false;
  }
  return same_block(a.body, b.body);
}
bool same_stmt(const ReturnStmt& a, const ReturnStmt& b) { return same(a.value, b.value); }
bool same_stmt(const ForStmt& a, const ForStmt& b) {
  return a.var == b.var && same(a.iterable, b.iterable) && same_block(a.body, b.body);
}
bool same_stmt(const WhileStmt& a, const WhileStmt& b) {
  return same(a.cond, b.cond) && same_block(a.body, b.body);
}
bool same_stmt(const IfStmt& a, const IfStmt& b) {
  return same(a.cond, b.cond) && same_block(a.then_body, b.then_body) &&
         same_block(a.else_body, b.else_body);
}
bool same_stmt(const BreakStmt&, const BreakStmt&) { return true; }
bool same_stmt(const ContinueStmt&, const ContinueStmt&) { return true; }
bool same_stmt(const PassStmt&, const PassStmt&) { return true; }
bool same_stmt(const ImportStmt& a, const ImportStmt& b) { return a.text == b.text; }

bool same_statement(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return same_stmt(x, std::get<T>(b.node));
      },
      a.node);
}

bool same_block(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_statement(*a[i], *b[i])) return false;
  }
  return true;
}

}  // namespace

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[5];
          std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string unparse(const Program& program) {
  Writer w;
  w.block(program.body, 0);
  return w.out;
}

std::string unparse(const Expr& expr) {
  Writer w;
  w.expr(expr);
  return w.out;
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return same_node(x, std::get<T>(b.node));
      },
      a.node);
}

bool same_structure(const Program& a, const Program& b) { return same_block(a.body, b.body); }

}  // namespace edagent::miniscript
