#include <climits>
#include <cmath>
#include <stdexcept>

#include "interp_impl.hpp"

namespace edagent::miniscript {

std::string_view fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::NameError: return "NameError";
    case FaultKind::TypeFault: return "TypeFault";
    case FaultKind::IndexFault: return "IndexFault";
    case FaultKind::KeyFault: return "KeyFault";
    case FaultKind::DivisionByZero: return "DivisionByZero";
    case FaultKind::FlowError: return "FlowError";
    case FaultKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case FaultKind::CallDepthExceeded: return "CallDepthExceeded";
  }
  return "?";
}

RuntimeFault::RuntimeFault(FaultKind kind, Span span, std::string message,
                           std::optional<flowsim::FlowError::Kind> flow_kind)
    : std::runtime_error(std::string(fault_kind_name(kind)) + "(" + std::to_string(span.line) + ":" +
                         std::to_string(span.column) + "): " + message),
      kind_(kind),
      span_(span),
      message_(std::move(message)),
      flow_kind_(flow_kind) {}

nlohmann::ordered_json RuntimeFault::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = fault_kind_name(kind_);
  if (flow_kind_) j["flow_error"] = flowsim::kind_name(*flow_kind_);
  j["line"] = span_.line;
  j["column"] = span_.column;
  j["message"] = message_;
  return j;
}

std::vector<std::string> extract_api_sequence(const ApiTrace& trace) {
  std::vector<std::string> names;
  names.reserve(trace.size());
  for (const auto& e : trace) names.push_back(e.api);
  return names;
}

nlohmann::ordered_json trace_to_json(const ApiTrace& trace) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["api"] = e.api;
    j["session"] = e.session;
    j["args"] = e.args;
    j["result"] = e.result;
    j["ok"] = e.ok;
    if (!e.ok) j["error"] = e.error;
    j["line"] = e.span.line;
    j["column"] = e.span.column;
    arr.push_back(std::move(j));
  }
  return arr;
}

ApiTrace trace_from_json(const nlohmann::ordered_json& doc) {
  ApiTrace trace;
  for (const auto& j : doc) {
    TraceEntry e;
    e.api = j.at("api").get<std::string>();
    e.session = j.at("session").get<int>();
    e.args = j.value("args", nlohmann::ordered_json::object());
    e.result = j.value("result", nlohmann::ordered_json());
    e.ok = j.value("ok", true);
    e.error = j.value("error", std::string());
    e.span = Span{j.value("line", 1), j.value("column", 1)};
    trace.push_back(std::move(e));
  }
  return trace;
}

const Value* ExecutionResult::global(std::string_view name) const {
  for (const auto& [k, v] : globals) {
    if (k == name) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

Interpreter::Interpreter(const HostEnv& env, const RuntimeLimits& limits)
    : env_(env), limits_(limits) {
  install_standard_builtins(*this);
  install_host_builtins(*this);
}

void Interpreter::fault(FaultKind kind, Span span, std::string message) const {
  throw RuntimeFault(kind, span, std::move(message));
}

void Interpreter::tick(Span span, std::int64_t n) {
  steps_ += n;
  if (steps_ > limits_.max_steps) {
    steps_ = limits_.max_steps;
    fault(FaultKind::StepBudgetExceeded,
          span, "step budget of " + std::to_string(limits_.max_steps) + " exhausted");
  }
}

void Interpreter::charge_flow_run(Span span) {
  if (flow_runs_ >= limits_.max_flow_runs) {
    fault(FaultKind::StepBudgetExceeded, span, "flow run budget exhausted");
  }
  ++flow_runs_;
}

void Interpreter::define_builtin(const std::string& name, BuiltinFn fn) {
  builtins_[name] = Value(make_builtin(name, std::move(fn)));
}

FlowHandlePtr Interpreter::new_handle() {
  auto h = std::make_shared<FlowHandleData>();
  h->id = next_handle_++;
  handles_.push_back(h);
  return h;
}

void Interpreter::record_trace(TraceEntry entry) {
  last_session_ = entry.session;
  if (env_.callbacks.on_api_call) env_.callbacks.on_api_call(entry);
  trace_.push_back(std::move(entry));
}

std::string Interpreter::display(const Value& v, Span span) {
  try {
    std::string s = to_display(v, [&](std::int64_t n) { tick(span, n); });
    tick(span, static_cast<std::int64_t>(s.size() / 16));
    return s;
  } catch (const std::length_error& e) {
    fault(FaultKind::TypeFault, span, e.what());
  }
}

std::string Interpreter::repr(const Value& v, Span span) {
  try {
    std::string s = to_repr(v, [&](std::int64_t n) { tick(span, n); });
    tick(span, static_cast<std::int64_t>(s.size() / 16));
    return s;
  } catch (const std::length_error& e) {
    fault(FaultKind::TypeFault, span, e.what());
  }
}

bool Interpreter::equal(const Value& a, const Value& b, Span span) {
  try {
    return values_equal(a, b, [&](std::int64_t n) { tick(span, n); });
  } catch (const std::length_error& e) {
    fault(FaultKind::TypeFault, span, e.what());
  }
}

int Interpreter::compare(const Value& a, const Value& b, Span span) {
  if (a.is_number() && b.is_number()) {
    if (a.is_real() || b.is_real()) {
      const double x = a.to_double();
      const double y = b.to_double();
      if (x < y) return -1;
      if (x > y) return 1;
      if (x == y) return 0;
      return 2;  // unordered (nan)
    }
    const std::int64_t x = a.is_bool() ? a.as_bool() : a.as_int();
    const std::int64_t y = b.is_bool() ? b.as_bool() : b.as_int();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_text() && b.is_text()) {
    const int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.is_list() && b.is_list()) {
    const auto& x = a.as_list()->items;
    const auto& y = b.as_list()->items;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
      tick(span);
      if (!equal(x[i], y[i], span)) return compare(x[i], y[i], span);
    }
    return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
  }
  fault(FaultKind::TypeFault, span,
        "'<' not supported between instances of '" + std::string(type_name(a)) + "' and '" +
            std::string(type_name(b)) + "'");
}

// -- statements ----------------------------------------------------------------

void Interpreter::run(const Program& program) {
  const Flow f = exec_block(program.body);
  (void)f;
}

Interpreter::Flow Interpreter::exec_block(const Block& block) {
  for (const auto& s : block) {
    const Flow f = exec(*s);
    if (f != Flow::Normal) return f;
  }
  return Flow::Normal;
}

Interpreter::Flow Interpreter::exec(const Stmt& stmt) {
  tick(stmt.span);
  return std::visit(
      [&](const auto& n) -> Flow {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AssignStmt>) {
          Value v = eval(*n.value);
          assign(*n.target, std::move(v));
          return Flow::Normal;
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          eval(*n.expr);
          return Flow::Normal;
        } else if constexpr (std::is_same_v<T, DefStmt>) {
          auto fn = std::make_shared<FunctionData>();
          fn->def = &n;
          for (const auto& p : n.params) {
            if (p.default_value) {
              fn->defaults.push_back(eval(*p.default_value));
              fn->has_default.push_back(true);
            } else {
              fn->defaults.emplace_back();
              fn->has_default.push_back(false);
            }
          }
          bind_name(n.name, Value(FunctionPtr(fn)));
          return Flow::Normal;
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          return_value_ = n.value ? eval(*n.value) : Value{};
          return Flow::Return;
        } else if constexpr (std::is_same_v<T, ForStmt>) {
          const Value iterable = eval(*n.iterable);
          auto run_body = [&](Value item) -> std::optional<Flow> {
            bind_name(n.var, std::move(item));
            const Flow f = exec_block(n.body);
            if (f == Flow::Break) return Flow::Normal;
            if (f == Flow::Return) return Flow::Return;
            return std::nullopt;
          };
          if (iterable.is_list()) {
            const ListPtr list = iterable.as_list();
            for (std::size_t i = 0; i < list->items.size(); ++i) {
              if (auto f = run_body(list->items[i])) return *f;
            }
          } else if (iterable.is_map()) {
            std::vector<std::string> keys;
            for (const auto& [k, v] : iterable.as_map()->entries) keys.push_back(k);
            for (auto& k : keys) {
              if (auto f = run_body(Value(std::move(k)))) return *f;
            }
          } else if (iterable.is_text()) {
            const std::string text = iterable.as_text();
            for (char c : text) {
              if (auto f = run_body(Value(std::string(1, c)))) return *f;
            }
          } else {
            fault(FaultKind::TypeFault, n.iterable->span,
                  "'" + std::string(type_name(iterable)) + "' object is not iterable");
          }
          return Flow::Normal;
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          while (truthy(eval(*n.cond))) {
            const Flow f = exec_block(n.body);
            if (f == Flow::Break) break;
            if (f == Flow::Return) return f;
          }
          return Flow::Normal;
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          if (truthy(eval(*n.cond))) return exec_block(n.then_body);
          return exec_block(n.else_body);
        } else if constexpr (std::is_same_v<T, BreakStmt>) {
          return Flow::Break;
        } else if constexpr (std::is_same_v<T, ContinueStmt>) {
          return Flow::Continue;
        } else {
          // PassStmt, ImportStmt
          return Flow::Normal;
        }
      },
      stmt.node);
}

void Interpreter::bind_name(const std::string& name, Value value) {
  if (frame_) {
    frame_->locals.set(name, std::move(value));
  } else {
    globals_.set(name, std::move(value));
  }
}

void Interpreter::assign(const Expr& target, Value value) {
  if (const auto* name = std::get_if<NameExpr>(&target.node)) {
    bind_name(name->id, std::move(value));
    return;
  }
  if (const auto* ix = std::get_if<IndexExpr>(&target.node)) {
    const Value object = eval(*ix->object);
    const Value key = eval(*ix->index);
    if (object.is_list()) {
      auto& items = object.as_list()->items;
      if (!key.is_int() && !key.is_bool()) {
        fault(FaultKind::TypeFault, ix->index->span,
              "list indices must be integers, not " + std::string(type_name(key)));
      }
      std::int64_t i = key.is_bool() ? key.as_bool() : key.as_int();
      const auto size = static_cast<std::int64_t>(items.size());
      if (i < 0) i += size;
      if (i < 0 || i >= size) fault(FaultKind::IndexFault, target.span, "list assignment index out of range");
      items[static_cast<std::size_t>(i)] = std::move(value);
      return;
    }
    if (object.is_map()) {
      if (!key.is_text()) {
        fault(FaultKind::TypeFault, ix->index->span,
              "dict keys must be str, not " + std::string(type_name(key)));
      }
      object.as_map()->set(key.as_text(), std::move(value));
      return;
    }
    fault(FaultKind::TypeFault, target.span,
          "'" + std::string(type_name(object)) + "' object does not support item assignment");
  }
  if (const auto* attr = std::get_if<AttrExpr>(&target.node)) {
    const Value object = eval(*attr->object);
    fault(FaultKind::TypeFault, target.span,
          "cannot set attribute '" + attr->attr + "' on '" + std::string(type_name(object)) + "' object");
  }
  fault(FaultKind::TypeFault, target.span, "invalid assignment target");
}

// -- expressions ---------------------------------------------------------------

Value Interpreter::eval(const Expr& expr) {
  tick(expr.span);
  return std::visit([&](const auto& n) { return eval_node(expr, n); }, expr.node);
}

Value Interpreter::eval_node(const Expr&, const IntLit& n) { return Value(n.value); }
Value Interpreter::eval_node(const Expr&, const RealLit& n) { return Value(n.value); }
Value Interpreter::eval_node(const Expr&, const StrLit& n) { return Value(n.value); }
Value Interpreter::eval_node(const Expr&, const BoolLit& n) { return Value(n.value); }
Value Interpreter::eval_node(const Expr&, const NoneLit&) { return Value{}; }

Value Interpreter::eval_node(const Expr&, const ListExpr& n) {
  auto list = make_list();
  list->items.reserve(n.items.size());
  for (const auto& item : n.items) list->items.push_back(eval(*item));
  return Value(list);
}

Value Interpreter::eval_node(const Expr&, const DictExpr& n) {
  auto map = make_map();
  for (const auto& [k, v] : n.entries) {
    Value key = eval(*k);
    if (!key.is_text()) {
      fault(FaultKind::TypeFault, k->span, "dict keys must be str, not " + std::string(type_name(key)));
    }
    map->set(key.as_text(), eval(*v));
  }
  return Value(map);
}

Value Interpreter::eval_node(const Expr& e, const NameExpr& n) {
  if (frame_) {
    if (const Value* v = frame_->locals.find(n.id)) return *v;
  }
  if (const Value* v = globals_.find(n.id)) return *v;
  if (auto it = builtins_.find(n.id); it != builtins_.end()) return it->second;
  fault(FaultKind::NameError, e.span, "name '" + n.id + "' is not defined");
}

Value Interpreter::eval_node(const Expr& e, const AttrExpr& n) {
  const Value object = eval(*n.object);
  return attribute(object, n.attr, e.span);
}

Value Interpreter::eval_node(const Expr& e, const CallExpr& n) {
  const Value callee = eval(*n.callee);
  CallArgs args;
  args.positional.reserve(n.args.size());
  for (const auto& a : n.args) args.positional.push_back(eval(*a));
  for (const auto& kw : n.keywords) args.keywords.emplace_back(kw.name, eval(*kw.value));
  return call(callee, args, e.span);
}

Value Interpreter::eval_node(const Expr& e, const IndexExpr& n) {
  const Value object = eval(*n.object);
  const Value key = eval(*n.index);
  return index(object, key, e.span);
}

Value Interpreter::eval_node(const Expr& e, const UnaryExpr& n) {
  const Value v = eval(*n.operand);
  if (n.op == UnaryOp::Not) return Value(!truthy(v));
  if (v.is_bool()) return Value(std::int64_t{v.as_bool() ? -1 : 0});
  if (v.is_int()) {
    if (v.as_int() == INT64_MIN) fault(FaultKind::TypeFault, e.span, "integer overflow");
    return Value(-v.as_int());
  }
  if (v.is_real()) return Value(-v.as_real());
  fault(FaultKind::TypeFault, e.span, "bad operand type for unary -: '" + std::string(type_name(v)) + "'");
}

Value Interpreter::eval_node(const Expr& e, const BinaryExpr& n) {
  const Value a = eval(*n.lhs);
  const Value b = eval(*n.rhs);
  return binary(n.op, a, b, e.span);
}

Value Interpreter::eval_node(const Expr& e, const CompareExpr& n) {
  Value lhs = eval(*n.first);
  for (const auto& [op, rhs_expr] : n.rest) {
    Value rhs = eval(*rhs_expr);
    bool ok = false;
    if (op == CompareOp::Eq) {
      ok = equal(lhs, rhs, e.span);
    } else if (op == CompareOp::Ne) {
      ok = !equal(lhs, rhs, e.span);
    } else {
      const int c = compare(lhs, rhs, e.span);
      switch (op) {
        case CompareOp::Lt: ok = c == -1; break;
        case CompareOp::Le: ok = c == -1 || c == 0; break;
        case CompareOp::Gt: ok = c == 1; break;
        case CompareOp::Ge: ok = c == 1 || c == 0; break;
        default: break;
      }
    }
    if (!ok) return Value(false);
    lhs = std::move(rhs);
  }
  return Value(true);
}

Value Interpreter::eval_node(const Expr&, const LogicExpr& n) {
  Value lhs = eval(*n.lhs);
  if (n.op == LogicOp::And) {
    if (!truthy(lhs)) return lhs;
  } else {
    if (truthy(lhs)) return lhs;
  }
  return eval(*n.rhs);
}

// -- arithmetic ----------------------------------------------------------------

namespace {

bool is_integral(const Value& v) { return v.is_int() || v.is_bool(); }
std::int64_t int_of(const Value& v) { return v.is_bool() ? v.as_bool() : v.as_int(); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

// divmod for doubles with the sign conventions of floor division.
std::pair<double, double> real_divmod(double vx, double wx) {
  double mod = std::fmod(vx, wx);
  double div = (vx - mod) / wx;
  if (mod != 0.0) {
    if ((wx < 0) != (mod < 0)) {
      mod += wx;
      div -= 1.0;
    }
  } else {
    mod = std::copysign(0.0, wx);
  }
  double floordiv;
  if (div != 0.0) {
    floordiv = std::floor(div);
    if (div - floordiv > 0.5) floordiv += 1.0;
  } else {
    floordiv = std::copysign(0.0, vx / wx);
  }
  return {floordiv, mod};
}

}  // namespace

Value Interpreter::binary(BinaryOp op, const Value& a, const Value& b, Span span) {
  auto type_error = [&](const char* sym) {
    fault(FaultKind::TypeFault, span,
          std::string("unsupported operand type(s) for ") + sym + ": '" + std::string(type_name(a)) +
              "' and '" + std::string(type_name(b)) + "'");
  };
  auto overflow = [&]() { fault(FaultKind::TypeFault, span, "integer overflow"); };

  // Sequence operations.
  if (op == BinaryOp::Add) {
    if (a.is_text() && b.is_text()) {
      const std::size_t size = a.as_text().size() + b.as_text().size();
      tick(span, static_cast<std::int64_t>(size / 16));
      return Value(a.as_text() + b.as_text());
    }
    if (a.is_list() && b.is_list()) {
      const auto& x = a.as_list()->items;
      const auto& y = b.as_list()->items;
      tick(span, static_cast<std::int64_t>(x.size() + y.size()));
      std::vector<Value> items;
      items.reserve(x.size() + y.size());
      items.insert(items.end(), x.begin(), x.end());
      items.insert(items.end(), y.begin(), y.end());
      return Value(make_list(std::move(items)));
    }
  }
  if (op == BinaryOp::Mul) {
    const Value* seq = nullptr;
    const Value* count = nullptr;
    if ((a.is_text() || a.is_list()) && is_integral(b)) {
      seq = &a;
      count = &b;
    } else if ((b.is_text() || b.is_list()) && is_integral(a)) {
      seq = &b;
      count = &a;
    }
    if (seq) {
      const std::int64_t n = std::max<std::int64_t>(0, int_of(*count));
      if (seq->is_text()) {
        const auto len = static_cast<std::int64_t>(seq->as_text().size());
        if (len > 0 && n > (remaining_steps() * 16) / len) {
          fault(FaultKind::StepBudgetExceeded, span, "step budget exhausted by string repetition");
        }
        tick(span, len * n / 16);
        std::string out;
        out.reserve(static_cast<std::size_t>(len * n));
        for (std::int64_t i = 0; i < n; ++i) out += seq->as_text();
        return Value(std::move(out));
      }
      const auto& items = seq->as_list()->items;
      const auto len = static_cast<std::int64_t>(items.size());
      if (len > 0 && n > remaining_steps() / len) {
        fault(FaultKind::StepBudgetExceeded, span, "step budget exhausted by list repetition");
      }
      tick(span, len * n);
      std::vector<Value> out;
      out.reserve(static_cast<std::size_t>(len * n));
      for (std::int64_t i = 0; i < n; ++i) out.insert(out.end(), items.begin(), items.end());
      return Value(make_list(std::move(out)));
    }
  }

  const char* sym = "?";
  switch (op) {
    case BinaryOp::Add: sym = "+"; break;
    case BinaryOp::Sub: sym = "-"; break;
    case BinaryOp::Mul: sym = "*"; break;
    case BinaryOp::Div: sym = "/"; break;
    case BinaryOp::FloorDiv: sym = "//"; break;
    case BinaryOp::Mod: sym = "%"; break;
    case BinaryOp::Pow: sym = "**"; break;
  }
  if (!a.is_number() || !b.is_number()) type_error(sym);

  if (is_integral(a) && is_integral(b)) {
    const std::int64_t x = int_of(a);
    const std::int64_t y = int_of(b);
    std::int64_t r = 0;
    switch (op) {
      case BinaryOp::Add:
        if (__builtin_add_overflow(x, y, &r)) overflow();
        return Value(r);
      case BinaryOp::Sub:
        if (__builtin_sub_overflow(x, y, &r)) overflow();
        return Value(r);
      case BinaryOp::Mul:
        if (__builtin_mul_overflow(x, y, &r)) overflow();
        return Value(r);
      case BinaryOp::Div:
        if (y == 0) fault(FaultKind::DivisionByZero, span, "division by zero");
        return Value(static_cast<double>(x) / static_cast<double>(y));
      case BinaryOp::FloorDiv:
        if (y == 0) fault(FaultKind::DivisionByZero, span, "integer division by zero");
        if (x == INT64_MIN && y == -1) overflow();
        return Value(floor_div(x, y));
      case BinaryOp::Mod:
        if (y == 0) fault(FaultKind::DivisionByZero, span, "integer modulo by zero");
        if (y == -1) return Value(std::int64_t{0});
        return Value(floor_mod(x, y));
      case BinaryOp::Pow: {
        if (y < 0) {
          if (x == 0) fault(FaultKind::DivisionByZero, span, "0 cannot be raised to a negative power");
          return Value(std::pow(static_cast<double>(x), static_cast<double>(y)));
        }
        std::int64_t result = 1;
        std::int64_t base = x;
        std::int64_t e = y;
        while (e > 0) {
          if (e & 1) {
            if (__builtin_mul_overflow(result, base, &result)) overflow();
          }
          e >>= 1;
          if (e > 0 && __builtin_mul_overflow(base, base, &base)) overflow();
        }
        return Value(result);
      }
    }
  }

  const double x = a.to_double();
  const double y = b.to_double();
  switch (op) {
    case BinaryOp::Add: return Value(x + y);
    case BinaryOp::Sub: return Value(x - y);
    case BinaryOp::Mul: return Value(x * y);
    case BinaryOp::Div:
      if (y == 0.0) fault(FaultKind::DivisionByZero, span, "float division by zero");
      return Value(x / y);
    case BinaryOp::FloorDiv:
      if (y == 0.0) fault(FaultKind::DivisionByZero, span, "float floor division by zero");
      return Value(real_divmod(x, y).first);
    case BinaryOp::Mod:
      if (y == 0.0) fault(FaultKind::DivisionByZero, span, "float modulo by zero");
      return Value(real_divmod(x, y).second);
    case BinaryOp::Pow: {
      if (x == 0.0 && y < 0.0) fault(FaultKind::DivisionByZero, span, "0.0 cannot be raised to a negative power");
      if (x < 0.0 && std::isfinite(y) && y != std::floor(y)) {
        fault(FaultKind::TypeFault, span, "negative number raised to a fractional power");
      }
      const double r = std::pow(x, y);
      if (std::isinf(r) && std::isfinite(x) && std::isfinite(y)) {
        fault(FaultKind::TypeFault, span, "numerical result out of range");
      }
      return Value(r);
    }
  }
  fault(FaultKind::TypeFault, span, std::string("unsupported operator ") + sym);
}

// -- indexing, attributes, calls -------------------------------------------------

Value Interpreter::index(const Value& object, const Value& key, Span span) {
  if (object.is_list() || object.is_text()) {
    if (!is_integral(key)) {
      fault(FaultKind::TypeFault, span,
            std::string(type_name(object)) + " indices must be integers, not " + std::string(type_name(key)));
    }
    std::int64_t i = int_of(key);
    const auto size = static_cast<std::int64_t>(object.is_list() ? object.as_list()->items.size()
                                                                 : object.as_text().size());
    if (i < 0) i += size;
    if (i < 0 || i >= size) {
      fault(FaultKind::IndexFault, span, std::string(type_name(object)) + " index out of range");
    }
    if (object.is_list()) return object.as_list()->items[static_cast<std::size_t>(i)];
    return Value(std::string(1, object.as_text()[static_cast<std::size_t>(i)]));
  }
  if (object.is_map()) {
    if (!key.is_text()) {
      fault(FaultKind::KeyFault, span, repr(key, span));
    }
    if (const Value* v = object.as_map()->find(key.as_text())) return *v;
    fault(FaultKind::KeyFault, span, repr(key, span));
  }
  fault(FaultKind::TypeFault, span, "'" + std::string(type_name(object)) + "' object is not subscriptable");
}

Value Interpreter::attribute(const Value& object, const std::string& name, Span span) {
  auto missing = [&]() {
    fault(FaultKind::TypeFault, span,
          "'" + std::string(type_name(object)) + "' object has no attribute '" + name + "'");
  };
  if (object.is_flow_handle()) return flow_method(*this, object.as_flow_handle(), name, span);
  if (object.is_builtin()) {
    if (object.as_builtin()->name == "chateda" && name == "chateda") return object;
    missing();
  }
  if (object.is_list()) {
    if (name != "append") missing();
    const ListPtr list = object.as_list();
    return Value(make_builtin("list.append", [list](Interpreter& in, CallArgs& args, Span sp) {
      if (args.positional.size() != 1 || !args.keywords.empty()) {
        in.fault(FaultKind::TypeFault, sp, "append() takes exactly one argument");
      }
      list->items.push_back(std::move(args.positional[0]));
      return Value{};
    }));
  }
  if (object.is_map()) {
    const MapPtr map = object.as_map();
    if (name == "get") {
      return Value(make_builtin("dict.get", [map](Interpreter& in, CallArgs& args, Span sp) {
        if (args.positional.empty() || args.positional.size() > 2 || !args.keywords.empty()) {
          in.fault(FaultKind::TypeFault, sp, "get() takes one or two arguments");
        }
        const Value& key = args.positional[0];
        if (key.is_text()) {
          if (const Value* v = map->find(key.as_text())) return *v;
        }
        return args.positional.size() == 2 ? args.positional[1] : Value{};
      }));
    }
    if (name == "keys" || name == "values" || name == "items") {
      return Value(make_builtin("dict." + name, [map, name](Interpreter& in, CallArgs& args, Span sp) {
        if (!args.positional.empty() || !args.keywords.empty()) {
          in.fault(FaultKind::TypeFault, sp, name + "() takes no arguments");
        }
        in.tick(sp, static_cast<std::int64_t>(map->entries.size()));
        auto out = make_list();
        for (const auto& [k, v] : map->entries) {
          if (name == "keys") {
            out->items.emplace_back(k);
          } else if (name == "values") {
            out->items.push_back(v);
          } else {
            out->items.emplace_back(make_list({Value(k), v}));
          }
        }
        return Value(out);
      }));
    }
    missing();
  }
  fault(FaultKind::TypeFault, span,
        "'" + std::string(type_name(object)) + "' object has no attribute '" + name + "'");
}

Value Interpreter::call(const Value& callee, CallArgs& args, Span span) {
  if (callee.is_function()) return call_function(callee.as_function(), args, span);
  if (callee.is_builtin()) {
    try {
      return callee.as_builtin()->fn(*this, args, span);
    } catch (const std::length_error& e) {
      fault(FaultKind::TypeFault, span, e.what());
    }
  }
  fault(FaultKind::TypeFault, span, "'" + std::string(type_name(callee)) + "' object is not callable");
}

Value Interpreter::call_function(const FunctionPtr& fn, CallArgs& args, Span span) {
  const DefStmt& def = *fn->def;
  if (call_depth_ >= limits_.max_call_depth) {
    fault(FaultKind::CallDepthExceeded, span,
          "maximum call depth of " + std::to_string(limits_.max_call_depth) + " exceeded");
  }
  const std::size_t nparams = def.params.size();
  if (args.positional.size() > nparams) {
    fault(FaultKind::TypeFault, span,
          def.name + "() takes " + std::to_string(nparams) + " positional arguments but " +
              std::to_string(args.positional.size()) + " were given");
  }
  std::vector<std::optional<Value>> slots(nparams);
  for (std::size_t i = 0; i < args.positional.size(); ++i) slots[i] = std::move(args.positional[i]);
  for (auto& [name, value] : args.keywords) {
    std::size_t i = 0;
    while (i < nparams && def.params[i].name != name) ++i;
    if (i == nparams) {
      fault(FaultKind::TypeFault, span, def.name + "() got an unexpected keyword argument '" + name + "'");
    }
    if (slots[i]) {
      fault(FaultKind::TypeFault, span, def.name + "() got multiple values for argument '" + name + "'");
    }
    slots[i] = std::move(value);
  }
  Frame frame;
  for (std::size_t i = 0; i < nparams; ++i) {
    if (!slots[i]) {
      if (!fn->has_default[i]) {
        fault(FaultKind::TypeFault, span,
              def.name + "() missing required argument '" + def.params[i].name + "'");
      }
      slots[i] = fn->defaults[i];
    }
    frame.locals.set(def.params[i].name, std::move(*slots[i]));
  }

  struct FrameGuard {
    Interpreter& in;
    Frame* saved;
    ~FrameGuard() {
      in.frame_ = saved;
      --in.call_depth_;
    }
  } guard{*this, frame_};
  frame_ = &frame;
  ++call_depth_;
  const Flow f = exec_block(def.body);
  if (f == Flow::Return) {
    Value r = std::move(return_value_);
    return_value_ = Value{};
    return r;
  }
  return Value{};
}

// -- results -------------------------------------------------------------------

ExecutionResult Interpreter::take_result(std::optional<RuntimeFault> fault) {
  ExecutionResult r;
  r.globals = std::move(globals_.entries);
  globals_.index.clear();
  r.trace = std::move(trace_);
  if (!output_.empty() && output_.back() == '\n') output_.pop_back();
  r.output = std::move(output_);
  r.fault = std::move(fault);
  r.steps = steps_;
  r.flow_runs = flow_runs_;
  for (const auto& h : handles_) {
    if (h->session) r.sessions.emplace(h->id, *h->session);
  }
  r.last_session_id = last_session_;
  r.tuning = std::move(tuning_);
  return r;
}

ExecutionResult interpret(const Program& program, const HostEnv& env, const RuntimeLimits& limits) {
  Interpreter in(env, limits);
  std::optional<RuntimeFault> fault;
  try {
    in.run(program);
  } catch (const RuntimeFault& f) {
    fault = f;
  }
  return in.take_result(std::move(fault));
}

}  // namespace edagent::miniscript
