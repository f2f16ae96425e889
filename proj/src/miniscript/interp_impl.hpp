#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "edagent/miniscript/interpreter.hpp"

namespace edagent::miniscript {

class Interpreter {
 public:
  Interpreter(const HostEnv& env, const RuntimeLimits& limits);

  /// Executes the program; throws RuntimeFault.
  void run(const Program& program);

  // -- services for builtins -------------------------------------------------

  [[noreturn]] void fault(FaultKind kind, Span span, std::string message) const;
  void tick(Span span, std::int64_t n = 1);
  std::int64_t remaining_steps() const noexcept { return limits_.max_steps - steps_; }
  /// Counts one flow-API call against max_flow_runs.
  void charge_flow_run(Span span);

  Value call(const Value& callee, CallArgs& args, Span span);
  std::string display(const Value& v, Span span);
  std::string repr(const Value& v, Span span);
  bool equal(const Value& a, const Value& b, Span span);
  /// -1, 0 or 1; TypeFault for unordered operand types.
  int compare(const Value& a, const Value& b, Span span);
  void emit(const std::string& text) { output_ += text; }

  void define_builtin(const std::string& name, BuiltinFn fn);

  const HostEnv& env() const noexcept { return env_; }
  const RuntimeLimits& limits() const noexcept { return limits_; }

  FlowHandlePtr new_handle();
  void record_trace(TraceEntry entry);
  void record_tuning(TuningRecord record) { tuning_.push_back(std::move(record)); }

  ExecutionResult take_result(std::optional<RuntimeFault> fault);

 private:
  enum class Flow { Normal, Break, Continue, Return };

  struct Frame {
    MapData locals;
  };

  Flow exec_block(const Block& block);
  Flow exec(const Stmt& stmt);
  Value eval(const Expr& expr);

  Value eval_node(const Expr& e, const IntLit& n);
  Value eval_node(const Expr& e, const RealLit& n);
  Value eval_node(const Expr& e, const StrLit& n);
  Value eval_node(const Expr& e, const BoolLit& n);
  Value eval_node(const Expr& e, const NoneLit& n);
  Value eval_node(const Expr& e, const ListExpr& n);
  Value eval_node(const Expr& e, const DictExpr& n);
  Value eval_node(const Expr& e, const NameExpr& n);
  Value eval_node(const Expr& e, const AttrExpr& n);
  Value eval_node(const Expr& e, const CallExpr& n);
  Value eval_node(const Expr& e, const IndexExpr& n);
  Value eval_node(const Expr& e, const UnaryExpr& n);
  Value eval_node(const Expr& e, const BinaryExpr& n);
  Value eval_node(const Expr& e, const CompareExpr& n);
  Value eval_node(const Expr& e, const LogicExpr& n);

  Value binary(BinaryOp op, const Value& a, const Value& b, Span span);
  Value attribute(const Value& object, const std::string& name, Span span);
  Value index(const Value& object, const Value& key, Span span);
  void assign(const Expr& target, Value value);
  void bind_name(const std::string& name, Value value);
  Value call_function(const FunctionPtr& fn, CallArgs& args, Span span);

  const HostEnv& env_;
  RuntimeLimits limits_;
  std::int64_t steps_ = 0;
  std::int64_t flow_runs_ = 0;
  int call_depth_ = 0;
  int next_handle_ = 1;

  MapData globals_;
  std::unordered_map<std::string, Value> builtins_;
  Frame* frame_ = nullptr;
  Value return_value_;

  std::string output_;
  ApiTrace trace_;
  std::vector<TuningRecord> tuning_;
  std::vector<FlowHandlePtr> handles_;
  std::optional<int> last_session_;
};

/// range, len, print, min, max, abs, str, int, float, round, sum.
void install_standard_builtins(Interpreter& in);
/// chateda() and tune().
void install_host_builtins(Interpreter& in);
/// Bound flow-API method of a chateda handle; TypeFault for unknown names.
Value flow_method(Interpreter& in, const FlowHandlePtr& handle, const std::string& name, Span span);

}  // namespace edagent::miniscript
