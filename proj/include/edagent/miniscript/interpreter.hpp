#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edagent/dse/dse.hpp"
#include "edagent/flowsim/flowsim.hpp"
#include "edagent/miniscript/ast.hpp"
#include "edagent/miniscript/value.hpp"

namespace edagent::miniscript {

struct RuntimeLimits {
  std::int64_t max_steps = 1'000'000;  // statement and expression evaluations
  int max_call_depth = 64;             // user-defined function frames
  std::int64_t max_flow_runs = 10'000; // flow-API method calls
};

enum class FaultKind {
  NameError,
  TypeFault,
  IndexFault,
  KeyFault,
  DivisionByZero,
  FlowError,
  StepBudgetExceeded,
  CallDepthExceeded,
};

std::string_view fault_kind_name(FaultKind kind);

class RuntimeFault : public std::runtime_error {
 public:
  RuntimeFault(FaultKind kind, Span span, std::string message,
               std::optional<flowsim::FlowError::Kind> flow_kind = std::nullopt);

  FaultKind kind() const noexcept { return kind_; }
  const Span& span() const noexcept { return span_; }
  const std::string& message() const noexcept { return message_; }
  /// Set when kind() == FlowError.
  std::optional<flowsim::FlowError::Kind> flow_kind() const noexcept { return flow_kind_; }

  nlohmann::ordered_json to_json() const;

 private:
  FaultKind kind_;
  Span span_;
  std::string message_;
  std::optional<flowsim::FlowError::Kind> flow_kind_;
};

/// One flow-API method call as the script made it.
struct TraceEntry {
  std::string api;                  // "setup", "run_synthesis", ..., "get_metric"
  int session = 0;                  // id of the chateda() handle
  nlohmann::ordered_json args;      // named arguments, positional ones resolved to names
  nlohmann::ordered_json result;    // stage metrics, metric values, or null
  bool ok = true;
  std::string error;                // FlowError text when !ok
  Span span;
};

using ApiTrace = std::vector<TraceEntry>;

std::vector<std::string> extract_api_sequence(const ApiTrace& trace);

nlohmann::ordered_json trace_to_json(const ApiTrace& trace);
ApiTrace trace_from_json(const nlohmann::ordered_json& doc);

/// Observers for flow-API calls. on_api_start fires before the engine runs,
/// on_api_call after, for failed calls too. Both run on the interpreting thread.
struct HostCallbacks {
  std::function<void(const std::string& api, int session, const nlohmann::ordered_json& args)>
      on_api_start;
  std::function<void(const TraceEntry& entry)> on_api_call;
};

struct HostEnv {
  const flowsim::Catalog* catalog = &flowsim::Catalog::builtin();
  HostCallbacks callbacks;
};

/// One tune() call made by the script.
struct TuningRecord {
  std::vector<std::string> axes;
  dse::TuneResult result;
  Span span;
};

struct ExecutionResult {
  /// Global variables at exit. Function values point into the Program.
  std::vector<std::pair<std::string, Value>> globals;
  ApiTrace trace;
  std::string output;  // print() lines joined with '\n'
  std::optional<RuntimeFault> fault;
  std::int64_t steps = 0;
  std::int64_t flow_runs = 0;
  /// Final state of every handle that ran setup(), by handle id.
  std::map<int, flowsim::FlowSession> sessions;
  /// Handle used by the most recent flow-API call.
  std::optional<int> last_session_id;
  std::vector<TuningRecord> tuning;

  bool ok() const noexcept { return !fault.has_value(); }
  const Value* global(std::string_view name) const;
};

/// Runs `program` with the standard builtins plus chateda() and tune().
/// Faults are reported in the result, never thrown. Each call builds a fresh
/// interpreter, so concurrent calls share nothing.
ExecutionResult interpret(const Program& program, const HostEnv& env = {},
                          const RuntimeLimits& limits = {});

/// Re-executes the successful entries of a trace against fresh sessions and
/// returns the final session per handle id.
std::map<int, flowsim::FlowSession> replay_trace(const ApiTrace& trace,
                                                 const flowsim::Catalog& catalog);

}  // namespace edagent::miniscript
