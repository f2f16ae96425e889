#pragma once

// Requirement -> plan -> script -> execution, with every artifact kept in a
// SessionReport.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edagent/agent/backend.hpp"
#include "edagent/agent/plan.hpp"
#include "edagent/agent/prompt.hpp"
#include "edagent/miniscript/interpreter.hpp"

namespace edagent::agent {

/// Messages sent and replies received for one pipeline stage.
struct Transcript {
  std::vector<std::vector<Message>> requests;
  std::vector<std::string> replies;
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Queries the backend for a plan; unparseable replies are re-queried up to
/// max_retries times. Throws PlanParseError, PlanInvalid, BackendUnreachable.
Plan plan(const Requirement& requirement, Backend& backend, Transcript* transcript = nullptr);

/// Returns a script that parses. A rejected reply gets one repair round.
/// Throws ScriptRejected, BackendUnreachable, PlanInvalid.
std::string generate_script(const Requirement& requirement, const Plan& plan, Backend& backend,
                            Transcript* transcript = nullptr);

struct ReportFault {
  std::string phase;  // "planning", "codegen" or "execution"
  std::string kind;   // PlanParseError, PlanInvalid, ScriptRejected, or a runtime fault kind
  std::string message;
  nlohmann::ordered_json detail;  // runtime fault JSON for execution faults, else null
  friend bool operator==(const ReportFault&, const ReportFault&) = default;
};

struct SessionReport {
  Requirement requirement;
  std::string backend;
  std::string api_doc_hash;
  Transcript planning;
  Transcript codegen;
  std::optional<Plan> plan;
  bool plan_valid = false;
  std::optional<std::string> script;
  bool script_edited = false;
  bool executed = false;
  miniscript::ApiTrace trace;
  std::string output;
  /// Latest stage metrics of the last session used, or null.
  nlohmann::ordered_json metrics;
  /// One entry per tune() call.
  nlohmann::ordered_json tuning = nlohmann::ordered_json::array();
  std::vector<ReportFault> faults;
  std::int64_t steps = 0;
  std::int64_t flow_runs = 0;

  /// Plan was produced and passed validation.
  bool has_valid_plan() const noexcept { return plan.has_value() && plan_valid; }
  bool execution_ok() const noexcept;
};

struct PipelineHooks {
  std::function<void(const Plan&)> on_plan;
  std::function<void(const std::string& script)> on_script;
  miniscript::HostCallbacks host;
};

/// Planning and script generation. Planning and codegen failures are
/// recorded as faults; only infrastructure errors propagate.
SessionReport prepare_run(const Requirement& requirement, Backend& backend, const PipelineHooks& hooks = {});

/// Replaces the pending script with an operator edit. Throws
/// miniscript::SyntaxError and leaves the report unchanged when it does not parse.
void replace_script(SessionReport& report, const std::string& script);

/// Executes report.script, recording trace, output, metrics and faults.
void execute_run(SessionReport& report, const miniscript::RuntimeLimits& limits = {},
                 const miniscript::HostEnv& env = {});

SessionReport run_requirement(const Requirement& requirement, Backend& backend,
                              const miniscript::RuntimeLimits& limits = {}, const PipelineHooks& hooks = {},
                              const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

nlohmann::ordered_json report_to_json(const SessionReport& report);
SessionReport report_from_json(const nlohmann::ordered_json& doc);
/// Canonical text form; equal reports give equal bytes.
std::string report_text(const SessionReport& report);

/// Re-executes the stored script and compares trace, output, metrics and
/// faults with the stored ones. Returns the first difference found.
std::optional<std::string> audit_report(const SessionReport& report, const miniscript::RuntimeLimits& limits = {},
                                        const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

}  // namespace edagent::agent
