#pragma once

// Task plans: the numbered tool list produced by the planning call.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edagent/flowsim/flowsim.hpp"

namespace edagent::agent {

enum class Tool {
  Setup,
  Synthesis,
  Floorplan,
  Placement,
  Cts,
  GlobalRoute,
  DetailRoute,
  FinalReport,
  GetMetric,
  Tune,
};

std::string_view tool_name(Tool tool);
std::optional<Tool> tool_from_name(std::string_view name);
/// Flow stage a tool runs, if it is stage-typed.
std::optional<flowsim::StageId> tool_stage(Tool tool);

struct TaskStep {
  int index = 0;  // 1-based
  Tool tool = Tool::Setup;
  std::string description;
  friend bool operator==(const TaskStep&, const TaskStep&) = default;
};

struct Plan {
  std::vector<TaskStep> steps;
  /// The plan starts mid-flow on a session prepared elsewhere.
  bool resume = false;
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Wire form:
///   ```plan
///   resume            (optional)
///   1. setup: load the design
///   2. synthesis: ...
///   ```
std::string serialize_plan(const Plan& plan);

/// Reads the first ```plan block in `reply`; surrounding prose is ignored.
/// Throws PlanParseError.
Plan parse_plan(std::string_view reply);

/// Violated constraint, or nullopt for a valid plan.
std::optional<std::string> plan_violation(const Plan& plan);
/// Throws PlanInvalid.
void validate_plan(const Plan& plan);

/// Flow API calls a valid plan stands for, with the stages a resumed plan
/// takes for granted prepended.
std::vector<std::string> symbolic_calls(const Plan& plan);

/// Every stage-typed step's API appears in `apis` in plan order.
bool trace_follows_plan(const Plan& plan, const std::vector<std::string>& apis);

nlohmann::ordered_json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::ordered_json& doc);

}  // namespace edagent::agent
