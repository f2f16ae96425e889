#include "edagent/agent/plan.hpp"

#include <array>
#include <regex>
#include <set>

#include "edagent/agent/errors.hpp"

namespace edagent::agent {

namespace {

using flowsim::StageId;

constexpr std::array<std::string_view, 10> kToolNames = {
    "setup", "synthesis",    "floorplan",    "placement",  "cts",
    "global_route", "detail_route", "final_report", "get_metric", "tune"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view stage_label(StageId s) {
  return s == StageId::Final ? std::string_view("final_report") : flowsim::stage_name(s);
}

}  // namespace

std::string_view tool_name(Tool tool) { return kToolNames[static_cast<std::size_t>(tool)]; }

std::optional<Tool> tool_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kToolNames.size(); ++i) {
    if (kToolNames[i] == name) return static_cast<Tool>(i);
  }
  return std::nullopt;
}

std::optional<StageId> tool_stage(Tool tool) {
  switch (tool) {
    case Tool::Setup: return StageId::Setup;
    case Tool::Synthesis: return StageId::Synthesis;
    case Tool::Floorplan: return StageId::Floorplan;
    case Tool::Placement: return StageId::Placement;
    case Tool::Cts: return StageId::Cts;
    case Tool::GlobalRoute: return StageId::GlobalRoute;
    case Tool::DetailRoute: return StageId::DetailRoute;
    case Tool::FinalReport: return StageId::Final;
    default: return std::nullopt;
  }
}

std::string serialize_plan(const Plan& plan) {
  std::string out = "```plan\n";
  if (plan.resume) out += "resume\n";
  for (const TaskStep& s : plan.steps) {
    out += std::to_string(s.index) + ". " + std::string(tool_name(s.tool)) + ": " + s.description + "\n";
  }
  out += "```";
  return out;
}

Plan parse_plan(std::string_view reply) {
  static const std::regex kStep(R"(^(\d+)\.\s*([A-Za-z_]+)\s*:\s*(.*)$)");
  const auto lines = split_lines(reply);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]) != "```plan") ++i;
  if (i == lines.size()) throw PlanParseError("no ```plan block in reply", std::string(reply));

  Plan plan;
  bool closed = false;
  for (++i; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line == "```") {
      closed = true;
      break;
    }
    if (line.empty()) continue;
    if (line == "resume" && plan.steps.empty()) {
      plan.resume = true;
      continue;
    }
    std::cmatch m;
    if (!std::regex_match(line.begin(), line.end(), m, kStep)) {
      throw PlanParseError("malformed plan line \"" + std::string(line) + "\"", std::string(reply));
    }
    const auto tool = tool_from_name(m[2].str());
    if (!tool) throw PlanParseError("unknown tool \"" + m[2].str() + "\"", std::string(reply));
    TaskStep step;
    try {
      step.index = std::stoi(m[1].str());
    } catch (const std::exception&) {
      throw PlanParseError("step number out of range", std::string(reply));
    }
    step.tool = *tool;
    step.description = std::string(trim(m[3].str()));
    plan.steps.push_back(std::move(step));
  }
  if (!closed) throw PlanParseError("unterminated ```plan block", std::string(reply));
  if (plan.steps.empty()) throw PlanParseError("empty plan", std::string(reply));
  return plan;
}

std::optional<std::string> plan_violation(const Plan& plan) {
  if (plan.steps.empty()) return "plan has no steps";
  std::set<StageId> seen;
  std::optional<StageId> last;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const TaskStep& step = plan.steps[i];
    if (step.index != static_cast<int>(i) + 1) {
      return "step " + std::to_string(i + 1) + " is numbered " + std::to_string(step.index);
    }
    const auto stage = tool_stage(step.tool);
    if (!stage) {
      if (step.tool == Tool::GetMetric && !last && !plan.resume) {
        return "get_metric before any flow stage";
      }
      continue;
    }
    if (last && *stage <= *last) {
      return std::string(stage_label(*stage)) + " after " + std::string(stage_label(*last));
    }
    const auto pred = flowsim::predecessor(*stage);
    const bool first_of_resumed = plan.resume && !last;
    if (pred && !seen.contains(*pred) && !first_of_resumed) {
      return std::string(stage_label(*stage)) + " without " + std::string(stage_label(*pred));
    }
    seen.insert(*stage);
    last = stage;
  }
  return std::nullopt;
}

void validate_plan(const Plan& plan) {
  if (auto v = plan_violation(plan)) throw PlanInvalid(*v);
}

std::vector<std::string> symbolic_calls(const Plan& plan) {
  std::vector<std::string> calls;
  bool first = true;
  for (const TaskStep& step : plan.steps) {
    const auto stage = tool_stage(step.tool);
    if (stage) {
      if (first && plan.resume) {
        for (StageId s : flowsim::kAllStages) {
          if (s >= *stage) break;
          calls.emplace_back(flowsim::api_for_stage(s));
        }
      }
      first = false;
      calls.emplace_back(flowsim::api_for_stage(*stage));
    } else if (step.tool == Tool::GetMetric) {
      calls.emplace_back("get_metric");
    }
  }
  return calls;
}

bool trace_follows_plan(const Plan& plan, const std::vector<std::string>& apis) {
  std::size_t pos = 0;
  for (const TaskStep& step : plan.steps) {
    const auto stage = tool_stage(step.tool);
    if (!stage) continue;
    const std::string_view want = flowsim::api_for_stage(*stage);
    while (pos < apis.size() && apis[pos] != want) ++pos;
    if (pos == apis.size()) return false;
    ++pos;
  }
  return true;
}

nlohmann::ordered_json plan_to_json(const Plan& plan) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const TaskStep& s : plan.steps) {
    steps.push_back({{"index", s.index}, {"tool", tool_name(s.tool)}, {"description", s.description}});
  }
  return {{"resume", plan.resume}, {"steps", std::move(steps)}};
}

Plan plan_from_json(const nlohmann::ordered_json& doc) {
  Plan plan;
  plan.resume = doc.value("resume", false);
  for (const auto& s : doc.at("steps")) {
    const auto tool = tool_from_name(s.at("tool").get<std::string>());
    if (!tool) throw PlanParseError("unknown tool \"" + s.at("tool").get<std::string>() + "\"", doc.dump());
    plan.steps.push_back({s.at("index").get<int>(), *tool, s.at("description").get<std::string>()});
  }
  return plan;
}

}  // namespace edagent::agent
