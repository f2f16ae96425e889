#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edagent/agent/plan.hpp"

namespace edagent::agent {

struct Requirement {
  std::string id;
  std::string text;
  friend bool operator==(const Requirement&, const Requirement&) = default;
};

/// id is "req-" followed by the FNV-1a hash of the text. Throws
/// InvalidRequirement for blank text.
Requirement make_requirement(std::string text);

std::string fnv1a_hex(std::string_view data);

/// The versioned API document compiled into the binary, and its hash.
const std::string& api_doc();
const std::string& api_doc_hash();

enum class Role { Planning, Codegen };

struct PromptBundle {
  std::string api_doc;
  std::string requirement;
  std::optional<Plan> plan;
  Role role = Role::Planning;
};

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
  friend bool operator==(const Message&, const Message&) = default;
};

inline constexpr std::string_view kPlanningInstructions =
    "You are the planning stage of an EDA flow agent. Break the user requirement into an "
    "ordered list of tool steps. Reply with one ```plan block.";
inline constexpr std::string_view kCodegenInstructions =
    "You are the script generation stage of an EDA flow agent. Write one script that carries "
    "out the plan with the API above. Reply with one ```script block.";
inline constexpr std::string_view kRequirementHeader = "Requirement:\n";
inline constexpr std::string_view kPlanHeader = "\n\nPlan:\n";

/// system: api doc + role instructions; user: requirement (+ plan for codegen).
/// Throws InvalidBundle for a codegen bundle without a plan or a blank
/// requirement.
std::vector<Message> build_prompt(const PromptBundle& bundle);

/// User turn asking for a corrected script after `error`.
Message repair_message(const std::string& error);

/// Requirement text carried by the first user message, if any.
std::optional<std::string> requirement_from_messages(const std::vector<Message>& messages);
std::optional<Role> role_from_messages(const std::vector<Message>& messages);

/// Body of the first ```script block in a reply.
std::optional<std::string> extract_script(std::string_view reply);

nlohmann::ordered_json messages_to_json(const std::vector<Message>& messages);
std::vector<Message> messages_from_json(const nlohmann::ordered_json& doc);

}  // namespace edagent::agent
