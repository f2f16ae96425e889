#include "edagent/agent/prompt.hpp"

#include <cstdint>
#include <cstdio>

#include "edagent/agent/errors.hpp"

namespace edagent::agent {

namespace detail {
extern const char* const kApiDocText;
}

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Requirement make_requirement(std::string text) {
  if (blank(text)) throw InvalidRequirement("requirement text is empty");
  Requirement r;
  r.id = "req-" + fnv1a_hex(text);
  r.text = std::move(text);
  return r;
}

const std::string& api_doc() {
  static const std::string doc = detail::kApiDocText;
  return doc;
}

const std::string& api_doc_hash() {
  static const std::string hash = "fnv1a64:" + fnv1a_hex(api_doc());
  return hash;
}

std::vector<Message> build_prompt(const PromptBundle& bundle) {
  if (blank(bundle.requirement)) throw InvalidBundle("requirement is empty");
  if (bundle.role == Role::Codegen && !bundle.plan) throw InvalidBundle("codegen bundle carries no plan");

  std::string system = bundle.api_doc;
  if (!system.empty() && system.back() != '\n') system += '\n';
  system += '\n';
  system += bundle.role == Role::Planning ? kPlanningInstructions : kCodegenInstructions;

  std::string user(kRequirementHeader);
  user += bundle.requirement;
  if (bundle.role == Role::Codegen) {
    user += kPlanHeader;
    user += serialize_plan(*bundle.plan);
  }
  return {{"system", std::move(system)}, {"user", std::move(user)}};
}

Message repair_message(const std::string& error) {
  return {"user", "The script was rejected: " + error + "\nReply with a corrected ```script block."};
}

std::optional<std::string> requirement_from_messages(const std::vector<Message>& messages) {
  for (const Message& m : messages) {
    if (m.role != "user") continue;
    std::string_view c = m.content;
    if (!c.starts_with(kRequirementHeader)) return std::nullopt;
    c.remove_prefix(kRequirementHeader.size());
    const std::size_t plan = c.find(kPlanHeader);
    if (plan != std::string_view::npos) c = c.substr(0, plan);
    return std::string(c);
  }
  return std::nullopt;
}

std::optional<Role> role_from_messages(const std::vector<Message>& messages) {
  for (const Message& m : messages) {
    if (m.role != "system") continue;
    if (m.content.ends_with(kPlanningInstructions)) return Role::Planning;
    if (m.content.ends_with(kCodegenInstructions)) return Role::Codegen;
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> extract_script(std::string_view reply) {
  std::size_t pos = 0;
  while (pos < reply.size()) {
    std::size_t eol = reply.find('\n', pos);
    if (eol == std::string_view::npos) eol = reply.size();
    std::string_view line = reply.substr(pos, eol - pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
    if (line == "```script") {
      const std::size_t body = eol + 1;
      if (body > reply.size()) return std::nullopt;
      // The block ends at the first line that is exactly a closing fence.
      std::size_t p = body;
      while (p <= reply.size()) {
        std::size_t e = reply.find('\n', p);
        if (e == std::string_view::npos) e = reply.size();
        std::string_view l = reply.substr(p, e - p);
        while (!l.empty() && (l.back() == ' ' || l.back() == '\r')) l.remove_suffix(1);
        if (l == "```") return std::string(reply.substr(body, p - body));
        if (e == reply.size()) break;
        p = e + 1;
      }
      return std::nullopt;
    }
    pos = eol + 1;
  }
  return std::nullopt;
}

nlohmann::ordered_json messages_to_json(const std::vector<Message>& messages) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Message& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

std::vector<Message> messages_from_json(const nlohmann::ordered_json& doc) {
  std::vector<Message> out;
  for (const auto& m : doc) out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  return out;
}

}  // namespace edagent::agent
