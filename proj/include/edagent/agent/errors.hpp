#pragma once

#include <stdexcept>
#include <string>

namespace edagent::agent {

class AgentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendUnreachable : public AgentError {
 public:
  using AgentError::AgentError;
};

class InvalidRequirement : public AgentError {
 public:
  using AgentError::AgentError;
};

class InvalidBundle : public AgentError {
 public:
  using AgentError::AgentError;
};

class ConfigError : public AgentError {
 public:
  using AgentError::AgentError;
};

class PlanParseError : public AgentError {
 public:
  PlanParseError(const std::string& detail, std::string raw)
      : AgentError("PlanParseError: " + detail), detail_(detail), raw_(std::move(raw)) {}
  const std::string& detail() const noexcept { return detail_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string detail_;
  std::string raw_;
};

class PlanInvalid : public AgentError {
 public:
  explicit PlanInvalid(const std::string& constraint)
      : AgentError("PlanInvalid: " + constraint), constraint_(constraint) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class ScriptRejected : public AgentError {
 public:
  ScriptRejected(const std::string& detail, std::string raw)
      : AgentError("ScriptRejected: " + detail), detail_(detail), raw_(std::move(raw)) {}
  const std::string& detail() const noexcept { return detail_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string detail_;
  std::string raw_;
};

}  // namespace edagent::agent
