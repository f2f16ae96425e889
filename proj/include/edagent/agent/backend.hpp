#pragma once

// Completion backends: the offline rule table and a chat-completion client.

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "edagent/agent/prompt.hpp"

namespace edagent::agent {

struct BackendConfig {
  enum class Kind { Remote, RuleBased };

  Kind kind = Kind::RuleBased;
  std::string endpoint;  // remote: http(s)://host[:port][/path]
  /// Remote: model name sent with each request. Rule-based: variant, one of
  /// "oracle", "broken-codegen", "broken-planner".
  std::string model = "oracle";
  /// Name of the environment variable holding the bearer token.
  std::string auth_env;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 2;
  std::chrono::milliseconds backoff{200};  // first retry delay, doubled each time
};

/// "rule", "rule:<variant>", or "remote:<url>". Throws ConfigError.
BackendConfig parse_backend_spec(const std::string& spec);
/// Short label recorded in reports, e.g. "rule_based:oracle".
std::string backend_label(const BackendConfig& config);

/// Throws ConfigError on bad values or when the document carries a secret
/// instead of an environment variable name.
BackendConfig backend_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json backend_config_to_json(const BackendConfig& config);

class Backend {
 public:
  virtual ~Backend() = default;
  /// Reply text for a message sequence. Throws BackendUnreachable. Must be
  /// safe to call from several threads at once.
  virtual std::string complete(const std::vector<Message>& messages) = 0;
  virtual const BackendConfig& config() const = 0;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(BackendConfig config);
  std::string complete(const std::vector<Message>& messages) override;
  const BackendConfig& config() const override { return config_; }

  /// Request body sent for `messages`.
  nlohmann::ordered_json request_body(const std::vector<Message>& messages) const;

 private:
  BackendConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace edagent::agent
