#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "edagent/agent/backend.hpp"
#include "edagent/agent/errors.hpp"
#include "edagent/agent/rule_backend.hpp"

namespace edagent::agent {

namespace {

constexpr std::string_view kDefaultPath = "/v1/chat/completions";

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

BackendConfig parse_backend_spec(const std::string& spec) {
  BackendConfig c;
  if (spec == "rule" || spec == "rule_based") return c;
  for (std::string_view prefix : {"rule:", "rule_based:"}) {
    if (spec.starts_with(prefix)) {
      c.model = spec.substr(prefix.size());
      RuleBackend check(c);
      return c;
    }
  }
  if (spec.starts_with("remote:")) {
    c.kind = BackendConfig::Kind::Remote;
    c.endpoint = spec.substr(7);
    c.model = "default";
    RemoteBackend check(c);
    return c;
  }
  throw ConfigError("unknown backend \"" + spec + "\" (expected rule, rule:<variant> or remote:<url>)");
}

std::string backend_label(const BackendConfig& config) {
  if (config.kind == BackendConfig::Kind::RuleBased) return "rule_based:" + config.model;
  return "remote:" + config.model;
}

BackendConfig backend_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("backend section must be an object");
  for (const char* forbidden : {"api_key", "secret", "token", "password", "key"}) {
    if (doc.contains(forbidden)) {
      throw ConfigError(std::string("backend section must not hold \"") + forbidden +
                        "\"; name an environment variable in \"auth\" instead");
    }
  }
  BackendConfig c;
  try {
    const std::string kind = doc.value("kind", std::string("rule_based"));
    if (kind == "rule_based" || kind == "rule") {
      c.kind = BackendConfig::Kind::RuleBased;
    } else if (kind == "remote") {
      c.kind = BackendConfig::Kind::Remote;
    } else {
      throw ConfigError("unknown backend kind \"" + kind + "\"");
    }
    c.endpoint = doc.value("endpoint", std::string());
    c.model = doc.value("model", c.kind == BackendConfig::Kind::RuleBased ? std::string("oracle") : std::string());
    c.auth_env = doc.value("auth", std::string());
    c.temperature = doc.value("temperature", 0.0);
    c.timeout = std::chrono::milliseconds(doc.value("timeout_ms", 30'000));
    c.max_retries = doc.value("max_retries", 2);
    c.backoff = std::chrono::milliseconds(doc.value("backoff_ms", 200));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("backend section: ") + e.what());
  }
  if (!(c.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (c.timeout.count() <= 0) throw ConfigError("timeout_ms must be positive");
  if (c.max_retries < 0 || c.max_retries > 10) throw ConfigError("max_retries must be in [0, 10]");
  if (c.backoff.count() < 0) throw ConfigError("backoff_ms must be >= 0");
  make_backend(c);
  return c;
}

nlohmann::ordered_json backend_config_to_json(const BackendConfig& c) {
  return {{"kind", c.kind == BackendConfig::Kind::RuleBased ? "rule_based" : "remote"},
          {"endpoint", c.endpoint},
          {"model", c.model},
          {"auth", c.auth_env},
          {"temperature", c.temperature},
          {"timeout_ms", c.timeout.count()},
          {"max_retries", c.max_retries},
          {"backoff_ms", c.backoff.count()}};
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendConfig::Kind::RuleBased) return std::make_shared<RuleBackend>(config);
  return std::make_shared<RemoteBackend>(config);
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint \"" + url + "\" has no scheme");
  const std::string proto = url.substr(0, scheme);
  if (proto != "http" && proto != "https") throw ConfigError("endpoint scheme must be http or https");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (proto == "https") throw ConfigError("this build has no TLS support; use an http endpoint");
#endif
  const std::size_t path = url.find('/', scheme + 3);
  base_ = url.substr(0, path);
  path_ = path == std::string::npos ? std::string(kDefaultPath) : url.substr(path);
  if (base_.size() <= scheme + 3) throw ConfigError("endpoint \"" + url + "\" has no host");
}

nlohmann::ordered_json RemoteBackend::request_body(const std::vector<Message>& messages) const {
  return {{"model", config_.model}, {"messages", messages_to_json(messages)}, {"temperature", config_.temperature}};
}

std::string RemoteBackend::complete(const std::vector<Message>& messages) {
  const std::string body = request_body(messages).dump();
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* secret = std::getenv(config_.auth_env.c_str());
    if (secret == nullptr || *secret == '\0') {
      throw BackendUnreachable("environment variable " + config_.auth_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + secret);
  }

  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendUnreachable("HTTP " + std::to_string(res->status) + " from " + base_ + path_);
    }
    try {
      const auto doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendUnreachable(std::string("malformed completion response: ") + e.what());
    }
  }
  throw BackendUnreachable(last_error + " after " + std::to_string(config_.max_retries + 1) + " attempts to " +
                           base_ + path_);
}

}  // namespace edagent::agent
