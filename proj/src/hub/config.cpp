#include "edagent/hub/config.hpp"

#include <fstream>

#include "edagent/agent/errors.hpp"

namespace edagent::hub {

HubConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw agent::ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "backend" && key != "bind" && key != "port" && key != "data_dir" && key != "limits" &&
        key != "workers") {
      throw agent::ConfigError("unknown config key \"" + key + "\"");
    }
  }
  HubConfig c;
  if (doc.contains("backend")) c.backend = agent::backend_config_from_json(doc.at("backend"));
  try {
    c.bind = doc.value("bind", c.bind);
    c.port = doc.value("port", c.port);
    c.data_dir = doc.value("data_dir", c.data_dir.string());
    c.workers = doc.value("workers", 0u);
    if (doc.contains("limits")) {
      const auto& l = doc.at("limits");
      if (!l.is_object()) throw agent::ConfigError("limits must be an object");
      c.limits.max_steps = l.value("max_steps", c.limits.max_steps);
      c.limits.max_call_depth = l.value("max_call_depth", c.limits.max_call_depth);
      c.limits.max_flow_runs = l.value("max_flow_runs", c.limits.max_flow_runs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw agent::ConfigError(std::string("config: ") + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw agent::ConfigError("port must be in [0, 65535]");
  if (c.limits.max_steps <= 0 || c.limits.max_call_depth <= 0 || c.limits.max_flow_runs <= 0) {
    throw agent::ConfigError("limits must be positive");
  }
  return c;
}

nlohmann::ordered_json config_to_json(const HubConfig& c) {
  return {{"backend", agent::backend_config_to_json(c.backend)},
          {"bind", c.bind},
          {"port", c.port},
          {"data_dir", c.data_dir.string()},
          {"limits",
           {{"max_steps", c.limits.max_steps},
            {"max_call_depth", c.limits.max_call_depth},
            {"max_flow_runs", c.limits.max_flow_runs}}},
          {"workers", c.workers}};
}

HubConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw agent::ConfigError("cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw agent::ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace edagent::hub
