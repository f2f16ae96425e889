#pragma once

// Hub configuration file:
//   {"backend": {...}, "bind": "127.0.0.1", "port": 8080, "data_dir": "edagent-data",
//    "limits": {"max_steps": N, "max_call_depth": N, "max_flow_runs": N}, "workers": 0}
// The backend section never holds a secret, only the name of the variable
// that does ("auth").

#include <filesystem>
#include <string>

#include <json.hpp>

#include "edagent/agent/backend.hpp"
#include "edagent/miniscript/interpreter.hpp"

namespace edagent::hub {

struct HubConfig {
  agent::BackendConfig backend;
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "edagent-data";
  miniscript::RuntimeLimits limits;
  unsigned workers = 0;  // suite and dataset threads, 0 = hardware concurrency
};

/// Throws agent::ConfigError.
HubConfig config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json config_to_json(const HubConfig& config);
/// Throws agent::ConfigError for unreadable or invalid files.
HubConfig load_config(const std::filesystem::path& path);

}  // namespace edagent::hub
