#pragma once

// Run manager and HTTP service. A run moves through
//   planning -> scripting -> [awaiting_approval] -> executing -> finished | faulted
// and publishes RunEvents in order. With auto_execute off the run stops after
// script_ready and creates no flow session until it is approved.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "edagent/agent/pipeline.hpp"
#include "edagent/hub/config.hpp"
#include "edagent/hub/store.hpp"

namespace edagent::hub {

class HubError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HTTP 404.
class NotFound : public HubError {
 public:
  using HubError::HubError;
};

/// HTTP 409.
class Conflict : public HubError {
 public:
  using HubError::HubError;
};

/// HTTP 422.
class Unprocessable : public HubError {
 public:
  using HubError::HubError;
};

enum class EventKind { PlanReady, ScriptReady, StageStarted, StageFinished, ApiCall, Fault, RunFinished };

std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> event_kind_from_name(std::string_view name);

struct RunEvent {
  std::int64_t seq = 0;  // 1-based, strictly increasing per run
  EventKind kind = EventKind::PlanReady;
  nlohmann::ordered_json payload;
  std::int64_t timestamp_ms = 0;
};

nlohmann::ordered_json event_to_json(const RunEvent& e);
RunEvent event_from_json(const nlohmann::ordered_json& doc);

/// Trace carried by a run's api_call events, in order.
miniscript::ApiTrace trace_from_events(const std::vector<RunEvent>& events);

enum class RunState { Planning, Scripting, AwaitingApproval, Executing, Finished, Faulted };

std::string_view run_state_name(RunState state);

struct RunStatus {
  std::string session;
  std::string run;
  std::string requirement;
  bool auto_execute = false;
  RunState state = RunState::Planning;
  std::optional<std::string> plan;    // serialized
  std::optional<std::string> script;  // pending or executed script
  std::string error;                  // infrastructure failure, if any
  std::int64_t events = 0;
};

nlohmann::ordered_json run_status_to_json(const RunStatus& s);

class RunManager {
 public:
  RunManager(std::shared_ptr<agent::Backend> backend, SessionStore& store, miniscript::RuntimeLimits limits = {},
             const flowsim::Catalog& catalog = flowsim::Catalog::builtin());
  ~RunManager();
  RunManager(const RunManager&) = delete;
  RunManager& operator=(const RunManager&) = delete;

  std::string create_session();
  /// Throws NotFound, Unprocessable (blank text).
  std::string submit(const std::string& session, const std::string& text, bool auto_execute);
  /// Starts execution of a run awaiting approval, optionally with an edited
  /// script. Throws NotFound, Conflict when the run is not awaiting approval,
  /// Unprocessable when the edited script does not parse (the run stays
  /// pending).
  void approve(const std::string& session, const std::string& run, const std::optional<std::string>& script);

  RunStatus status(const std::string& session, const std::string& run) const;
  std::vector<RunStatus> runs(const std::string& session) const;

  /// Events with seq > after. Waits up to `wait` for at least one when none
  /// is available and the run is still live.
  std::vector<RunEvent> events_after(const std::string& session, const std::string& run, std::int64_t after,
                                     std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;

  /// Report of a finished run. Throws NotFound, Conflict while the run is live
  /// or when it failed before producing one.
  agent::SessionReport report(const std::string& session, const std::string& run) const;

  /// Blocks until the run is terminal or awaiting approval.
  RunState wait_settled(const std::string& session, const std::string& run,
                        std::chrono::milliseconds timeout = std::chrono::seconds(60)) const;

  agent::Backend& backend() { return *backend_; }
  const miniscript::RuntimeLimits& limits() const noexcept { return limits_; }
  SessionStore& store() { return store_; }

 private:
  struct Run;

  std::shared_ptr<Run> find(const std::string& session, const std::string& run) const;
  void plan_and_script(const std::shared_ptr<Run>& run);
  void execute(const std::shared_ptr<Run>& run);
  void spawn(std::function<void()> fn);

  std::shared_ptr<agent::Backend> backend_;
  SessionStore& store_;
  miniscript::RuntimeLimits limits_;
  const flowsim::Catalog& catalog_;

  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<Run>> runs_;
  std::vector<std::thread> threads_;
};

/// HTTP/JSON front end over a RunManager, plus suite and dataset endpoints.
class HubServer {
 public:
  HubServer(RunManager& manager, unsigned workers = 0);
  ~HubServer();

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws HubError when binding fails.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edagent::hub
