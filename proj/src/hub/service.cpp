#include "edagent/hub/service.hpp"

#include <array>
#include <atomic>

#include <httplib.h>

#include "edagent/agent/errors.hpp"
#include "edagent/bench/dataset.hpp"
#include "edagent/bench/errors.hpp"
#include "edagent/bench/suite.hpp"
#include "edagent/hub/demo.hpp"
#include "edagent/miniscript/parser.hpp"

namespace edagent::hub {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 7> kEventNames = {"plan_ready",     "script_ready", "stage_started",
                                                          "stage_finished", "api_call",     "fault",
                                                          "run_finished"};

constexpr std::array<std::string_view, 6> kStateNames = {"planning", "scripting", "awaiting_approval",
                                                          "executing", "finished", "faulted"};

bool terminal(RunState s) { return s == RunState::Finished || s == RunState::Faulted; }

ordered_json entry_json(const miniscript::TraceEntry& e) { return miniscript::trace_to_json({e}).at(0); }

ordered_json fault_json(const agent::ReportFault& f) {
  return {{"phase", f.phase}, {"kind", f.kind}, {"message", f.message}, {"detail", f.detail}};
}

ordered_json plan_json(const agent::Plan& plan) {
  ordered_json j = agent::plan_to_json(plan);
  j["text"] = agent::serialize_plan(plan);
  return j;
}

}  // namespace

std::string_view event_kind_name(EventKind kind) { return kEventNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string_view run_state_name(RunState state) { return kStateNames[static_cast<std::size_t>(state)]; }

ordered_json event_to_json(const RunEvent& e) {
  return {{"seq", e.seq}, {"kind", event_kind_name(e.kind)}, {"payload", e.payload}, {"timestamp", e.timestamp_ms}};
}

RunEvent event_from_json(const ordered_json& doc) {
  RunEvent e;
  e.seq = doc.at("seq").get<std::int64_t>();
  const auto kind = event_kind_from_name(doc.at("kind").get<std::string>());
  if (!kind) throw HubError("unknown event kind " + doc.at("kind").dump());
  e.kind = *kind;
  e.payload = doc.at("payload");
  e.timestamp_ms = doc.at("timestamp").get<std::int64_t>();
  return e;
}

miniscript::ApiTrace trace_from_events(const std::vector<RunEvent>& events) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : events) {
    if (e.kind == EventKind::ApiCall) entries.push_back(e.payload.at("entry"));
  }
  return miniscript::trace_from_json(entries);
}

ordered_json run_status_to_json(const RunStatus& s) {
  return {{"session", s.session},
          {"run", s.run},
          {"requirement", s.requirement},
          {"auto_execute", s.auto_execute},
          {"state", run_state_name(s.state)},
          {"plan", s.plan ? ordered_json(*s.plan) : ordered_json(nullptr)},
          {"script", s.script ? ordered_json(*s.script) : ordered_json(nullptr)},
          {"error", s.error},
          {"events", s.events}};
}

// ---------------------------------------------------------------------------
// RunManager

struct RunManager::Run {
  std::string session;
  std::string id;
  agent::Requirement requirement;
  bool auto_execute = false;

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  RunState state = RunState::Planning;
  std::vector<RunEvent> events;
  std::optional<agent::SessionReport> report;
  std::string error;

  void push(EventKind kind, ordered_json payload) {
    events.push_back({static_cast<std::int64_t>(events.size()) + 1, kind, std::move(payload), now_ms()});
  }

  void emit(EventKind kind, ordered_json payload) {
    std::lock_guard lock(mu);
    push(kind, std::move(payload));
    cv.notify_all();
  }

  // run_finished and the terminal state become visible together.
  void finish(RunState s, ordered_json payload) {
    std::lock_guard lock(mu);
    push(EventKind::RunFinished, std::move(payload));
    state = s;
    cv.notify_all();
  }

  void set_state(RunState s) {
    std::lock_guard lock(mu);
    state = s;
    cv.notify_all();
  }

  RunStatus status() const {
    std::lock_guard lock(mu);
    RunStatus s{session, id, requirement.text, auto_execute, state, std::nullopt, std::nullopt, error,
                static_cast<std::int64_t>(events.size())};
    if (report && report->plan) s.plan = agent::serialize_plan(*report->plan);
    if (report && report->script) s.script = report->script;
    return s;
  }
};

namespace {

RunStatus stored_status(const StoredRun& r) {
  RunStatus s;
  s.session = r.session;
  s.run = r.run;
  s.requirement = r.report.requirement.text;
  s.auto_execute = true;
  s.state = r.report.faults.empty() ? RunState::Finished : RunState::Faulted;
  if (r.report.plan) s.plan = agent::serialize_plan(*r.report.plan);
  s.script = r.report.script;
  return s;
}

}  // namespace

RunManager::RunManager(std::shared_ptr<agent::Backend> backend, SessionStore& store, miniscript::RuntimeLimits limits,
                       const flowsim::Catalog& catalog)
    : backend_(std::move(backend)), store_(store), limits_(limits), catalog_(catalog) {}

RunManager::~RunManager() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
}

void RunManager::spawn(std::function<void()> fn) {
  std::lock_guard lock(mu_);
  threads_.emplace_back(std::move(fn));
}

std::string RunManager::create_session() { return store_.create_session(); }

std::shared_ptr<RunManager::Run> RunManager::find(const std::string& session, const std::string& run) const {
  std::lock_guard lock(mu_);
  auto it = runs_.find({session, run});
  if (it == runs_.end()) return nullptr;
  return it->second;
}

std::string RunManager::submit(const std::string& session, const std::string& text, bool auto_execute) {
  if (!store_.has_session(session)) throw NotFound("unknown session " + session);
  agent::Requirement requirement;
  try {
    requirement = agent::make_requirement(text);
  } catch (const agent::InvalidRequirement& e) {
    throw Unprocessable(e.what());
  }
  auto run = std::make_shared<Run>();
  run->session = session;
  run->id = store_.reserve_run(session);
  run->requirement = std::move(requirement);
  run->auto_execute = auto_execute;
  {
    std::lock_guard lock(mu_);
    runs_[{session, run->id}] = run;
  }
  spawn([this, run] { plan_and_script(run); });
  return run->id;
}

void RunManager::plan_and_script(const std::shared_ptr<Run>& run) {
  agent::PipelineHooks hooks;
  hooks.on_plan = [&](const agent::Plan& plan) {
    ordered_json payload = {{"plan", plan_json(plan)}, {"valid", !agent::plan_violation(plan).has_value()}};
    run->emit(EventKind::PlanReady, std::move(payload));
    run->set_state(RunState::Scripting);
  };
  hooks.on_script = [&](const std::string& script) {
    run->emit(EventKind::ScriptReady, {{"script", script}});
  };
  agent::SessionReport report;
  try {
    report = agent::prepare_run(run->requirement, *backend_, hooks);
  } catch (const std::exception& e) {
    {
      std::lock_guard lock(run->mu);
      run->error = e.what();
    }
    run->emit(EventKind::Fault, {{"phase", "infrastructure"}, {"kind", "BackendUnreachable"}, {"message", e.what()},
                                 {"detail", nullptr}});
    run->finish(RunState::Faulted, {{"state", "faulted"}, {"error", e.what()}});
    return;
  }
  for (const auto& f : report.faults) run->emit(EventKind::Fault, fault_json(f));

  const bool pause = report.script.has_value() && !run->auto_execute;
  {
    std::lock_guard lock(run->mu);
    run->report = std::move(report);
    run->state = pause ? RunState::AwaitingApproval : RunState::Executing;
    run->cv.notify_all();
  }
  if (!pause) execute(run);
}

void RunManager::approve(const std::string& session, const std::string& run_id,
                         const std::optional<std::string>& script) {
  auto run = find(session, run_id);
  if (!run) {
    if (store_.get(session, run_id)) throw Conflict("run " + run_id + " is not awaiting approval");
    throw NotFound("unknown run " + session + "/" + run_id);
  }
  {
    std::lock_guard lock(run->mu);
    if (run->state != RunState::AwaitingApproval) {
      throw Conflict("run " + run_id + " is " + std::string(run_state_name(run->state)) +
                     ", not awaiting_approval");
    }
    if (script) {
      try {
        agent::replace_script(*run->report, *script);
      } catch (const miniscript::SyntaxError& e) {
        throw Unprocessable(e.what());
      }
    }
    run->state = RunState::Executing;
    run->cv.notify_all();
  }
  spawn([this, run] { execute(run); });
}

void RunManager::execute(const std::shared_ptr<Run>& run) {
  agent::SessionReport report;
  {
    std::lock_guard lock(run->mu);
    report = *run->report;
  }
  miniscript::HostCallbacks callbacks;
  callbacks.on_api_start = [&](const std::string& api, int session, const ordered_json& args) {
    if (auto stage = flowsim::stage_for_api(api)) {
      run->emit(EventKind::StageStarted,
                {{"stage", flowsim::stage_name(*stage)}, {"api", api}, {"session", session}, {"args", args}});
    }
  };
  callbacks.on_api_call = [&](const miniscript::TraceEntry& entry) {
    run->emit(EventKind::ApiCall, {{"entry", entry_json(entry)}});
    if (!entry.ok) return;
    if (auto stage = flowsim::stage_for_api(entry.api)) {
      run->emit(EventKind::StageFinished, {{"stage", flowsim::stage_name(*stage)},
                                           {"api", entry.api},
                                           {"session", entry.session},
                                           {"metrics", entry.result}});
    }
  };
  agent::execute_run(report, limits_, miniscript::HostEnv{&catalog_, callbacks});
  for (const auto& f : report.faults) {
    if (f.phase == "execution") run->emit(EventKind::Fault, fault_json(f));
  }

  std::string store_error;
  try {
    store_.append({run->session, run->id, report.requirement.id, now_ms(), report});
  } catch (const StoreError& e) {
    store_error = e.what();
    run->emit(EventKind::Fault,
              {{"phase", "infrastructure"}, {"kind", "StoreError"}, {"message", e.what()}, {"detail", nullptr}});
  }
  const RunState final_state = report.faults.empty() && store_error.empty() ? RunState::Finished : RunState::Faulted;
  ordered_json payload = {{"state", run_state_name(final_state)},
                          {"metrics", report.metrics},
                          {"output", report.output},
                          {"flow_runs", report.flow_runs},
                          {"faults", report.faults.size()}};
  {
    std::lock_guard lock(run->mu);
    run->report = std::move(report);
    run->error = store_error;
  }
  run->finish(final_state, std::move(payload));
}

RunStatus RunManager::status(const std::string& session, const std::string& run_id) const {
  if (auto run = find(session, run_id)) return run->status();
  if (auto stored = store_.get(session, run_id)) return stored_status(*stored);
  throw NotFound("unknown run " + session + "/" + run_id);
}

std::vector<RunStatus> RunManager::runs(const std::string& session) const {
  if (!store_.has_session(session)) throw NotFound("unknown session " + session);
  std::map<std::string, RunStatus> out;
  for (const auto& r : store_.runs(session)) out[r.run] = stored_status(r);
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, run] : runs_) {
      if (key.first == session) out[key.second] = run->status();
    }
  }
  std::vector<RunStatus> list;
  for (auto& [_, s] : out) list.push_back(std::move(s));
  return list;
}

std::vector<RunEvent> RunManager::events_after(const std::string& session, const std::string& run_id,
                                               std::int64_t after, std::chrono::milliseconds wait) const {
  auto run = find(session, run_id);
  if (!run) {
    if (store_.get(session, run_id)) return {};
    throw NotFound("unknown run " + session + "/" + run_id);
  }
  std::unique_lock lock(run->mu);
  const auto ready = [&] { return static_cast<std::int64_t>(run->events.size()) > after || terminal(run->state); };
  if (wait.count() > 0) run->cv.wait_for(lock, wait, ready);
  std::vector<RunEvent> out;
  if (after < 0) after = 0;
  for (auto i = static_cast<std::size_t>(after); i < run->events.size(); ++i) out.push_back(run->events[i]);
  return out;
}

agent::SessionReport RunManager::report(const std::string& session, const std::string& run_id) const {
  if (auto run = find(session, run_id)) {
    std::lock_guard lock(run->mu);
    if (!terminal(run->state)) {
      throw Conflict("run " + run_id + " is " + std::string(run_state_name(run->state)));
    }
    if (!run->report) throw Conflict("run " + run_id + " failed before producing a report: " + run->error);
    return *run->report;
  }
  if (auto stored = store_.get(session, run_id)) return stored->report;
  throw NotFound("unknown run " + session + "/" + run_id);
}

RunState RunManager::wait_settled(const std::string& session, const std::string& run_id,
                                  std::chrono::milliseconds timeout) const {
  auto run = find(session, run_id);
  if (!run) return status(session, run_id).state;
  std::unique_lock lock(run->mu);
  run->cv.wait_for(lock, timeout,
                   [&] { return terminal(run->state) || run->state == RunState::AwaitingApproval; });
  return run->state;
}

// ---------------------------------------------------------------------------
// HTTP

struct HubServer::Impl {
  RunManager& manager;
  unsigned workers;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  Impl(RunManager& m, unsigned w) : manager(m), workers(w) { routes(); }

  static void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
  }

  static ordered_json body_object(const httplib::Request& req) {
    if (req.body.empty()) return ordered_json::object();
    ordered_json doc;
    try {
      doc = ordered_json::parse(req.body);
    } catch (const ordered_json::parse_error& e) {
      throw Unprocessable(std::string("malformed JSON body: ") + e.what());
    }
    if (!doc.is_object()) throw Unprocessable("body must be a JSON object");
    return doc;
  }

  template <typename Fn>
  static httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const NotFound& e) {
        send_error(res, 404, e.what());
      } catch (const Conflict& e) {
        send_error(res, 409, e.what());
      } catch (const Unprocessable& e) {
        send_error(res, 422, e.what());
      } catch (const bench::InvalidSuite& e) {
        send_error(res, 422, e.what());
      } catch (const bench::IoFailure& e) {
        send_error(res, 422, e.what());
      } catch (const bench::BenchError& e) {
        send_error(res, 422, e.what());
      } catch (const ordered_json::exception& e) {
        send_error(res, 422, e.what());
      } catch (const agent::BackendUnreachable& e) {
        send_error(res, 502, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  void stream_events(const httplib::Request& req, httplib::Response& res, const std::string& session,
                     const std::string& run) {
    std::int64_t after = 0;
    try {
      if (req.has_header("Last-Event-ID")) after = std::stoll(req.get_header_value("Last-Event-ID"));
      if (req.has_param("after")) after = std::stoll(req.get_param_value("after"));
    } catch (const std::exception&) {
      throw Unprocessable("event id must be an integer");
    }
    manager.status(session, run);  // 404 before the stream starts
    auto last = std::make_shared<std::int64_t>(after);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, session, run, last](std::size_t, httplib::DataSink& sink) {
      while (!stopping) {
        const auto events = manager.events_after(session, run, *last, std::chrono::milliseconds(250));
        bool finished = false;
        for (const auto& e : events) {
          const std::string frame = "id: " + std::to_string(e.seq) + "\nevent: " +
                                    std::string(event_kind_name(e.kind)) + "\ndata: " + event_to_json(e).dump() +
                                    "\n\n";
          if (!sink.write(frame.data(), frame.size())) return false;
          *last = e.seq;
          finished = finished || e.kind == EventKind::RunFinished;
        }
        if (finished || (events.empty() && terminal(manager.status(session, run).state))) {
          sink.done();
          return true;
        }
        if (!events.empty()) return true;
        if (!sink.is_writable()) return false;
      }
      sink.done();
      return true;
    });
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type, Last-Event-ID"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
                  send_json(res, 201, {{"id", manager.create_session()}});
                }));

    server.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
                 ordered_json list = ordered_json::array();
                 for (const auto& id : manager.store().sessions()) {
                   ordered_json runs = ordered_json::array();
                   for (const auto& s : manager.runs(id)) runs.push_back(run_status_to_json(s));
                   list.push_back({{"id", id}, {"runs", runs}});
                 }
                 send_json(res, 200, {{"sessions", list}});
               }));

    server.Get(R"(/api/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 ordered_json runs = ordered_json::array();
                 for (const auto& s : manager.runs(req.matches[1])) runs.push_back(run_status_to_json(s));
                 send_json(res, 200, {{"id", req.matches[1]}, {"runs", runs}});
               }));

    server.Post(R"(/api/sessions/([^/]+)/requirements)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string session = req.matches[1];
                  if (!manager.store().has_session(session)) throw NotFound("unknown session " + session);
                  const auto body = body_object(req);
                  if (!body.contains("text") || !body["text"].is_string()) {
                    throw Unprocessable("\"text\" must be a string");
                  }
                  bool auto_execute = false;
                  if (body.contains("auto_execute")) {
                    if (!body["auto_execute"].is_boolean()) throw Unprocessable("\"auto_execute\" must be a boolean");
                    auto_execute = body["auto_execute"].get<bool>();
                  }
                  const std::string run = manager.submit(session, body["text"].get<std::string>(), auto_execute);
                  send_json(res, 202, {{"session", session}, {"run", run}});
                }));

    server.Post(R"(/api/sessions/([^/]+)/runs/([^/]+)/approve)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_object(req);
                  std::optional<std::string> script;
                  if (body.contains("script") && !body["script"].is_null()) {
                    if (!body["script"].is_string()) throw Unprocessable("\"script\" must be a string");
                    script = body["script"].get<std::string>();
                  }
                  manager.status(req.matches[1], req.matches[2]);
                  manager.approve(req.matches[1], req.matches[2], script);
                  send_json(res, 202, run_status_to_json(manager.status(req.matches[1], req.matches[2])));
                }));

    server.Get(R"(/api/sessions/([^/]+)/runs/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, run_status_to_json(manager.status(req.matches[1], req.matches[2])));
               }));

    server.Get(R"(/api/sessions/([^/]+)/runs/([^/]+)/events)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 stream_events(req, res, req.matches[1], req.matches[2]);
               }));

    server.Get(R"(/api/sessions/([^/]+)/runs/([^/]+)/log)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 ordered_json list = ordered_json::array();
                 for (const auto& e : manager.events_after(req.matches[1], req.matches[2], 0)) {
                   list.push_back(event_to_json(e));
                 }
                 send_json(res, 200, list);
               }));

    server.Get(R"(/api/sessions/([^/]+)/runs/([^/]+)/report)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(agent::report_text(manager.report(req.matches[1], req.matches[2])),
                                 "application/json");
               }));

    server.Post("/api/suite", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_object(req);
                  std::vector<bench::EvalCase> suite;
                  if (!body.contains("suite") || body["suite"] == "builtin") {
                    suite = bench::builtin_suite();
                  } else if (body["suite"].is_object() || body["suite"].is_array()) {
                    suite = bench::suite_from_json(nlohmann::json::parse(body["suite"].dump()));
                  } else {
                    throw Unprocessable("\"suite\" must be \"builtin\" or a suite document");
                  }
                  const auto report = bench::run_suite(suite, manager.backend(), manager.limits(), workers);
                  send_json(res, 200, bench::suite_report_to_json(report));
                }));

    server.Post("/api/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_object(req);
                  const auto count = body.value("count", std::int64_t{1500});
                  const auto seed = body.value("seed", std::uint64_t{1});
                  if (count < 1 || count > 100000) throw Unprocessable("\"count\" must be in [1, 100000]");
                  const auto records = bench::generate_instructions(static_cast<std::size_t>(count), manager.backend(),
                                                                    seed, workers, manager.limits());
                  const auto validated =
                      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.validated; });
                  res.status = 200;
                  res.set_header("X-Validated", std::to_string(validated));
                  res.set_content(bench::to_jsonl(records), "application/x-ndjson");
                }));

    server.Get("/api/tune-demo", guarded([](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, tune_demo_to_json(tune_demo()));
               }));
  }
};

HubServer::HubServer(RunManager& manager, unsigned workers) : impl_(std::make_unique<Impl>(manager, workers)) {}

HubServer::~HubServer() { stop(); }

int HubServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw HubError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool HubServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void HubServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace edagent::hub
