#include "edagent/agent/pipeline.hpp"

#include "edagent/agent/errors.hpp"
#include "edagent/miniscript/parser.hpp"

namespace edagent::agent {

namespace {

Plan request_plan(const Requirement& requirement, Backend& backend, Transcript* transcript) {
  const auto messages = build_prompt({api_doc(), requirement.text, std::nullopt, Role::Planning});
  const int attempts = backend.config().max_retries + 1;
  std::optional<PlanParseError> last;
  for (int i = 0; i < attempts; ++i) {
    std::string reply = backend.complete(messages);
    if (transcript != nullptr) {
      transcript->requests.push_back(messages);
      transcript->replies.push_back(reply);
    }
    try {
      return parse_plan(reply);
    } catch (const PlanParseError& e) {
      last = e;
    }
  }
  throw *last;
}

// Error text for a reply that does not carry a parseable script.
std::optional<std::string> script_problem(const std::string& reply, std::string& script) {
  auto body = extract_script(reply);
  if (!body) return std::string("no ```script block in reply");
  try {
    miniscript::parse(*body);
  } catch (const miniscript::SyntaxError& e) {
    return std::string(e.what());
  }
  script = std::move(*body);
  return std::nullopt;
}

nlohmann::ordered_json transcript_to_json(const Transcript& t) {
  nlohmann::ordered_json requests = nlohmann::ordered_json::array();
  for (const auto& r : t.requests) requests.push_back(messages_to_json(r));
  return {{"requests", std::move(requests)}, {"replies", t.replies}};
}

Transcript transcript_from_json(const nlohmann::ordered_json& doc) {
  Transcript t;
  for (const auto& r : doc.at("requests")) t.requests.push_back(messages_from_json(r));
  t.replies = doc.at("replies").get<std::vector<std::string>>();
  return t;
}

nlohmann::ordered_json tuning_to_json(const miniscript::TuningRecord& rec) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, value] : rec.result.best.params) params[name] = value;
  std::size_t failed = 0;
  for (const auto& t : rec.result.trials) failed += t.ok ? 0 : 1;
  return {{"axes", rec.axes},
          {"best_params", std::move(params)},
          {"objective", rec.result.best.objective.value_or(0.0)},
          {"best_index", rec.result.best_index},
          {"evaluations", rec.result.evaluations},
          {"failed", failed}};
}

void clear_execution(SessionReport& r) {
  r.executed = false;
  r.trace.clear();
  r.output.clear();
  r.metrics = nullptr;
  r.tuning = nlohmann::ordered_json::array();
  std::erase_if(r.faults, [](const ReportFault& f) { return f.phase == "execution"; });
  r.steps = 0;
  r.flow_runs = 0;
}

}  // namespace

bool SessionReport::execution_ok() const noexcept {
  if (!executed) return false;
  for (const auto& f : faults) {
    if (f.phase == "execution") return false;
  }
  return true;
}

Plan plan(const Requirement& requirement, Backend& backend, Transcript* transcript) {
  Plan p = request_plan(requirement, backend, transcript);
  validate_plan(p);
  return p;
}

std::string generate_script(const Requirement& requirement, const Plan& plan, Backend& backend,
                            Transcript* transcript) {
  validate_plan(plan);
  auto messages = build_prompt({api_doc(), requirement.text, plan, Role::Codegen});
  std::string reply = backend.complete(messages);
  if (transcript != nullptr) {
    transcript->requests.push_back(messages);
    transcript->replies.push_back(reply);
  }
  std::string script;
  auto problem = script_problem(reply, script);
  if (!problem) return script;

  messages.push_back({"assistant", reply});
  messages.push_back(repair_message(*problem));
  reply = backend.complete(messages);
  if (transcript != nullptr) {
    transcript->requests.push_back(messages);
    transcript->replies.push_back(reply);
  }
  problem = script_problem(reply, script);
  if (!problem) return script;
  throw ScriptRejected(*problem, reply);
}

SessionReport prepare_run(const Requirement& requirement, Backend& backend, const PipelineHooks& hooks) {
  SessionReport report;
  report.requirement = requirement;
  report.backend = backend_label(backend.config());
  report.api_doc_hash = api_doc_hash();

  try {
    report.plan = request_plan(requirement, backend, &report.planning);
  } catch (const PlanParseError& e) {
    report.faults.push_back({"planning", "PlanParseError", e.detail(), nullptr});
    return report;
  }
  if (auto v = plan_violation(*report.plan)) {
    report.faults.push_back({"planning", "PlanInvalid", *v, nullptr});
    if (hooks.on_plan) hooks.on_plan(*report.plan);
    return report;
  }
  report.plan_valid = true;
  if (hooks.on_plan) hooks.on_plan(*report.plan);

  try {
    report.script = generate_script(requirement, *report.plan, backend, &report.codegen);
  } catch (const ScriptRejected& e) {
    report.faults.push_back({"codegen", "ScriptRejected", e.detail(), nullptr});
    return report;
  }
  if (hooks.on_script) hooks.on_script(*report.script);
  return report;
}

void replace_script(SessionReport& report, const std::string& script) {
  miniscript::parse(script);
  report.script = script;
  report.script_edited = true;
  std::erase_if(report.faults, [](const ReportFault& f) { return f.phase == "codegen"; });
}

void execute_run(SessionReport& report, const miniscript::RuntimeLimits& limits, const miniscript::HostEnv& env) {
  clear_execution(report);
  if (!report.script) return;
  miniscript::Program program;
  try {
    program = miniscript::parse(*report.script);
  } catch (const miniscript::SyntaxError& e) {
    report.faults.push_back({"execution", "SyntaxError", e.what(), nullptr});
    return;
  }
  const miniscript::ExecutionResult r = miniscript::interpret(program, env, limits);
  report.executed = true;
  report.trace = r.trace;
  report.output = r.output;
  report.steps = r.steps;
  report.flow_runs = r.flow_runs;
  if (r.last_session_id) {
    const auto it = r.sessions.find(*r.last_session_id);
    if (it != r.sessions.end()) {
      const flowsim::StageId stage = it->second.current_stage();
      if (const auto& m = it->second.stage_metrics(stage)) {
        report.metrics = {{"stage", flowsim::stage_name(stage)},
                          {"area", m->area},
                          {"power", m->power},
                          {"wns", m->wns},
                          {"tns", m->tns}};
      }
    }
  }
  for (const auto& rec : r.tuning) report.tuning.push_back(tuning_to_json(rec));
  if (r.fault) {
    report.faults.push_back(
        {"execution", std::string(miniscript::fault_kind_name(r.fault->kind())), r.fault->message(), r.fault->to_json()});
  }
}

SessionReport run_requirement(const Requirement& requirement, Backend& backend, const miniscript::RuntimeLimits& limits,
                              const PipelineHooks& hooks, const flowsim::Catalog& catalog) {
  SessionReport report = prepare_run(requirement, backend, hooks);
  execute_run(report, limits, miniscript::HostEnv{&catalog, hooks.host});
  return report;
}

nlohmann::ordered_json report_to_json(const SessionReport& r) {
  nlohmann::ordered_json faults = nlohmann::ordered_json::array();
  for (const auto& f : r.faults) {
    faults.push_back({{"phase", f.phase}, {"kind", f.kind}, {"message", f.message}, {"detail", f.detail}});
  }
  nlohmann::ordered_json plan = nullptr;
  if (r.plan) {
    plan = plan_to_json(*r.plan);
    plan["text"] = serialize_plan(*r.plan);
  }
  return {{"requirement", {{"id", r.requirement.id}, {"text", r.requirement.text}}},
          {"backend", r.backend},
          {"api_doc_hash", r.api_doc_hash},
          {"planning", transcript_to_json(r.planning)},
          {"codegen", transcript_to_json(r.codegen)},
          {"plan", std::move(plan)},
          {"plan_valid", r.plan_valid},
          {"script", r.script ? nlohmann::ordered_json(*r.script) : nlohmann::ordered_json(nullptr)},
          {"script_edited", r.script_edited},
          {"executed", r.executed},
          {"trace", miniscript::trace_to_json(r.trace)},
          {"output", r.output},
          {"metrics", r.metrics},
          {"tuning", r.tuning},
          {"faults", std::move(faults)},
          {"steps", r.steps},
          {"flow_runs", r.flow_runs}};
}

SessionReport report_from_json(const nlohmann::ordered_json& doc) {
  SessionReport r;
  r.requirement.id = doc.at("requirement").at("id").get<std::string>();
  r.requirement.text = doc.at("requirement").at("text").get<std::string>();
  r.backend = doc.at("backend").get<std::string>();
  r.api_doc_hash = doc.at("api_doc_hash").get<std::string>();
  r.planning = transcript_from_json(doc.at("planning"));
  r.codegen = transcript_from_json(doc.at("codegen"));
  if (!doc.at("plan").is_null()) r.plan = plan_from_json(doc.at("plan"));
  r.plan_valid = doc.at("plan_valid").get<bool>();
  if (!doc.at("script").is_null()) r.script = doc.at("script").get<std::string>();
  r.script_edited = doc.at("script_edited").get<bool>();
  r.executed = doc.at("executed").get<bool>();
  r.trace = miniscript::trace_from_json(doc.at("trace"));
  r.output = doc.at("output").get<std::string>();
  r.metrics = doc.at("metrics");
  r.tuning = doc.at("tuning");
  for (const auto& f : doc.at("faults")) {
    r.faults.push_back({f.at("phase").get<std::string>(), f.at("kind").get<std::string>(),
                        f.at("message").get<std::string>(), f.at("detail")});
  }
  r.steps = doc.at("steps").get<std::int64_t>();
  r.flow_runs = doc.at("flow_runs").get<std::int64_t>();
  return r;
}

std::string report_text(const SessionReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::optional<std::string> audit_report(const SessionReport& report, const miniscript::RuntimeLimits& limits,
                                        const flowsim::Catalog& catalog) {
  SessionReport fresh = report;
  execute_run(fresh, limits, miniscript::HostEnv{&catalog, {}});
  if (fresh.executed != report.executed) return std::string("executed flag differs");
  const auto a = report_to_json(report);
  const auto b = report_to_json(fresh);
  for (const char* key : {"trace", "output", "metrics", "tuning", "faults", "steps", "flow_runs"}) {
    if (a.at(key).dump() != b.at(key).dump()) return std::string(key) + " differs on re-execution";
  }
  return std::nullopt;
}

}  // namespace edagent::agent
