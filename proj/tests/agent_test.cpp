#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "edagent/agent/errors.hpp"
#include "edagent/agent/pipeline.hpp"
#include "edagent/agent/rule_backend.hpp"
#include "edagent/miniscript/parser.hpp"
#include "support/golden.hpp"
#include "support/mock_llm.hpp"

using namespace edagent::agent;
namespace fs = edagent::flowsim;
namespace ms = edagent::miniscript;

namespace {

const std::string kRoutingExample = "Perform routing for the processor design on the asap7 platform.";

// Replies with canned text, recording what it was sent.
class CannedBackend : public Backend {
 public:
  explicit CannedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::vector<Message>& messages) override {
    seen.push_back(messages);
    const std::string r = replies_[std::min(calls_, replies_.size() - 1)];
    ++calls_;
    return r;
  }
  const BackendConfig& config() const override { return config_; }
  std::vector<std::vector<Message>> seen;

 private:
  std::vector<std::string> replies_;
  std::size_t calls_ = 0;
  BackendConfig config_;
};

std::vector<std::string> tools_of(const Plan& p) {
  std::vector<std::string> out;
  for (const auto& s : p.steps) out.emplace_back(tool_name(s.tool));
  return out;
}

Plan make_plan(std::vector<Tool> tools, bool resume = false) {
  Plan p;
  p.resume = resume;
  for (std::size_t i = 0; i < tools.size(); ++i) p.steps.push_back({static_cast<int>(i) + 1, tools[i], "step"});
  return p;
}

ms::ExecutionResult run_script(const std::string& src) {
  static std::vector<std::unique_ptr<ms::Program>> keep;
  keep.push_back(std::make_unique<ms::Program>(ms::parse(src)));
  return ms::interpret(*keep.back());
}

// Drives flowsim with a plan's symbolic call list. A resumed plan that reads
// metrics before its first stage step reads them from a session that was run
// to completion elsewhere.
bool replay_symbolic(const Plan& p, std::string& error) {
  const auto& catalog = fs::Catalog::builtin();
  std::optional<fs::FlowSession> session;
  const std::vector<std::string> metric = {"area"};
  try {
    for (const std::string& call : symbolic_calls(p)) {
      if (call == "setup") {
        session = fs::setup(catalog, "gcd", "nangate45");
      } else if (call == "get_metric") {
        if (!session) {
          if (!p.resume) throw std::runtime_error("get_metric without a session");
          session = fs::setup(catalog, "gcd", "nangate45");
          for (fs::StageId s : fs::kAllStages) {
            if (s != fs::StageId::Setup) fs::run_stage(*session, s);
          }
        }
        fs::get_metric(*session, fs::stage_name(session->current_stage()), metric);
      } else {
        if (!session) throw std::runtime_error(call + " without a session");
        fs::run_stage(*session, *fs::stage_for_api(call));
      }
    }
  } catch (const std::exception& e) {
    error = e.what();
    return false;
  }
  return true;
}

}  // namespace

TEST_CASE("build_prompt") {
  const auto tasks = golden::load();
  const PromptBundle planning{api_doc(), tasks[0].requirement, std::nullopt, Role::Planning};
  const auto msgs = build_prompt(planning);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].role == "system");
  CHECK(msgs[1].role == "user");
  CHECK(msgs[0].content.find(api_doc()) == 0);
  CHECK(msgs[0].content.find(kPlanningInstructions) != std::string::npos);
  CHECK(msgs[1].content == std::string(kRequirementHeader) + tasks[0].requirement);
  CHECK(build_prompt(planning) == msgs);
  CHECK(messages_to_json(build_prompt(planning)).dump() == messages_to_json(msgs).dump());

  CHECK_THROWS_AS(build_prompt({api_doc(), tasks[0].requirement, std::nullopt, Role::Codegen}), InvalidBundle);
  CHECK_THROWS_AS(build_prompt({api_doc(), "   ", std::nullopt, Role::Planning}), InvalidBundle);

  const Plan p = make_plan({Tool::Setup, Tool::Synthesis});
  const auto codegen = build_prompt({api_doc(), "x", p, Role::Codegen});
  CHECK(codegen[0].content.find(kCodegenInstructions) != std::string::npos);
  CHECK(codegen[1].content == std::string(kRequirementHeader) + "x" + std::string(kPlanHeader) + serialize_plan(p));
  CHECK(role_from_messages(codegen) == Role::Codegen);
  CHECK(role_from_messages(msgs) == Role::Planning);
  CHECK(requirement_from_messages(codegen) == "x");
}

TEST_CASE("requirements and the api document hash") {
  const Requirement a = make_requirement("run gcd");
  CHECK(a.id == make_requirement("run gcd").id);
  CHECK(a.id != make_requirement("run gcd ").id);
  CHECK(a.id.starts_with("req-"));
  CHECK_THROWS_AS(make_requirement(""), InvalidRequirement);
  CHECK_THROWS_AS(make_requirement(" \n\t"), InvalidRequirement);
  // Published FNV-1a 64 test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  CHECK(api_doc_hash() == "fnv1a64:" + fnv1a_hex(api_doc()));
  CHECK(api_doc().find("get_metric") != std::string::npos);
}

TEST_CASE("plan wire format") {
  const Plan p = make_plan({Tool::Setup, Tool::Synthesis, Tool::GetMetric});
  CHECK(parse_plan(serialize_plan(p)) == p);
  CHECK(parse_plan("Sure, here it is.\n" + serialize_plan(p) + "\nLet me know.") == p);
  Plan r = make_plan({Tool::Cts, Tool::GlobalRoute}, true);
  CHECK(parse_plan(serialize_plan(r)) == r);
  CHECK(plan_from_json(plan_to_json(r)) == r);

  CHECK_THROWS_AS(parse_plan("no plan here"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("```plan\n1. setup: a\n"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("```plan\n1. magic: a\n```"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("```plan\nsetup the design\n```"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("```plan\n```"), PlanParseError);
  try {
    parse_plan("garbage reply");
  } catch (const PlanParseError& e) {
    CHECK(e.raw() == "garbage reply");
  }
}

TEST_CASE("plan validation") {
  using T = Tool;
  CHECK_FALSE(plan_violation(make_plan({T::Setup, T::Synthesis, T::Floorplan, T::GetMetric})));
  CHECK(plan_violation(make_plan({T::Setup, T::Synthesis, T::Placement, T::Floorplan})) ==
        std::optional<std::string>("placement without floorplan"));
  CHECK(plan_violation(make_plan({T::Setup, T::Synthesis, T::Floorplan, T::Placement, T::Floorplan})) ==
        std::optional<std::string>("floorplan after placement"));
  CHECK(plan_violation(make_plan({T::Setup, T::Floorplan})) ==
        std::optional<std::string>("floorplan without synthesis"));
  CHECK(plan_violation(make_plan({T::GetMetric, T::Setup})).has_value());
  CHECK(plan_violation(Plan{}).has_value());
  Plan gap = make_plan({T::Setup, T::Synthesis});
  gap.steps[1].index = 3;
  CHECK(plan_violation(gap).has_value());

  CHECK_FALSE(plan_violation(make_plan({T::Cts, T::GlobalRoute}, true)));
  CHECK(plan_violation(make_plan({T::Cts, T::DetailRoute}, true)).has_value());
  CHECK_FALSE(plan_violation(make_plan({T::GetMetric}, true)));
  CHECK_THROWS_AS(validate_plan(make_plan({T::Setup, T::Placement})), PlanInvalid);
}

TEST_CASE("property: valid plans replay against flowsim") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> tool(0, 9);
  std::bernoulli_distribution coin(0.3);
  int valid = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    Plan p;
    p.resume = coin(rng);
    const int n = len(rng);
    // Half the plans follow the stage order with random skips so that valid
    // ones are common.
    if (trial % 2 == 0) {
      int next = p.resume ? tool(rng) % 7 : 0;
      for (int i = 0; i < n && next <= 9; ++i) {
        p.steps.push_back({i + 1, static_cast<Tool>(next), "s"});
        next += coin(rng) ? 2 : 1;
      }
    } else {
      for (int i = 0; i < n; ++i) p.steps.push_back({i + 1, static_cast<Tool>(tool(rng)), "s"});
    }
    if (plan_violation(p)) continue;
    ++valid;
    std::string error;
    INFO(serialize_plan(p));
    REQUIRE_MESSAGE(replay_symbolic(p, error), error);
    const auto calls = symbolic_calls(p);
    CHECK(trace_follows_plan(p, calls));
  }
  MESSAGE(valid << " valid plans replayed");
  CHECK(valid > 1000);
}

TEST_CASE("plan() with the rule backend") {
  RuleBackend backend(BackendConfig{});
  const auto tasks = golden::load();
  for (const auto& t : tasks) {
    CAPTURE(t.number);
    const Plan p = plan(make_requirement(t.requirement), backend);
    CHECK(tools_of(p) == t.plan_tools);
    CHECK_FALSE(p.resume);
  }

  const Plan routing = plan(make_requirement(kRoutingExample), backend);
  CHECK(tools_of(routing) == std::vector<std::string>{"setup", "synthesis", "floorplan", "placement", "cts",
                                                      "global_route", "detail_route"});
  CHECK_FALSE(routing.resume);
  const auto a = analyze_requirement(kRoutingExample);
  REQUIRE(a);
  CHECK(a->design == "ibex");
  CHECK(a->platform == "asap7");

  CHECK_THROWS_AS(plan(make_requirement("colorless green ideas sleep furiously"), backend), PlanParseError);
}

TEST_CASE("plan() re-queries unparseable replies") {
  const Plan good = make_plan({Tool::Setup, Tool::Synthesis});
  CannedBackend flaky({"nope", serialize_plan(good)});
  Transcript t;
  CHECK(plan(make_requirement("x"), flaky, &t) == good);
  CHECK(t.replies.size() == 2);

  CannedBackend hopeless({"nope"});
  CHECK_THROWS_AS(plan(make_requirement("x"), hopeless), PlanParseError);
  CHECK(hopeless.seen.size() == static_cast<std::size_t>(hopeless.config().max_retries + 1));

  CannedBackend invalid({serialize_plan(make_plan({Tool::Setup, Tool::Placement}))});
  CHECK_THROWS_AS(plan(make_requirement("x"), invalid), PlanInvalid);
}

TEST_CASE("golden scripts reproduce their recorded traces") {
  for (const auto& t : golden::load()) {
    CAPTURE(t.number);
    const auto r = run_script(t.script);
    REQUIRE(r.ok());
    CHECK(golden::trace_lines(r.trace) == t.trace_lines);
  }
}

TEST_CASE("generate_script matches the golden traces") {
  RuleBackend backend(BackendConfig{});
  for (const auto& t : golden::load()) {
    CAPTURE(t.number);
    const auto req = make_requirement(t.requirement);
    const auto start = std::chrono::steady_clock::now();
    const Plan p = plan(req, backend);
    const std::string script = generate_script(req, p, backend);
    const auto r = run_script(script);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE(r.ok());
    CHECK(golden::trace_lines(r.trace) == t.trace_lines);
    CHECK(trace_follows_plan(p, ms::extract_api_sequence(r.trace)));
    CHECK(secs < 1.0);
  }
}

TEST_CASE("Task 4 script tunes the three floorplan-to-cts knobs") {
  RuleBackend backend(BackendConfig{});
  const auto req = make_requirement(golden::load()[3].requirement);
  const std::string script = generate_script(req, plan(req, backend), backend);
  CHECK(script.find("def ") != std::string::npos);
  CHECK(script.find("tune(") != std::string::npos);
  const auto r = run_script(script);
  REQUIRE(r.ok());
  REQUIRE(r.tuning.size() == 1);
  CHECK(r.tuning[0].axes == std::vector<std::string>{"core_utilization", "density", "tns_end_percent"});
  CHECK(r.tuning[0].result.evaluations == 6 * 10 * 7);
}

TEST_CASE("generate_script repair round") {
  const Plan p = make_plan({Tool::Setup});
  CannedBackend prose({"I would rather describe it in words."});
  try {
    generate_script(make_requirement("x"), p, prose);
    FAIL("expected ScriptRejected");
  } catch (const ScriptRejected& e) {
    CHECK(e.raw() == "I would rather describe it in words.");
  }
  REQUIRE(prose.seen.size() == 2);
  CHECK(prose.seen[1].size() == 4);
  CHECK(prose.seen[1][2].role == "assistant");

  CannedBackend fixed({"```script\nx = (\n```", "```script\nx = 1\n```"});
  CHECK(generate_script(make_requirement("x"), p, fixed) == "x = 1\n");
  CHECK(fixed.seen[1].back().content.starts_with("The script was rejected: "));

  CHECK_THROWS_AS(generate_script(make_requirement("x"), make_plan({Tool::Placement}), fixed), PlanInvalid);
}

TEST_CASE("extract_script") {
  CHECK(extract_script("```script\nprint(1)\n```") == "print(1)\n");
  CHECK(extract_script("text\n```script\na = 1\n```\nmore ```script\nb\n```") == "a = 1\n");
  CHECK_FALSE(extract_script("```python\nprint(1)\n```"));
  CHECK_FALSE(extract_script("```script\nprint(1)\n"));
}

TEST_CASE("rule backend determinism") {
  const auto tasks = golden::load();
  std::vector<std::string> texts;
  for (const auto& t : tasks) texts.push_back(t.requirement);
  texts.push_back(kRoutingExample);
  texts.push_back("Run synthesis and placement for \"gcd\" on \"sky130\" and report the area.");
  for (const auto& text : texts) {
    CAPTURE(text);
    RuleBackend a(BackendConfig{});
    RuleBackend b(BackendConfig{});
    const auto req = make_requirement(text);
    const Plan pa = plan(req, a);
    const Plan pb = plan(req, b);
    CHECK(serialize_plan(pa) == serialize_plan(pb));
    CHECK(generate_script(req, pa, a) == generate_script(req, pb, b));
  }
}

TEST_CASE("rule backend variants") {
  const auto req = make_requirement(golden::load()[0].requirement);
  RuleBackend planner(parse_backend_spec("rule:broken-planner"));
  const auto report = run_requirement(req, planner);
  CHECK_FALSE(report.plan_valid);
  REQUIRE(report.faults.size() == 1);
  CHECK(report.faults[0].kind == "PlanInvalid");
  CHECK(report.faults[0].message == "floorplan without synthesis");

  RuleBackend codegen(parse_backend_spec("rule:broken-codegen"));
  const auto r2 = run_requirement(req, codegen);
  CHECK(r2.plan_valid);
  CHECK_FALSE(r2.script);
  REQUIRE(r2.faults.size() == 1);
  CHECK(r2.faults[0].kind == "ScriptRejected");
  CHECK(r2.codegen.replies.size() == 2);

  CHECK_THROWS_AS(parse_backend_spec("rule:nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_backend_spec("carrier-pigeon"), ConfigError);
}

TEST_CASE("run_requirement") {
  RuleBackend backend(BackendConfig{});
  const auto tasks = golden::load();

  SUBCASE("Task 1 runs clean with final metrics") {
    const auto r = run_requirement(make_requirement(tasks[0].requirement), backend);
    CHECK(r.has_valid_plan());
    CHECK(r.execution_ok());
    CHECK(r.faults.empty());
    REQUIRE(r.metrics.is_object());
    CHECK(r.metrics.at("stage") == "final");
    CHECK(r.backend == "rule_based:oracle");
    CHECK(r.api_doc_hash == api_doc_hash());
    CHECK(r.planning.requests.size() == 1);
    CHECK(r.codegen.requests.size() == 1);
    CHECK(r.output == "[48000.00000000001, 103.2]");
  }

  SUBCASE("Task 5 prints the smallest period with non-negative final wns") {
    const auto& catalog = fs::Catalog::builtin();
    int expect = 0;
    for (int period = 1; period <= 5 && expect == 0; ++period) {
      fs::FlowSession s = fs::setup(catalog, "leon", "asap7");
      fs::run_stage(s, fs::StageId::Synthesis, {{"clock_period", static_cast<double>(period)}});
      for (fs::StageId st : {fs::StageId::Floorplan, fs::StageId::Placement, fs::StageId::Cts,
                             fs::StageId::GlobalRoute, fs::StageId::DetailRoute, fs::StageId::Final}) {
        fs::run_stage(s, st);
      }
      if (s.stage_metrics(fs::StageId::Final)->wns >= 0.0) expect = period;
    }
    REQUIRE(expect != 0);
    const auto r = run_requirement(make_requirement(tasks[4].requirement), backend);
    CHECK(r.execution_ok());
    CHECK(r.output == std::to_string(expect));
  }

  SUBCASE("unknown design is captured as a flow fault") {
    const auto r = run_requirement(
        make_requirement("Run the complete flow for the design \"warp_drive\" on \"asap7\" and report the area."),
        backend);
    CHECK(r.has_valid_plan());
    CHECK(r.executed);
    REQUIRE(r.faults.size() == 1);
    CHECK(r.faults[0].phase == "execution");
    CHECK(r.faults[0].kind == "FlowError");
    CHECK(r.faults[0].detail.at("flow_error") == "UnknownDesign");
  }

  SUBCASE("gibberish is a planning fault") {
    const auto r = run_requirement(make_requirement("zxqv blorp"), backend);
    CHECK_FALSE(r.plan);
    REQUIRE(r.faults.size() == 1);
    CHECK(r.faults[0].kind == "PlanParseError");
    CHECK(r.planning.replies.size() == static_cast<std::size_t>(backend.config().max_retries + 1));
  }

  SUBCASE("hooks observe plan, script and api calls") {
    int plans = 0;
    int scripts = 0;
    int calls = 0;
    PipelineHooks hooks;
    hooks.on_plan = [&](const Plan&) { ++plans; };
    hooks.on_script = [&](const std::string&) { ++scripts; };
    hooks.host.on_api_call = [&](const ms::TraceEntry&) { ++calls; };
    const auto r = run_requirement(make_requirement(tasks[0].requirement), backend, {}, hooks);
    CHECK(plans == 1);
    CHECK(scripts == 1);
    CHECK(calls == static_cast<int>(r.trace.size()));
  }
}

TEST_CASE("operator edits") {
  RuleBackend backend(BackendConfig{});
  auto report = prepare_run(make_requirement(golden::load()[0].requirement), backend);
  REQUIRE(report.script);
  CHECK_THROWS_AS(replace_script(report, "x = ("), ms::SyntaxError);
  CHECK_FALSE(report.script_edited);
  replace_script(report, "print(6 * 7)\n");
  CHECK(report.script_edited);
  execute_run(report);
  CHECK(report.output == "42");
  CHECK(report.trace.empty());
}

TEST_CASE("audit completeness and report round trip") {
  RuleBackend backend(BackendConfig{});
  auto texts = std::vector<std::string>{};
  for (const auto& t : golden::load()) texts.push_back(t.requirement);
  texts.push_back("Run the complete flow for the design \"warp_drive\" on \"asap7\" and report the area.");
  texts.push_back("zxqv blorp");
  for (const auto& text : texts) {
    CAPTURE(text);
    const auto report = run_requirement(make_requirement(text), backend);
    CHECK_FALSE(audit_report(report));
    const auto restored = report_from_json(report_to_json(report));
    CHECK(report_text(restored) == report_text(report));
    CHECK_FALSE(audit_report(restored));
  }

  auto report = run_requirement(make_requirement(golden::load()[4].requirement), backend);
  report.output = "3";
  CHECK(audit_report(report) == std::optional<std::string>("output differs on re-execution"));
}

TEST_CASE("backend config") {
  const auto c = backend_config_from_json(nlohmann::json::parse(
      R"({"kind":"remote","endpoint":"http://localhost:9/v1/chat/completions","model":"m","auth":"MY_KEY","temperature":0.2,"timeout_ms":500,"max_retries":3,"backoff_ms":10})"));
  CHECK(c.kind == BackendConfig::Kind::Remote);
  CHECK(c.auth_env == "MY_KEY");
  CHECK(c.max_retries == 3);
  CHECK(backend_config_from_json(nlohmann::json::parse(backend_config_to_json(c).dump())).timeout == c.timeout);
  CHECK_THROWS_AS(backend_config_from_json(nlohmann::json::parse(R"({"kind":"remote","endpoint":"http://h","api_key":"sk-1"})")),
                  ConfigError);
  CHECK_THROWS_AS(backend_config_from_json(nlohmann::json::parse(R"({"temperature":-1})")), ConfigError);
  CHECK_THROWS_AS(backend_config_from_json(nlohmann::json::parse(R"({"kind":"remote","endpoint":"ftp://h"})")),
                  ConfigError);
  CHECK(backend_label(parse_backend_spec("rule")) == "rule_based:oracle");
}

TEST_CASE("remote backend against a local chat server") {
  const auto tasks = golden::load();

  SUBCASE("same plans, scripts and traces as the in-process backend") {
    mockllm::Server server;
    BackendConfig c = parse_backend_spec("remote:" + server.url());
    RemoteBackend remote(c);
    RuleBackend local(BackendConfig{});
    for (const auto& t : tasks) {
      CAPTURE(t.number);
      const auto req = make_requirement(t.requirement);
      const auto a = run_requirement(req, remote);
      const auto b = run_requirement(req, local);
      CHECK(serialize_plan(*a.plan) == serialize_plan(*b.plan));
      CHECK(a.script == b.script);
      CHECK(golden::trace_lines(a.trace) == golden::trace_lines(b.trace));
      CHECK(a.output == b.output);
    }
  }

  SUBCASE("request body and bearer token") {
    mockllm::Server server;
    BackendConfig c = parse_backend_spec("remote:" + server.url());
    c.auth_env = "EDAGENT_TEST_TOKEN";
    ::setenv("EDAGENT_TEST_TOKEN", "abc123", 1);
    RemoteBackend remote(c);
    const auto msgs = build_prompt({api_doc(), tasks[0].requirement, std::nullopt, Role::Planning});
    const auto body = remote.request_body(msgs);
    CHECK(body.at("model") == "default");
    CHECK(body.at("messages").size() == 2);
    CHECK(body.at("temperature") == 0.0);
    CHECK(parse_plan(remote.complete(msgs)).steps.size() == 9);
    CHECK(server.last_auth() == "Bearer abc123");
    ::unsetenv("EDAGENT_TEST_TOKEN");
    CHECK_THROWS_AS(remote.complete(msgs), BackendUnreachable);
  }

  SUBCASE("transient failures are retried") {
    mockllm::Server server("oracle", 2);
    BackendConfig c = parse_backend_spec("remote:" + server.url());
    c.backoff = std::chrono::milliseconds(1);
    RemoteBackend remote(c);
    const auto msgs = build_prompt({api_doc(), tasks[0].requirement, std::nullopt, Role::Planning});
    CHECK_NOTHROW(remote.complete(msgs));
    CHECK(server.requests() == 3);
  }

  SUBCASE("client errors are not retried") {
    mockllm::Server server("oracle", 0, 401);
    BackendConfig c = parse_backend_spec("remote:" + server.url());
    c.backoff = std::chrono::milliseconds(1);
    RemoteBackend remote(c);
    const auto msgs = build_prompt({api_doc(), "x", std::nullopt, Role::Planning});
    CHECK_THROWS_AS(remote.complete(msgs), BackendUnreachable);
    CHECK(server.requests() == 1);
  }

  SUBCASE("unreachable endpoint propagates from run_requirement") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    BackendConfig c = parse_backend_spec("remote:http://127.0.0.1:" + std::to_string(port));
    c.backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(500);
    RemoteBackend remote(c);
    CHECK_THROWS_AS(run_requirement(make_requirement(tasks[0].requirement), remote), BackendUnreachable);
  }

  SUBCASE("shared client under concurrent requests") {
    mockllm::Server server;
    RemoteBackend remote(parse_backend_spec("remote:" + server.url()));
    std::vector<std::string> outputs(10);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      threads.emplace_back([&, i] {
        outputs[i] = run_requirement(make_requirement(tasks[i % 5].requirement), remote).output;
      });
    }
    for (auto& th : threads) th.join();
    std::vector<std::string> expect;
    RuleBackend local(BackendConfig{});
    for (const auto& t : tasks) expect.push_back(run_requirement(make_requirement(t.requirement), local).output);
    for (std::size_t i = 0; i < outputs.size(); ++i) CHECK(outputs[i] == expect[i % 5]);
  }
}
