#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "edagent/agent/errors.hpp"
#include "edagent/bench/dataset.hpp"
#include "edagent/bench/errors.hpp"
#include "edagent/bench/suite.hpp"
#include "edagent/miniscript/parser.hpp"
#include "support/golden.hpp"

using namespace edagent::bench;
namespace agent = edagent::agent;
namespace ms = edagent::miniscript;

namespace {

agent::RuleBackend rule(const std::string& variant = "oracle") {
  agent::BackendConfig c;
  c.model = variant;
  return agent::RuleBackend(c);
}

class CannedBackend : public agent::Backend {
 public:
  explicit CannedBackend(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const std::vector<agent::Message>&) override { return reply_; }
  const agent::BackendConfig& config() const override { return config_; }

 private:
  std::string reply_;
  agent::BackendConfig config_;
};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("edagent_bench_" + name);
}

}  // namespace

TEST_CASE("builtin suite matches its generator and covers every category") {
  const auto& suite = builtin_suite();
  CHECK(suite_to_json(suite).dump() == suite_to_json(generate_suite()).dump());
  CHECK(suite.size() == 50);
  for (Category c : {Category::FullFlow, Category::GridSearch, Category::Tuning, Category::CustomOpt,
                     Category::Feedback}) {
    const auto n = std::count_if(suite.begin(), suite.end(), [&](const EvalCase& e) { return e.category == c; });
    CHECK(n >= 5);
  }
  for (const auto& t : golden::load()) {
    CAPTURE(t.number);
    const bool found = std::any_of(suite.begin(), suite.end(), [&](const EvalCase& e) {
      return e.requirement == t.requirement && category_name(e.category) == t.category;
    });
    CHECK(found);
  }
}

TEST_CASE("derived checks agree with the hand-written golden scripts") {
  // The golden scripts were written from the task texts, independently of
  // the check derivation; every check must hold on their traces.
  const auto tasks = golden::load();
  const auto& drafts = case_study_drafts();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CAPTURE(i + 1);
    REQUIRE(drafts[i].text == tasks[i].requirement);
    agent::SessionReport report;
    report.requirement = agent::make_requirement(tasks[i].requirement);
    report.plan = agent::plan_from_json({{"resume", false}, {"steps", nlohmann::ordered_json::array()}});
    for (std::size_t k = 0; k < tasks[i].plan_tools.size(); ++k) {
      report.plan->steps.push_back({static_cast<int>(k) + 1, *agent::tool_from_name(tasks[i].plan_tools[k]), "s"});
    }
    report.plan_valid = true;
    report.script = tasks[i].script;
    agent::execute_run(report);
    const EvalCase c{"t", drafts[i].category, drafts[i].text, derive_checks(drafts[i])};
    const GradeResult g = grade_case(c, report);
    for (const auto& r : g.reasons) MESSAGE(r);
    CHECK(g.grade == Grade::A);
  }
}

TEST_CASE("grading discrimination over the builtin suite") {
  const auto& suite = builtin_suite();

  auto oracle = rule();
  const SuiteReport a = run_suite(suite, oracle);
  for (const auto& c : a.cases) {
    CAPTURE(c.id);
    for (const auto& r : c.result.reasons) MESSAGE(r);
    CHECK(c.result.grade == Grade::A);
  }
  CHECK(a.percent(Grade::A) == 100.0);

  auto codegen = rule("broken-codegen");
  const SuiteReport b = run_suite(suite, codegen);
  CHECK(b.percent(Grade::B) >= 90.0);

  auto planner = rule("broken-planner");
  const SuiteReport c = run_suite(suite, planner);
  CHECK(c.percent(Grade::C, Category::FullFlow) == 100.0);

  SUBCASE("deterministic and independent of worker count") {
    auto again = rule();
    const SuiteReport a2 = run_suite(suite, again, {}, 1);
    CHECK(suite_report_to_json(a2).dump() == suite_report_to_json(a).dump());
    for (std::size_t i = 0; i < a.cases.size(); ++i) {
      CHECK(agent::report_text(a2.cases[i].report) == agent::report_text(a.cases[i].report));
    }
  }
}

TEST_CASE("grade_case tiers") {
  const auto& suite = builtin_suite();
  const EvalCase& task1 = suite.front();
  auto oracle = rule();
  const auto req = agent::make_requirement(task1.requirement);

  SUBCASE("A: valid plan, clean run, checks pass") {
    const auto g = grade_case(task1, agent::run_requirement(req, oracle));
    CHECK(g.grade == Grade::A);
    CHECK(g.reasons.empty());
  }
  SUBCASE("B: valid plan, script with a syntax error") {
    auto report = agent::prepare_run(req, oracle);
    report.script = "eda = chateda(\n";
    agent::execute_run(report);
    const auto g = grade_case(task1, report);
    CHECK(g.grade == Grade::B);
    REQUIRE_FALSE(g.reasons.empty());
    CHECK(g.reasons[0].find("SyntaxError") != std::string::npos);
  }
  SUBCASE("C: placement before floorplan") {
    CannedBackend bad("```plan\n1. setup: a\n2. synthesis: b\n3. placement: c\n4. floorplan: d\n```");
    const auto g = grade_case(task1, agent::run_requirement(req, bad));
    CHECK(g.grade == Grade::C);
    REQUIRE(g.reasons.size() == 1);
    CHECK(g.reasons[0].find("placement without floorplan") != std::string::npos);
  }
  SUBCASE("C: no plan") {
    CannedBackend prose("I cannot help with that.");
    CHECK(grade_case(task1, agent::run_requirement(req, prose)).grade == Grade::C);
  }
  SUBCASE("every failed check is listed") {
    EvalCase c = task1;
    c.checks.metric_predicates = {{"final", "area", Comparator::Less, 0.0},
                                  {"final", "power", Comparator::Less, 0.0},
                                  {"final", "area", Comparator::Greater, 0.0}};
    c.checks.forbidden_apis = std::vector<std::string>{"floorplan"};
    const auto g = grade_case(c, agent::run_requirement(req, oracle));
    CHECK(g.grade == Grade::B);
    CHECK(g.reasons.size() == 3);
  }
  SUBCASE("tolerated faults") {
    EvalCase c{"x", Category::FullFlow, "Run the complete flow for the design \"warp\" on \"asap7\" and report the area.",
               {}};
    c.checks.must_terminate_ok = false;
    c.checks.expected_api_subsequence = std::vector<std::string>{};
    const auto report = agent::run_requirement(agent::make_requirement(c.requirement), oracle);
    CHECK_FALSE(report.execution_ok());
    CHECK(grade_case(c, report).grade == Grade::A);
    c.checks.must_terminate_ok = true;
    CHECK(grade_case(c, report).grade == Grade::B);
  }
  SUBCASE("report for another requirement") {
    EvalCase other = task1;
    other.requirement = "something else";
    CHECK(grade_case(other, agent::run_requirement(req, oracle)).grade == Grade::C);
  }
}

TEST_CASE("property: grade monotonicity in the check set") {
  auto oracle = rule();
  auto codegen = rule("broken-codegen");
  const auto& suite = builtin_suite();
  std::vector<std::pair<EvalCase, agent::SessionReport>> pool;
  for (std::size_t i = 0; i < suite.size(); i += 5) {
    pool.emplace_back(suite[i], agent::run_requirement(agent::make_requirement(suite[i].requirement), oracle));
  }
  pool.emplace_back(suite[0], agent::run_requirement(agent::make_requirement(suite[0].requirement), codegen));

  const std::vector<MetricPredicate> predicates = {
      {"final", "area", Comparator::Greater, 0.0}, {"final", "area", Comparator::Less, 0.0},
      {"final", "wns", Comparator::GreaterEq, 0.0}, {"detail_route", "power", Comparator::LessEq, 1e9},
      {"cts", "tns", Comparator::Equal, 0.0},      {"synthesis", "area", Comparator::Greater, 1.0}};
  const std::vector<std::string> apis = {"setup", "run_synthesis", "floorplan", "final_report", "get_metric"};

  std::mt19937_64 rng(5);
  auto random_checks = [&] {
    CheckSet c;
    c.must_terminate_ok = rng() % 2 == 0;
    for (const auto& p : predicates) {
      if (rng() % 3 == 0) c.metric_predicates.push_back(p);
    }
    if (rng() % 2 == 0) {
      std::vector<std::string> seq;
      for (const auto& a : apis) {
        if (rng() % 2 == 0) seq.push_back(a);
      }
      c.expected_api_subsequence = seq;
    }
    if (rng() % 2 == 0) c.forbidden_apis = std::vector<std::string>{apis[rng() % apis.size()]};
    return c;
  };

  int removals = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const auto& [base_case, report] = pool[rng() % pool.size()];
    EvalCase full = base_case;
    full.checks = random_checks();
    const Grade g_full = grade_case(full, report).grade;
    EvalCase less = full;
    switch (rng() % 4) {
      case 0:
        if (less.checks.metric_predicates.empty()) continue;
        less.checks.metric_predicates.erase(less.checks.metric_predicates.begin() +
                                            static_cast<long>(rng() % less.checks.metric_predicates.size()));
        break;
      case 1:
        if (!less.checks.expected_api_subsequence) continue;
        less.checks.expected_api_subsequence.reset();
        break;
      case 2:
        if (!less.checks.forbidden_apis) continue;
        less.checks.forbidden_apis.reset();
        break;
      default:
        if (!less.checks.must_terminate_ok) continue;
        less.checks.must_terminate_ok = false;
        break;
    }
    ++removals;
    const Grade g_less = grade_case(less, report).grade;
    REQUIRE(static_cast<int>(g_less) >= static_cast<int>(g_full));
  }
  CHECK(removals > 1000);
}

TEST_CASE("suite documents") {
  const auto& suite = builtin_suite();
  CHECK(suite_from_json(nlohmann::json::parse(suite_to_json(suite).dump())) == suite);
  CHECK_THROWS_AS(validate_suite({}), InvalidSuite);
  auto dup = std::vector<EvalCase>{suite[0], suite[0]};
  CHECK_THROWS_AS(validate_suite(dup), InvalidSuite);
  EvalCase empty = suite[0];
  empty.checks = CheckSet{};
  empty.checks.must_terminate_ok = false;
  CHECK_THROWS_AS(validate_suite({empty}), InvalidSuite);
  auto oracle = rule();
  CHECK_THROWS_AS(run_suite({}, oracle), InvalidSuite);

  const auto path = temp_file("suite.json");
  std::ofstream(path) << suite_to_json({suite[3], suite[12]}).dump(2);
  CHECK(load_suite(path.string()).size() == 2);
  std::ofstream(path) << R"({"cases":[{"id":"a","category":"sorcery","requirement":"x","checks":{}}]})";
  CHECK_THROWS_AS(load_suite(path.string()), InvalidSuite);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_suite("/nonexistent/suite.json"), IoFailure);
  CHECK(load_suite("builtin").size() == 50);
}

TEST_CASE("generate_instructions") {
  auto oracle = rule();
  const auto records = generate_instructions(10, oracle, 7);
  REQUIRE(records.size() == 10);
  for (const auto& r : records) {
    CAPTURE(r.requirement);
    CHECK(r.validated);
    CHECK(r.origin == Origin::Generated);
  }
  CHECK(to_jsonl(generate_instructions(10, oracle, 7, 1)) == to_jsonl(records));
  CHECK(to_jsonl(generate_instructions(10, oracle, 8)) != to_jsonl(records));
  CHECK_THROWS_AS(generate_instructions(0, oracle, 7), BenchError);

  auto broken = rule("broken-codegen");
  for (const auto& r : generate_instructions(5, broken, 7)) {
    CHECK_FALSE(r.validated);
    CHECK_FALSE(r.plan.empty());
    CHECK(r.script.empty());
  }
  auto planner = rule("broken-planner");
  for (const auto& r : generate_instructions(5, planner, 7)) CHECK_FALSE(r.validated);
}

TEST_CASE("validator soundness over a generated dataset") {
  auto oracle = rule();
  const auto records = generate_instructions(300, oracle, 11);
  int validated = 0;
  for (const auto& r : records) {
    if (!r.validated) continue;
    ++validated;
    const ms::Program program = ms::parse(r.script);
    const auto result = ms::interpret(program);
    REQUIRE_MESSAGE(result.ok(), r.requirement);
  }
  CHECK(validated == 300);

  InstructionRecord bad = records[0];
  bad.script += "print(1 / 0)\n";
  CHECK(validate_record(bad).value_or("").starts_with("script faults: DivisionByZero"));
  bad = records[0];
  bad.plan = "```plan\n1. setup: a\n2. placement: b\n```";
  CHECK(validate_record(bad).value_or("").starts_with("plan invalid"));
  bad = records[0];
  bad.plan = "```plan\n1. setup: a\n2. synthesis: b\n3. floorplan: c\n```";
  bad.script = "eda = chateda()\neda.setup(design_name=\"gcd\", platform=\"asap7\")\n";
  CHECK(validate_record(bad) == std::optional<std::string>("trace does not follow the plan"));
}

TEST_CASE("jsonl persistence") {
  auto oracle = rule();
  auto records = generate_instructions(25, oracle, 3);
  records[4].origin = Origin::Manual;
  records[5].validated = false;
  records[6].requirement = "caf\xc3\xa9 \"quoted\"\nsecond line";
  const auto path = temp_file("records.jsonl");
  export_jsonl(records, path);
  CHECK(import_jsonl(path) == records);

  export_jsonl({}, path);
  CHECK(std::filesystem::file_size(path) == 0);
  CHECK(import_jsonl(path).empty());

  std::string text = to_jsonl(records);
  text.resize(text.size() - 20);
  const std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
  try {
    from_jsonl(text);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line() == lines);
  }
  CHECK_THROWS_AS(from_jsonl("{\"requirement\":\"x\"}\n"), MalformedLine);
  CHECK_THROWS_AS(import_jsonl(temp_file("missing.jsonl")), IoFailure);
  std::filesystem::remove(path);
}

TEST_CASE("render_training_sample") {
  auto oracle = rule();
  const auto records = generate_instructions(50, oracle, 21);
  for (const auto& r : records) {
    const TrainingSample s = render_training_sample(r);
    REQUIRE(s.response_start < s.response_end);
    const std::string response = utf8_slice(s.text, s.response_start, s.response_end);
    CHECK(agent::serialize_plan(agent::parse_plan(response)) == r.plan);
    CHECK(agent::extract_script(response) == r.script);
    CHECK(utf8_slice(s.text, 0, s.response_start) == r.requirement + "\n" + std::string(kDefaultSeparator) + "\n");
    CHECK(s.text.size() == s.response_end);  // ASCII
  }

  InstructionRecord r = records[0];
  r.requirement = "\xce\xb1\xce\xb2 design \"gcd\"";  // two 2-byte code points
  const TrainingSample s = render_training_sample(r, "<sep>");
  CHECK(s.response_start == r.requirement.size() - 2 + 7);
  CHECK(utf8_slice(s.text, s.response_start, s.response_end).starts_with("```plan\n"));
  CHECK(s.response_end == s.text.size() - 2);

  CHECK_THROWS_AS(render_training_sample(r, ""), BenchError);
  r.requirement = "contains <sep> inside";
  CHECK_THROWS_AS(render_training_sample(r, "<sep>"), BenchError);
  r.validated = false;
  CHECK_THROWS_AS(render_training_sample(r), BenchError);
}
