#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "edagent/flowsim/flowsim.hpp"
#include "edagent/miniscript/interpreter.hpp"
#include "edagent/miniscript/parser.hpp"
#include "support/flow_seq.hpp"
#include "support/listings.hpp"
#include "support/script_gen.hpp"

using namespace edagent::miniscript;
namespace fs = edagent::flowsim;

namespace {

ExecutionResult run(const std::string& src, RuntimeLimits limits = {}) {
  static std::vector<std::unique_ptr<Program>> keep;  // function values point into programs
  keep.push_back(std::make_unique<Program>(parse(src)));
  return interpret(*keep.back(), HostEnv{}, limits);
}

FaultKind fault_of(const std::string& src) {
  auto r = run(src);
  REQUIRE_MESSAGE(r.fault.has_value(), src);
  return r.fault->kind();
}

std::string output_of(const std::string& src) {
  auto r = run(src);
  if (r.fault) FAIL(r.fault->what());
  return r.output;
}

// Independent evaluation of the cost model for the final stage.
double final_wns(double d0, double s, double clock, double u, double d, double p) {
  const double congestion = d > 0.85 ? 0.05 : 0.0;
  const double crit = d0 * s * (1 + 0.1 * u / 100) * (1 + 0.1 * (1 - d)) * (1 - 0.003 * p) * (1 + congestion);
  return clock - crit;
}

}  // namespace

TEST_CASE("arithmetic precedence in the parse tree") {
  Program p = parse("x = 1 + 2*3");
  REQUIRE(p.body.size() == 1);
  const auto& assign = std::get<AssignStmt>(p.body[0]->node);
  CHECK(std::get<NameExpr>(assign.target->node).id == "x");
  const auto& add = std::get<BinaryExpr>(assign.value->node);
  CHECK(add.op == BinaryOp::Add);
  CHECK(std::get<IntLit>(add.lhs->node).value == 1);
  const auto& mul = std::get<BinaryExpr>(add.rhs->node);
  CHECK(mul.op == BinaryOp::Mul);
  CHECK(std::get<IntLit>(mul.lhs->node).value == 2);
  CHECK(std::get<IntLit>(mul.rhs->node).value == 3);
  CHECK(output_of("x = 1 + 2*3\nprint(x)") == "7");
}

TEST_CASE("the customized-optimization listing has three top-level statements") {
  Program p = parse(listings::kTask4);
  CHECK(p.body.size() == 3);
  CHECK(std::holds_alternative<DefStmt>(p.body[0]->node));
  CHECK(std::holds_alternative<AssignStmt>(p.body[1]->node));
  CHECK(std::holds_alternative<ExprStmt>(p.body[2]->node));
  const auto& def = std::get<DefStmt>(p.body[0]->node);
  CHECK(def.name == "tuning_func");
  REQUIRE(def.params.size() == 3);
  CHECK(def.params[0].name == "core_utilization");
  CHECK(def.params[1].name == "density");
  CHECK(def.params[2].name == "tns_end_percent");
}

TEST_CASE("syntax errors report the first problem with its position") {
  try {
    parse("for x in:");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 1);
  }
  struct Case {
    const char* src;
    int line;
  };
  const Case cases[] = {
      {"x = (1 +\n", 1},
      {"if x:\nprint(1)", 2},
      {"x = 1\n  y = 2", 2},
      {"break", 1},
      {"def f():\n    pass\nreturn 1", 3},
      {"x = [i for i in xs]", 1},
      {"class A:\n    pass", 1},
      {"x = f\"{y}\"", 1},
      {"x = a[1:2]", 1},
      {"f(*args)", 1},
      {"x = lambda y: y", 1},
      {"try:\n    pass", 1},
      {"with x:\n    pass", 1},
      {"x += 1", 1},
      {"a, b = 1, 2", 1},
      {"1 = x", 1},
      {"x = 99999999999999999999", 1},
      {"s = 'abc", 1},
      {"x = 1\ny = )", 2},
  };
  for (const auto& c : cases) {
    try {
      parse(c.src);
      FAIL("accepted: " << c.src);
    } catch (const SyntaxError& e) {
      CHECK_MESSAGE(e.line() == c.line, c.src << " -> " << e.what());
    }
  }
}

TEST_CASE("every node carries a span into the source") {
  Program p = parse("a = 1\nif a:\n    b = [a,\n         2]\n");
  CHECK(p.body[0]->span == Span{1, 1});
  const auto& ifs = std::get<IfStmt>(p.body[1]->node);
  CHECK(p.body[1]->span == Span{2, 1});
  CHECK(ifs.cond->span == Span{2, 4});
  CHECK(ifs.then_body[0]->span == Span{3, 5});
  const auto& list = std::get<ListExpr>(std::get<AssignStmt>(ifs.then_body[0]->node).value->node);
  CHECK(list.items[1]->span == Span{4, 10});
}

TEST_CASE("imports parse and do nothing") {
  Program p = parse("import numpy as np\nfrom a.b import c, d\nx = 1");
  CHECK(std::get<ImportStmt>(p.body[0]->node).text == "import numpy as np");
  CHECK(std::get<ImportStmt>(p.body[1]->node).text == "from a.b import c, d");
  CHECK(output_of("import numpy as np\nprint(1)") == "1");
  CHECK(fault_of("import numpy as np\nx = np.arange(0, 1, 0.1)") == FaultKind::NameError);
}

TEST_CASE("loop accumulation prints the sum") {
  CHECK(output_of("t=0\nfor i in range(4):\n    t = t + i\nprint(t)") == "6");
}

TEST_CASE("numeric semantics") {
  CHECK(output_of("print(7 / 2, 6 / 3, 7 // 2, -7 // 2, 7 % 3, -7 % 3, 7 % -3)") == "3.5 2.0 3 -4 1 2 -2");
  CHECK(output_of("print(7.5 // 2, -7.5 % 2, 2 ** 10, 2 ** -1, 2.0 ** 0.5)") ==
        "3.0 0.5 1024 0.5 1.4142135623730951");
  CHECK(output_of("print(1 == 1.0, 1 < 1.5, True + 1, 0.1 + 0.2)") == "True True 2 0.30000000000000004");
  CHECK(output_of("print(1e16, 1e-5, 123456789.0, 0.0001, -0.0)") == "1e+16 1e-05 123456789.0 0.0001 -0.0");
  CHECK(output_of("print(3 < 4 < 5, 3 < 4 > 5, not 0, 0 or 'x', 2 and 3)") == "True False True x 3");
  CHECK(output_of("print(int('42'), float('2.5'), str(3), round(2.5), round(3.5), round(0.125, 2))") ==
        "42 2.5 3 2 4 0.12");
  CHECK(output_of("print(abs(-3), abs(-2.5), min(3, 1, 2), max([4, 9, 2]), len('abc'), sum([1, 2.5]))") ==
        "3 2.5 1 9 3 3.5");
  CHECK(fault_of("x = 1 / 0") == FaultKind::DivisionByZero);
  CHECK(fault_of("x = 1.0 / 0.0") == FaultKind::DivisionByZero);
  CHECK(fault_of("x = 5 // 0") == FaultKind::DivisionByZero);
  CHECK(fault_of("x = 5 % 0") == FaultKind::DivisionByZero);
  CHECK(fault_of("x = 9223372036854775807 + 1") == FaultKind::TypeFault);
  CHECK(fault_of("x = 2 ** 64") == FaultKind::TypeFault);
  CHECK(fault_of("x = 'a' + 1") == FaultKind::TypeFault);
  CHECK(fault_of("x = [1] < 'a'") == FaultKind::TypeFault);
}

TEST_CASE("containers, indexing and methods") {
  CHECK(output_of("xs = [1, 'a', None]\nxs.append([2])\nprint(xs, len(xs), xs[-1][0])") ==
        "[1, 'a', None, [2]] 4 2");
  CHECK(output_of("d = {'a': 1}\nd['b'] = 2.5\nprint(d, d.get('c', 0), d.keys(), d['b'])") ==
        "{'a': 1, 'b': 2.5} 0 ['a', 'b'] 2.5");
  CHECK(output_of("xs = [1]\nys = xs\nys.append(2)\nprint(xs + [3], [0] * 3, 'ab' * 2)") ==
        "[1, 2, 3] [0, 0, 0] abab");
  CHECK(output_of("xs = []\nxs.append(xs)\nprint(xs)") == "[[...]]");
  CHECK(output_of("for k in {'x': 1, 'y': 2}:\n    print(k)") == "x\ny");
  CHECK(fault_of("xs = [1]\nprint(xs[1])") == FaultKind::IndexFault);
  CHECK(fault_of("d = {}\nprint(d['k'])") == FaultKind::KeyFault);
  CHECK(fault_of("d = {1: 2}") == FaultKind::TypeFault);
  CHECK(fault_of("print(undefined_name)") == FaultKind::NameError);
  CHECK(fault_of("x = 3\nx()") == FaultKind::TypeFault);
  CHECK(fault_of("x = 3\nx.y = 1") == FaultKind::TypeFault);
}

TEST_CASE("functions bind arguments like the listings expect") {
  CHECK(output_of("def f(a, b=2):\n    return a * b\nprint(f(3), f(3, 4), f(b=5, a=1))") == "6 12 5");
  CHECK(output_of("def f():\n    pass\nprint(f())") == "None");
  CHECK(output_of("n = 1\ndef f():\n    n = 5\n    return n\nprint(f(), n)") == "5 1");
  CHECK(output_of("def fact(n):\n    if n <= 1:\n        return 1\n    return n * fact(n - 1)\nprint(fact(10))") ==
        "3628800");
  CHECK(fault_of("def f(a):\n    return a\nf()") == FaultKind::TypeFault);
  CHECK(fault_of("def f(a):\n    return a\nf(1, 2)") == FaultKind::TypeFault);
  CHECK(fault_of("def f(a):\n    return a\nf(b=1)") == FaultKind::TypeFault);
  CHECK(fault_of("def f(n):\n    return f(n)\nf(1)") == FaultKind::CallDepthExceeded);
}

TEST_CASE("step budget stops runaway programs") {
  RuntimeLimits limits;
  limits.max_steps = 1000;
  auto r = run("while True:\n    pass", limits);
  REQUIRE(r.fault.has_value());
  CHECK(r.fault->kind() == FaultKind::StepBudgetExceeded);
  CHECK(r.steps <= 1000);
  CHECK(r.fault->span() == Span{2, 5});

  CHECK(fault_of("xs = range(100000000000)") == FaultKind::StepBudgetExceeded);
  CHECK(fault_of("xs = [0] * 100000000000") == FaultKind::StepBudgetExceeded);
  CHECK(fault_of("s = 'ab'\nwhile True:\n    s = s + s") == FaultKind::StepBudgetExceeded);
}

TEST_CASE("faults carry the span of the offending node") {
  auto r = run("x = 1\ny = [1, 2]\nz = y[5]");
  REQUIRE(r.fault.has_value());
  CHECK(r.fault->kind() == FaultKind::IndexFault);
  CHECK(r.fault->span().line == 3);
  CHECK(r.fault->span().column == 6);
  CHECK(std::string(r.fault->what()).rfind("IndexFault(3:6)", 0) == 0);
}

TEST_CASE("performance evaluation listing yields the full-flow API sequence") {
  auto r = run(listings::kTask1);
  REQUIRE_MESSAGE(r.ok(), (r.fault ? r.fault->what() : ""));
  const std::vector<std::string> expected = {"setup",     "run_synthesis", "floorplan",
                                             "placement", "cts",           "global_route",
                                             "detail_route", "final_report", "get_metric"};
  CHECK(extract_api_sequence(r.trace) == expected);
  CHECK(extract_api_sequence({}).empty());
  CHECK(r.trace[2].args["core_utilization"] == 60);
  CHECK(r.trace[0].args["design_name"] == "leo");
  const Value* perf = r.global("final_performance");
  REQUIRE(perf);
  REQUIRE(perf->is_list());
  CHECK(perf->as_list()->items.size() == 2);
}

TEST_CASE("grid search listing repeats the per-point block 27 times") {
  auto r = run(listings::kTask2);
  REQUIRE_MESSAGE(r.ok(), (r.fault ? r.fault->what() : ""));
  const auto seq = extract_api_sequence(r.trace);
  REQUIRE(seq.size() == 27 * 9);
  for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i] == seq[i % 9]);
  CHECK(seq[0] == "setup");
  CHECK(seq[8] == "get_metric");
  CHECK(r.output == "27");
  CHECK(r.trace[0].args["verilog"] == "how.v");
  CHECK(r.sessions.size() == 27);
  // Single-metric requests come back as scalars.
  const Value* tns = r.global("tns");
  REQUIRE(tns);
  CHECK(tns->is_real());
}

TEST_CASE("clock period minimization prints the first period with non-negative slack") {
  const auto& leon = fs::Catalog::builtin().design("leon");
  const auto& asap7 = fs::Catalog::builtin().platform("asap7");
  int expected = 0;
  for (int t : {1, 2, 3, 4, 5}) {
    if (final_wns(leon.base_crit_path, asap7.scale, t, 70, 0.7, 50) >= 0) {
      expected = t;
      break;
    }
  }
  CHECK(expected == 1);
  auto r = run(listings::kTask5);
  REQUIRE_MESSAGE(r.ok(), (r.fault ? r.fault->what() : ""));
  CHECK(r.output == std::to_string(expected));
}

TEST_CASE("tune drives the grid and returns the best point") {
  auto r = run(listings::kTask3);
  REQUIRE_MESSAGE(r.ok(), (r.fault ? r.fault->what() : ""));
  REQUIRE(r.tuning.size() == 1);
  CHECK(r.tuning[0].result.evaluations == 245);
  CHECK(r.trace.size() == 245 * 9);
  CHECK(r.tuning[0].axes == std::vector<std::string>{"core_utilization", "density", "tns_end_percent"});

  // Brute force over the same grid with the engine directly.
  double best = INFINITY;
  for (int u = 60; u <= 90; u += 5) {
    for (int k = 0; k <= 6; ++k) {
      for (int p = 30; p <= 50; p += 5) {
        const double d = 0.6 + 0.05 * k;
        auto s = fs::setup(fs::Catalog::builtin(), "gcd", "sky130");
        fs::run_stage(s, fs::StageId::Synthesis, {{"clock_period", 0.74}});
        fs::run_stage(s, fs::StageId::Floorplan, {{"core_utilization", double(u)}});
        fs::run_stage(s, fs::StageId::Placement, {{"density", d}});
        fs::run_stage(s, fs::StageId::Cts, {{"tns_end_percent", double(p)}});
        fs::run_stage(s, fs::StageId::GlobalRoute);
        fs::run_stage(s, fs::StageId::DetailRoute);
        fs::final_report(s);
        const auto m = *s.stage_metrics(fs::StageId::Final);
        best = std::min(best, m.area * m.power);
      }
    }
  }
  CHECK(*r.tuning[0].result.best.objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("tune faults") {
  // A list-valued objective fails every trial.
  auto r = run(
      "def f(x):\n    return [x, x]\n"
      "tune(f, {'x': {'minmax': [1, 3], 'step': 1}})");
  REQUIRE(r.fault.has_value());
  CHECK(r.fault->kind() == FaultKind::TypeFault);
  CHECK(r.fault->message().find("NoSuccessfulTrial") != std::string::npos);

  // Parameters arrive as keywords with integer type when the axis is integral.
  CHECK(output_of("def f(a, b):\n    return a * 10 + b\n"
                  "r = tune(func=f, param={'a': {'minmax': [1, 2], 'step': 1}, 'b': {'minmax': [0.5, 1.5], 'step': 0.5}})\n"
                  "print(r)") == "{'params': {'a': 1, 'b': 0.5}, 'objective': 10.5, 'evaluations': 6}");

  // Trials that fault are skipped.
  CHECK(output_of("def f(x):\n    return 10 / (x - 2)\n"
                  "r = tune(f, {'x': {'minmax': [1, 3], 'step': 1}})\nprint(r['params']['x'])") == "1");

  CHECK(fault_of("tune(3, {})") == FaultKind::TypeFault);
  CHECK(fault_of("def f(x):\n    return x\ntune(f, {'x': {'minmax': [3, 1], 'step': 1}})") == FaultKind::TypeFault);
}

TEST_CASE("flow-API faults wrap engine errors") {
  auto r = run("eda = chateda()\neda.run_synthesis()");
  REQUIRE(r.fault.has_value());
  CHECK(r.fault->kind() == FaultKind::FlowError);
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::StageOrderViolation);
  REQUIRE(r.trace.size() == 1);
  CHECK_FALSE(r.trace[0].ok);

  r = run("eda = chateda.chateda()\neda.setup('gcd', 'sky130')\neda.placement()");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::StageOrderViolation);
  r = run("eda = chateda()\neda.setup('nosuch', 'sky130')");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::UnknownDesign);
  r = run("eda = chateda()\neda.setup('gcd', 'sky130')\neda.run_synthesis(clock_period=-1)");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::ParamOutOfRange);
  r = run("eda = chateda()\neda.setup('gcd', 'sky130')\neda.run_synthesis(speed=1)");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::UnknownParameter);
  r = run("eda = chateda()\neda.setup('gcd', 'sky130')\nx = eda.get_metric('final', ['area'])");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::StageNotRun);
  r = run("eda = chateda()\neda.setup('gcd', 'sky130')\neda.run_synthesis()\nx = eda.get_metric('synth', ['slew'])");
  CHECK(r.fault->flow_kind() == fs::FlowError::Kind::UnknownMetric);
  CHECK(fault_of("eda = chateda()\neda.launch()") == FaultKind::TypeFault);

  RuntimeLimits limits;
  limits.max_flow_runs = 3;
  r = run("eda = chateda()\neda.setup('gcd', 'sky130')\nwhile True:\n    eda.run_synthesis()", limits);
  CHECK(r.fault->kind() == FaultKind::StepBudgetExceeded);
  CHECK(r.fault->message() == "flow run budget exhausted");
  CHECK(r.flow_runs == 3);
}

TEST_CASE("host callbacks see every flow call") {
  Program p = parse(listings::kTask1);
  std::vector<std::string> started;
  std::vector<std::string> finished;
  HostEnv env;
  env.callbacks.on_api_start = [&](const std::string& api, int, const nlohmann::ordered_json&) {
    started.push_back(api);
  };
  env.callbacks.on_api_call = [&](const TraceEntry& e) { finished.push_back(e.api); };
  auto r = interpret(p, env);
  CHECK(r.ok());
  CHECK(started == extract_api_sequence(r.trace));
  CHECK(finished == started);
}

TEST_CASE("trace json round trip") {
  auto r = run(listings::kTask1);
  const auto j = trace_to_json(r.trace);
  const auto back = trace_from_json(j);
  CHECK(trace_to_json(back) == j);
}

// ---------------------------------------------------------------------------
// Properties

TEST_CASE("property: parse-print-parse preserves structure") {
  for (const char* src : listings::kAll) {
    Program a = parse(src);
    const std::string text = unparse(a);
    Program b = parse(text);
    CHECK(same_structure(a, b));
    CHECK(unparse(b) == text);
  }
  scriptgen::Generator gen(7);
  for (int i = 0; i < 1000; ++i) {
    const std::string src = gen.program();
    Program a = parse(src);
    const std::string text = unparse(a);
    Program b;
    try {
      b = parse(text);
    } catch (const SyntaxError& e) {
      FAIL("reparse failed: " << e.what() << "\n" << text);
    }
    CHECK_MESSAGE(same_structure(a, b), src);
    CHECK(unparse(b) == text);
  }
}

TEST_CASE("property: interpretation terminates within the step budget") {
  scriptgen::Generator gen(11);
  RuntimeLimits limits;
  limits.max_steps = 20'000;
  limits.max_call_depth = 32;
  for (int i = 0; i < 1000; ++i) {
    const std::string src = gen.program();
    Program p = parse(src);
    auto r = interpret(p, HostEnv{}, limits);
    CHECK_MESSAGE(r.steps <= limits.max_steps, src);
  }
}

TEST_CASE("property: replaying the trace reproduces the final engine state") {
  for (const char* src : listings::kAll) {
    Program p = parse(src);
    auto r = interpret(p);
    REQUIRE(r.ok());
    const auto replayed = replay_trace(r.trace, fs::Catalog::builtin());
    CHECK(replayed.size() == r.sessions.size());
    for (const auto& [id, session] : r.sessions) {
      REQUIRE(replayed.count(id));
      CHECK(replayed.at(id) == session);
    }
  }
}

TEST_CASE("property: concurrent runs of one program are identical") {
  Program p = parse(listings::kTask2);
  ExecutionResult a;
  ExecutionResult b;
  std::thread ta([&] { a = interpret(p); });
  std::thread tb([&] { b = interpret(p); });
  ta.join();
  tb.join();
  CHECK(a.output == b.output);
  CHECK(trace_to_json(a.trace) == trace_to_json(b.trace));
  CHECK(a.steps == b.steps);
  CHECK(a.sessions == b.sessions);
}

TEST_CASE("property: scripts stop at exactly the first out-of-order flow call") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const flowseq::Case c = flowseq::random_case(rng);
    auto r = run(c.script);
    if (c.first_failure == c.calls) {
      CHECK_MESSAGE(r.ok(), c.script);
      CHECK(r.trace.size() == c.calls);
    } else {
      REQUIRE_MESSAGE(r.fault.has_value(), c.script);
      CHECK_MESSAGE(r.fault->kind() == FaultKind::FlowError, c.script);
      CHECK_MESSAGE(r.trace.size() == c.first_failure + 1, c.script);
      CHECK_FALSE(r.trace.back().ok);
    }
  }
}
