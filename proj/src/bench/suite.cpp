#include "edagent/bench/suite.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "edagent/bench/errors.hpp"

namespace edagent::bench {

namespace detail {
extern const char* const kBuiltinSuiteText;
}

namespace {

using flowsim::StageId;

constexpr std::array<std::string_view, 5> kComparatorSymbols = {"<", "<=", "==", ">=", ">"};

const std::array<StageId, 7> kRunStages = {StageId::Synthesis, StageId::Floorplan,   StageId::Placement,
                                           StageId::Cts,       StageId::GlobalRoute, StageId::DetailRoute,
                                           StageId::Final};

flowsim::ParamMap stage_knobs(const Draft& d, StageId stage, std::optional<double> clock = std::nullopt) {
  flowsim::ParamMap p;
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) p[name] = *v;
  };
  switch (stage) {
    case StageId::Synthesis: put("clock_period", clock ? clock : d.clock_period); break;
    case StageId::Floorplan: put("core_utilization", d.core_utilization); break;
    case StageId::Placement: put("density", d.density); break;
    case StageId::Cts: put("tns_end_percent", d.tns_end_percent); break;
    default: break;
  }
  return p;
}

flowsim::FlowSession run_draft(const Draft& d, const flowsim::Catalog& catalog, StageId last,
                               std::optional<double> clock = std::nullopt) {
  flowsim::FlowSession s = flowsim::setup(catalog, d.design, d.platform);
  for (StageId st : kRunStages) {
    if (st > last) break;
    flowsim::run_stage(s, st, stage_knobs(d, st, clock));
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

bool compare(double v, Comparator c, double bound) {
  switch (c) {
    case Comparator::Less: return v < bound;
    case Comparator::LessEq: return v <= bound;
    case Comparator::Equal: return v == bound;
    case Comparator::GreaterEq: return v >= bound;
    case Comparator::Greater: return v > bound;
  }
  return false;
}

std::optional<std::string> predicate_failure(const MetricPredicate& p, const miniscript::ApiTrace& trace) {
  const auto stage = flowsim::stage_from_name(p.stage);
  if (!stage) return "unknown stage \"" + p.stage + "\" in metric predicate";
  const std::string_view api = flowsim::api_for_stage(*stage);
  const std::string label = p.stage + "." + p.metric + " " + std::string(comparator_symbol(p.cmp)) + " " +
                            agent::format_number(p.bound);
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->api != api || !it->ok || !it->result.is_object()) continue;
    if (!it->result.contains(p.metric)) return label + ": no such metric";
    const double v = it->result.at(p.metric).get<double>();
    if (compare(v, p.cmp, p.bound)) return std::nullopt;
    return label + " failed (got " + agent::format_number(v) + ")";
  }
  return label + " failed (" + std::string(api) + " never completed)";
}

CheckSet check_set_from_json(const nlohmann::json& j) {
  CheckSet c;
  if (j.contains("expected_api_subsequence") && !j.at("expected_api_subsequence").is_null()) {
    c.expected_api_subsequence = j.at("expected_api_subsequence").get<std::vector<std::string>>();
  }
  if (j.contains("forbidden_apis") && !j.at("forbidden_apis").is_null()) {
    c.forbidden_apis = j.at("forbidden_apis").get<std::vector<std::string>>();
  }
  for (const auto& p : j.value("metric_predicates", nlohmann::json::array())) {
    const std::string sym = p.at("cmp").get<std::string>();
    const auto cmp = comparator_from_symbol(sym);
    if (!cmp) throw InvalidSuite("unknown comparator \"" + sym + "\"");
    c.metric_predicates.push_back(
        {p.at("stage").get<std::string>(), p.at("metric").get<std::string>(), *cmp, p.at("bound").get<double>()});
  }
  c.must_terminate_ok = j.value("must_terminate_ok", true);
  return c;
}

nlohmann::ordered_json check_set_to_json(const CheckSet& c) {
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (const auto& p : c.metric_predicates) {
    preds.push_back({{"stage", p.stage}, {"metric", p.metric}, {"cmp", comparator_symbol(p.cmp)}, {"bound", p.bound}});
  }
  nlohmann::ordered_json j;
  j["expected_api_subsequence"] =
      c.expected_api_subsequence ? nlohmann::ordered_json(*c.expected_api_subsequence) : nlohmann::ordered_json(nullptr);
  j["metric_predicates"] = std::move(preds);
  j["forbidden_apis"] = c.forbidden_apis ? nlohmann::ordered_json(*c.forbidden_apis) : nlohmann::ordered_json(nullptr);
  j["must_terminate_ok"] = c.must_terminate_ok;
  return j;
}

}  // namespace

std::string_view category_name(Category c) { return agent::intent_name(c); }

std::optional<Category> category_from_name(std::string_view name) { return agent::intent_from_name(name); }

std::string_view comparator_symbol(Comparator c) { return kComparatorSymbols[static_cast<std::size_t>(c)]; }

std::optional<Comparator> comparator_from_symbol(std::string_view s) {
  if (s == "=") return Comparator::Equal;
  for (std::size_t i = 0; i < kComparatorSymbols.size(); ++i) {
    if (kComparatorSymbols[i] == s) return static_cast<Comparator>(i);
  }
  return std::nullopt;
}

std::size_t CheckSet::size() const noexcept {
  return (expected_api_subsequence ? 1 : 0) + metric_predicates.size() + (forbidden_apis ? 1 : 0) +
         (must_terminate_ok ? 1 : 0);
}

std::string_view grade_name(Grade g) {
  switch (g) {
    case Grade::A: return "A";
    case Grade::B: return "B";
    case Grade::C: return "C";
  }
  return "C";
}

CheckSet derive_checks(const Draft& d, const flowsim::Catalog& catalog) {
  CheckSet c;
  std::vector<std::string> apis = {"setup"};
  std::vector<std::string> forbidden;
  for (StageId st : kRunStages) {
    (st <= d.last_stage ? apis : forbidden).emplace_back(flowsim::api_for_stage(st));
  }
  if (!d.metrics.empty()) apis.emplace_back("get_metric");
  c.expected_api_subsequence = apis;
  if (!forbidden.empty()) c.forbidden_apis = forbidden;

  const std::string stage(flowsim::stage_name(d.metric_stage));
  switch (d.category) {
    case Category::FullFlow: {
      const flowsim::FlowSession s = run_draft(d, catalog, d.last_stage);
      const flowsim::MetricSet& m = *s.stage_metrics(d.metric_stage);
      for (const auto& name : d.metrics.empty() ? std::vector<std::string>{"area"} : d.metrics) {
        c.metric_predicates.push_back({stage, name, Comparator::Equal, flowsim::metric_value(m, name)});
      }
      break;
    }
    case Category::Feedback: {
      // The loop stops at the first passing period, so the last final run
      // is either that period or the largest candidate.
      std::optional<double> wns;
      bool passed = false;
      for (double t = 1; t <= 5 && !passed; t += 1) {
        const flowsim::FlowSession s = run_draft(d, catalog, StageId::Final, t);
        wns = s.stage_metrics(StageId::Final)->wns;
        passed = *wns >= 0.0;
      }
      c.metric_predicates.push_back({"final", "wns", Comparator::Equal, *wns});
      if (passed) c.metric_predicates.push_back({"final", "wns", Comparator::GreaterEq, 0.0});
      break;
    }
    default:
      c.metric_predicates.push_back({stage, "area", Comparator::Greater, 0.0});
      c.metric_predicates.push_back({stage, "power", Comparator::Greater, 0.0});
      break;
  }
  return c;
}

GradeResult grade_case(const EvalCase& c, const agent::SessionReport& report) {
  GradeResult g;
  auto fault_text = [&](std::string_view phase) {
    for (const auto& f : report.faults) {
      if (f.phase == phase) return f.kind + ": " + f.message;
    }
    return std::string();
  };
  if (report.requirement.text != c.requirement) {
    g.reasons.push_back("report is for a different requirement");
    return g;
  }
  if (!report.plan) {
    g.reasons.push_back("no plan (" + fault_text("planning") + ")");
    return g;
  }
  if (!report.plan_valid) {
    g.reasons.push_back("plan invalid (" + fault_text("planning") + ")");
    return g;
  }

  if (!report.script) {
    g.reasons.push_back("script rejected (" + fault_text("codegen") + ")");
  } else if (!report.executed) {
    g.reasons.push_back("script not executed (" + fault_text("execution") + ")");
  } else {
    const auto apis = miniscript::extract_api_sequence(report.trace);
    if (report.execution_ok() && !agent::trace_follows_plan(*report.plan, apis)) {
      g.reasons.push_back("trace does not follow the plan");
    }
    if (c.checks.must_terminate_ok && !report.execution_ok()) {
      g.reasons.push_back("runtime fault (" + fault_text("execution") + ")");
    }
    if (c.checks.expected_api_subsequence) {
      const auto& want = *c.checks.expected_api_subsequence;
      std::size_t pos = 0;
      for (const auto& api : apis) {
        if (pos < want.size() && api == want[pos]) ++pos;
      }
      if (pos < want.size()) {
        g.reasons.push_back("expected api subsequence [" + join(want) + "] stops matching at " + want[pos]);
      }
    }
    if (c.checks.forbidden_apis) {
      for (const auto& f : *c.checks.forbidden_apis) {
        if (std::find(apis.begin(), apis.end(), f) != apis.end()) g.reasons.push_back("forbidden api " + f + " called");
      }
    }
    for (const auto& p : c.checks.metric_predicates) {
      if (auto why = predicate_failure(p, report.trace)) g.reasons.push_back(*why);
    }
  }
  g.grade = g.reasons.empty() ? Grade::A : Grade::B;
  return g;
}

std::vector<EvalCase> generate_suite(std::uint64_t seed) {
  constexpr std::array<Category, 5> categories = {Category::FullFlow, Category::GridSearch, Category::Tuning,
                                                  Category::CustomOpt, Category::Feedback};
  const auto& catalog = flowsim::Catalog::builtin();
  std::vector<EvalCase> suite;
  std::set<std::string> texts;
  for (std::size_t ci = 0; ci < categories.size(); ++ci) {
    const Category cat = categories[ci];
    const Draft& study = case_study_drafts()[ci];
    suite.push_back({"task" + std::to_string(ci + 1), cat, study.text, derive_checks(study, catalog)});
    texts.insert(study.text);
    std::mt19937_64 rng(seed * 31 + ci);
    int n = 1;
    while (n < 10) {
      const Draft d = draft_requirement(cat, rng, catalog);
      if (!texts.insert(d.text).second) continue;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%02d", std::string(category_name(cat)).c_str(), n + 1);
      suite.push_back({id, cat, d.text, derive_checks(d, catalog)});
      ++n;
    }
  }
  return suite;
}

const std::vector<EvalCase>& builtin_suite() {
  static const std::vector<EvalCase> suite = suite_from_json(nlohmann::json::parse(detail::kBuiltinSuiteText));
  return suite;
}

void validate_suite(const std::vector<EvalCase>& suite) {
  if (suite.empty()) throw InvalidSuite("suite has no cases");
  std::set<std::string> ids;
  for (const auto& c : suite) {
    if (c.id.empty()) throw InvalidSuite("case with empty id");
    if (!ids.insert(c.id).second) throw InvalidSuite("duplicate case id \"" + c.id + "\"");
    if (c.requirement.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw InvalidSuite("case \"" + c.id + "\" has an empty requirement");
    }
    if (c.checks.size() == 0) throw InvalidSuite("case \"" + c.id + "\" has no checks");
    for (const auto& p : c.checks.metric_predicates) {
      if (!std::isfinite(p.bound)) throw InvalidSuite("case \"" + c.id + "\" has a non-finite bound");
    }
  }
}

nlohmann::ordered_json suite_to_json(const std::vector<EvalCase>& suite) {
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : suite) {
    cases.push_back({{"id", c.id},
                     {"category", category_name(c.category)},
                     {"requirement", c.requirement},
                     {"checks", check_set_to_json(c.checks)}});
  }
  return {{"cases", std::move(cases)}};
}

std::vector<EvalCase> suite_from_json(const nlohmann::json& doc) {
  std::vector<EvalCase> suite;
  try {
    for (const auto& j : doc.at("cases")) {
      EvalCase c;
      c.id = j.at("id").get<std::string>();
      const std::string cat = j.at("category").get<std::string>();
      const auto parsed = category_from_name(cat);
      if (!parsed) throw InvalidSuite("case \"" + c.id + "\": unknown category \"" + cat + "\"");
      c.category = *parsed;
      c.requirement = j.at("requirement").get<std::string>();
      c.checks = check_set_from_json(j.at("checks"));
      suite.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSuite(std::string("suite document: ") + e.what());
  }
  validate_suite(suite);
  return suite;
}

std::vector<EvalCase> load_suite(const std::string& name_or_path) {
  if (name_or_path == "builtin") return builtin_suite();
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) throw IoFailure("cannot open suite file " + name_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidSuite(name_or_path + ": " + e.what());
  }
  return suite_from_json(doc);
}

double SuiteReport::percent(Grade g, std::optional<Category> category) const {
  std::size_t base = 0;
  std::size_t hits = 0;
  for (const auto& c : cases) {
    if (category && c.category != *category) continue;
    ++base;
    if (c.result.grade == g) ++hits;
  }
  return base == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(base);
}

SuiteReport run_suite(const std::vector<EvalCase>& suite, agent::Backend& backend,
                      const miniscript::RuntimeLimits& limits, unsigned workers) {
  validate_suite(suite);
  SuiteReport out;
  out.backend = agent::backend_label(backend.config());
  out.cases.resize(suite.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(suite.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < suite.size(); i = next++) {
      try {
        const EvalCase& c = suite[i];
        auto report = agent::run_requirement(agent::make_requirement(c.requirement), backend, limits);
        out.cases[i] = {c.id, c.category, grade_case(c, report), std::move(report)};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = suite.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

nlohmann::ordered_json suite_report_to_json(const SuiteReport& report) {
  auto dist = [&](std::optional<Category> cat) {
    return nlohmann::ordered_json{{"A", report.percent(Grade::A, cat)},
                                  {"B", report.percent(Grade::B, cat)},
                                  {"C", report.percent(Grade::C, cat)}};
  };
  nlohmann::ordered_json per_case = nlohmann::ordered_json::array();
  std::vector<Category> seen;
  for (const auto& c : report.cases) {
    per_case.push_back({{"id", c.id},
                        {"category", category_name(c.category)},
                        {"grade", grade_name(c.result.grade)},
                        {"reasons", c.result.reasons}});
    if (std::find(seen.begin(), seen.end(), c.category) == seen.end()) seen.push_back(c.category);
  }
  nlohmann::ordered_json by_category = nlohmann::ordered_json::object();
  for (Category cat : seen) by_category[std::string(category_name(cat))] = dist(cat);
  return {{"backend", report.backend},
          {"per_case", std::move(per_case)},
          {"percent", dist(std::nullopt)},
          {"by_category", std::move(by_category)}};
}

}  // namespace edagent::bench
