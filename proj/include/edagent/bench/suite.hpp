#pragma once

// Three-tier grading over a case suite. C: no valid plan. B: valid plan but
// the script was rejected, faulted, or failed a check. A: everything passed.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edagent/agent/pipeline.hpp"
#include "edagent/bench/templates.hpp"

namespace edagent::bench {

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);

enum class Comparator { Less, LessEq, Equal, GreaterEq, Greater };

std::string_view comparator_symbol(Comparator c);  // "<", "<=", "==", ">=", ">"
std::optional<Comparator> comparator_from_symbol(std::string_view s);

/// Compares the metric of the most recent successful run of `stage` in the
/// trace, across all handles.
struct MetricPredicate {
  std::string stage;
  std::string metric;
  Comparator cmp = Comparator::Equal;
  double bound = 0.0;
  friend bool operator==(const MetricPredicate&, const MetricPredicate&) = default;
};

struct CheckSet {
  /// Must appear in this order in the trace's API sequence, gaps allowed.
  std::optional<std::vector<std::string>> expected_api_subsequence;
  std::vector<MetricPredicate> metric_predicates;
  std::optional<std::vector<std::string>> forbidden_apis;
  bool must_terminate_ok = true;

  /// Number of individual checks; must_terminate_ok counts when set.
  std::size_t size() const noexcept;
  friend bool operator==(const CheckSet&, const CheckSet&) = default;
};

struct EvalCase {
  std::string id;
  Category category = Category::FullFlow;
  std::string requirement;
  CheckSet checks;
  friend bool operator==(const EvalCase&, const EvalCase&) = default;
};

enum class Grade { C = 0, B = 1, A = 2 };

std::string_view grade_name(Grade g);

struct GradeResult {
  Grade grade = Grade::C;
  std::vector<std::string> reasons;  // every failed check
};

/// Checks derived from a draft's slots: the stage sequence it implies,
/// stages it must not reach, and metric values recomputed with flowsim.
CheckSet derive_checks(const Draft& draft, const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

/// Never throws.
GradeResult grade_case(const EvalCase& c, const agent::SessionReport& report);

/// 50 cases, ten per category, the five case-study requirements among them.
std::vector<EvalCase> generate_suite(std::uint64_t seed = 2024);

/// The suite shipped in data/builtin_suite.json.
const std::vector<EvalCase>& builtin_suite();

/// Throws InvalidSuite.
void validate_suite(const std::vector<EvalCase>& suite);
nlohmann::ordered_json suite_to_json(const std::vector<EvalCase>& suite);
/// Throws InvalidSuite.
std::vector<EvalCase> suite_from_json(const nlohmann::json& doc);
/// "builtin" or a path. Throws IoFailure, InvalidSuite.
std::vector<EvalCase> load_suite(const std::string& name_or_path);

struct CaseResult {
  std::string id;
  Category category = Category::FullFlow;
  GradeResult result;
  agent::SessionReport report;
};

struct SuiteReport {
  std::string backend;
  std::vector<CaseResult> cases;  // suite order

  /// Share of cases with grade g, in percent; `category` restricts the base.
  double percent(Grade g, std::optional<Category> category = std::nullopt) const;
};

/// Grades every case with `workers` threads (0: hardware concurrency).
/// Deterministic for the rule backend. Throws InvalidSuite for an empty suite;
/// BackendUnreachable aborts the run.
SuiteReport run_suite(const std::vector<EvalCase>& suite, agent::Backend& backend,
                      const miniscript::RuntimeLimits& limits = {}, unsigned workers = 0);

/// {backend, per_case: [{id, category, grade, reasons}], percent: {A, B, C},
///  by_category: {name: {A, B, C}}}
nlohmann::ordered_json suite_report_to_json(const SuiteReport& report);

}  // namespace edagent::bench
