#pragma once

// Template-driven backend. Classifies a requirement into one of the five
// task shapes, pulls out design, platform and parameter slots, and answers
// planning and codegen prompts from fixed templates.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edagent/agent/backend.hpp"
#include "edagent/flowsim/flowsim.hpp"

namespace edagent::agent {

enum class Intent { FullFlow, GridSearch, Tuning, CustomOpt, Feedback };

std::string_view intent_name(Intent intent);
std::optional<Intent> intent_from_name(std::string_view name);

struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  friend bool operator==(const SweepRange&, const SweepRange&) = default;
};

struct Analysis {
  Intent intent = Intent::FullFlow;
  std::string design;
  std::string platform;
  // Fixed knob values stated in the text.
  std::optional<double> clock_period;
  std::optional<double> core_utilization;
  std::optional<double> density;
  std::optional<double> tns_end_percent;
  /// Last stage the flow runs.
  flowsim::StageId last_stage = flowsim::StageId::Final;
  /// Metrics to read, in order of mention; empty means none.
  std::vector<std::string> metrics;
  std::string metric_stage = "final";
  /// Grid search: knob names swept, canonical order.
  std::vector<std::string> grid_knobs;
  /// Tuning: search space in declaration order.
  std::vector<std::pair<std::string, SweepRange>> space;
  /// Feedback search: clock periods tried, ascending.
  std::vector<double> clock_candidates;
};

/// nullopt when no template fits or design/platform cannot be found.
std::optional<Analysis> analyze_requirement(std::string_view text,
                                            const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

Plan plan_for(const Analysis& a);
std::string script_for(const Analysis& a);

/// Text with a script literal: integers without a decimal point, other
/// values in shortest round-trip form.
std::string format_number(double v);

class RuleBackend : public Backend {
 public:
  enum class Variant { Oracle, BrokenCodegen, BrokenPlanner };

  explicit RuleBackend(BackendConfig config);
  std::string complete(const std::vector<Message>& messages) override;
  const BackendConfig& config() const override { return config_; }
  Variant variant() const noexcept { return variant_; }

 private:
  BackendConfig config_;
  Variant variant_;
};

}  // namespace edagent::agent
