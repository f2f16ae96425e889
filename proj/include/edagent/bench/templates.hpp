#pragma once

// Requirement templates with randomized slots. The slots are kept next to
// the rendered text so that checks can be derived from what was asked rather
// than from what a backend answered.

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edagent/agent/rule_backend.hpp"
#include "edagent/flowsim/flowsim.hpp"

namespace edagent::bench {

using Category = agent::Intent;

struct Draft {
  Category category = Category::FullFlow;
  std::string text;
  std::string design;
  std::string platform;
  std::optional<double> clock_period;
  std::optional<double> core_utilization;
  std::optional<double> density;
  std::optional<double> tns_end_percent;
  flowsim::StageId last_stage = flowsim::StageId::Final;
  std::vector<std::string> metrics;
  /// Stage whose metrics the requirement asks about.
  flowsim::StageId metric_stage = flowsim::StageId::Final;
  /// Knobs the requirement asks to vary.
  std::vector<std::string> swept;
};

/// One requirement of the given category. Every draft names a design and a
/// platform of `catalog`.
Draft draft_requirement(Category category, std::mt19937_64& rng,
                        const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

/// The five case-study requirements, verbatim, with their slots.
const std::vector<Draft>& case_study_drafts();

}  // namespace edagent::bench
