#include "edagent/bench/templates.hpp"

#include <algorithm>
#include <array>

namespace edagent::bench {

namespace {

using flowsim::StageId;

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const std::array<T, N>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

int roll(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string num(double v) { return agent::format_number(v); }

std::string join_and(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
    out += items[i];
  }
  return out;
}

// Nonempty subset of the four metrics in canonical order.
std::vector<std::string> pick_metrics(std::mt19937_64& rng, int max_count) {
  static const std::array<std::string, 4> all = {"area", "power", "wns", "tns"};
  std::vector<std::string> out;
  while (out.empty()) {
    for (const auto& m : all) {
      if (static_cast<int>(out.size()) < max_count && roll(rng, 0, 2) == 0) out.push_back(m);
    }
  }
  return out;
}

void pick_target(std::mt19937_64& rng, const flowsim::Catalog& catalog, Draft& d) {
  d.design = pick(rng, catalog.designs()).name;
  d.platform = pick(rng, catalog.platforms()).name;
}

double pick_clock(std::mt19937_64& rng) {
  static const std::array<double, 8> periods = {0.8, 1, 1.5, 2, 2.5, 3, 4, 5};
  return pick(rng, periods);
}

Draft full_flow(std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  Draft d;
  d.category = Category::FullFlow;
  pick_target(rng, catalog, d);
  switch (roll(rng, 0, 4)) {
    case 0:
      d.metrics = pick_metrics(rng, 3);
      d.text = "Run the complete flow for the design \"" + d.design + "\" on \"" + d.platform + "\" and report the " +
               join_and(d.metrics) + ".";
      break;
    case 1:
      d.core_utilization = 5.0 * roll(rng, 10, 17);
      d.metrics = pick_metrics(rng, 2);
      d.text = "I want to test the " + join_and(d.metrics) + " performance of the design \"" + d.design + "\" on \"" +
               d.platform + "\" setting core utilization is " + num(*d.core_utilization) +
               "%. I need to perform cts, routing, placement, and so on.";
      break;
    case 2: {
      static const std::array<std::pair<StageId, std::string_view>, 4> phrases = {{
          {StageId::Floorplan, "synthesis and floorplanning"},
          {StageId::Placement, "placement"},
          {StageId::Cts, "clock tree synthesis"},
          {StageId::DetailRoute, "routing"},
      }};
      const auto& [stage, phrase] = pick(rng, phrases);
      d.last_stage = stage;
      d.metric_stage = stage;
      d.text = "Perform " + std::string(phrase) + " for the " + d.design + " design on the " + d.platform + " platform.";
      break;
    }
    case 3:
      d.clock_period = pick_clock(rng);
      d.density = 5 * roll(rng, 11, 18) / 100.0;
      d.last_stage = StageId::Placement;
      d.metric_stage = StageId::Placement;
      d.metrics = {pick(rng, std::array<std::string, 4>{"area", "power", "wns", "tns"})};
      d.text = "Synthesize \"" + d.design + "\" on \"" + d.platform + "\" with a clock period of " +
               num(*d.clock_period) + " ns, then run floorplan and placement with density " + num(*d.density) +
               ", and give me the " + d.metrics[0] + " after placement.";
      break;
    default:
      d.tns_end_percent = 10.0 * roll(rng, 2, 8);
      d.last_stage = StageId::Cts;
      d.metric_stage = StageId::Cts;
      d.metrics = pick_metrics(rng, 2);
      d.text = "Take \"" + d.design + "\" through synthesis, floorplan, placement and cts on \"" + d.platform +
               "\" with tns_end_percent set to " + num(*d.tns_end_percent) + " and show the " + join_and(d.metrics) +
               " at cts.";
      break;
  }
  return d;
}

Draft grid_search(std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  static const std::array<std::pair<std::string, std::string>, 4> knobs = {{
      {"core_utilization", "core_utilization"},
      {"clock_period", "clk period"},
      {"density", "placement density"},
      {"tns_end_percent", "tns_end_percent"},
  }};
  Draft d;
  d.category = Category::GridSearch;
  pick_target(rng, catalog, d);
  std::vector<std::string> words;
  while (d.swept.size() < 2) {
    d.swept.clear();
    words.clear();
    for (const auto& [knob, word] : knobs) {
      if (roll(rng, 0, 1) == 1) {
        d.swept.push_back(knob);
        words.push_back(word);
      }
    }
  }
  if (roll(rng, 0, 1) == 0) {
    d.metrics = {"tns"};
    d.text = "Your task is to grid search on the design \"" + d.design + "\" on \"" + d.platform +
             "\" platform for parameters " + join_and(words) + ".";
  } else {
    d.metrics = {pick(rng, std::array<std::string, 4>{"area", "power", "wns", "tns"})};
    d.text = "Sweep the " + join_and(words) + " of \"" + d.design + "\" on \"" + d.platform + "\" and report the " +
             d.metrics[0] + " for every point.";
  }
  return d;
}

Draft tuning(std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  Draft d;
  d.category = Category::Tuning;
  pick_target(rng, catalog, d);
  d.metrics = pick_metrics(rng, 2);
  d.swept = {"core_utilization", "density", "tns_end_percent"};
  switch (roll(rng, 0, 2)) {
    case 0:
      d.clock_period = pick_clock(rng);
      d.text = "For the design \"" + d.design + "\" on \"" + d.platform + "\" platform, fix clock period to be " +
               num(*d.clock_period) + ". Write me a script to optimize " + join_and(d.metrics) +
               " using the parameter tuning method.";
      break;
    case 1:
      d.core_utilization = 5.0 * roll(rng, 10, 17);
      d.swept = {"density", "tns_end_percent"};
      d.text = "Tune the flow parameters of \"" + d.design + "\" on \"" + d.platform + "\" to minimize " +
               join_and(d.metrics) + " with the core utilization fixed at " + num(*d.core_utilization) + ".";
      break;
    default:
      d.clock_period = pick_clock(rng);
      d.last_stage = StageId::DetailRoute;
      d.metric_stage = StageId::DetailRoute;
      d.text = "Optimize the " + join_and(d.metrics) + " of \"" + d.design + "\" on \"" + d.platform +
               "\" with the clock period at " + num(*d.clock_period) +
               ", reading the metrics once routing is finished.";
      break;
  }
  return d;
}

Draft custom_opt(std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  Draft d;
  d.category = Category::CustomOpt;
  pick_target(rng, catalog, d);
  d.metrics = pick_metrics(rng, 2);
  if (roll(rng, 0, 1) == 0) {
    d.clock_period = pick_clock(rng);
    d.text = "Please provide an optimal digital layout for our \"" + d.design + "\" project in the \"" + d.platform +
             "\" technology. Follow these steps:\n1. Keep the clock period static at " + num(*d.clock_period) +
             " during the synthesis.\n";
    int step = 2;
    while (d.swept.empty()) {
      if (roll(rng, 0, 1) == 1) {
        const int lo = 5 * roll(rng, 10, 13);
        d.swept.push_back("core_utilization");
        d.text += std::to_string(step++) + ". At the floorplan stage, adjust only the core utilization, ranging it from " +
                  std::to_string(lo) + "% to " + std::to_string(lo + 5 * roll(rng, 2, 5)) +
                  "% with a step of 5% and keep the rest of the parameters as their default values.\n";
      }
      if (roll(rng, 0, 1) == 1) {
        const int lo = roll(rng, 10, 13);
        d.swept.push_back("density");
        d.text += std::to_string(step++) + ". At the placement stage, try adjusting the density from " +
                  num(5 * lo / 100.0) + " to " + num(5 * (lo + roll(rng, 3, 7)) / 100.0) + " with an increment of 0.05.\n";
      }
      if (roll(rng, 0, 1) == 1) {
        const int lo = 10 * roll(rng, 2, 4);
        d.swept.push_back("tns_end_percent");
        d.text += std::to_string(step++) + ". At the CTS stage, fix from " + std::to_string(lo) + "% to " +
                  std::to_string(lo + 10 * roll(rng, 1, 3)) + "% of the violating paths with a step of 10%.\n";
      }
    }
    d.last_stage = StageId::DetailRoute;
    d.metric_stage = StageId::DetailRoute;
    d.text += "Lastly, gather metrics for chip " + join_and(d.metrics) + " once routing is finished.";
  } else {
    static const std::array<std::string, 3> knobs = {"core utilization", "density", "clock period"};
    const std::string& word = pick(rng, knobs);
    std::string range;
    if (word == "core utilization") {
      const int lo = 5 * roll(rng, 10, 13);
      d.swept = {"core_utilization"};
      range = "from " + std::to_string(lo) + " to " + std::to_string(lo + 5 * roll(rng, 2, 5)) + " with a step of 5";
    } else if (word == "density") {
      const int lo = roll(rng, 5, 7);
      d.swept = {"density"};
      range = "from " + num(lo / 10.0) + " to " + num((lo + roll(rng, 1, 3)) / 10.0) + " with a step of 0.1";
    } else {
      const int lo = roll(rng, 1, 3);
      d.swept = {"clock_period"};
      range = "from " + std::to_string(lo) + " to " + std::to_string(lo + roll(rng, 1, 3)) + " with a step of 0.5";
    }
    d.text = "Tune the " + word + " of \"" + d.design + "\" on \"" + d.platform + "\" " + range +
             " and report the final " + join_and(d.metrics) + ".";
  }
  return d;
}

Draft feedback(std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  Draft d;
  d.category = Category::Feedback;
  pick_target(rng, catalog, d);
  d.metrics = {"wns"};
  d.swept = {"clock_period"};
  switch (roll(rng, 0, 2)) {
    case 0:
      d.text = "Try to find out the smallest valid clock period for the design \"" + d.design + "\" on \"" +
               d.platform +
               "\" platform. Note that a clock period is valid only if the \"wns\" metric at the final stage is non "
               "negative.";
      break;
    case 1:
      d.text = "What is the minimum clock period between 1 and 5 ns for \"" + d.design + "\" on \"" + d.platform +
               "\" that keeps the final wns non negative?";
      break;
    default:
      d.text = "Find the lowest clk period for which \"" + d.design + "\" on \"" + d.platform +
               "\" meets timing, meaning wns is at least 0 in the final report.";
      break;
  }
  return d;
}

}  // namespace

Draft draft_requirement(Category category, std::mt19937_64& rng, const flowsim::Catalog& catalog) {
  switch (category) {
    case Category::FullFlow: return full_flow(rng, catalog);
    case Category::GridSearch: return grid_search(rng, catalog);
    case Category::Tuning: return tuning(rng, catalog);
    case Category::CustomOpt: return custom_opt(rng, catalog);
    case Category::Feedback: return feedback(rng, catalog);
  }
  return full_flow(rng, catalog);
}

const std::vector<Draft>& case_study_drafts() {
  static const std::vector<Draft> drafts = [] {
    std::vector<Draft> out(5);

    Draft& t1 = out[0];
    t1.category = Category::FullFlow;
    t1.text =
        "I want to test the area and power performance of the design \"leo\" on \"sky130\" setting core utilization "
        "is 60%. I need to perform cts, routing, placement, and so on.";
    t1.design = "leo";
    t1.platform = "sky130";
    t1.core_utilization = 60;
    t1.metrics = {"area", "power"};

    Draft& t2 = out[1];
    t2.category = Category::GridSearch;
    t2.text =
        "Your task is to grid search on or the design \"how\" on \"gf180\" platform for parameters core_utilization, "
        "clk period, and placement density.";
    t2.design = "how";
    t2.platform = "gf180";
    t2.metrics = {"tns"};
    t2.swept = {"core_utilization", "clock_period", "density"};

    Draft& t3 = out[2];
    t3.category = Category::Tuning;
    t3.text =
        "For the design \"aes\" on \"nangate45\" platform, fix clock period to be 5. Write me a script to optimize "
        "area and power using the parameter tuning method.";
    t3.design = "aes";
    t3.platform = "nangate45";
    t3.clock_period = 5;
    t3.metrics = {"area", "power"};
    t3.swept = {"core_utilization", "density", "tns_end_percent"};

    Draft& t4 = out[3];
    t4.category = Category::CustomOpt;
    t4.text =
        "Please provide an optimal digital layout for our \"high_end_gpu\" project in the \"nangate45\" technology. "
        "Follow these steps:\n"
        "1. Keep the clock period static at 5 during the synthesis.\n"
        "2. At the floorplan stage, adjust only the core utilization, ranging it from 60% to 85% with a step of 5% "
        "and keep the rest of the parameters as their default values.\n"
        "3. At the placement stage, try adjusting the density from 0.55 to 1 with an increment of 0.05.\n"
        "4. At the CTS stage, fix from 30% to 60% of the violating paths with a step of 5%.\n"
        "Lastly, gather metrics for chip area and power consumption once routing is finished.";
    t4.design = "high_end_gpu";
    t4.platform = "nangate45";
    t4.clock_period = 5;
    t4.last_stage = StageId::DetailRoute;
    t4.metric_stage = StageId::DetailRoute;
    t4.metrics = {"area", "power"};
    t4.swept = {"core_utilization", "density", "tns_end_percent"};

    Draft& t5 = out[4];
    t5.category = Category::Feedback;
    t5.text =
        "Try to find out the smallest valid clock period for the design \"leon\" on \"asap7\" platform. Note that a "
        "clock period is valid only if the \"wns\" metric at the final stage is non negative.";
    t5.design = "leon";
    t5.platform = "asap7";
    t5.metrics = {"wns"};
    t5.swept = {"clock_period"};
    return out;
  }();
  return drafts;
}

}  // namespace edagent::bench
