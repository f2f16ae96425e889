#include "edagent/agent/rule_backend.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <functional>
#include <cmath>
#include <regex>

#include "edagent/agent/errors.hpp"
#include "edagent/miniscript/value.hpp"

namespace edagent::agent {

namespace {

using flowsim::StageId;

constexpr std::array<std::string_view, 5> kIntentNames = {"full_flow", "grid_search", "tuning", "custom_opt",
                                                          "feedback"};

constexpr const char* kNum = R"((\d+(?:\.\d+)?|\.\d+))";

std::string normalize(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '`' || c == '\'') && i + 1 < text.size() && text[i + 1] == c) {
      s += '"';
      ++i;
    } else if (c == '\\' && i + 1 < text.size() && text[i + 1] == '_') {
      // LaTeX-escaped underscore
    } else if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(text[i + 2]) == 0x9C || static_cast<unsigned char>(text[i + 2]) == 0x9D)) {
      s += '"';
      i += 2;
    } else if (c == '\n' || c == '\t' || c == '\r') {
      s += ' ';
    } else {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return s;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Position of `word` in `s` at word boundaries, searching from `from`.
std::size_t find_word(std::string_view s, std::string_view word, std::size_t from = 0) {
  for (std::size_t p = s.find(word, from); p != std::string_view::npos; p = s.find(word, p + 1)) {
    const bool left = p == 0 || !word_char(s[p - 1]);
    const bool right = p + word.size() >= s.size() || !word_char(s[p + word.size()]);
    if (left && right) return p;
  }
  return std::string_view::npos;
}

bool has_word(std::string_view s, std::string_view word) { return find_word(s, word) != std::string_view::npos; }

bool has(std::string_view s, std::string_view part) { return s.find(part) != std::string_view::npos; }

template <std::size_t N>
bool has_any(std::string_view s, const std::array<std::string_view, N>& parts) {
  return std::any_of(parts.begin(), parts.end(), [&](std::string_view p) { return has(s, p); });
}

// Last word-bounded occurrence of `word` that starts before `limit`.
std::ptrdiff_t last_before(std::string_view s, std::string_view word, std::size_t limit) {
  std::ptrdiff_t best = -1;
  for (std::size_t p = find_word(s, word); p != std::string_view::npos && p < limit; p = find_word(s, word, p + 1)) {
    best = static_cast<std::ptrdiff_t>(p);
  }
  return best;
}

bool valid_name(std::string_view s) {
  return !s.empty() && s.size() <= 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return word_char(c) || c == '-' || c == '.';
         });
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (word_char(c)) {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void find_design_platform(const std::string& s, const flowsim::Catalog& catalog, Analysis& a) {
  // Quoted names first: they may name designs the catalog does not know.
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = s.find('"', pos);
    if (open == std::string::npos) break;
    const std::size_t close = s.find('"', open + 1);
    if (close == std::string::npos) break;
    const std::string q = s.substr(open + 1, close - open - 1);
    pos = close + 1;
    if (!valid_name(q)) continue;
    std::string_view after(s);
    after.remove_prefix(close + 1);
    while (!after.empty() && after.front() == ' ') after.remove_prefix(1);
    const bool platform_word = after.starts_with("platform") || after.starts_with("technology") ||
                               after.starts_with("pdk") || after.starts_with("process");
    if (catalog.has_platform(q) || platform_word) {
      if (a.platform.empty()) a.platform = q;
    } else if (a.design.empty()) {
      a.design = q;
    }
  }
  const auto words = split_words(s);
  if (a.design.empty()) {
    for (const auto& w : words) {
      if (catalog.has_design(w)) {
        a.design = w;
        break;
      }
    }
  }
  if (a.design.empty() && has_word(s, "processor") && catalog.has_design("ibex")) a.design = "ibex";
  if (a.platform.empty()) {
    for (const auto& w : words) {
      if (catalog.has_platform(w)) {
        a.platform = w;
        break;
      }
    }
  }
}

std::optional<double> fixed_value(const std::string& s, const std::string& names) {
  const std::regex re("(?:" + names +
                      R"()(?:\s+(?:static|fixed|constant|is|of|to|be|at|as|set|equal|=|:))*\s*)" + kNum);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

struct KnobWord {
  std::string_view word;
  std::string_view knob;
};

constexpr std::array<KnobWord, 11> kKnobWords = {{
    {"core utilization", "core_utilization"},
    {"core_utilization", "core_utilization"},
    {"utilization", "core_utilization"},
    {"density", "density"},
    {"cts", "tns_end_percent"},
    {"tns_end_percent", "tns_end_percent"},
    {"violating paths", "tns_end_percent"},
    {"clock period", "clock_period"},
    {"clock_period", "clock_period"},
    {"clk", "clock_period"},
    {"clock", "clock_period"},
}};

std::vector<std::pair<std::string, SweepRange>> find_ranges(const std::string& s) {
  static const std::regex re(std::string(R"(from\s+)") + kNum + R"(\s*%?\s+to\s+)" + kNum +
                             R"(\s*%?(?:\s+of the violating paths)?\s*,?\s*with\s+(?:a\s+|an\s+)?(?:step|increment)(?:\s+size)?(?:\s+of)?\s+)" +
                             kNum);
  std::vector<std::pair<std::string, SweepRange>> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::size_t start = static_cast<std::size_t>(m.position(0));
    std::ptrdiff_t best = -1;
    std::string knob;
    for (const KnobWord& kw : kKnobWords) {
      const std::ptrdiff_t p = last_before(s, kw.word, start);
      if (p > best) {
        best = p;
        knob = std::string(kw.knob);
      }
    }
    if (knob.empty()) continue;
    const SweepRange r{std::stod(m[1].str()), std::stod(m[2].str()), std::stod(m[3].str())};
    if (!(r.step > 0.0) || r.max < r.min) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.first == knob; });
    if (!dup) out.emplace_back(knob, r);
  }
  return out;
}

std::vector<std::string> find_metrics(const std::string& s) {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (std::string_view m : {"area", "power", "wns", "tns"}) {
    const std::size_t p = find_word(s, m);
    if (p != std::string::npos) found.emplace_back(p, std::string(m));
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

std::optional<StageId> last_mentioned_stage(const std::string& s) {
  if (has(s, "rout")) {
    if (has(s, "global rout") && !has(s, "detail")) return StageId::GlobalRoute;
    return StageId::DetailRoute;
  }
  if (has_word(s, "cts") || has(s, "clock tree")) return StageId::Cts;
  if (has(s, "placement") || has_word(s, "place")) return StageId::Placement;
  if (has(s, "floorplan")) return StageId::Floorplan;
  if (has(s, "synthes")) return StageId::Synthesis;
  return std::nullopt;
}

const std::array<std::string_view, 15> kFinalWords = {
    "report", "final", "complete", "full", "entire", "whole", "flow", "performance",
    "evaluat", "and so on", "gds", "layout", "sign-off", "signoff", "end to end"};

std::string lit(double v) { return format_number(v); }
std::string q(std::string_view s) { return miniscript::quote_string(s); }

std::string metric_list(const std::vector<std::string>& metrics) {
  std::string out = "[";
  for (std::size_t i = 0; i < metrics.size(); ++i) out += (i ? ", " : "") + q(metrics[i]);
  return out + "]";
}

std::string join_words(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

struct GridKnob {
  std::string_view knob;
  std::string_view list_name;
  std::string_view var_name;
  std::array<double, 3> values;
};

constexpr std::array<GridKnob, 4> kGridKnobs = {{
    {"core_utilization", "core_utils", "core_util", {60, 70, 80}},
    {"clock_period", "clk_periods", "clk_period", {2, 3, 4}},
    {"density", "densities", "density", {0.6, 0.7, 0.8}},
    {"tns_end_percent", "tns_percents", "tns_percent", {30, 40, 50}},
}};

const GridKnob& grid_knob(std::string_view knob) {
  for (const auto& g : kGridKnobs) {
    if (g.knob == knob) return g;
  }
  return kGridKnobs[0];
}

// Argument text for one stage call: a swept variable name, the fixed value,
// or nothing.
struct KnobSource {
  const Analysis& a;
  std::function<std::optional<std::string>(std::string_view)> swept;

  std::string arg(std::string_view knob, const std::optional<double>& fixed) const {
    if (auto v = swept(knob)) return std::string(knob) + "=" + *v;
    if (fixed) return std::string(knob) + "=" + lit(*fixed);
    return "";
  }
};

void emit_flow(std::string& out, const std::string& ind, const std::string& eda, const Analysis& a,
               const KnobSource& ks, StageId last, const std::string& setup_call) {
  out += ind + setup_call + "\n";
  auto call = [&](StageId st, const std::string& api, const std::string& arg) {
    if (st > last) return;
    out += ind + eda + "." + api + "(" + arg + ")\n";
  };
  call(StageId::Synthesis, "run_synthesis", ks.arg("clock_period", a.clock_period));
  call(StageId::Floorplan, "floorplan", ks.arg("core_utilization", a.core_utilization));
  call(StageId::Placement, "placement", ks.arg("density", a.density));
  call(StageId::Cts, "cts", ks.arg("tns_end_percent", a.tns_end_percent));
  call(StageId::GlobalRoute, "global_route", "");
  call(StageId::DetailRoute, "detail_route", "");
  call(StageId::Final, "final_report", "");
}

std::string keyword_setup(const std::string& eda, const Analysis& a) {
  return eda + ".setup(design_name=" + q(a.design) + ", platform=" + q(a.platform) + ")";
}

std::string knob_phrase(std::string_view knob, const std::optional<double>& v, std::string_view unit) {
  if (!v) return "";
  return " with " + std::string(knob) + " " + lit(*v) + std::string(unit);
}

std::string range_text(const SweepRange& r) {
  return lit(r.min) + " to " + lit(r.max) + " step " + lit(r.step);
}

}  // namespace

std::string_view intent_name(Intent intent) { return kIntentNames[static_cast<std::size_t>(intent)]; }

std::optional<Intent> intent_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kIntentNames.size(); ++i) {
    if (kIntentNames[i] == name) return static_cast<Intent>(i);
  }
  return std::nullopt;
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<Analysis> analyze_requirement(std::string_view text, const flowsim::Catalog& catalog) {
  const std::string s = normalize(text);
  Analysis a;
  find_design_platform(s, catalog, a);
  if (a.design.empty() || a.platform.empty()) return std::nullopt;

  a.clock_period = fixed_value(s, "clock period|clk period|clock_period");
  a.core_utilization = fixed_value(s, "core utilization|core_utilization|utilization");
  a.density = fixed_value(s, "placement density|density");
  a.tns_end_percent = fixed_value(s, "tns_end_percent|tns end percent");
  const auto ranges = find_ranges(s);
  a.metrics = find_metrics(s);

  const bool smallest = has_any(s, std::array<std::string_view, 4>{"smallest", "minimum", "minimal", "lowest"});
  const bool clock = has(s, "clock period") || has_word(s, "clk");
  const bool tuning_word = has_any(s, std::array<std::string_view, 5>{"tune", "tuning", "optimi", "optimal", "dse"});
  const bool final_word = has_any(s, kFinalWords) || has_word(s, "etc");

  if (smallest && clock) {
    a.intent = Intent::Feedback;
    a.clock_period.reset();
    a.metrics = {"wns"};
    a.clock_candidates = {1, 2, 3, 4, 5};
    return a;
  }
  if (has(s, "grid search") || has(s, "grid-search") || has_word(s, "sweep")) {
    a.intent = Intent::GridSearch;
    for (const auto& g : kGridKnobs) {
      bool mentioned = false;
      for (const KnobWord& kw : kKnobWords) {
        if (kw.knob == g.knob && has_word(s, kw.word)) mentioned = true;
      }
      if (mentioned) a.grid_knobs.emplace_back(g.knob);
    }
    if (a.grid_knobs.empty()) a.grid_knobs = {"core_utilization", "clock_period", "density"};
    if (a.metrics.empty()) a.metrics = {"tns"};
    for (const auto& k : a.grid_knobs) {
      if (k == "clock_period") a.clock_period.reset();
      if (k == "core_utilization") a.core_utilization.reset();
      if (k == "density") a.density.reset();
      if (k == "tns_end_percent") a.tns_end_percent.reset();
    }
    return a;
  }
  if (!ranges.empty() || tuning_word) {
    a.intent = ranges.empty() ? Intent::Tuning : Intent::CustomOpt;
    if (ranges.empty()) {
      if (!a.core_utilization) a.space.emplace_back("core_utilization", SweepRange{60, 90, 5});
      if (!a.density) a.space.emplace_back("density", SweepRange{0.6, 0.9, 0.05});
      if (!a.tns_end_percent) a.space.emplace_back("tns_end_percent", SweepRange{30, 50, 5});
      if (a.space.empty()) a.space.emplace_back("clock_period", SweepRange{1, 5, 1});
    } else {
      a.space = ranges;
    }
    for (const auto& [k, r] : a.space) {
      if (k == "clock_period") a.clock_period.reset();
      if (k == "core_utilization") a.core_utilization.reset();
      if (k == "density") a.density.reset();
      if (k == "tns_end_percent") a.tns_end_percent.reset();
    }
    if (a.metrics.empty()) a.metrics = {"area", "power"};
    if (!has(s, "final") && !has(s, "report") && has(s, "rout")) {
      a.last_stage = StageId::DetailRoute;
      a.metric_stage = "route";
    }
    return a;
  }

  const auto stage = last_mentioned_stage(s);
  if (!stage && !final_word && a.metrics.empty()) return std::nullopt;
  a.intent = Intent::FullFlow;
  if (final_word || !stage) {
    a.last_stage = StageId::Final;
    a.metric_stage = "final";
  } else {
    a.last_stage = *stage;
    a.metric_stage = std::string(flowsim::stage_name(*stage));
  }
  return a;
}

Plan plan_for(const Analysis& a) {
  Plan plan;
  auto add = [&](Tool t, std::string d) {
    plan.steps.push_back({static_cast<int>(plan.steps.size()) + 1, t, std::move(d)});
  };
  const bool sweeping = a.intent == Intent::GridSearch || a.intent == Intent::Tuning ||
                        a.intent == Intent::CustomOpt || a.intent == Intent::Feedback;
  auto swept = [&](std::string_view knob) {
    if (a.intent == Intent::GridSearch) return std::find(a.grid_knobs.begin(), a.grid_knobs.end(), knob) != a.grid_knobs.end();
    if (a.intent == Intent::Feedback) return knob == "clock_period";
    return std::any_of(a.space.begin(), a.space.end(), [&](const auto& e) { return e.first == knob; });
  };
  auto knob_desc = [&](std::string_view knob, const std::optional<double>& fixed, std::string_view unit) {
    if (sweeping && swept(knob)) return " with " + std::string(knob) + " taken from the sweep";
    return knob_phrase(knob, fixed, unit);
  };

  add(Tool::Setup, "load design " + a.design + " on platform " + a.platform);
  const StageId last = a.last_stage;
  if (last >= StageId::Synthesis) add(Tool::Synthesis, "run logic synthesis" + knob_desc("clock_period", a.clock_period, " ns"));
  if (last >= StageId::Floorplan) add(Tool::Floorplan, "floorplan the core" + knob_desc("core_utilization", a.core_utilization, "%"));
  if (last >= StageId::Placement) add(Tool::Placement, "place the cells" + knob_desc("density", a.density, ""));
  if (last >= StageId::Cts) add(Tool::Cts, "build the clock tree" + knob_desc("tns_end_percent", a.tns_end_percent, "%"));
  if (last >= StageId::GlobalRoute) add(Tool::GlobalRoute, "run global routing");
  if (last >= StageId::DetailRoute) add(Tool::DetailRoute, "run detailed routing");
  if (last >= StageId::Final) add(Tool::FinalReport, "generate the final report");
  if (!a.metrics.empty()) add(Tool::GetMetric, "read " + join_words(a.metrics) + " at stage " + a.metric_stage);

  switch (a.intent) {
    case Intent::GridSearch: {
      std::vector<std::string> parts;
      for (const auto& k : a.grid_knobs) {
        const auto& g = grid_knob(k);
        parts.push_back(k + " in [" + lit(g.values[0]) + ", " + lit(g.values[1]) + ", " + lit(g.values[2]) + "]");
      }
      plan.steps.back().description += ", repeating the flow for every combination of " + join_words(parts);
      break;
    }
    case Intent::Tuning:
    case Intent::CustomOpt: {
      std::vector<std::string> parts;
      for (const auto& [k, r] : a.space) parts.push_back(k + " " + range_text(r));
      std::string objective;
      for (std::size_t i = 0; i < a.metrics.size(); ++i) objective += (i ? "*" : "") + a.metrics[i];
      add(Tool::Tune, "grid search over " + join_words(parts) + " minimizing " + objective);
      break;
    }
    case Intent::Feedback: {
      std::vector<std::string> c;
      for (double v : a.clock_candidates) c.push_back(lit(v));
      plan.steps.back().description += "; try clock periods " + join_words(c) + " in order and stop at the first with wns >= 0";
      break;
    }
    case Intent::FullFlow:
      break;
  }
  return plan;
}

std::string script_for(const Analysis& a) {
  std::string out;
  const auto no_sweep = [](std::string_view) -> std::optional<std::string> { return std::nullopt; };

  switch (a.intent) {
    case Intent::FullFlow: {
      out += "# Instantiate chateda\neda = chateda()\n";
      emit_flow(out, "", "eda", a, KnobSource{a, no_sweep}, a.last_stage, keyword_setup("eda", a));
      if (!a.metrics.empty()) {
        out += "# Evaluation\n";
        out += "result = eda.get_metric(" + q(a.metric_stage) + ", " + metric_list(a.metrics) + ")\n";
        out += "print(result)\n";
      }
      return out;
    }
    case Intent::GridSearch: {
      out += "# Define grid search parameters\n";
      for (const auto& k : a.grid_knobs) {
        const auto& g = grid_knob(k);
        out += std::string(g.list_name) + " = [" + lit(g.values[0]) + ", " + lit(g.values[1]) + ", " +
               lit(g.values[2]) + "]\n";
      }
      out += "results = []\n";
      std::string ind;
      for (const auto& k : a.grid_knobs) {
        const auto& g = grid_knob(k);
        out += ind + "for " + std::string(g.var_name) + " in " + std::string(g.list_name) + ":\n";
        ind += "    ";
      }
      out += ind + "eda = chateda()\n";
      const auto swept = [&](std::string_view knob) -> std::optional<std::string> {
        if (std::find(a.grid_knobs.begin(), a.grid_knobs.end(), knob) == a.grid_knobs.end()) return std::nullopt;
        return std::string(grid_knob(knob).var_name);
      };
      emit_flow(out, ind, "eda", a, KnobSource{a, swept}, StageId::Final,
                "eda.setup(" + q(a.design) + ", " + q(a.platform) + ", verilog=" + q(a.design + ".v") + ")");
      out += ind + "value = eda.get_metric(stage=\"final\", metrics=" + metric_list(a.metrics) + ")\n";
      out += ind + "results.append({\n";
      for (const auto& k : a.grid_knobs) out += ind + "    " + q(k) + ": " + std::string(grid_knob(k).var_name) + ",\n";
      out += ind + "    \"metrics\": value,\n";
      out += ind + "})\n";
      out += "print(len(results))\n";
      return out;
    }
    case Intent::Tuning:
    case Intent::CustomOpt: {
      std::vector<std::string> names;
      for (const auto& [k, r] : a.space) names.push_back(k);
      out += "def tuning_func(" + join_words(names) + "):\n";
      out += "    eda = chateda()\n";
      const auto swept = [&](std::string_view knob) -> std::optional<std::string> {
        if (std::find(names.begin(), names.end(), knob) == names.end()) return std::nullopt;
        return std::string(knob);
      };
      emit_flow(out, "    ", "eda", a, KnobSource{a, swept}, a.last_stage, keyword_setup("eda", a));
      if (a.metrics.size() == 1) {
        out += "    return eda.get_metric(" + q(a.metric_stage) + ", " + metric_list(a.metrics) + ")\n";
      } else {
        out += "    metrics = eda.get_metric(" + q(a.metric_stage) + ", " + metric_list(a.metrics) + ")\n";
        out += "    return metrics[0]";
        for (std::size_t i = 1; i < a.metrics.size(); ++i) out += " * metrics[" + std::to_string(i) + "]";
        out += "\n";
      }
      out += "param_space = {\n";
      for (const auto& [k, r] : a.space) {
        out += "    " + q(k) + ": {\"minmax\": [" + lit(r.min) + ", " + lit(r.max) + "], \"step\": " + lit(r.step) + "},\n";
      }
      out += "}\n";
      out += "best = tune(tuning_func, param_space)\n";
      out += "print(best[\"params\"])\n";
      out += "print(best[\"objective\"])\n";
      return out;
    }
    case Intent::Feedback: {
      out += "def timing_met(clock_period):\n";
      out += "    eda = chateda()\n";
      const auto swept = [](std::string_view knob) -> std::optional<std::string> {
        if (knob == "clock_period") return std::string("clock_period");
        return std::nullopt;
      };
      emit_flow(out, "    ", "eda", a, KnobSource{a, swept}, StageId::Final, keyword_setup("eda", a));
      out += "    wns = eda.get_metric(\"final\", [\"wns\"])\n";
      out += "    return wns >= 0\n";
      std::vector<std::string> c;
      for (double v : a.clock_candidates) c.push_back(lit(v));
      out += "clock_periods = [" + join_words(c) + "]\n";
      out += "smallest_valid_clock_period = 0\n";
      out += "for clock_period in clock_periods:\n";
      out += "    if timing_met(clock_period):\n";
      out += "        smallest_valid_clock_period = clock_period\n";
      out += "        break\n";
      out += "print(smallest_valid_clock_period)\n";
      return out;
    }
  }
  return out;
}

RuleBackend::RuleBackend(BackendConfig config) : config_(std::move(config)) {
  if (config_.model.empty() || config_.model == "oracle") {
    variant_ = Variant::Oracle;
  } else if (config_.model == "broken-codegen") {
    variant_ = Variant::BrokenCodegen;
  } else if (config_.model == "broken-planner") {
    variant_ = Variant::BrokenPlanner;
  } else {
    throw ConfigError("unknown rule backend variant \"" + config_.model + "\"");
  }
}

std::string RuleBackend::complete(const std::vector<Message>& messages) {
  const auto role = role_from_messages(messages);
  const auto requirement = requirement_from_messages(messages);
  if (!role || !requirement) return "I can only answer planning and script requests.\n";
  const auto analysis = analyze_requirement(*requirement);
  if (!analysis) return "I could not map this requirement onto the flow tools.\n";

  if (*role == Role::Planning) {
    Plan plan = plan_for(*analysis);
    if (variant_ == Variant::BrokenPlanner) {
      std::erase_if(plan.steps, [](const TaskStep& s) { return s.tool == Tool::Synthesis; });
      for (std::size_t i = 0; i < plan.steps.size(); ++i) plan.steps[i].index = static_cast<int>(i) + 1;
    }
    return "Here is the plan.\n\n" + serialize_plan(plan) + "\n";
  }

  std::string script = script_for(*analysis);
  if (variant_ == Variant::BrokenCodegen) {
    const std::size_t p = script.find("chateda()");
    if (p != std::string::npos) script.erase(p + 8, 1);
  }
  return "```script\n" + script + "```\n";
}

}  // namespace edagent::agent
