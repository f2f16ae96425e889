#include "edagent/flowsim/flowsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace edagent::flowsim {

namespace {

constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "setup", "synthesis", "floorplan", "placement", "cts", "global_route", "detail_route", "final"};

constexpr std::array<std::string_view, kStageCount> kStageApis = {
    "setup", "run_synthesis", "floorplan", "placement", "cts", "global_route", "detail_route",
    "final_report"};

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Accepted value range for one stage parameter.
struct ParamRule {
  std::string_view name;
  double lo;
  double hi;
  bool lo_inclusive;
  bool hi_inclusive;

  bool contains(double v) const {
    const bool above = lo_inclusive ? v >= lo : v > lo;
    const bool below = hi_inclusive ? v <= hi : v < hi;
    return above && below;
  }

  std::string describe() const {
    std::string s;
    s += lo_inclusive ? "[" : "(";
    s += format_number(lo);
    s += ",";
    s += std::isinf(hi) ? std::string("inf") : format_number(hi);
    s += hi_inclusive ? "]" : ")";
    return s;
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<ParamRule, 1> kSynthesisRules = {{{"clock_period", 0.0, kInf, false, false}}};
constexpr std::array<ParamRule, 5> kFloorplanRules = {{
    {"core_utilization", 0.0, 100.0, false, true},
    {"core_aspect_ratio", 0.0, kInf, false, false},
    {"core_margins", 0.0, kInf, false, false},
    {"macro_place_halo", 0.0, kInf, false, false},
    {"macro_place_channel", 0.0, kInf, false, false},
}};
constexpr std::array<ParamRule, 1> kPlacementRules = {{{"density", 0.0, 1.0, false, true}}};
constexpr std::array<ParamRule, 1> kCtsRules = {{{"tns_end_percent", 0.0, 100.0, true, true}}};

std::span<const ParamRule> rules_for(StageId stage) {
  switch (stage) {
    case StageId::Synthesis: return kSynthesisRules;
    case StageId::Floorplan: return kFloorplanRules;
    case StageId::Placement: return kPlacementRules;
    case StageId::Cts: return kCtsRules;
    default: return {};
  }
}

constexpr std::array<std::string_view, 1> kSetupNames = {"verilog"};
constexpr std::array<std::string_view, 1> kSynthesisNames = {"clock_period"};
constexpr std::array<std::string_view, 5> kFloorplanNames = {
    "core_utilization", "core_aspect_ratio", "core_margins", "macro_place_halo",
    "macro_place_channel"};
constexpr std::array<std::string_view, 1> kPlacementNames = {"density"};
constexpr std::array<std::string_view, 1> kCtsNames = {"tns_end_percent"};

void validate_stage_params(StageId stage, const ParamMap& params) {
  const auto rules = rules_for(stage);
  for (const auto& [name, value] : params) {
    const auto it = std::find_if(rules.begin(), rules.end(),
                                 [&](const ParamRule& r) { return r.name == name; });
    if (it == rules.end()) throw UnknownParameter(name);
    const double* v = std::get_if<double>(&value);
    if (v == nullptr) throw ParamTypeMismatch(name);
    if (!it->contains(*v)) throw ParamOutOfRange(name, *v, it->describe());
  }
}

double numeric_param(const ParamMap& params, std::string_view name, double fallback) {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  return std::get<double>(it->second);
}

void require_positive(bool ok, const std::string& what) {
  if (!ok) throw FlowError(FlowError::Kind::InvalidCatalog, "invalid catalog entry: " + what);
}

void validate_design(const DesignSpec& d) {
  require_positive(!d.name.empty(), "design with empty name");
  require_positive(d.gate_count >= 1, d.name + ".gate_count must be >= 1");
  require_positive(d.base_crit_path > 0 && std::isfinite(d.base_crit_path),
                   d.name + ".base_crit_path must be > 0");
  require_positive(d.base_power > 0 && std::isfinite(d.base_power), d.name + ".base_power must be > 0");
}

void validate_platform(const PlatformSpec& p) {
  require_positive(!p.name.empty(), "platform with empty name");
  require_positive(p.scale > 0 && std::isfinite(p.scale), p.name + ".scale must be > 0");
  require_positive(p.default_clock_period > 0 && std::isfinite(p.default_clock_period),
                   p.name + ".default_clock_period must be > 0");
  require_positive(p.default_core_utilization > 0 && p.default_core_utilization <= 100,
                   p.name + ".default_core_utilization must be in (0,100]");
  require_positive(p.default_density > 0 && p.default_density <= 1,
                   p.name + ".default_density must be in (0,1]");
  require_positive(p.default_tns_end_percent >= 0 && p.default_tns_end_percent <= 100,
                   p.name + ".default_tns_end_percent must be in [0,100]");
}

}  // namespace

std::string_view stage_name(StageId stage) { return kStageNames[stage_index(stage)]; }

std::optional<StageId> stage_from_name(std::string_view name) {
  for (StageId s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  if (name == "synth") return StageId::Synthesis;
  if (name == "place") return StageId::Placement;
  if (name == "route" || name == "routing") return StageId::DetailRoute;
  if (name == "groute") return StageId::GlobalRoute;
  if (name == "droute") return StageId::DetailRoute;
  return std::nullopt;
}

std::optional<StageId> stage_for_api(std::string_view api_name) {
  for (StageId s : kAllStages) {
    if (s != StageId::Setup && kStageApis[stage_index(s)] == api_name) return s;
  }
  return std::nullopt;
}

std::string_view api_for_stage(StageId stage) { return kStageApis[stage_index(stage)]; }

std::optional<StageId> predecessor(StageId stage) {
  if (stage == StageId::Setup) return std::nullopt;
  return static_cast<StageId>(stage_index(stage) - 1);
}

double metric_value(const MetricSet& m, std::string_view name) {
  if (name == "area") return m.area;
  if (name == "power") return m.power;
  if (name == "wns") return m.wns;
  if (name == "tns") return m.tns;
  throw UnknownMetric(std::string(name));
}

std::string_view kind_name(FlowError::Kind kind) {
  switch (kind) {
    case FlowError::Kind::UnknownDesign: return "UnknownDesign";
    case FlowError::Kind::UnknownPlatform: return "UnknownPlatform";
    case FlowError::Kind::StageOrderViolation: return "StageOrderViolation";
    case FlowError::Kind::UnknownParameter: return "UnknownParameter";
    case FlowError::Kind::ParamOutOfRange: return "ParamOutOfRange";
    case FlowError::Kind::ParamTypeMismatch: return "ParamTypeMismatch";
    case FlowError::Kind::StageNotRun: return "StageNotRun";
    case FlowError::Kind::UnknownMetric: return "UnknownMetric";
    case FlowError::Kind::InvalidCatalog: return "InvalidCatalog";
  }
  return "FlowError";
}

UnknownDesign::UnknownDesign(std::string name)
    : FlowError(Kind::UnknownDesign, "UnknownDesign(\"" + name + "\")"), name_(std::move(name)) {}

UnknownPlatform::UnknownPlatform(std::string name)
    : FlowError(Kind::UnknownPlatform, "UnknownPlatform(\"" + name + "\")"),
      name_(std::move(name)) {}

StageOrderViolation::StageOrderViolation(StageId expected, StageId got)
    : FlowError(Kind::StageOrderViolation, "StageOrderViolation(expected " +
                                               std::string(stage_name(expected)) + ", got " +
                                               std::string(stage_name(got)) + ")"),
      expected_(expected),
      got_(got) {}

UnknownParameter::UnknownParameter(std::string name)
    : FlowError(Kind::UnknownParameter, "UnknownParameter(\"" + name + "\")"),
      name_(std::move(name)) {}

ParamOutOfRange::ParamOutOfRange(std::string name, double value, std::string range)
    : FlowError(Kind::ParamOutOfRange,
                "ParamOutOfRange(\"" + name + "\", " + format_number(value) + ", " + range + ")"),
      name_(std::move(name)),
      value_(value),
      range_(std::move(range)) {}

ParamTypeMismatch::ParamTypeMismatch(std::string name)
    : FlowError(Kind::ParamTypeMismatch, "ParamTypeMismatch(\"" + name + "\": expected a number)") {}

StageNotRun::StageNotRun(std::string stage)
    : FlowError(Kind::StageNotRun, "StageNotRun(\"" + stage + "\")"), stage_(std::move(stage)) {}

UnknownMetric::UnknownMetric(std::string name)
    : FlowError(Kind::UnknownMetric, "UnknownMetric(\"" + name + "\")"), name_(std::move(name)) {}

// ---------------------------------------------------------------------------
// Catalog

const Catalog& Catalog::builtin() {
  static const Catalog catalog = [] {
    Catalog c;
    c.add_platform({"sky130", 1.0, 10.0, 70.0, 0.7, 50.0});
    c.add_platform({"nangate45", 0.8, 5.0, 70.0, 0.7, 50.0});
    c.add_platform({"asap7", 0.5, 1.0, 70.0, 0.7, 50.0});
    c.add_platform({"gf180", 1.2, 12.0, 70.0, 0.7, 50.0});
    c.add_design({"gcd", 600, 0.9, 1.5});
    c.add_design({"aes", 20000, 0.8, 200});
    c.add_design({"ibex", 25000, 2.5, 140});
    c.add_design({"jpeg", 90000, 1.5, 600});
    c.add_design({"leon", 40000, 1.2, 300});
    c.add_design({"leo", 15000, 1.0, 120});
    c.add_design({"how", 5000, 1.0, 40});
    c.add_design({"high_end_gpu", 120000, 1.4, 900});
    return c;
  }();
  return catalog;
}

Catalog Catalog::from_json(const nlohmann::json& doc) {
  Catalog c;
  try {
    for (const auto& p : doc.at("platforms")) {
      PlatformSpec spec;
      spec.name = p.at("name").get<std::string>();
      spec.scale = p.at("scale").get<double>();
      spec.default_clock_period = p.at("default_clock_period").get<double>();
      spec.default_core_utilization = p.value("default_core_utilization", 70.0);
      spec.default_density = p.value("default_density", 0.7);
      spec.default_tns_end_percent = p.value("default_tns_end_percent", 50.0);
      c.add_platform(std::move(spec));
    }
    for (const auto& d : doc.at("designs")) {
      DesignSpec spec;
      spec.name = d.at("name").get<std::string>();
      spec.gate_count = d.at("gate_count").get<std::int64_t>();
      spec.base_crit_path = d.at("base_crit_path").get<double>();
      spec.base_power = d.at("base_power").get<double>();
      c.add_design(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FlowError(FlowError::Kind::InvalidCatalog, std::string("invalid catalog: ") + e.what());
  }
  return c;
}

Catalog Catalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FlowError(FlowError::Kind::InvalidCatalog, "cannot open catalog " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FlowError(FlowError::Kind::InvalidCatalog,
                    "catalog " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Catalog::to_json() const {
  nlohmann::json doc;
  doc["platforms"] = nlohmann::json::array();
  for (const auto& p : platforms_) {
    doc["platforms"].push_back({{"name", p.name},
                                {"scale", p.scale},
                                {"default_clock_period", p.default_clock_period},
                                {"default_core_utilization", p.default_core_utilization},
                                {"default_density", p.default_density},
                                {"default_tns_end_percent", p.default_tns_end_percent}});
  }
  doc["designs"] = nlohmann::json::array();
  for (const auto& d : designs_) {
    doc["designs"].push_back({{"name", d.name},
                              {"gate_count", d.gate_count},
                              {"base_crit_path", d.base_crit_path},
                              {"base_power", d.base_power}});
  }
  return doc;
}

const DesignSpec& Catalog::design(std::string_view name) const {
  for (const auto& d : designs_) {
    if (d.name == name) return d;
  }
  throw UnknownDesign(std::string(name));
}

const PlatformSpec& Catalog::platform(std::string_view name) const {
  for (const auto& p : platforms_) {
    if (p.name == name) return p;
  }
  throw UnknownPlatform(std::string(name));
}

bool Catalog::has_design(std::string_view name) const {
  return std::any_of(designs_.begin(), designs_.end(), [&](const auto& d) { return d.name == name; });
}

bool Catalog::has_platform(std::string_view name) const {
  return std::any_of(platforms_.begin(), platforms_.end(),
                     [&](const auto& p) { return p.name == name; });
}

void Catalog::add_design(DesignSpec d) {
  validate_design(d);
  if (has_design(d.name)) {
    throw FlowError(FlowError::Kind::InvalidCatalog, "duplicate design " + d.name);
  }
  designs_.push_back(std::move(d));
}

void Catalog::add_platform(PlatformSpec p) {
  validate_platform(p);
  if (has_platform(p.name)) {
    throw FlowError(FlowError::Kind::InvalidCatalog, "duplicate platform " + p.name);
  }
  platforms_.push_back(std::move(p));
}

// ---------------------------------------------------------------------------
// Cost model

Knobs default_knobs(const DesignSpec& design, const PlatformSpec& platform) {
  return Knobs{1.25 * design.base_crit_path * platform.scale, platform.default_core_utilization,
               platform.default_density, platform.default_tns_end_percent};
}

MetricSet evaluate_cost_model(const DesignSpec& design, const PlatformSpec& platform,
                              const Knobs& knobs) {
  const double s = platform.scale;
  const double g = static_cast<double>(design.gate_count);
  const double d0 = design.base_crit_path;
  const double p0 = design.base_power;
  const double t = knobs.clock_period;
  const double u = knobs.core_utilization;
  const double d = knobs.density;
  const double p = knobs.tns_end_percent;

  const double effort = std::clamp(d0 * s / t, 0.5, 2.0);
  const double cell_area = g * 2.0 * (s * s) * (0.8 + 0.2 * effort);
  const double die_area = cell_area * 100.0 / u;
  const double wire = 1.0 + 0.5 * (1.0 - d);
  const double congestion = d > 0.85 ? 0.05 : 0.0;
  const double recovery = 0.003 * p;
  const double crit_path = d0 * s * (1.0 + 0.1 * u / 100.0) * (1.0 + 0.1 * (1.0 - d)) *
                           (1.0 - recovery) * (1.0 + congestion);

  MetricSet m;
  m.area = die_area;
  m.wns = t - crit_path;
  m.tns = std::min(0.0, m.wns) * g / 1000.0;
  m.power = p0 * s * (0.5 + 0.5 * wire) / t;
  return m;
}

// ---------------------------------------------------------------------------
// Sessions

FlowSession::FlowSession(DesignSpec design, PlatformSpec platform, ParamMap setup_params)
    : design_(std::move(design)), platform_(std::move(platform)) {
  completed_[stage_index(StageId::Setup)] = true;
  params_[stage_index(StageId::Setup)] = std::move(setup_params);
  metrics_[stage_index(StageId::Setup)] = evaluate_cost_model(design_, platform_, effective_knobs());
}

StageId FlowSession::current_stage() const noexcept {
  StageId latest = StageId::Setup;
  for (StageId s : kAllStages) {
    if (completed(s)) latest = s;
  }
  return latest;
}

Knobs FlowSession::effective_knobs() const {
  const Knobs defaults = default_knobs(design_, platform_);
  Knobs k;
  k.clock_period = numeric_param(stage_params(StageId::Synthesis), "clock_period", defaults.clock_period);
  k.core_utilization =
      numeric_param(stage_params(StageId::Floorplan), "core_utilization", defaults.core_utilization);
  k.density = numeric_param(stage_params(StageId::Placement), "density", defaults.density);
  k.tns_end_percent =
      numeric_param(stage_params(StageId::Cts), "tns_end_percent", defaults.tns_end_percent);
  return k;
}

FlowSession setup(const Catalog& catalog, std::string_view design_name,
                  std::string_view platform_name, const ParamMap& extra) {
  const DesignSpec& design = catalog.design(design_name);
  const PlatformSpec& platform = catalog.platform(platform_name);
  for (const auto& [name, value] : extra) {
    if (name != "verilog") throw UnknownParameter(name);
    if (!std::holds_alternative<std::string>(value)) throw ParamTypeMismatch(name);
  }
  return FlowSession(design, platform, extra);
}

FlowSession& run_stage(FlowSession& session, StageId stage, const ParamMap& params) {
  if (stage == StageId::Setup) {
    // Setup only happens through setup(); a second Setup is an ordering error.
    throw StageOrderViolation(StageId::Synthesis, StageId::Setup);
  }
  const StageId before = *predecessor(stage);
  if (!session.completed(before)) throw StageOrderViolation(before, stage);
  validate_stage_params(stage, params);

  for (int i = stage_index(stage); i < kStageCount; ++i) {
    session.completed_[i] = false;
    session.params_[i].clear();
    session.metrics_[i].reset();
  }
  session.completed_[stage_index(stage)] = true;
  session.params_[stage_index(stage)] = params;
  session.metrics_[stage_index(stage)] =
      evaluate_cost_model(session.design_, session.platform_, session.effective_knobs());
  return session;
}

FlowSession& final_report(FlowSession& session) { return run_stage(session, StageId::Final); }

std::vector<double> get_metric(const FlowSession& session, std::string_view stage,
                               std::span<const std::string> metrics) {
  const auto id = stage_from_name(stage);
  if (!id || !session.completed(*id)) throw StageNotRun(std::string(stage));
  // Metric names are checked before any value is read so a bad name always
  // reports UnknownMetric regardless of position.
  for (const auto& m : metrics) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), m) == kMetricNames.end()) {
      throw UnknownMetric(m);
    }
  }
  const MetricSet& set = *session.stage_metrics(*id);
  std::vector<double> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) out.push_back(metric_value(set, m));
  return out;
}

std::span<const std::string_view> stage_parameters(StageId stage) {
  switch (stage) {
    case StageId::Setup: return kSetupNames;
    case StageId::Synthesis: return kSynthesisNames;
    case StageId::Floorplan: return kFloorplanNames;
    case StageId::Placement: return kPlacementNames;
    case StageId::Cts: return kCtsNames;
    default: return {};
  }
}

}  // namespace edagent::flowsim
