#pragma once

// Deterministic stand-in for the RTL-to-GDSII tool API that generated scripts
// drive. Every metric comes from a closed-form cost model, so identical
// inputs give bit-identical results.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace edagent::flowsim {

enum class StageId : int {
  Setup = 0,
  Synthesis,
  Floorplan,
  Placement,
  Cts,
  GlobalRoute,
  DetailRoute,
  Final,
};

inline constexpr int kStageCount = 8;

inline constexpr std::array<StageId, kStageCount> kAllStages = {
    StageId::Setup,       StageId::Synthesis,   StageId::Floorplan, StageId::Placement,
    StageId::Cts,         StageId::GlobalRoute, StageId::DetailRoute, StageId::Final};

constexpr int stage_index(StageId s) { return static_cast<int>(s); }

/// Canonical lower-case name ("setup", "synthesis", ..., "final").
std::string_view stage_name(StageId stage);

/// Resolves the stage names scripts pass to get_metric. Accepts the canonical
/// names plus the short forms seen in generated scripts ("synth", "place",
/// "route").
std::optional<StageId> stage_from_name(std::string_view name);

/// Stage run by a flow-API method ("run_synthesis" -> Synthesis,
/// "final_report" -> Final). Setup and get_metric are not stage runs.
std::optional<StageId> stage_for_api(std::string_view api_name);

/// API method name that runs `stage` (inverse of stage_for_api; "setup" for Setup).
std::string_view api_for_stage(StageId stage);

std::optional<StageId> predecessor(StageId stage);

struct DesignSpec {
  std::string name;
  std::int64_t gate_count = 1;
  double base_crit_path = 1.0;  // ns
  double base_power = 1.0;      // mW

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

struct PlatformSpec {
  std::string name;
  double scale = 1.0;
  double default_clock_period = 1.0;  // ns, nominal; see default_knobs()
  double default_core_utilization = 70.0;
  double default_density = 0.7;
  double default_tns_end_percent = 50.0;

  friend bool operator==(const PlatformSpec&, const PlatformSpec&) = default;
};

struct MetricSet {
  double area = 0.0;
  double power = 0.0;
  double wns = 0.0;
  double tns = 0.0;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

inline constexpr std::array<std::string_view, 4> kMetricNames = {"area", "power", "wns", "tns"};

/// Returns the named metric; throws UnknownMetric.
double metric_value(const MetricSet& m, std::string_view name);

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue, std::less<>>;

// ---------------------------------------------------------------------------
// Errors

class FlowError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownDesign,
    UnknownPlatform,
    StageOrderViolation,
    UnknownParameter,
    ParamOutOfRange,
    ParamTypeMismatch,
    StageNotRun,
    UnknownMetric,
    InvalidCatalog,
  };

  FlowError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string_view kind_name(FlowError::Kind kind);

class UnknownDesign : public FlowError {
 public:
  explicit UnknownDesign(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownPlatform : public FlowError {
 public:
  explicit UnknownPlatform(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class StageOrderViolation : public FlowError {
 public:
  StageOrderViolation(StageId expected, StageId got);
  StageId expected() const noexcept { return expected_; }
  StageId got() const noexcept { return got_; }

 private:
  StageId expected_;
  StageId got_;
};

class UnknownParameter : public FlowError {
 public:
  explicit UnknownParameter(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ParamOutOfRange : public FlowError {
 public:
  ParamOutOfRange(std::string name, double value, std::string range);
  const std::string& name() const noexcept { return name_; }
  double value() const noexcept { return value_; }
  const std::string& range() const noexcept { return range_; }

 private:
  std::string name_;
  double value_;
  std::string range_;
};

class ParamTypeMismatch : public FlowError {
 public:
  explicit ParamTypeMismatch(std::string name);
};

class StageNotRun : public FlowError {
 public:
  explicit StageNotRun(std::string stage);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class UnknownMetric : public FlowError {
 public:
  explicit UnknownMetric(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// ---------------------------------------------------------------------------
// Catalog

/// Immutable design/platform tables. Safe to share across threads.
class Catalog {
 public:
  /// Every design and platform named in the reference case studies.
  static const Catalog& builtin();

  /// Parses the catalog document:
  /// {"platforms": [{name, scale, default_clock_period, default_core_utilization,
  ///                 default_density, default_tns_end_percent}, ...],
  ///  "designs": [{name, gate_count, base_crit_path, base_power}, ...]}
  /// Throws FlowError(InvalidCatalog) on schema or invariant violations.
  static Catalog from_json(const nlohmann::json& doc);
  static Catalog load(const std::filesystem::path& path);

  nlohmann::json to_json() const;

  const DesignSpec& design(std::string_view name) const;      // throws UnknownDesign
  const PlatformSpec& platform(std::string_view name) const;  // throws UnknownPlatform
  bool has_design(std::string_view name) const;
  bool has_platform(std::string_view name) const;

  const std::vector<DesignSpec>& designs() const noexcept { return designs_; }
  const std::vector<PlatformSpec>& platforms() const noexcept { return platforms_; }

  void add_design(DesignSpec d);      // validates, rejects duplicates
  void add_platform(PlatformSpec p);  // validates, rejects duplicates

 private:
  std::vector<DesignSpec> designs_;
  std::vector<PlatformSpec> platforms_;
};

// ---------------------------------------------------------------------------
// Cost model

/// The four knobs the cost model reads.
struct Knobs {
  double clock_period = 1.0;      // T, ns
  double core_utilization = 70.0; // u, percent
  double density = 0.7;           // d
  double tns_end_percent = 50.0;  // p

  friend bool operator==(const Knobs&, const Knobs&) = default;
};

/// Knob values used when a stage is run without them. The clock default is
/// 1.25 * base_crit_path * scale, the rest come from the platform.
Knobs default_knobs(const DesignSpec& design, const PlatformSpec& platform);

MetricSet evaluate_cost_model(const DesignSpec& design, const PlatformSpec& platform,
                              const Knobs& knobs);

// ---------------------------------------------------------------------------
// Sessions

/// One in-progress flow run. Single owner; copyable value.
class FlowSession {
 public:
  FlowSession(DesignSpec design, PlatformSpec platform, ParamMap setup_params);

  const DesignSpec& design() const noexcept { return design_; }
  const PlatformSpec& platform() const noexcept { return platform_; }

  bool completed(StageId stage) const noexcept { return completed_[stage_index(stage)]; }
  /// Latest completed stage.
  StageId current_stage() const noexcept;
  const ParamMap& stage_params(StageId stage) const noexcept { return params_[stage_index(stage)]; }
  const std::optional<MetricSet>& stage_metrics(StageId stage) const noexcept {
    return metrics_[stage_index(stage)];
  }
  /// Knobs as currently recorded, platform defaults for stages not yet set.
  Knobs effective_knobs() const;

  friend bool operator==(const FlowSession&, const FlowSession&) = default;

 private:
  friend FlowSession& run_stage(FlowSession&, StageId, const ParamMap&);

  DesignSpec design_;
  PlatformSpec platform_;
  std::array<bool, kStageCount> completed_{};
  std::array<ParamMap, kStageCount> params_{};
  std::array<std::optional<MetricSet>, kStageCount> metrics_{};
};

/// Starts a session with Setup completed. `extra` may only carry "verilog".
FlowSession setup(const Catalog& catalog, std::string_view design_name,
                  std::string_view platform_name, const ParamMap& extra = {});

/// Runs `stage` (Synthesis..Final). Requires the predecessor to be completed.
/// Re-running a stage replaces its record and drops every later stage.
FlowSession& run_stage(FlowSession& session, StageId stage, const ParamMap& params = {});

/// Equivalent to run_stage(session, Final, {}).
FlowSession& final_report(FlowSession& session);

/// Metric values for a completed stage, in request order.
std::vector<double> get_metric(const FlowSession& session, std::string_view stage,
                               std::span<const std::string> metrics);

/// Parameter names `stage` accepts, in positional order.
std::span<const std::string_view> stage_parameters(StageId stage);

}  // namespace edagent::flowsim
