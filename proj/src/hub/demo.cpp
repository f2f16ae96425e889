#include "edagent/hub/demo.hpp"

#include <algorithm>
#include <cmath>

#include "edagent/quantlab/quantlab.hpp"

namespace edagent::hub {

namespace {

struct DemoCase {
  const char* design;
  double clock_period;
};

constexpr DemoCase kCases[] = {{"gcd", 0.74}, {"aes", 0.82}, {"ibex", 2.8}, {"jpeg", 1.7}};
constexpr const char* kPlatform = "sky130";

double power_area(const flowsim::Catalog& catalog, const std::string& design, double clock, double u, double d,
                  double p) {
  using flowsim::StageId;
  flowsim::FlowSession s = flowsim::setup(catalog, design, kPlatform);
  flowsim::run_stage(s, StageId::Synthesis, {{"clock_period", clock}});
  flowsim::run_stage(s, StageId::Floorplan, {{"core_utilization", u}});
  flowsim::run_stage(s, StageId::Placement, {{"density", d}});
  flowsim::run_stage(s, StageId::Cts, {{"tns_end_percent", p}});
  flowsim::run_stage(s, StageId::GlobalRoute);
  flowsim::run_stage(s, StageId::DetailRoute);
  flowsim::final_report(s);
  const auto& m = *s.stage_metrics(StageId::Final);
  return m.power * m.area;
}

double param(const dse::ParamPoint& point, const std::string& name) {
  for (const auto& [k, v] : point) {
    if (k == name) return v;
  }
  return 0.0;
}

}  // namespace

dse::ParamSpace tune_demo_space() {
  return dse::ParamSpace{{"core_utilization", {60, 90, 5, true}},
                         {"density", {0.6, 0.9, 0.05, false}},
                         {"tns_end_percent", {30, 50, 5, true}}};
}

std::vector<TuneDemoRow> tune_demo(const flowsim::Catalog& catalog) {
  const dse::ParamSpace space = tune_demo_space();
  std::vector<TuneDemoRow> rows;
  for (const auto& c : kCases) {
    TuneDemoRow row;
    row.design = c.design;
    row.platform = kPlatform;
    row.clock_period = c.clock_period;
    const auto& platform = catalog.platform(kPlatform);
    row.default_objective =
        power_area(catalog, c.design, c.clock_period, platform.default_core_utilization, platform.default_density,
                   platform.default_tns_end_percent);
    row.result = dse::tune(
        [&](const dse::ParamPoint& pt) {
          return power_area(catalog, c.design, c.clock_period, param(pt, "core_utilization"), param(pt, "density"),
                            param(pt, "tns_end_percent"));
        },
        space);
    row.best_objective = *row.result.best.objective;
    row.best_params = row.result.best.params;
    row.evaluations = row.result.evaluations;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json tune_demo_to_json(const std::vector<TuneDemoRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.best_params) params[k] = v;
    nlohmann::ordered_json trials = nlohmann::ordered_json::array();
    for (const auto& t : r.result.trials) {
      nlohmann::ordered_json tp = nlohmann::ordered_json::object();
      for (const auto& [k, v] : t.params) tp[k] = v;
      trials.push_back({{"params", tp}, {"objective", t.objective ? nlohmann::ordered_json(*t.objective) : nullptr}});
    }
    out.push_back({{"design", r.design},
                   {"platform", r.platform},
                   {"clock_period", r.clock_period},
                   {"default_power_area", r.default_objective},
                   {"best_power_area", r.best_objective},
                   {"ratio", r.default_objective / r.best_objective},
                   {"best_params", params},
                   {"evaluations", r.evaluations},
                   {"trials", trials}});
  }
  return out;
}

nlohmann::ordered_json quant_dump(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  const quantlab::Matrix w = quantlab::normal_matrix(rows, cols, seed);
  const auto nf4 = quantlab::quantize(w);
  const auto uni = quantlab::quantize(w, quantlab::uniform_codebook());
  const auto nf4_error = quantlab::relative_l2_error(quantlab::double_dequantize(nf4), w);
  const auto uni_error = quantlab::relative_l2_error(quantlab::double_dequantize(uni), w);
  nlohmann::ordered_json codebook = nlohmann::ordered_json::array();
  for (double v : quantlab::nf4_codebook()) codebook.push_back(v);
  nlohmann::ordered_json c1 = nlohmann::ordered_json::array();
  for (const auto& c : nf4.c1) c1.push_back({{"scale", c.scale}, {"zero_point", c.zero_point}});
  return {{"seed", seed},
          {"shape", quantlab::shape_string(rows, cols)},
          {"blocksize_w", quantlab::kBlockW},
          {"blocksize_c", quantlab::kBlockC},
          {"nf4_codebook", codebook},
          {"blocks", nf4.block_count()},
          {"c1", c1},
          {"c2_codes", nf4.c2_codes},
          {"relative_l2_error", {{"nf4", nf4_error}, {"uniform", uni_error}}}};
}

}  // namespace edagent::hub
