#pragma once

// Documentation demos behind `tune-demo` and `quant-dump`.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "edagent/dse/dse.hpp"
#include "edagent/flowsim/flowsim.hpp"

namespace edagent::hub {

struct TuneDemoRow {
  std::string design;
  std::string platform;
  double clock_period = 0.0;
  double default_objective = 0.0;  // final power * area at platform defaults
  double best_objective = 0.0;
  dse::ParamPoint best_params;
  std::size_t evaluations = 0;
  dse::TuneResult result;
};

/// Grid tuning of power * area over core_utilization [60,90]/5,
/// density [0.6,0.9]/0.05, tns_end_percent [30,50]/5 for gcd, aes, ibex and
/// jpeg on sky130 at clock periods 0.74, 0.82, 2.8 and 1.7.
std::vector<TuneDemoRow> tune_demo(const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

dse::ParamSpace tune_demo_space();

nlohmann::ordered_json tune_demo_to_json(const std::vector<TuneDemoRow>& rows);

/// Codebook constants and round-trip error of a seeded normal matrix.
nlohmann::ordered_json quant_dump(std::uint64_t seed = 1, std::size_t rows = 1, std::size_t cols = 64);

}  // namespace edagent::hub
