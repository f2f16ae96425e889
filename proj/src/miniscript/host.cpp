#include <algorithm>
#include <cmath>

#include "interp_impl.hpp"

namespace edagent::miniscript {

namespace {

using flowsim::StageId;

nlohmann::ordered_json metrics_json(const flowsim::MetricSet& m) {
  nlohmann::ordered_json j;
  j["area"] = m.area;
  j["power"] = m.power;
  j["wns"] = m.wns;
  j["tns"] = m.tns;
  return j;
}

flowsim::ParamValue to_param(Interpreter& in, const std::string& name, const Value& v, Span span) {
  if (v.is_int() || v.is_real()) return v.to_double();
  if (v.is_text()) return v.as_text();
  in.fault(FaultKind::TypeFault, span,
           "argument '" + name + "' must be a number or string, not " + std::string(type_name(v)));
}

// Maps positional arguments onto `names` and merges keywords; rejects
// duplicates and surplus positionals. Unknown keywords are left for the
// engine to reject.
std::vector<std::pair<std::string, Value>> name_arguments(Interpreter& in, const std::string& api,
                                                          const std::vector<std::string_view>& names,
                                                          CallArgs& args, Span span) {
  if (args.positional.size() > names.size()) {
    in.fault(FaultKind::TypeFault, span,
             api + "() takes at most " + std::to_string(names.size()) + " positional arguments (" +
                 std::to_string(args.positional.size()) + " given)");
  }
  std::vector<std::pair<std::string, Value>> named;
  for (std::size_t i = 0; i < args.positional.size(); ++i) {
    named.emplace_back(std::string(names[i]), std::move(args.positional[i]));
  }
  for (auto& [k, v] : args.keywords) {
    for (const auto& [existing, _] : named) {
      if (existing == k) {
        in.fault(FaultKind::TypeFault, span, api + "() got multiple values for argument '" + k + "'");
      }
    }
    named.emplace_back(k, std::move(v));
  }
  return named;
}

Value call_flow(Interpreter& in, const FlowHandlePtr& handle, const std::string& api, CallArgs& args,
                Span span) {
  const std::optional<StageId> stage = flowsim::stage_for_api(api);

  std::vector<std::string_view> names;
  if (api == "setup") {
    names = {"design_name", "platform"};
  } else if (api == "get_metric") {
    names = {"stage", "metrics"};
  } else {
    for (auto n : flowsim::stage_parameters(*stage)) names.push_back(n);
  }
  auto named = name_arguments(in, api, names, args, span);

  TraceEntry entry;
  entry.api = api;
  entry.session = handle->id;
  entry.span = span;
  entry.args = nlohmann::ordered_json::object();
  for (const auto& [k, v] : named) entry.args[k] = to_json(v);

  in.charge_flow_run(span);
  if (in.env().callbacks.on_api_start) in.env().callbacks.on_api_start(api, handle->id, entry.args);

  auto fail = [&](const flowsim::FlowError& e) {
    entry.ok = false;
    entry.error = e.what();
    in.record_trace(entry);
    throw RuntimeFault(FaultKind::FlowError, span, e.what(), e.kind());
  };
  auto fail_type = [&](const std::string& message) {
    entry.ok = false;
    entry.error = message;
    in.record_trace(entry);
    in.fault(FaultKind::TypeFault, span, message);
  };

  Value result;
  try {
    if (api == "setup") {
      std::string design;
      std::string platform;
      flowsim::ParamMap extra;
      for (const auto& [k, v] : named) {
        if (k == "design_name" || k == "platform") {
          if (!v.is_text()) fail_type("setup() argument '" + k + "' must be a string");
          (k == "design_name" ? design : platform) = v.as_text();
        } else {
          if (!v.is_text() && !v.is_number()) fail_type("setup() argument '" + k + "' has unsupported type");
          extra[k] = v.is_text() ? flowsim::ParamValue(v.as_text()) : flowsim::ParamValue(v.to_double());
        }
      }
      if (design.empty() || platform.empty()) fail_type("setup() requires design_name and platform");
      handle->session = flowsim::setup(*in.env().catalog, design, platform, extra);
      entry.result = metrics_json(*handle->session->stage_metrics(StageId::Setup));
    } else if (api == "get_metric") {
      const Value* stage_arg = nullptr;
      const Value* metrics_arg = nullptr;
      for (const auto& [k, v] : named) {
        if (k == "stage") {
          stage_arg = &v;
        } else if (k == "metrics") {
          metrics_arg = &v;
        } else {
          fail_type("get_metric() got an unexpected keyword argument '" + k + "'");
        }
      }
      if (!stage_arg || !metrics_arg) fail_type("get_metric() requires stage and metrics");
      if (!stage_arg->is_text()) fail_type("get_metric() stage must be a string");
      std::vector<std::string> metric_names;
      bool scalar_request = false;
      if (metrics_arg->is_text()) {
        metric_names.push_back(metrics_arg->as_text());
        scalar_request = true;
      } else if (metrics_arg->is_list()) {
        for (const auto& m : metrics_arg->as_list()->items) {
          if (!m.is_text()) fail_type("get_metric() metric names must be strings");
          metric_names.push_back(m.as_text());
        }
        if (metric_names.empty()) fail_type("get_metric() needs at least one metric name");
        scalar_request = metric_names.size() == 1;
      } else {
        fail_type("get_metric() metrics must be a list of strings");
      }
      if (!handle->session) throw flowsim::StageNotRun(stage_arg->as_text());
      const std::vector<double> values = flowsim::get_metric(*handle->session, stage_arg->as_text(), metric_names);
      entry.result = values;
      if (scalar_request) {
        result = Value(values.front());
      } else {
        auto list = make_list();
        for (double d : values) list->items.emplace_back(d);
        result = Value(list);
      }
    } else {
      flowsim::ParamMap params;
      for (const auto& [k, v] : named) {
        if (!v.is_text() && !(v.is_int() || v.is_real())) {
          fail_type("argument '" + k + "' must be a number or string, not " + std::string(type_name(v)));
        }
        params[k] = to_param(in, k, v, span);
      }
      if (!handle->session) throw flowsim::StageOrderViolation(StageId::Setup, *stage);
      flowsim::run_stage(*handle->session, *stage, params);
      entry.result = metrics_json(*handle->session->stage_metrics(*stage));
    }
  } catch (const flowsim::FlowError& e) {
    fail(e);
  }
  in.record_trace(std::move(entry));
  return result;
}

const std::vector<std::string>& flow_api_names() {
  static const std::vector<std::string> names = {
      "setup", "run_synthesis", "floorplan", "placement",   "cts",
      "global_route", "detail_route", "final_report", "get_metric"};
  return names;
}

std::optional<dse::ParamRange> read_range(const Value& spec) {
  if (!spec.is_map()) return std::nullopt;
  const Value* minmax = spec.as_map()->find("minmax");
  const Value* step = spec.as_map()->find("step");
  if (!minmax || !step || !minmax->is_list() || minmax->as_list()->items.size() != 2) return std::nullopt;
  const Value& lo = minmax->as_list()->items[0];
  const Value& hi = minmax->as_list()->items[1];
  if (!lo.is_number() || !hi.is_number() || !step->is_number()) return std::nullopt;
  dse::ParamRange r;
  r.min = lo.to_double();
  r.max = hi.to_double();
  r.step = step->to_double();
  r.integral = lo.is_int() && step->is_int();
  return r;
}

Value tune_builtin(Interpreter& in, CallArgs& args, Span span) {
  Value fn;
  Value space_value;
  Value budget_value;
  std::size_t pos = 0;
  for (auto& v : args.positional) {
    if (pos == 0) fn = v;
    else if (pos == 1) space_value = v;
    else if (pos == 2) budget_value = v;
    else in.fault(FaultKind::TypeFault, span, "tune() takes at most 3 positional arguments");
    ++pos;
  }
  for (auto& [k, v] : args.keywords) {
    Value* slot = nullptr;
    if (k == "func" || k == "fn" || k == "function") slot = &fn;
    else if (k == "param" || k == "param_space" || k == "params" || k == "space") slot = &space_value;
    else if (k == "budget") slot = &budget_value;
    else in.fault(FaultKind::TypeFault, span, "tune() got an unexpected keyword argument '" + k + "'");
    *slot = v;
  }
  if (!fn.is_function() && !fn.is_builtin()) {
    in.fault(FaultKind::TypeFault, span, "tune() needs a function to evaluate");
  }
  if (!space_value.is_map()) in.fault(FaultKind::TypeFault, span, "tune() parameter space must be a dict");

  dse::ParamSpace space;
  std::vector<bool> integral;
  try {
    for (const auto& [name, spec] : space_value.as_map()->entries) {
      auto range = read_range(spec);
      if (!range) {
        in.fault(FaultKind::TypeFault, span,
                 "tune() entry '" + name + "' must look like {\"minmax\": [lo, hi], \"step\": s}");
      }
      space.add(name, *range);
      integral.push_back(range->integral);
    }
  } catch (const dse::DseError& e) {
    in.fault(FaultKind::TypeFault, span, std::string("tune(): ") + e.what());
  }

  std::optional<std::size_t> budget;
  if (!budget_value.is_null()) {
    if (!budget_value.is_int() || budget_value.as_int() <= 0) {
      in.fault(FaultKind::TypeFault, span, "tune() budget must be a positive integer");
    }
    budget = static_cast<std::size_t>(budget_value.as_int());
  }

  auto eval = [&](const dse::ParamPoint& point) -> double {
    CallArgs call_args;
    for (std::size_t i = 0; i < point.size(); ++i) {
      const double v = point[i].second;
      if (integral[i]) {
        call_args.keywords.emplace_back(point[i].first, Value(static_cast<std::int64_t>(std::llround(v))));
      } else {
        call_args.keywords.emplace_back(point[i].first, Value(v));
      }
    }
    Value r;
    try {
      r = in.call(fn, call_args, span);
    } catch (const RuntimeFault& f) {
      if (f.kind() == FaultKind::StepBudgetExceeded || f.kind() == FaultKind::CallDepthExceeded) throw;
      throw dse::TrialFault(f.what());
    }
    if (r.is_list()) throw dse::TrialFault("objective must be a scalar, got a list");
    if (!r.is_number()) throw dse::TrialFault("objective must be a number, got " + std::string(type_name(r)));
    return r.to_double();
  };

  dse::TuneResult result;
  try {
    result = dse::tune(eval, space, budget);
  } catch (const dse::DseError& e) {
    in.fault(FaultKind::TypeFault, span, std::string("tune(): ") + e.what());
  }

  auto params = make_map();
  for (std::size_t i = 0; i < result.best.params.size(); ++i) {
    const auto& [name, v] = result.best.params[i];
    if (integral[i]) {
      params->set(name, Value(static_cast<std::int64_t>(std::llround(v))));
    } else {
      params->set(name, Value(v));
    }
  }
  auto out = make_map();
  out->set("params", Value(params));
  out->set("objective", Value(*result.best.objective));
  out->set("evaluations", Value(static_cast<std::int64_t>(result.evaluations)));

  TuningRecord record;
  for (const auto& [name, _] : space.axes()) record.axes.push_back(name);
  record.result = std::move(result);
  record.span = span;
  in.record_tuning(std::move(record));
  return Value(out);
}

}  // namespace

Value flow_method(Interpreter& in, const FlowHandlePtr& handle, const std::string& name, Span span) {
  const auto& names = flow_api_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    in.fault(FaultKind::TypeFault, span, "'chateda' object has no attribute '" + name + "'");
  }
  return Value(make_builtin("chateda." + name, [handle, name](Interpreter& in, CallArgs& args, Span sp) {
    return call_flow(in, handle, name, args, sp);
  }));
}

void install_host_builtins(Interpreter& in) {
  in.define_builtin("chateda", [](Interpreter& in, CallArgs& args, Span span) {
    if (!args.positional.empty() || !args.keywords.empty()) {
      in.fault(FaultKind::TypeFault, span, "chateda() takes no arguments");
    }
    return Value(in.new_handle());
  });
  in.define_builtin("tune", tune_builtin);
}

std::map<int, flowsim::FlowSession> replay_trace(const ApiTrace& trace, const flowsim::Catalog& catalog) {
  std::map<int, flowsim::FlowSession> sessions;
  auto param_of = [](const nlohmann::ordered_json& j) -> flowsim::ParamValue {
    if (j.is_string()) return j.get<std::string>();
    return j.get<double>();
  };
  for (const auto& e : trace) {
    if (!e.ok) continue;
    if (e.api == "setup") {
      flowsim::ParamMap extra;
      for (const auto& [k, v] : e.args.items()) {
        if (k != "design_name" && k != "platform") extra[k] = param_of(v);
      }
      sessions.insert_or_assign(e.session,
                                flowsim::setup(catalog, e.args.at("design_name").get<std::string>(),
                                               e.args.at("platform").get<std::string>(), extra));
    } else if (auto stage = flowsim::stage_for_api(e.api)) {
      flowsim::ParamMap params;
      for (const auto& [k, v] : e.args.items()) params[k] = param_of(v);
      flowsim::run_stage(sessions.at(e.session), *stage, params);
    }
  }
  return sessions;
}

}  // namespace edagent::miniscript
