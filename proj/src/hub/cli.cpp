#include "edagent/hub/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "edagent/agent/errors.hpp"
#include "edagent/bench/dataset.hpp"
#include "edagent/bench/errors.hpp"
#include "edagent/bench/suite.hpp"
#include "edagent/hub/config.hpp"
#include "edagent/hub/demo.hpp"
#include "edagent/hub/service.hpp"
#include "edagent/hub/store.hpp"
#include "edagent/miniscript/parser.hpp"

namespace edagent::hub {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInfraError = 2;

/// Raised for bad input the parser cannot catch (missing files and the like).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string backend_spec;

  std::string requirement;

  std::string suite = "builtin";
  std::string suite_json;
  unsigned workers = 0;

  std::size_t count = 1500;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string in_path;

  std::string csv_dir;
  bool json = false;

  std::uint64_t quant_seed = 1;
  std::size_t quant_rows = 1;
  std::size_t quant_cols = 64;

  std::string bind;
  int port = -1;
  std::string data_dir;

  std::string script_path;
};

HubConfig resolve_config(const Options& o) {
  HubConfig config;
  if (!o.config_path.empty()) config = load_config(o.config_path);
  if (!o.backend_spec.empty()) config.backend = agent::parse_backend_spec(o.backend_spec);
  if (o.workers != 0) config.workers = o.workers;
  if (o.port >= 0) config.port = o.port;
  if (!o.bind.empty()) config.bind = o.bind;
  if (!o.data_dir.empty()) config.data_dir = o.data_dir;
  return config;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v);
  return buf;
}

int cmd_run(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  auto backend = agent::make_backend(config.backend);
  const auto report = agent::run_requirement(agent::make_requirement(o.requirement), *backend, config.limits);
  out << agent::report_text(report);
  return kOk;
}

int cmd_repl(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  const HubConfig config = resolve_config(o);
  auto backend = agent::make_backend(config.backend);
  std::string line;
  err << "> " << std::flush;
  while (std::getline(in, line)) {
    if (line == ":quit" || line == ":q") break;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      const auto report = agent::run_requirement(agent::make_requirement(line), *backend, config.limits);
      out << agent::report_text(report) << std::flush;
    }
    err << "> " << std::flush;
  }
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  if (o.suite != "builtin" && !fs::exists(o.suite)) throw UsageError("suite file not found: " + o.suite);
  const auto suite = bench::load_suite(o.suite);
  auto backend = agent::make_backend(config.backend);
  const auto report = bench::run_suite(suite, *backend, config.limits, config.workers);
  if (!o.suite_json.empty()) {
    std::ofstream f(o.suite_json, std::ios::binary | std::ios::trunc);
    f << bench::suite_report_to_json(report).dump(2) << '\n';
    if (!f) throw bench::IoFailure("cannot write " + o.suite_json);
  }
  if (o.json) {
    out << bench::suite_report_to_json(report).dump(2) << '\n';
    return kOk;
  }
  out << "backend: " << report.backend << '\n';
  out << "cases: " << report.cases.size() << '\n';
  out << "A: " << percent(report.percent(bench::Grade::A)) << "  B: " << percent(report.percent(bench::Grade::B))
      << "  C: " << percent(report.percent(bench::Grade::C)) << '\n';
  for (auto cat : {bench::Category::FullFlow, bench::Category::GridSearch, bench::Category::Tuning,
                   bench::Category::CustomOpt, bench::Category::Feedback}) {
    const auto n = std::count_if(report.cases.begin(), report.cases.end(),
                                 [&](const bench::CaseResult& c) { return c.category == cat; });
    if (n == 0) continue;
    out << "  " << bench::category_name(cat) << " (" << n << "): A " << percent(report.percent(bench::Grade::A, cat))
        << "  B " << percent(report.percent(bench::Grade::B, cat)) << "  C "
        << percent(report.percent(bench::Grade::C, cat)) << '\n';
  }
  return kOk;
}

int cmd_dataset_gen(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  auto backend = agent::make_backend(config.backend);
  const auto records = bench::generate_instructions(o.count, *backend, o.seed, config.workers, config.limits);
  bench::export_jsonl(records, o.out_path);
  const auto validated = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.validated; });
  out << "records: " << records.size() << '\n'
      << "validated: " << validated << " ("
      << percent(100.0 * static_cast<double>(validated) / static_cast<double>(records.size())) << ")\n"
      << "wrote " << o.out_path << '\n';
  return kOk;
}

int cmd_dataset_check(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  if (!fs::exists(o.in_path)) throw UsageError("dataset file not found: " + o.in_path);
  const auto records = bench::import_jsonl(o.in_path);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto problem = bench::validate_record(records[i], config.limits)) {
      out << "record " << (i + 1) << ": " << *problem << '\n';
    } else {
      ++ok;
    }
  }
  out << "records: " << records.size() << "\nvalid: " << ok << '\n';
  return ok == records.size() ? kOk : kUserError;
}

int cmd_tune_demo(const Options& o, std::ostream& out) {
  const auto rows = tune_demo();
  if (!o.csv_dir.empty()) {
    fs::create_directories(o.csv_dir);
    for (const auto& r : rows) {
      const fs::path path = fs::path(o.csv_dir) / (r.design + "_" + r.platform + ".csv");
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      dse::write_trials_csv(f, tune_demo_space(), r.result);
      if (!f) throw bench::IoFailure("cannot write " + path.string());
    }
  }
  if (o.json) {
    out << tune_demo_to_json(rows).dump(2) << '\n';
    return kOk;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-8s %6s %14s %14s %7s %5s %5s %5s\n", "design", "platform", "clk",
                "default P*A", "tuned P*A", "ratio", "u", "d", "p");
  out << buf;
  double ratio_sum = 0.0;
  for (const auto& r : rows) {
    const double ratio = r.default_objective / r.best_objective;
    ratio_sum += ratio;
    std::snprintf(buf, sizeof buf, "%-6s %-8s %6.2f %14.4f %14.4f %7.4f %5g %5g %5g\n", r.design.c_str(),
                  r.platform.c_str(), r.clock_period, r.default_objective, r.best_objective, ratio,
                  r.best_params[0].second, r.best_params[1].second, r.best_params[2].second);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean default/tuned ratio: %.4f over %zu designs, %zu evaluations each\n",
                ratio_sum / static_cast<double>(rows.size()), rows.size(), rows.front().evaluations);
  out << buf;
  return kOk;
}

int cmd_quant_dump(const Options& o, std::ostream& out) {
  if (o.quant_rows == 0 || o.quant_cols == 0) throw UsageError("--rows and --cols must be positive");
  out << quant_dump(o.quant_seed, o.quant_rows, o.quant_cols).dump(2) << '\n';
  return kOk;
}

int cmd_exec(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  const auto program = miniscript::parse(read_file(o.script_path));
  const auto result = miniscript::interpret(program, {}, config.limits);
  nlohmann::ordered_json doc = {{"output", result.output},
                                {"trace", miniscript::trace_to_json(result.trace)},
                                {"fault", result.fault ? result.fault->to_json() : nlohmann::ordered_json(nullptr)},
                                {"steps", result.steps},
                                {"flow_runs", result.flow_runs}};
  out << doc.dump(2) << '\n';
  return result.ok() ? kOk : kUserError;
}

int cmd_serve(const Options& o, std::ostream& out) {
  const HubConfig config = resolve_config(o);
  SessionStore store(config.data_dir);
  RunManager manager(agent::make_backend(config.backend), store, config.limits);
  HubServer server(manager, config.workers);
  out << "serving on http://" << config.bind << ":" << config.port << " (data: " << config.data_dir.string() << ")"
      << std::endl;
  if (!server.listen(config.bind, config.port)) {
    throw HubError("cannot listen on " + config.bind + ":" + std::to_string(config.port));
  }
  return kOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"edagent: requirement-to-script agent over a simulated RTL-to-GDSII flow", "edagent"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config_path, "hub config file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--backend", o.backend_spec, "rule, rule:<variant> or remote:<url>");

  auto* run = app.add_subcommand("run", "plan, script and execute one requirement; prints the report JSON");
  run->add_option("-r,--requirement", o.requirement, "requirement text")->required();

  app.add_subcommand("repl", "read requirements line by line and print a report for each");

  auto* eval = app.add_subcommand("eval", "grade a backend on an evaluation suite");
  eval->add_option("--suite", o.suite, "\"builtin\" or a suite file")->capture_default_str();
  eval->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  eval->add_option("--report", o.suite_json, "also write the full JSON report here");
  eval->add_flag("--json", o.json, "print the JSON report instead of the summary");

  auto* dataset = app.add_subcommand("dataset", "instruction dataset tooling");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("gen", "generate and validate instruction records");
  gen->add_option("--count", o.count, "number of records")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", o.out_path, "output JSONL file")->required();
  gen->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  auto* check = dataset->add_subcommand("check", "re-validate every record of a JSONL file");
  check->add_option("--in", o.in_path, "input JSONL file")->required();

  auto* tune = app.add_subcommand("tune-demo", "grid-tune power*area for four designs against platform defaults");
  tune->add_option("--csv", o.csv_dir, "write per-design trial CSVs into this directory");
  tune->add_flag("--json", o.json, "print JSON with every trial");

  auto* quant = app.add_subcommand("quant-dump", "NF4 codebook and round-trip error of a seeded matrix");
  quant->add_option("--seed", o.quant_seed, "matrix seed")->capture_default_str();
  quant->add_option("--rows", o.quant_rows, "rows")->capture_default_str();
  quant->add_option("--cols", o.quant_cols, "columns")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "HTTP/JSON service with server-sent run events");
  serve->add_option("--port", o.port, "listen port (default 8080)")->check(CLI::Range(0, 65535));
  serve->add_option("--bind", o.bind, "listen address (default 127.0.0.1)");
  serve->add_option("--data", o.data_dir, "session store directory");
  serve->add_option("--workers", o.workers, "suite/dataset worker threads");

  auto* exec = app.add_subcommand("exec", "run a flow script and print output, trace and fault as JSON");
  exec->add_option("script", o.script_path, "script file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (app.got_subcommand("repl")) return cmd_repl(o, in, out, err);
    if (eval->parsed()) return cmd_eval(o, out);
    if (gen->parsed()) return cmd_dataset_gen(o, out);
    if (check->parsed()) return cmd_dataset_check(o, out);
    if (tune->parsed()) return cmd_tune_demo(o, out);
    if (quant->parsed()) return cmd_quant_dump(o, out);
    if (serve->parsed()) return cmd_serve(o, out);
    if (exec->parsed()) return cmd_exec(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const agent::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUserError;
  } catch (const agent::InvalidRequirement& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const miniscript::SyntaxError& e) {
    err << "syntax error: " << e.what() << '\n';
    return kUserError;
  } catch (const bench::MalformedLine& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const bench::InvalidSuite& e) {
    err << "invalid suite: " << e.what() << '\n';
    return kUserError;
  } catch (const bench::IoFailure& e) {
    err << "io error: " << e.what() << '\n';
    return kInfraError;
  } catch (const bench::BenchError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const agent::BackendUnreachable& e) {
    err << "backend unreachable: " << e.what() << '\n';
    return kInfraError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInfraError;
  }
  return kUserError;
}

}  // namespace edagent::hub
