#include "edagent/bench/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "edagent/agent/errors.hpp"
#include "edagent/agent/pipeline.hpp"
#include "edagent/bench/errors.hpp"
#include "edagent/bench/templates.hpp"
#include "edagent/miniscript/parser.hpp"

namespace edagent::bench {

namespace {

constexpr std::array<Category, 5> kRotation = {Category::FullFlow, Category::GridSearch, Category::Tuning,
                                               Category::CustomOpt, Category::Feedback};

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string response_text(const InstructionRecord& r) {
  std::string out = r.plan;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "```script\n" + r.script;
  if (!r.script.empty() && r.script.back() != '\n') out += '\n';
  return out + "```\n";
}

InstructionRecord make_record(const Draft& draft, agent::Backend& backend, const miniscript::RuntimeLimits& limits) {
  InstructionRecord rec;
  rec.requirement = draft.text;
  const agent::SessionReport report = agent::prepare_run(agent::make_requirement(draft.text), backend);
  if (report.plan) rec.plan = agent::serialize_plan(*report.plan);
  if (report.script) rec.script = *report.script;
  rec.validated = report.plan && report.script && !validate_record(rec, limits);
  return rec;
}

}  // namespace

std::optional<std::string> validate_record(const InstructionRecord& record, const miniscript::RuntimeLimits& limits,
                                           const flowsim::Catalog& catalog) {
  if (record.requirement.find_first_not_of(" \t\r\n") == std::string::npos) return "empty requirement";
  agent::Plan plan;
  try {
    plan = agent::parse_plan(record.plan);
  } catch (const agent::PlanParseError& e) {
    return "plan does not parse: " + e.detail();
  }
  if (auto v = agent::plan_violation(plan)) return "plan invalid: " + *v;
  miniscript::Program program;
  try {
    program = miniscript::parse(record.script);
  } catch (const miniscript::SyntaxError& e) {
    return std::string("script does not parse: ") + e.what();
  }
  const auto result = miniscript::interpret(program, miniscript::HostEnv{&catalog, {}}, limits);
  if (result.fault) {
    return "script faults: " + std::string(miniscript::fault_kind_name(result.fault->kind())) + ": " +
           result.fault->message();
  }
  if (!agent::trace_follows_plan(plan, miniscript::extract_api_sequence(result.trace))) {
    return "trace does not follow the plan";
  }
  return std::nullopt;
}

std::vector<InstructionRecord> generate_instructions(std::size_t count, agent::Backend& backend, std::uint64_t seed,
                                                     unsigned workers, const miniscript::RuntimeLimits& limits) {
  if (count == 0) throw BenchError("count must be at least 1");
  std::vector<InstructionRecord> out(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(seq);
        out[i] = make_record(draft_requirement(kRotation[i % kRotation.size()], rng), backend, limits);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::string record_to_json_line(const InstructionRecord& r) {
  const nlohmann::ordered_json j = {{"requirement", r.requirement},
                                    {"plan", r.plan},
                                    {"script", r.script},
                                    {"validated", r.validated},
                                    {"origin", r.origin == Origin::Generated ? "generated" : "manual"}};
  return j.dump();
}

std::string to_jsonl(const std::vector<InstructionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json_line(r) + "\n";
  return out;
}

std::vector<InstructionRecord> from_jsonl(std::string_view text) {
  std::vector<InstructionRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      InstructionRecord r;
      r.requirement = j.at("requirement").get<std::string>();
      r.plan = j.at("plan").get<std::string>();
      r.script = j.at("script").get<std::string>();
      r.validated = j.at("validated").get<bool>();
      const std::string origin = j.at("origin").get<std::string>();
      if (origin == "generated") {
        r.origin = Origin::Generated;
      } else if (origin == "manual") {
        r.origin = Origin::Manual;
      } else {
        throw MalformedLine(line_no, "unknown origin \"" + origin + "\"");
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
  }
  return out;
}

void export_jsonl(const std::vector<InstructionRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << to_jsonl(records);
  out.flush();
  if (!out) throw IoFailure("write failed for " + path.string());
}

std::vector<InstructionRecord> import_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

TrainingSample render_training_sample(const InstructionRecord& record, std::string_view separator) {
  if (!record.validated) throw BenchError("record is not validated");
  if (separator.empty()) throw BenchError("separator must not be empty");
  if (record.requirement.find(separator) != std::string::npos) {
    throw BenchError("requirement contains the separator");
  }
  TrainingSample s;
  s.text = record.requirement + "\n" + std::string(separator) + "\n";
  s.response_start = code_points(s.text);
  s.text += response_text(record);
  s.response_end = code_points(s.text);
  return s;
}

std::string utf8_slice(std::string_view text, std::size_t start, std::size_t end) {
  std::size_t cp = 0;
  std::size_t from = text.size();
  std::size_t to = text.size();
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool boundary = i == text.size() || (static_cast<unsigned char>(text[i]) & 0xC0) != 0x80;
    if (!boundary) continue;
    if (cp == start) from = i;
    if (cp == end) {
      to = i;
      break;
    }
    ++cp;
  }
  if (from > to) return {};
  return std::string(text.substr(from, to - from));
}

}  // namespace edagent::bench
