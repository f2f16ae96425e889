#pragma once

// Instruction records <requirement, plan, script>: generation from
// templates, validation by execution, JSONL persistence, and rendering into
// training text with the response span marked.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edagent/agent/backend.hpp"
#include "edagent/miniscript/interpreter.hpp"

namespace edagent::bench {

enum class Origin { Generated, Manual };

struct InstructionRecord {
  std::string requirement;
  std::string plan;    // serialized plan block, empty when planning failed
  std::string script;  // script text, empty when codegen failed
  bool validated = false;
  Origin origin = Origin::Generated;
  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

/// First problem found: plan does not parse or validate, script does not
/// parse, execution faults, or the trace skips a planned stage.
std::optional<std::string> validate_record(const InstructionRecord& record,
                                           const miniscript::RuntimeLimits& limits = {},
                                           const flowsim::Catalog& catalog = flowsim::Catalog::builtin());

/// `count` records from category templates, categories in rotation, slots
/// drawn from a generator seeded by (seed, index). Records that fail
/// validation are kept with validated = false. Throws BackendUnreachable.
std::vector<InstructionRecord> generate_instructions(std::size_t count, agent::Backend& backend, std::uint64_t seed,
                                                     unsigned workers = 0,
                                                     const miniscript::RuntimeLimits& limits = {});

std::string record_to_json_line(const InstructionRecord& record);
std::string to_jsonl(const std::vector<InstructionRecord>& records);
/// Throws MalformedLine.
std::vector<InstructionRecord> from_jsonl(std::string_view text);
/// Throws IoFailure.
void export_jsonl(const std::vector<InstructionRecord>& records, const std::filesystem::path& path);
/// Throws IoFailure, MalformedLine.
std::vector<InstructionRecord> import_jsonl(const std::filesystem::path& path);

inline constexpr std::string_view kDefaultSeparator = "### RESPONSE ###";

/// Offsets count Unicode code points of the UTF-8 text.
struct TrainingSample {
  std::string text;
  std::size_t response_start = 0;
  std::size_t response_end = 0;
};

/// requirement + "\n" + separator + "\n" + response, where the response is
/// the plan block followed by the script block. Throws BenchError for an
/// unvalidated record, an empty separator, or a requirement containing it.
TrainingSample render_training_sample(const InstructionRecord& record,
                                      std::string_view separator = kDefaultSeparator);

/// Code-point substring of UTF-8 text.
std::string utf8_slice(std::string_view text, std::size_t start, std::size_t end);

}  // namespace edagent::bench
