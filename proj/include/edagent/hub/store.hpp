#pragma once

// Append-only session store. One newline-delimited JSON file per session
// under the data directory; the in-memory index is rebuilt from the files on
// open. An empty directory path keeps everything in memory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edagent/agent/pipeline.hpp"

namespace edagent::hub {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoredRun {
  std::string session;
  std::string run;
  std::string requirement_id;
  std::int64_t timestamp_ms = 0;
  agent::SessionReport report;
};

class SessionStore {
 public:
  /// Throws StoreError when the directory cannot be created or a file in it
  /// does not parse.
  explicit SessionStore(std::filesystem::path dir = {});

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::string create_session();
  bool has_session(const std::string& session) const;
  std::vector<std::string> sessions() const;

  /// Reserves the next run id of a session. Throws StoreError for an unknown
  /// session.
  std::string reserve_run(const std::string& session);

  /// Throws StoreError for an unknown session, an unreserved run id, a run
  /// that was already written, or a failed write.
  void append(const StoredRun& run);

  std::optional<StoredRun> get(const std::string& session, const std::string& run) const;
  std::vector<StoredRun> runs(const std::string& session) const;
  std::vector<StoredRun> by_requirement(const std::string& requirement_id) const;
  /// Runs with from_ms <= timestamp < to_ms, oldest first.
  std::vector<StoredRun> between(std::int64_t from_ms, std::int64_t to_ms) const;

 private:
  struct SessionIndex {
    int next_run = 1;
    std::map<std::string, StoredRun> runs;
  };

  void write_line(const std::string& session, const std::string& line);
  void load();

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  int next_session_ = 1;
  std::map<std::string, SessionIndex> sessions_;
};

std::int64_t now_ms();

}  // namespace edagent::hub
