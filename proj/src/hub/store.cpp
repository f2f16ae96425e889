#include "edagent/hub/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace edagent::hub {

namespace fs = std::filesystem;

namespace {

std::string session_id(int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s-%04d", n);
  return buf;
}

std::string run_id(int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r-%04d", n);
  return buf;
}

int id_number(const std::string& id) {
  try {
    return id.size() > 2 ? std::stoi(id.substr(2)) : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create " + dir_.string() + ": " + ec.message());
  load();
}

void SessionStore::load() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ndjson") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::ordered_json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "session") {
          const std::string id = j.at("id").get<std::string>();
          sessions_[id];
          next_session_ = std::max(next_session_, id_number(id) + 1);
        } else if (type == "run") {
          StoredRun r;
          r.session = j.at("session").get<std::string>();
          r.run = j.at("run").get<std::string>();
          r.requirement_id = j.at("requirement_id").get<std::string>();
          r.timestamp_ms = j.at("timestamp").get<std::int64_t>();
          r.report = agent::report_from_json(j.at("report"));
          auto& s = sessions_[r.session];
          s.next_run = std::max(s.next_run, id_number(r.run) + 1);
          s.runs[r.run] = std::move(r);
        } else {
          throw StoreError("unknown record type \"" + type + "\"");
        }
      } catch (const StoreError& e) {
        throw StoreError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
      } catch (const std::exception& e) {
        throw StoreError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
}

void SessionStore::write_line(const std::string& session, const std::string& line) {
  if (dir_.empty()) return;
  const fs::path file = dir_ / (session + ".ndjson");
  std::ofstream out(file, std::ios::app | std::ios::binary);
  if (!out) throw StoreError("cannot open " + file.string());
  out << line << '\n';
  out.flush();
  if (!out) throw StoreError("write failed for " + file.string());
}

std::string SessionStore::create_session() {
  std::lock_guard lock(mu_);
  const std::string id = session_id(next_session_);
  const nlohmann::ordered_json j = {{"type", "session"}, {"id", id}, {"created", now_ms()}};
  write_line(id, j.dump());
  ++next_session_;
  sessions_[id];
  return id;
}

bool SessionStore::has_session(const std::string& session) const {
  std::lock_guard lock(mu_);
  return sessions_.count(session) > 0;
}

std::vector<std::string> SessionStore::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::string SessionStore::reserve_run(const std::string& session) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session);
  if (it == sessions_.end()) throw StoreError("unknown session " + session);
  return run_id(it->second.next_run++);
}

void SessionStore::append(const StoredRun& run) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(run.session);
  if (it == sessions_.end()) throw StoreError("unknown session " + run.session);
  if (id_number(run.run) <= 0 || id_number(run.run) >= it->second.next_run) {
    throw StoreError("run " + run.run + " was not reserved");
  }
  if (it->second.runs.count(run.run)) throw StoreError("run " + run.session + "/" + run.run + " already written");
  const nlohmann::ordered_json j = {{"type", "run"},
                                    {"session", run.session},
                                    {"run", run.run},
                                    {"requirement_id", run.requirement_id},
                                    {"timestamp", run.timestamp_ms},
                                    {"report", agent::report_to_json(run.report)}};
  write_line(run.session, j.dump());
  it->second.runs.emplace(run.run, run);
}

std::optional<StoredRun> SessionStore::get(const std::string& session, const std::string& run) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session);
  if (it == sessions_.end()) return std::nullopt;
  auto r = it->second.runs.find(run);
  if (r == it->second.runs.end()) return std::nullopt;
  return r->second;
}

std::vector<StoredRun> SessionStore::runs(const std::string& session) const {
  std::lock_guard lock(mu_);
  std::vector<StoredRun> out;
  auto it = sessions_.find(session);
  if (it == sessions_.end()) return out;
  for (const auto& [_, r] : it->second.runs) out.push_back(r);
  return out;
}

std::vector<StoredRun> SessionStore::by_requirement(const std::string& requirement_id) const {
  std::lock_guard lock(mu_);
  std::vector<StoredRun> out;
  for (const auto& [_, s] : sessions_) {
    for (const auto& [__, r] : s.runs) {
      if (r.requirement_id == requirement_id) out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StoredRun& a, const StoredRun& b) { return a.timestamp_ms < b.timestamp_ms; });
  return out;
}

std::vector<StoredRun> SessionStore::between(std::int64_t from_ms, std::int64_t to_ms) const {
  std::lock_guard lock(mu_);
  std::vector<StoredRun> out;
  for (const auto& [_, s] : sessions_) {
    for (const auto& [__, r] : s.runs) {
      if (r.timestamp_ms >= from_ms && r.timestamp_ms < to_ms) out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StoredRun& a, const StoredRun& b) { return a.timestamp_ms < b.timestamp_ms; });
  return out;
}

}  // namespace edagent::hub
