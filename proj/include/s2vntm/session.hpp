#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "s2vntm/config.hpp"
#include "s2vntm/corpus.hpp"
#include "s2vntm/eval.hpp"

namespace s2vntm {

enum class SessionStatus { created, training, ready, finetuning, failed };

const char* to_string(SessionStatus s);
SessionStatus session_status_from(const std::string& s);  // throws FormatError

// created -> training -> ready -> (finetuning -> ready)*, and any -> failed.
bool transition_allowed(SessionStatus from, SessionStatus to);

enum class SeedEventKind { add, remove, confirm, new_group, remove_group };

const char* to_string(SeedEventKind k);

struct SeedEvent {
  long seq = 0;
  std::string time;  // UTC, ISO 8601
  SeedEventKind kind = SeedEventKind::add;
  std::string group;
  std::string term;  // empty for group events

  nlohmann::json to_json() const;
  static SeedEvent from_json(const nlohmann::json& j);
};

// Seed groups as term strings, rebuilt by replaying the event log.
class SeedState {
 public:
  // Throws BadRequest when the event does not apply (unknown group,
  // duplicate keyword, missing keyword).
  void apply(const SeedEvent& event);
  // Whether `apply` would succeed, without changing the state.
  void check(const SeedEvent& event) const;

  const std::vector<std::pair<std::string, std::vector<std::string>>>& groups() const { return groups_; }
  bool has_group(const std::string& label) const;
  // Throws VocabularyMismatch for a term outside the vocabulary.
  SeedSets resolve(const Vocabulary& vocab) const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> groups_;
};

struct SessionRecord {
  std::string id;
  std::string corpus_id;
  RunConfig config;
  SessionStatus status = SessionStatus::created;
  std::string error;
  std::string created_at;

  nlohmann::json to_json() const;
  static SessionRecord from_json(const nlohmann::json& j);
};

// Moves `record` to `to`; throws StateConflict for a disallowed transition.
void transition(SessionRecord& record, SessionStatus to);

// One directory per session:
//   session.json      record (rewritten atomically on every change)
//   seeds.jsonl       append-only seed event log
//   telemetry.jsonl   one line per training epoch
//   checkpoint.bin    latest trained model
//   metrics.json      latest EvalReport
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path checkpoint_path() const { return dir_ / "checkpoint.bin"; }

  void save_record(const SessionRecord& record) const;
  SessionRecord load_record() const;

  void append_event(const SeedEvent& event) const;
  std::vector<SeedEvent> load_events() const;

  void append_telemetry(const nlohmann::json& line) const;
  std::vector<nlohmann::json> load_telemetry() const;

  void save_metrics(const EvalReport& report) const;
  std::optional<EvalReport> load_metrics() const;

 private:
  std::filesystem::path dir_;
};

std::string utc_timestamp();

}  // namespace s2vntm
