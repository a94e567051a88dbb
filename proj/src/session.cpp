#include "s2vntm/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "s2vntm/corpus_io.hpp"
#include "s2vntm/errors.hpp"

namespace s2vntm {

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::created: return "created";
    case SessionStatus::training: return "training";
    case SessionStatus::ready: return "ready";
    case SessionStatus::finetuning: return "finetuning";
    case SessionStatus::failed: return "failed";
  }
  return "failed";
}

SessionStatus session_status_from(const std::string& s) {
  for (auto st : {SessionStatus::created, SessionStatus::training, SessionStatus::ready, SessionStatus::finetuning,
                  SessionStatus::failed})
    if (s == to_string(st)) return st;
  throw FormatError("unknown session status '" + s + "'");
}

bool transition_allowed(SessionStatus from, SessionStatus to) {
  using S = SessionStatus;
  if (to == S::failed) return from != S::failed;
  switch (from) {
    case S::created: return to == S::training;
    case S::training: return to == S::ready;
    case S::ready: return to == S::finetuning;
    case S::finetuning: return to == S::ready;
    case S::failed: return false;
  }
  return false;
}

void transition(SessionRecord& record, SessionStatus to) {
  if (!transition_allowed(record.status, to))
    throw StateConflict(std::string("session is ") + to_string(record.status) + ", cannot move to " + to_string(to));
  record.status = to;
}

const char* to_string(SeedEventKind k) {
  switch (k) {
    case SeedEventKind::add: return "add";
    case SeedEventKind::remove: return "remove";
    case SeedEventKind::confirm: return "confirm";
    case SeedEventKind::new_group: return "new_group";
    case SeedEventKind::remove_group: return "remove_group";
  }
  return "add";
}

namespace {

SeedEventKind seed_event_kind_from(const std::string& s) {
  for (auto k : {SeedEventKind::add, SeedEventKind::remove, SeedEventKind::confirm, SeedEventKind::new_group,
                 SeedEventKind::remove_group})
    if (s == to_string(k)) return k;
  throw FormatError("unknown seed event kind '" + s + "'");
}

}  // namespace

nlohmann::json SeedEvent::to_json() const {
  return {{"seq", seq}, {"time", time}, {"kind", to_string(kind)}, {"group", group}, {"term", term}};
}

SeedEvent SeedEvent::from_json(const nlohmann::json& j) {
  try {
    SeedEvent e;
    e.seq = j.at("seq").get<long>();
    e.time = j.at("time").get<std::string>();
    e.kind = seed_event_kind_from(j.at("kind").get<std::string>());
    e.group = j.at("group").get<std::string>();
    e.term = j.value("term", "");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad seed event: ") + ex.what());
  }
}

bool SeedState::has_group(const std::string& label) const {
  return std::any_of(groups_.begin(), groups_.end(), [&](const auto& g) { return g.first == label; });
}

void SeedState::check(const SeedEvent& e) const {
  SeedState copy = *this;
  copy.apply(e);
}

void SeedState::apply(const SeedEvent& e) {
  auto group = std::find_if(groups_.begin(), groups_.end(), [&](const auto& g) { return g.first == e.group; });
  switch (e.kind) {
    case SeedEventKind::new_group:
      if (e.group.empty()) throw BadRequest("group label must not be empty");
      if (group != groups_.end()) throw BadRequest("group '" + e.group + "' already exists");
      groups_.emplace_back(e.group, std::vector<std::string>{});
      return;
    case SeedEventKind::remove_group:
      if (group == groups_.end()) throw BadRequest("unknown group '" + e.group + "'");
      groups_.erase(group);
      return;
    default:
      break;
  }
  if (group == groups_.end()) throw BadRequest("unknown group '" + e.group + "'");
  auto& words = group->second;
  const auto it = std::find(words.begin(), words.end(), e.term);
  switch (e.kind) {
    case SeedEventKind::add:
      if (it != words.end()) throw BadRequest("'" + e.term + "' is already a keyword of '" + e.group + "'");
      words.push_back(e.term);
      break;
    case SeedEventKind::remove:
      if (it == words.end()) throw BadRequest("'" + e.term + "' is not a keyword of '" + e.group + "'");
      words.erase(it);
      break;
    case SeedEventKind::confirm:
      if (it == words.end()) throw BadRequest("'" + e.term + "' is not a keyword of '" + e.group + "'");
      break;
    default:
      break;
  }
}

SeedSets SeedState::resolve(const Vocabulary& vocab) const {
  SeedSets seeds;
  for (const auto& [label, words] : groups_) {
    SeedGroup g{label, {}};
    for (const auto& w : words) {
      const auto id = vocab.find(w);
      if (!id) throw VocabularyMismatch("'" + w + "' is not in the corpus vocabulary");
      g.keywords.push_back(*id);
    }
    seeds.groups.push_back(std::move(g));
  }
  return seeds;
}

nlohmann::json SeedState::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [label, words] : groups_) out.push_back({{"label", label}, {"keywords", words}});
  return out;
}

nlohmann::json SessionRecord::to_json() const {
  return {{"format_version", 1}, {"id", id},          {"corpus_id", corpus_id},
          {"config", s2vntm::to_json(config)}, {"status", to_string(status)}, {"error", error},
          {"created_at", created_at}};
}

SessionRecord SessionRecord::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) throw FormatError("unsupported session format");
    SessionRecord r;
    r.id = j.at("id").get<std::string>();
    r.corpus_id = j.at("corpus_id").get<std::string>();
    r.config = run_config_from_json(j.at("config"));
    r.status = session_status_from(j.at("status").get<std::string>());
    r.error = j.value("error", "");
    r.created_at = j.value("created_at", "");
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("bad session record: ") + ex.what());
  }
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void SessionStore::save_record(const SessionRecord& record) const {
  write_text_file_atomic(dir_ / "session.json", record.to_json().dump(2) + "\n");
}

SessionRecord SessionStore::load_record() const {
  try {
    return SessionRecord::from_json(nlohmann::json::parse(read_text_file(dir_ / "session.json")));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("corrupt session.json: ") + e.what());
  }
}

namespace {

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw FileUnreadable("cannot append to " + path.string());
  out << line << '\n';
  out.flush();
  if (!out) throw FileUnreadable("write failed for " + path.string());
}

// A torn final line (crash mid-append) is ignored; any other bad line is an error.
std::vector<nlohmann::json> read_lines(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  if (!std::filesystem::exists(path)) return out;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(nlohmann::json::parse(lines[i]));
    } catch (const nlohmann::json::parse_error&) {
      if (i + 1 == lines.size()) break;
      throw FormatError("corrupt line " + std::to_string(i + 1) + " in " + path.string());
    }
  }
  return out;
}

}  // namespace

void SessionStore::append_event(const SeedEvent& event) const { append_line(dir_ / "seeds.jsonl", event.to_json().dump()); }

std::vector<SeedEvent> SessionStore::load_events() const {
  std::vector<SeedEvent> events;
  for (const auto& j : read_lines(dir_ / "seeds.jsonl")) events.push_back(SeedEvent::from_json(j));
  return events;
}

void SessionStore::append_telemetry(const nlohmann::json& line) const { append_line(dir_ / "telemetry.jsonl", line.dump()); }

std::vector<nlohmann::json> SessionStore::load_telemetry() const { return read_lines(dir_ / "telemetry.jsonl"); }

void SessionStore::save_metrics(const EvalReport& report) const {
  write_text_file_atomic(dir_ / "metrics.json", report.to_json().dump(2) + "\n");
}

std::optional<EvalReport> SessionStore::load_metrics() const {
  const auto path = dir_ / "metrics.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return eval_report_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("corrupt metrics.json: ") + e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace s2vntm
