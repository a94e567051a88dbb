#include "s2vntm/workbench.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <random>
#include <regex>
#include <thread>

#include "s2vntm/checkpoint.hpp"
#include "s2vntm/corpus_io.hpp"
#include "s2vntm/errors.hpp"
#include "s2vntm/eval.hpp"
#include "s2vntm/trainer.hpp"

namespace s2vntm {

using nlohmann::json;

int http_status_for(const std::exception& e) {
  if (dynamic_cast<const NotFound*>(&e)) return 404;
  if (dynamic_cast<const StateConflict*>(&e)) return 409;
  if (dynamic_cast<const VocabularyMismatch*>(&e) || dynamic_cast<const InvalidSeeds*>(&e) ||
      dynamic_cast<const ClassEmpty*>(&e) || dynamic_cast<const NoMatchedTopics*>(&e))
    return 422;
  if (dynamic_cast<const BadRequest*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const json::exception*>(&e))
    return 400;
  return 500;
}

void save_registered_corpus(const std::filesystem::path& dir, const Corpus& corpus, const TokenRules& rules,
                            const EmbeddingMatrix& embeddings) {
  if (embeddings.vocab_hash() != corpus.vocabulary.hash())
    throw VocabularyMismatch("embeddings were built for a different vocabulary");
  save_corpus_bundle(dir, corpus, rules);
  save_embeddings_binary(dir / "embeddings.bin", embeddings);
}

RegisteredCorpus load_registered_corpus(const std::filesystem::path& dir, const std::string& id) {
  RegisteredCorpus rc;
  rc.id = id;
  rc.corpus = load_corpus_bundle(dir);
  rc.rules = load_bundle_rules(dir);
  rc.embeddings = std::make_shared<const EmbeddingMatrix>(load_embeddings_binary(dir / "embeddings.bin"));
  if (rc.embeddings->vocab_hash() != rc.corpus.vocabulary.hash())
    throw VocabularyMismatch("embeddings.bin does not belong to corpus '" + id + "'");
  return rc;
}

namespace {

struct JobCancelled {};

struct Snapshot {
  SessionRecord record;
  SeedState seeds;
  std::vector<SeedEvent> history;
  std::optional<EvalReport> metrics;
  std::vector<json> telemetry;
  std::shared_ptr<const TopicModel> model;
};

void check_identifier(const std::string& id, const char* what) {
  static const std::regex pattern("[A-Za-z0-9][A-Za-z0-9_.-]{0,63}");
  if (!std::regex_match(id, pattern)) throw BadRequest(std::string("invalid ") + what + " '" + id + "'");
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng(std::random_device{}());
  std::lock_guard lock(m);
  char buf[24];
  std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

const json& require(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) throw BadRequest(std::string("missing field '") + key + "'");
  return body.at(key);
}

// Accepts [group, term] pairs or {"group": ..., "term": ...} objects.
std::vector<std::pair<std::string, std::string>> parse_pairs(const json& body, const char* key) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!body.contains(key)) return out;
  const json& list = body.at(key);
  if (!list.is_array()) throw BadRequest(std::string("'") + key + "' must be an array");
  for (const auto& item : list) {
    if (item.is_array() && item.size() == 2 && item[0].is_string() && item[1].is_string())
      out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
    else if (item.is_object() && item.contains("group") && item.contains("term") && item["group"].is_string() &&
             item["term"].is_string())
      out.emplace_back(item["group"].get<std::string>(), item["term"].get<std::string>());
    else
      throw BadRequest(std::string("entries of '") + key + "' must be [group, term] pairs");
  }
  return out;
}

std::vector<std::string> parse_labels(const json& body, const char* key) {
  std::vector<std::string> out;
  if (!body.contains(key)) return out;
  const json& list = body.at(key);
  if (!list.is_array()) throw BadRequest(std::string("'") + key + "' must be an array");
  for (const auto& item : list) {
    if (!item.is_string()) throw BadRequest(std::string("entries of '") + key + "' must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

struct Workbench::Runtime {
  explicit Runtime(std::filesystem::path dir) : store(std::move(dir)) {}

  std::mutex mutex;  // serializes mutations; guards `state` and `worker`
  SessionStore store;
  Snapshot state;
  std::thread worker;

  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const Snapshot> snapshot = std::make_shared<const Snapshot>();

  void publish() {
    auto s = std::make_shared<const Snapshot>(state);
    std::lock_guard lock(snapshot_mutex);
    snapshot = std::move(s);
  }
  std::shared_ptr<const Snapshot> view() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }
  long next_event_seq() const { return state.history.empty() ? 1 : state.history.back().seq + 1; }
};

Workbench::Workbench(WorkbenchOptions options) : options_(std::move(options)) {
  if (options_.root.empty()) throw ConfigError("workbench root directory is required");
  std::filesystem::create_directories(options_.root / "corpora");
  std::filesystem::create_directories(options_.root / "sessions");
  load_existing_sessions();
}

Workbench::~Workbench() {
  stopping_ = true;
  std::vector<std::shared_ptr<Runtime>> all;
  {
    std::lock_guard lock(registry_mutex_);
    for (auto& [id, rt] : sessions_) all.push_back(rt);
  }
  for (auto& rt : all) {
    std::thread worker;
    {
      std::lock_guard lock(rt->mutex);
      worker = std::move(rt->worker);
    }
    if (worker.joinable()) worker.join();
  }
}

void Workbench::register_corpus(const std::string& id, const Corpus& corpus, const TokenRules& rules,
                                const EmbeddingMatrix& embeddings) {
  check_identifier(id, "corpus id");
  const auto dir = options_.root / "corpora" / id;
  save_registered_corpus(dir, corpus, rules, embeddings);
  auto entry = std::make_shared<RegisteredCorpus>();
  entry->id = id;
  entry->corpus = corpus;
  entry->rules = rules;
  entry->embeddings = std::make_shared<const EmbeddingMatrix>(embeddings);
  std::lock_guard lock(registry_mutex_);
  corpora_[id] = std::move(entry);
}

json Workbench::list_corpora() const {
  json out = json::array();
  for (const auto& entry : std::filesystem::directory_iterator(options_.root / "corpora"))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "corpus.json"))
      out.push_back(entry.path().filename().string());
  std::sort(out.begin(), out.end());
  return {{"schema_version", kApiSchemaVersion}, {"corpora", out}};
}

std::shared_ptr<const RegisteredCorpus> Workbench::corpus(const std::string& id) const {
  check_identifier(id, "corpus id");
  {
    std::lock_guard lock(registry_mutex_);
    if (auto it = corpora_.find(id); it != corpora_.end()) return it->second;
  }
  const auto dir = options_.root / "corpora" / id;
  if (!std::filesystem::exists(dir / "corpus.json")) throw NotFound("unknown corpus '" + id + "'");
  auto entry = std::make_shared<const RegisteredCorpus>(load_registered_corpus(dir, id));
  std::lock_guard lock(registry_mutex_);
  return corpora_.emplace(id, std::move(entry)).first->second;
}

std::shared_ptr<Workbench::Runtime> Workbench::runtime(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

void Workbench::load_existing_sessions() {
  for (const auto& entry : std::filesystem::directory_iterator(options_.root / "sessions")) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "session.json")) continue;
    try {
      auto rt = std::make_shared<Runtime>(entry.path());
      rt->state.record = rt->store.load_record();
      rt->state.history = rt->store.load_events();
      for (const auto& e : rt->state.history) rt->state.seeds.apply(e);
      rt->state.telemetry = rt->store.load_telemetry();
      rt->state.metrics = rt->store.load_metrics();
      if (std::filesystem::exists(rt->store.checkpoint_path())) {
        const auto rc = corpus(rt->state.record.corpus_id);
        rt->state.model = std::make_shared<const TopicModel>(
            load_checkpoint(rt->store.checkpoint_path(), rc->embeddings).model);
      }
      rt->publish();
      {
        std::lock_guard lock(registry_mutex_);
        sessions_[rt->state.record.id] = rt;
      }
      if (!options_.resume_jobs) continue;
      std::lock_guard lock(rt->mutex);
      const auto status = rt->state.record.status;
      if (status == SessionStatus::training) {
        start_job(rt, false);
      } else if (status == SessionStatus::finetuning) {
        if (rt->state.model) {
          start_job(rt, true);
        } else {
          rt->state.record.error = "fine-tune interrupted and no checkpoint to resume from";
          transition(rt->state.record, SessionStatus::failed);
          rt->store.save_record(rt->state.record);
          rt->publish();
        }
      }
    } catch (const std::exception& e) {
      std::cerr << "skipping session " << entry.path().filename().string() << ": " << e.what() << "\n";
    }
  }
}

json Workbench::create_session(const json& body) {
  if (!body.is_object()) throw BadRequest("request body must be a JSON object");
  const json& corpus_field = require(body, "corpus_id");
  if (!corpus_field.is_string()) throw BadRequest("'corpus_id' must be a string");
  const auto rc = corpus(corpus_field.get<std::string>());
  const Corpus& c = rc->corpus;

  RunConfig config;
  bool topics_given = false;
  if (body.contains("config")) {
    config = run_config_from_json(body.at("config"));
    const json& cj = body.at("config");
    topics_given = cj.contains("model") && cj.at("model").contains("num_topics");
  }

  SeedState seeds;
  std::vector<SeedEvent> events;
  auto add_event = [&](SeedEventKind kind, const std::string& group, const std::string& term) {
    SeedEvent e{static_cast<long>(events.size()) + 1, utc_timestamp(), kind, group, term};
    seeds.apply(e);
    events.push_back(std::move(e));
  };
  if (body.contains("seeds")) {
    const json& list = body.at("seeds");
    if (!list.is_array()) throw BadRequest("'seeds' must be an array of {label, keywords}");
    for (const auto& g : list) {
      if (!g.is_object() || !g.contains("label") || !g.contains("keywords") || !g["label"].is_string() ||
          !g["keywords"].is_array() || g["keywords"].empty())
        throw BadRequest("each seed group needs a label and a non-empty keyword list");
      const auto label = g["label"].get<std::string>();
      add_event(SeedEventKind::new_group, label, "");
      for (const auto& k : g["keywords"]) {
        if (!k.is_string()) throw BadRequest("keywords must be strings");
        if (!c.vocabulary.find(k.get<std::string>()))
          throw VocabularyMismatch("'" + k.get<std::string>() + "' is not in the corpus vocabulary");
        add_event(SeedEventKind::add, label, k.get<std::string>());
      }
    }
  } else {
    auto train = c.indices(Split::train);
    if (train.empty()) train.resize(c.documents.size()), std::iota(train.begin(), train.end(), 0);
    for (const auto& g : derive_seed_keywords(c, train).groups) {
      add_event(SeedEventKind::new_group, g.label, "");
      for (TermId id : g.keywords) add_event(SeedEventKind::add, g.label, c.vocabulary.term(id));
    }
  }

  if (!topics_given) {
    const int classes = static_cast<int>(c.class_names.size());
    config.model.num_topics = (classes > 0 ? classes : static_cast<int>(seeds.groups().size())) + 1;
  }
  config.model.vocab_size = static_cast<int>(c.vocabulary.size());
  config.model.embed_dim = static_cast<int>(rc->embeddings->dim());
  config.train.checkpoint_every = 0;
  config.train.checkpoint_path.clear();
  if (static_cast<int>(seeds.groups().size()) > config.model.num_topics)
    throw BadRequest("more seed groups than topics");
  if (config.model.num_topics < 2) throw BadRequest("num_topics must be >= 2");
  seeds.resolve(c.vocabulary).validate(c.vocabulary, config.model.num_topics);

  const std::string id = new_session_id();
  auto rt = std::make_shared<Runtime>(options_.root / "sessions" / id);
  std::lock_guard lock(rt->mutex);
  rt->state.record.id = id;
  rt->state.record.corpus_id = rc->id;
  rt->state.record.config = config;
  rt->state.record.created_at = utc_timestamp();
  rt->store.save_record(rt->state.record);
  for (const auto& e : events) rt->store.append_event(e);
  rt->state.seeds = seeds;
  rt->state.history = events;
  transition(rt->state.record, SessionStatus::training);
  rt->store.save_record(rt->state.record);
  rt->publish();
  {
    std::lock_guard reg(registry_mutex_);
    sessions_[id] = rt;
  }
  start_job(rt, false);
  return {{"schema_version", kApiSchemaVersion}, {"session_id", id}, {"status", to_string(rt->state.record.status)}};
}

// Caller holds rt->mutex.
void Workbench::start_job(const std::shared_ptr<Runtime>& rt, bool finetune) {
  if (rt->worker.joinable()) rt->worker.join();
  rt->worker = std::thread([this, rt, finetune] { run_job(rt, finetune); });
}

void Workbench::run_job(std::shared_ptr<Runtime> rt, bool finetune) {
  try {
    SeedSets seeds;
    RunConfig config;
    std::shared_ptr<const TopicModel> base;
    std::shared_ptr<const RegisteredCorpus> rc;
    {
      std::lock_guard lock(rt->mutex);
      rc = corpus(rt->state.record.corpus_id);
      seeds = rt->state.seeds.resolve(rc->corpus.vocabulary);
      config = rt->state.record.config;
      base = rt->state.model;
      if (!finetune) {
        rt->state.telemetry.clear();
        std::filesystem::remove(rt->store.dir() / "telemetry.jsonl");
        rt->publish();
      }
    }
    const char* phase = finetune ? "finetune" : "fit";
    auto on_epoch = [&](const EpochTelemetry& t, const TopicModel&) {
      if (stopping_) throw JobCancelled{};
      json line = to_json(t);
      line["phase"] = phase;
      std::lock_guard lock(rt->mutex);
      rt->store.append_telemetry(line);
      rt->state.telemetry.push_back(std::move(line));
      rt->publish();
    };

    FitResult result = finetune ? fine_tune(*base, rc->corpus, seeds, config.train, on_epoch)
                                : fit(rc->corpus, seeds, config.model, config.train, rc->embeddings, on_epoch);
    save_checkpoint(rt->store.checkpoint_path(), result.model, seeds, rc->corpus.vocabulary.hash());

    std::optional<EvalReport> metrics;
    try {
      auto docs = rc->corpus.indices(Split::test);
      if (docs.empty()) docs.resize(rc->corpus.documents.size()), std::iota(docs.begin(), docs.end(), 0);
      metrics = evaluate(rc->corpus, docs, result.model, seeds, config.eval);
    } catch (const Error&) {
      // unlabelled corpus or seed labels that name no class: no metrics
    }

    std::lock_guard lock(rt->mutex);
    rt->state.model = std::make_shared<const TopicModel>(std::move(result.model));
    if (metrics) {
      rt->store.save_metrics(*metrics);
      rt->state.metrics = metrics;
    }
    rt->state.record.error.clear();
    transition(rt->state.record, SessionStatus::ready);
    rt->store.save_record(rt->state.record);
    rt->publish();
  } catch (const JobCancelled&) {
    // shutdown: the on-disk status still says training/finetuning, so a restart resumes the job
  } catch (const std::exception& e) {
    std::lock_guard lock(rt->mutex);
    rt->state.record.error = e.what();
    if (transition_allowed(rt->state.record.status, SessionStatus::failed))
      transition(rt->state.record, SessionStatus::failed);
    rt->store.save_record(rt->state.record);
    rt->publish();
  }
}

json Workbench::list_sessions() const {
  json out = json::array();
  std::vector<std::shared_ptr<Runtime>> all;
  {
    std::lock_guard lock(registry_mutex_);
    for (const auto& [id, rt] : sessions_) all.push_back(rt);
  }
  for (const auto& rt : all) {
    const auto s = rt->view();
    out.push_back({{"session_id", s->record.id}, {"corpus_id", s->record.corpus_id}, {"status", to_string(s->record.status)}});
  }
  return {{"schema_version", kApiSchemaVersion}, {"sessions", out}};
}

json Workbench::get_session(const std::string& id) const {
  const auto s = runtime(id)->view();
  constexpr std::size_t kTail = 10;
  const std::size_t from = s->telemetry.size() > kTail ? s->telemetry.size() - kTail : 0;
  json tail = json::array();
  for (std::size_t i = from; i < s->telemetry.size(); ++i) tail.push_back(s->telemetry[i]);
  return {{"schema_version", kApiSchemaVersion},
          {"session_id", s->record.id},
          {"corpus_id", s->record.corpus_id},
          {"status", to_string(s->record.status)},
          {"error", s->record.error},
          {"created_at", s->record.created_at},
          {"config", to_json(s->record.config)},
          {"seeds", s->seeds.to_json()},
          {"history_length", s->history.size()},
          {"has_model", static_cast<bool>(s->model)},
          {"metrics", s->metrics ? s->metrics->to_json() : json(nullptr)},
          {"telemetry_length", s->telemetry.size()},
          {"telemetry_tail", tail}};
}

json Workbench::keywords(const std::string& id) const {
  const auto s = runtime(id)->view();
  json history = json::array();
  for (const auto& e : s->history) history.push_back(e.to_json());
  return {{"schema_version", kApiSchemaVersion}, {"session_id", id}, {"seeds", s->seeds.to_json()}, {"history", history}};
}

json Workbench::topics(const std::string& id, int top) const {
  if (top < 1) throw BadRequest("'top' must be >= 1");
  const auto s = runtime(id)->view();
  if (!s->model) throw StateConflict("session has no trained model yet");
  const auto rc = corpus(s->record.corpus_id);
  const Vocabulary& vocab = rc->corpus.vocabulary;
  const DecoderState decoder = decode(*s->model);
  const SeedSets seeds = s->seeds.resolve(vocab);
  std::optional<MatchResult> match;
  if (!seeds.groups.empty()) match = match_topics(seeds, decoder.log_beta, s->model->config().match_includes_own_group);

  json topics = json::array();
  for (int t = 0; t < s->model->num_topics(); ++t) {
    json words = json::array();
    for (const auto& [term, p] : top_words(decoder, t, top)) words.push_back({{"term", vocab.term(term)}, {"prob", p}});
    json groups = json::array();
    json owner = nullptr;
    if (match) {
      for (std::size_t g = 0; g < match->assignments.size(); ++g)
        if (match->assignments[g] == t) groups.push_back(seeds.groups[g].label);
      if (const int o = match->owner_of(t); o >= 0) owner = seeds.groups[static_cast<std::size_t>(o)].label;
    }
    topics.push_back({{"topic", t}, {"words", words}, {"groups", groups}, {"label", owner}});
  }
  json merged = json::array();
  if (match)
    for (const auto& set : match->merged) {
      json labels = json::array();
      for (std::size_t g : set) labels.push_back(seeds.groups[g].label);
      merged.push_back(labels);
    }
  return {{"schema_version", kApiSchemaVersion}, {"session_id", id}, {"status", to_string(s->record.status)},
          {"topics", topics}, {"merged", merged}};
}

json Workbench::edit_keywords(const std::string& id, const json& body) {
  if (!body.is_object()) throw BadRequest("request body must be a JSON object");
  for (const auto& [key, value] : body.items())
    if (key != "add" && key != "remove" && key != "confirm" && key != "new_groups" && key != "remove_groups")
      throw BadRequest("unknown field '" + key + "'");
  const auto new_groups = parse_labels(body, "new_groups");
  const auto adds = parse_pairs(body, "add");
  const auto removes = parse_pairs(body, "remove");
  const auto confirms = parse_pairs(body, "confirm");
  const auto remove_groups = parse_labels(body, "remove_groups");

  auto rt = runtime(id);
  const auto rc = corpus(rt->view()->record.corpus_id);
  std::lock_guard lock(rt->mutex);
  const auto status = rt->state.record.status;
  if (status == SessionStatus::training || status == SessionStatus::finetuning)
    throw StateConflict(std::string("session is ") + to_string(status) + "; keyword edits must wait");

  for (const auto& [group, term] : adds)
    if (!rc->corpus.vocabulary.find(term)) throw VocabularyMismatch("'" + term + "' is not in the corpus vocabulary");

  SeedState next = rt->state.seeds;
  std::vector<SeedEvent> events;
  long seq = rt->next_event_seq();
  const std::string now = utc_timestamp();
  auto stage = [&](SeedEventKind kind, const std::string& group, const std::string& term) {
    SeedEvent e{seq++, now, kind, group, term};
    next.apply(e);
    events.push_back(std::move(e));
  };
  for (const auto& g : new_groups) stage(SeedEventKind::new_group, g, "");
  for (const auto& [g, t] : adds) stage(SeedEventKind::add, g, t);
  for (const auto& [g, t] : removes) stage(SeedEventKind::remove, g, t);
  for (const auto& [g, t] : confirms) stage(SeedEventKind::confirm, g, t);
  for (const auto& g : remove_groups) stage(SeedEventKind::remove_group, g, "");

  for (const auto& [label, words] : next.groups())
    if (words.empty()) throw BadRequest("group '" + label + "' would have no keywords");
  if (static_cast<int>(next.groups().size()) > rt->state.record.config.model.num_topics)
    throw BadRequest("more seed groups than topics");

  for (const auto& e : events) rt->store.append_event(e);
  rt->state.seeds = std::move(next);
  rt->state.history.insert(rt->state.history.end(), events.begin(), events.end());
  rt->publish();
  return {{"schema_version", kApiSchemaVersion},
          {"session_id", id},
          {"seeds", rt->state.seeds.to_json()},
          {"events_added", events.size()},
          {"history_length", rt->state.history.size()}};
}

json Workbench::finetune(const std::string& id) {
  auto rt = runtime(id);
  std::lock_guard lock(rt->mutex);
  if (rt->state.record.status != SessionStatus::ready || !rt->state.model)
    throw StateConflict(std::string("session is ") + to_string(rt->state.record.status) + "; fine-tuning needs a ready session");
  transition(rt->state.record, SessionStatus::finetuning);
  rt->store.save_record(rt->state.record);
  rt->publish();
  start_job(rt, true);
  return {{"schema_version", kApiSchemaVersion}, {"session_id", id}, {"status", to_string(rt->state.record.status)}};
}

json Workbench::classify(const std::string& id, const json& body) const {
  const json& texts = require(body, "texts");
  if (!texts.is_array() || texts.empty()) throw BadRequest("'texts' must be a non-empty array of strings");
  for (const auto& t : texts)
    if (!t.is_string()) throw BadRequest("'texts' must be a non-empty array of strings");
  const auto s = runtime(id)->view();
  if (!s->model) throw StateConflict("session has no trained model yet");
  const auto rc = corpus(s->record.corpus_id);
  const Vocabulary& vocab = rc->corpus.vocabulary;
  const SeedSets seeds = s->seeds.resolve(vocab);
  const MatchResult match = match_topics(seeds, *s->model);

  json results = json::array();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto tokens = tokenize(texts[i].get<std::string>(), rc->rules);
    const Document doc = make_document("q" + std::to_string(i), map_tokens(tokens, vocab));
    const Classification c = s2vntm::classify(doc, *s->model, seeds, match, s->record.config.eval.rule);
    json scores = json::object();
    for (std::size_t g = 0; g < seeds.groups.size(); ++g)
      scores[seeds.groups[g].label] = c.scores[static_cast<Eigen::Index>(g)];
    results.push_back({{"index", i},
                       {"label", c.label ? json(*c.label) : json(nullptr)},
                       {"topic", c.topic},
                       {"known_tokens", doc.length()},
                       {"scores", scores}});
  }
  return {{"schema_version", kApiSchemaVersion}, {"session_id", id}, {"results", results}};
}

SessionStatus Workbench::status(const std::string& id) const { return runtime(id)->view()->record.status; }

bool Workbench::wait_idle(const std::string& id, std::chrono::milliseconds timeout) const {
  const auto rt = runtime(id);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto st = rt->view()->record.status;
    if (st != SessionStatus::training && st != SessionStatus::finetuning) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace s2vntm
