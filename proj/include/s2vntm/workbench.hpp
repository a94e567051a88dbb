#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "s2vntm/corpus.hpp"
#include "s2vntm/embeddings.hpp"
#include "s2vntm/session.hpp"

namespace s2vntm {

inline constexpr int kApiSchemaVersion = 1;

// HTTP status for an exception thrown by the workbench: 404 NotFound,
// 400 BadRequest/ConfigError/malformed JSON, 409 StateConflict,
// 422 VocabularyMismatch/InvalidSeeds/ClassEmpty, 500 otherwise.
int http_status_for(const std::exception& e);

struct WorkbenchOptions {
  std::filesystem::path root;  // holds corpora/<id> and sessions/<id>
  bool resume_jobs = true;     // restart interrupted training/fine-tuning on load
};

struct RegisteredCorpus {
  std::string id;
  Corpus corpus;
  TokenRules rules;
  std::shared_ptr<const EmbeddingMatrix> embeddings;
};

// Corpus directory layout: the corpus bundle plus embeddings.bin.
void save_registered_corpus(const std::filesystem::path& dir, const Corpus& corpus, const TokenRules& rules,
                            const EmbeddingMatrix& embeddings);
RegisteredCorpus load_registered_corpus(const std::filesystem::path& dir, const std::string& id);

// Session workbench behind the HTTP API. Every call takes and returns JSON
// bodies; errors are thrown and mapped by http_status_for. Training and
// fine-tuning run on one background thread per session; mutations of one
// session are serialized; reads use immutable snapshots.
class Workbench {
 public:
  explicit Workbench(WorkbenchOptions options);
  ~Workbench();
  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  const std::filesystem::path& root() const { return options_.root; }

  void register_corpus(const std::string& id, const Corpus& corpus, const TokenRules& rules,
                       const EmbeddingMatrix& embeddings);
  nlohmann::json list_corpora() const;

  // {corpus_id, config?, seeds?} -> {session_id}. Without seeds, groups are
  // derived by tf-idf from the corpus train split.
  nlohmann::json create_session(const nlohmann::json& body);
  nlohmann::json list_sessions() const;
  nlohmann::json get_session(const std::string& id) const;
  nlohmann::json topics(const std::string& id, int top) const;
  nlohmann::json keywords(const std::string& id) const;
  // {add:[[group, term]...], remove:[...], confirm:[...], new_groups:[label...], remove_groups:[label...]}
  nlohmann::json edit_keywords(const std::string& id, const nlohmann::json& body);
  nlohmann::json finetune(const std::string& id);
  nlohmann::json classify(const std::string& id, const nlohmann::json& body) const;

  SessionStatus status(const std::string& id) const;
  // Blocks until no job runs for the session; false on timeout.
  bool wait_idle(const std::string& id, std::chrono::milliseconds timeout) const;

  struct Runtime;

 private:
  std::shared_ptr<Runtime> runtime(const std::string& id) const;
  std::shared_ptr<const RegisteredCorpus> corpus(const std::string& id) const;
  void load_existing_sessions();
  void start_job(const std::shared_ptr<Runtime>& rt, bool finetune);
  void run_job(std::shared_ptr<Runtime> rt, bool finetune);

  WorkbenchOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Runtime>> sessions_;
  mutable std::map<std::string, std::shared_ptr<const RegisteredCorpus>> corpora_;
  std::atomic<bool> stopping_{false};
};

}  // namespace s2vntm
