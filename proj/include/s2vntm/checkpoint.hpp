#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "s2vntm/corpus.hpp"
#include "s2vntm/model.hpp"

namespace s2vntm {

struct Checkpoint {
  TopicModel model;
  SeedSets seeds;
  std::uint64_t vocab_hash = 0;
};

// Binary layout: magic "S2VCKPT", format version, model config (JSON text),
// vocabulary hash, embedding checksum, seed groups as term ids, parameters by
// name, batch-norm running statistics.
void save_checkpoint(const std::filesystem::path& path, const TopicModel& model, const SeedSets& seeds,
                     std::uint64_t vocab_hash);

// Throws FileUnreadable, FormatError, VocabularyMismatch (embeddings differ
// from the ones the model was trained against).
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::shared_ptr<const EmbeddingMatrix> embeddings);

}  // namespace s2vntm
