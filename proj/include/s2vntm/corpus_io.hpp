#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2vntm/corpus.hpp"

namespace s2vntm {

struct RawDocument {
  std::optional<std::string> label;
  std::string text;
};

// One document per line, or TSV with (label, text) columns when `tsv` is set.
std::vector<RawDocument> read_raw_documents(const std::filesystem::path& path, bool tsv);

struct PrepareOptions {
  VocabularyOptions vocabulary;
  double train_fraction = 0.2;
  std::uint64_t split_seed = 7;
};

// Tokenize, build the vocabulary, encode, drop under-length documents and
// mark the train/test split. Class names are the sorted distinct labels.
Corpus prepare_corpus(const std::vector<RawDocument>& raw, const TokenRules& rules,
                      const PrepareOptions& options);

// Plain-text artifacts:
//   vocab.txt      term<TAB>total_freq<TAB>doc_freq, in id order
//   bow.txt        "doc_id term_id count" triplets, one per line
//   tokens.txt     term ids of each document in reading order
//   documents.tsv  doc_id<TAB>label-or-"-"<TAB>train|test|none
//   corpus.json    manifest (class names, sizes, vocabulary hash)
//   stopwords.txt  stopword list used to tokenize
void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);
void write_bow(const std::filesystem::path& path, const std::vector<Document>& docs);

void save_corpus_bundle(const std::filesystem::path& dir, const Corpus& corpus,
                        const TokenRules& rules);
Corpus load_corpus_bundle(const std::filesystem::path& dir);
TokenRules load_bundle_rules(const std::filesystem::path& dir);

// Seed file: JSON list of {"label": ..., "keywords": [term, ...]}.
nlohmann::json seeds_to_json(const SeedSets& seeds, const Vocabulary& vocab);
SeedSets seeds_from_json(const nlohmann::json& j, const Vocabulary& vocab);
void write_seeds(const std::filesystem::path& path, const SeedSets& seeds, const Vocabulary& vocab);
SeedSets read_seeds(const std::filesystem::path& path, const Vocabulary& vocab);

std::string read_text_file(const std::filesystem::path& path);
// Write-then-rename so readers never observe a partial file.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace s2vntm
