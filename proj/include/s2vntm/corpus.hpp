#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace s2vntm {

using TermId = std::uint32_t;

/// Token filter configuration. Tokens are lowercased whitespace chunks with
/// surrounding punctuation stripped; a token is discarded when it matches the
/// time, digit or symbol pattern, is shorter than `min_length`, or is a
/// stopword.
struct TokenRules {
  std::unordered_set<std::string> stopwords;
  std::regex time_pattern;    // matched against the raw chunk, e.g. "9:30", "10pm"
  std::regex digit_pattern;   // matched against the stripped token, e.g. "3", "1,200", "90s"
  std::regex symbol_pattern;  // any token this matches is dropped, e.g. "u.s", "#39;s"
  std::size_t min_length = 2;

  static TokenRules defaults();
  static const std::vector<std::string>& default_stopwords();
};

std::vector<std::string> tokenize(std::string_view raw_text, const TokenRules& rules);

struct VocabularyOptions {
  int min_count = 15;        // unigrams kept when total frequency > min_count
  int ngram_min_count = 15;  // bigrams/trigrams kept when frequency > ngram_min_count
  int max_ngram = 3;         // 1 disables phrase detection
};

// Ordered term list. Ids follow descending total frequency with
// lexicographic tie-breaking, so construction is a pure function of input.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::int64_t> total_freq,
             std::vector<std::int64_t> doc_freq);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(TermId id) const;
  std::optional<TermId> find(std::string_view term) const;
  TermId id(std::string_view term) const;  // throws IndexError
  std::int64_t total_freq(TermId id) const { return total_freq_.at(id); }
  std::int64_t doc_freq(TermId id) const { return doc_freq_.at(id); }
  const std::vector<std::string>& terms() const { return terms_; }
  // Longest phrase (in words) present; drives greedy phrase merging.
  int max_phrase_length() const { return max_phrase_; }
  // FNV-1a over the ordered terms; identifies the vocabulary in checkpoints.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && total_freq_ == other.total_freq_ &&
           doc_freq_ == other.doc_freq_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::int64_t> total_freq_;
  std::vector<std::int64_t> doc_freq_;
  std::unordered_map<std::string, TermId> term_to_id_;
  int max_phrase_ = 1;
};

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                            const VocabularyOptions& options = {});

struct BowEntry {
  TermId term;
  int count;
  bool operator==(const BowEntry&) const = default;
};

struct Document {
  std::string id;
  std::vector<TermId> tokens;
  std::vector<BowEntry> bow;  // sorted by term id, counts > 0
  std::optional<int> label;

  int length() const { return static_cast<int>(tokens.size()); }
};

// Greedy longest-match mapping of token strings onto vocabulary ids. Phrases
// ("new york" -> "new_york") take precedence over their unigrams;
// out-of-vocabulary tokens are skipped.
std::vector<TermId> map_tokens(std::span<const std::string> tokens, const Vocabulary& vocab);

// Builds a Document from already-mapped ids without the length filter.
Document make_document(std::string id, std::vector<TermId> tokens,
                       std::optional<int> label = std::nullopt);

// Throws DocumentDropped when fewer than two in-vocabulary tokens remain.
Document bow_encode(std::string id, std::span<const std::string> doc_tokens,
                    const Vocabulary& vocab, std::optional<int> label = std::nullopt);

enum class Split : std::uint8_t { none, train, test };

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  std::vector<std::string> class_names;
  std::vector<Split> split;  // empty or one marker per document

  std::vector<std::size_t> indices(Split which) const;
};

// Random partition: `fraction` of documents are marked train, the rest test.
void assign_split(Corpus& corpus, double fraction, std::uint64_t seed);

enum class SeedProvenance { user, tfidf };

struct SeedGroup {
  std::string label;
  std::vector<TermId> keywords;
  bool operator==(const SeedGroup&) const = default;
};

struct SeedSets {
  std::vector<SeedGroup> groups;
  SeedProvenance provenance = SeedProvenance::user;

  std::size_t size() const { return groups.size(); }
  // Every keyword exists, every group is non-empty, and the group count does
  // not exceed num_topics (when given). Throws InvalidSeeds.
  void validate(const Vocabulary& vocab, std::optional<int> num_topics = std::nullopt) const;
  // Union of all keyword ids.
  std::vector<TermId> all_keywords() const;
  bool operator==(const SeedSets& other) const { return groups == other.groups; }
};

// Per class, the top_k terms by tf-idf over the given (labelled) documents:
// tf is the raw count inside the class's concatenated documents, idf is
// log(N / (df + 1)) over the split. Ties resolve to the lower term id.
SeedSets derive_seed_keywords(const Corpus& corpus, std::span<const std::size_t> split_docs,
                              int top_k = 3);

}  // namespace s2vntm
