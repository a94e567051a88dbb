#include "s2vntm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "s2vntm/errors.hpp"

namespace s2vntm {

namespace {

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back('_');
    out += words[i];
  }
  return out;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

const std::vector<std::string>& TokenRules::default_stopwords() {
  // Conventional English function-word list (NLTK-style) plus a handful of
  // newswire fillers.
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
      "any", "are", "aren't", "as", "at", "be", "because", "been", "before", "being", "below",
      "between", "both", "but", "by", "can", "can't", "cannot", "could", "couldn't", "did",
      "didn't", "do", "does", "doesn't", "doing", "don't", "down", "during", "each", "few",
      "for", "from", "further", "had", "hadn't", "has", "hasn't", "have", "haven't", "having",
      "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers", "herself", "him",
      "himself", "his", "how", "how's", "i", "i'd", "i'll", "i'm", "i've", "if", "in", "into",
      "is", "isn't", "it", "it's", "its", "itself", "just", "let's", "me", "more", "most",
      "mr", "mrs", "ms", "mustn't", "my", "myself", "no", "nor", "not", "now", "of", "off",
      "on", "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over",
      "own", "same", "said", "says", "shan't", "she", "she'd", "she'll", "she's", "should",
      "shouldn't", "so", "some", "such", "than", "that", "that's", "the", "their", "theirs",
      "them", "themselves", "then", "there", "there's", "these", "they", "they'd", "they'll",
      "they're", "they've", "this", "those", "through", "to", "too", "under", "until", "up",
      "very", "was", "wasn't", "we", "we'd", "we'll", "we're", "we've", "were", "weren't",
      "what", "what's", "when", "when's", "where", "where's", "which", "while", "who",
      "who's", "whom", "why", "why's", "will", "with", "won't", "would", "wouldn't", "you",
      "you'd", "you'll", "you're", "you've", "your", "yours", "yourself", "yourselves"};
  return words;
}

TokenRules TokenRules::defaults() {
  TokenRules rules;
  const auto& words = default_stopwords();
  rules.stopwords.insert(words.begin(), words.end());
  const auto flags = std::regex::ECMAScript | std::regex::optimize;
  rules.time_pattern = std::regex(
      R"(^[^0-9]*[0-9]{1,2}(:[0-9]{2}){1,2}(am|pm|a\.m\.|p\.m\.)?[^a-z0-9]*$|^[^0-9]*[0-9]{1,2}(am|pm|a\.m\.|p\.m\.)[^a-z0-9]*$)",
      flags);
  rules.digit_pattern = std::regex(R"(^[0-9.,]*[0-9][0-9.,]*(s|st|nd|rd|th)?$)", flags);
  rules.symbol_pattern = std::regex(R"([^a-z'\-]|^[^a-z]*$)", flags);
  return rules;
}

std::vector<std::string> tokenize(std::string_view raw_text, const TokenRules& rules) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < raw_text.size()) {
    while (pos < raw_text.size() && std::isspace(static_cast<unsigned char>(raw_text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < raw_text.size() && !std::isspace(static_cast<unsigned char>(raw_text[end]))) ++end;
    if (end == pos) break;

    std::string chunk(raw_text.substr(pos, end - pos));
    pos = end;
    for (auto& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (std::regex_match(chunk, rules.time_pattern)) continue;

    std::size_t first = 0;
    std::size_t last = chunk.size();
    while (first < last && !is_word_char(static_cast<unsigned char>(chunk[first]))) ++first;
    while (last > first && !is_word_char(static_cast<unsigned char>(chunk[last - 1]))) --last;
    std::string token = chunk.substr(first, last - first);

    if (token.size() < rules.min_length) continue;
    if (std::regex_match(token, rules.digit_pattern)) continue;
    if (std::regex_search(token, rules.symbol_pattern)) continue;
    if (rules.stopwords.contains(token)) continue;
    out.push_back(std::move(token));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::int64_t> total_freq,
                       std::vector<std::int64_t> doc_freq)
    : terms_(std::move(terms)), total_freq_(std::move(total_freq)), doc_freq_(std::move(doc_freq)) {
  if (total_freq_.size() != terms_.size() || doc_freq_.size() != terms_.size())
    throw ShapeMismatch("vocabulary: frequency arrays do not match term count");
  term_to_id_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!term_to_id_.emplace(terms_[i], static_cast<TermId>(i)).second)
      throw FormatError("vocabulary: duplicate term '" + terms_[i] + "'");
    const int words = 1 + static_cast<int>(std::count(terms_[i].begin(), terms_[i].end(), '_'));
    max_phrase_ = std::max(max_phrase_, words);
  }
}

const std::string& Vocabulary::term(TermId id) const {
  if (id >= terms_.size()) throw IndexError("term id " + std::to_string(id) + " out of range");
  return terms_[id];
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = term_to_id_.find(std::string(term));
  if (it == term_to_id_.end()) return std::nullopt;
  return it->second;
}

TermId Vocabulary::id(std::string_view term) const {
  if (auto found = find(term)) return *found;
  throw IndexError("term '" + std::string(term) + "' not in vocabulary");
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : terms_) {
    for (unsigned char c : t) mix(c);
    mix(0);
  }
  return h;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                            const VocabularyOptions& options) {
  if (docs.empty()) throw EmptyVocabulary("no documents given");

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // total, df
  std::vector<std::string> seen_in_doc;
  for (const auto& doc : docs) {
    seen_in_doc.clear();
    for (int n = 1; n <= std::max(1, options.max_ngram); ++n) {
      if (doc.size() < static_cast<std::size_t>(n)) break;
      for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        std::string key = n == 1 ? doc[i] : join_words(std::span(doc).subspan(i, n));
        ++counts[key].first;
        seen_in_doc.push_back(std::move(key));
      }
    }
    std::sort(seen_in_doc.begin(), seen_in_doc.end());
    seen_in_doc.erase(std::unique(seen_in_doc.begin(), seen_in_doc.end()), seen_in_doc.end());
    for (const auto& key : seen_in_doc) ++counts[key].second;
  }

  struct Kept {
    std::string term;
    std::int64_t total;
    std::int64_t df;
  };
  std::vector<Kept> kept;
  for (auto& [term, c] : counts) {
    const bool phrase = term.find('_') != std::string::npos;
    const int threshold = phrase ? options.ngram_min_count : options.min_count;
    if (c.first > threshold) kept.push_back({term, c.first, c.second});
  }
  if (kept.empty()) throw EmptyVocabulary("no term survives the frequency filter");

  std::sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.term < b.term;
  });
  std::vector<std::string> terms;
  std::vector<std::int64_t> total;
  std::vector<std::int64_t> df;
  for (auto& k : kept) {
    terms.push_back(std::move(k.term));
    total.push_back(k.total);
    df.push_back(k.df);
  }
  return Vocabulary(std::move(terms), std::move(total), std::move(df));
}

std::vector<TermId> map_tokens(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<TermId> ids;
  ids.reserve(tokens.size());
  const std::size_t longest = static_cast<std::size_t>(vocab.max_phrase_length());
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    for (std::size_t n = std::min(longest, tokens.size() - i); n >= 2; --n) {
      if (auto id = vocab.find(join_words(tokens.subspan(i, n)))) {
        ids.push_back(*id);
        i += n;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (auto id = vocab.find(tokens[i])) ids.push_back(*id);
    ++i;
  }
  return ids;
}

Document make_document(std::string id, std::vector<TermId> tokens, std::optional<int> label) {
  Document doc;
  doc.id = std::move(id);
  doc.label = label;
  std::vector<TermId> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    doc.bow.push_back({sorted[i], static_cast<int>(j - i)});
    i = j;
  }
  doc.tokens = std::move(tokens);
  return doc;
}

Document bow_encode(std::string id, std::span<const std::string> doc_tokens,
                    const Vocabulary& vocab, std::optional<int> label) {
  auto ids = map_tokens(doc_tokens, vocab);
  if (ids.size() < 2)
    throw DocumentDropped("document '" + id + "' has " + std::to_string(ids.size()) +
                          " in-vocabulary tokens");
  return make_document(std::move(id), std::move(ids), label);
}

std::vector<std::size_t> Corpus::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const Split s = split.empty() ? Split::none : split[i];
    if (s == which) out.push_back(i);
  }
  return out;
}

void assign_split(Corpus& corpus, double fraction, std::uint64_t seed) {
  const std::size_t n = corpus.documents.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  corpus.split.assign(n, Split::test);
  for (std::size_t i = 0; i < n_train && i < n; ++i) corpus.split[order[i]] = Split::train;
}

void SeedSets::validate(const Vocabulary& vocab, std::optional<int> num_topics) const {
  if (groups.empty()) throw InvalidSeeds("seed set has no groups");
  for (const auto& g : groups) {
    if (g.keywords.empty()) throw InvalidSeeds("seed group '" + g.label + "' is empty");
    for (TermId k : g.keywords)
      if (k >= vocab.size())
        throw InvalidSeeds("seed group '" + g.label + "' references unknown term id " +
                           std::to_string(k));
  }
  if (num_topics && static_cast<int>(groups.size()) > *num_topics)
    throw InvalidSeeds(std::to_string(groups.size()) + " seed groups exceed " +
                       std::to_string(*num_topics) + " topics");
}

std::vector<TermId> SeedSets::all_keywords() const {
  std::vector<TermId> out;
  for (const auto& g : groups) out.insert(out.end(), g.keywords.begin(), g.keywords.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SeedSets derive_seed_keywords(const Corpus& corpus, std::span<const std::size_t> split_docs,
                              int top_k) {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  const std::size_t n_classes = corpus.class_names.size();
  const std::size_t V = corpus.vocabulary.size();

  std::vector<std::vector<double>> tf(n_classes, std::vector<double>(V, 0.0));
  std::vector<double> df(V, 0.0);
  std::vector<std::size_t> class_docs(n_classes, 0);
  std::size_t n_docs = 0;
  for (std::size_t idx : split_docs) {
    const Document& doc = corpus.documents.at(idx);
    if (!doc.label) continue;
    const auto c = static_cast<std::size_t>(*doc.label);
    if (c >= n_classes) throw IndexError("document label out of range");
    ++class_docs[c];
    ++n_docs;
    for (const auto& e : doc.bow) {
      tf[c][e.term] += e.count;
      df[e.term] += 1.0;
    }
  }

  SeedSets seeds;
  seeds.provenance = SeedProvenance::tfidf;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_docs[c] == 0)
      throw ClassEmpty("class '" + corpus.class_names[c] + "' has no documents in the split");
    std::vector<std::pair<double, TermId>> scored;
    for (std::size_t w = 0; w < V; ++w) {
      if (tf[c][w] <= 0.0) continue;
      const double idf = std::log(static_cast<double>(n_docs) / (df[w] + 1.0));
      scored.emplace_back(tf[c][w] * idf, static_cast<TermId>(w));
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(top_k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    SeedGroup group{corpus.class_names[c], {}};
    for (std::size_t i = 0; i < k; ++i) group.keywords.push_back(scored[i].second);
    seeds.groups.push_back(std::move(group));
  }
  return seeds;
}

}  // namespace s2vntm
