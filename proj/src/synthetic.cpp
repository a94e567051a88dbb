#include "s2vntm/synthetic.hpp"

#include <random>

#include "s2vntm/errors.hpp"
#include "s2vntm/vmf.hpp"

namespace s2vntm {
namespace {

const char* const kBlockNames[] = {"alpha", "beta",  "gamma", "delta", "epsilon", "zeta",
                                   "eta",   "theta", "iota",  "kappa", "lambda",  "mu"};

// Letters only, so the default token rules keep the words: 0 -> "aa", 27 -> "bb".
std::string numbered(const std::string& prefix, int i) {
  return prefix + static_cast<char>('a' + i / 26 % 26) + static_cast<char>('a' + i % 26);
}

}  // namespace

PlantedCorpus make_planted_corpus(const PlantedOptions& o) {
  constexpr int kMaxBlocks = static_cast<int>(std::size(kBlockNames));
  if (o.blocks < 1 || o.blocks > kMaxBlocks) throw ConfigError("planted corpus supports 1 to 12 blocks");
  if (o.block_size < 1 || o.documents < 1 || o.min_length < 2 || o.max_length < o.min_length)
    throw ConfigError("invalid planted corpus sizes");
  if (o.seeds_per_block < 1 || o.seeds_per_block > o.block_size) throw ConfigError("seeds_per_block out of range");
  if (o.background_size < 0 || o.background_fraction < 0.0 || o.background_fraction >= 1.0 ||
      (o.background_size == 0 && o.background_fraction > 0.0))
    throw ConfigError("invalid background settings");

  Rng rng(o.seed);
  std::uniform_int_distribution<int> pick_block(0, o.blocks - 1);
  std::uniform_int_distribution<int> pick_len(o.min_length, o.max_length);
  std::uniform_int_distribution<int> pick_word(0, o.block_size - 1);
  std::uniform_int_distribution<int> pick_bg(0, std::max(0, o.background_size - 1));
  std::bernoulli_distribution use_bg(o.background_fraction);

  std::vector<std::vector<std::string>> texts;
  std::vector<int> labels;
  for (int d = 0; d < o.documents; ++d) {
    const int b = pick_block(rng);
    const int len = pick_len(rng);
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i)
      tokens.push_back(use_bg(rng) ? numbered("bg", pick_bg(rng)) : numbered(kBlockNames[b], pick_word(rng)));
    texts.push_back(std::move(tokens));
    labels.push_back(b);
  }

  VocabularyOptions vopt;
  vopt.min_count = 0;
  vopt.max_ngram = 1;
  PlantedCorpus out;
  out.corpus.vocabulary = build_vocabulary(texts, vopt);
  const Vocabulary& vocab = out.corpus.vocabulary;
  for (int b = 0; b < o.blocks; ++b) out.corpus.class_names.emplace_back(kBlockNames[b]);
  for (int d = 0; d < o.documents; ++d)
    out.corpus.documents.push_back(make_document(numbered("doc", d), map_tokens(texts[static_cast<std::size_t>(d)], vocab),
                                                 labels[static_cast<std::size_t>(d)]));
  assign_split(out.corpus, o.train_fraction, o.seed);

  for (int b = 0; b < o.blocks; ++b) {
    std::vector<TermId> block;
    for (int i = 0; i < o.block_size; ++i)
      if (auto id = vocab.find(numbered(kBlockNames[b], i))) block.push_back(*id);
    SeedGroup group{kBlockNames[b], {}};
    for (int i = 0; i < o.seeds_per_block; ++i) group.keywords.push_back(vocab.id(numbered(kBlockNames[b], i)));
    out.seeds.groups.push_back(std::move(group));
    out.blocks.push_back(std::move(block));
  }
  for (int i = 0; i < o.background_size; ++i)
    if (auto id = vocab.find(numbered("bg", i))) out.background.push_back(*id);
  return out;
}

std::vector<std::vector<std::string>> document_terms(const Corpus& corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) {
    std::vector<std::string> terms;
    terms.reserve(d.tokens.size());
    for (TermId id : d.tokens) terms.push_back(corpus.vocabulary.term(id));
    out.push_back(std::move(terms));
  }
  return out;
}

}  // namespace s2vntm
