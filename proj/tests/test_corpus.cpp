#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include <doctest.h>

#include "s2vntm/corpus.hpp"
#include "s2vntm/corpus_io.hpp"
#include "s2vntm/errors.hpp"

using namespace s2vntm;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> repeat(const std::string& word, int n) { return std::vector<std::string>(n, word); }

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("s2vntm_test_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Corpus two_class_corpus() {
  // class 0 repeats "military", class 1 repeats "basketball"; "report" is everywhere
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;
  for (int i = 0; i < 4; ++i) {
    docs.push_back({"military", "military", "military", "report", "army"});
    labels.push_back(0);
    docs.push_back({"basketball", "basketball", "basketball", "report", "court"});
    labels.push_back(1);
  }
  Corpus c;
  c.vocabulary = build_vocabulary(docs, {0, 0, 1});
  c.class_names = {"world", "sports"};
  for (std::size_t i = 0; i < docs.size(); ++i)
    c.documents.push_back(bow_encode(std::to_string(i), docs[i], c.vocabulary, labels[i]));
  c.split.assign(docs.size(), Split::train);
  return c;
}

}  // namespace

TEST_CASE("tokenize applies the default filters") {
  const auto rules = TokenRules::defaults();
  CHECK(tokenize("The U.S. stocks rose 3% at 9:30", rules) == std::vector<std::string>{"stocks", "rose"});
  CHECK(tokenize("", rules).empty());
  CHECK(tokenize("government government war", rules) ==
        std::vector<std::string>{"government", "government", "war"});
  CHECK(tokenize("Markets FELL, sharply!", rules) == std::vector<std::string>{"markets", "fell", "sharply"});
  CHECK(tokenize("10pm 1,200 90s x", rules).empty());
}

TEST_CASE("tokenize honours a custom stopword list") {
  auto rules = TokenRules::defaults();
  rules.stopwords = {"war"};
  CHECK(tokenize("the war ended", rules) == std::vector<std::string>{"the", "ended"});
}

TEST_CASE("vocabulary frequency threshold is strict") {
  std::vector<std::vector<std::string>> docs{repeat("stock", 16), repeat("telescope", 3), repeat("bond", 15)};
  const Vocabulary v = build_vocabulary(docs, {15, 15, 1});
  CHECK(v.find("stock"));
  CHECK_FALSE(v.find("telescope"));
  CHECK_FALSE(v.find("bond"));
  CHECK_THROWS_AS(build_vocabulary({repeat("a", 3)}, {15, 15, 1}), EmptyVocabulary);
}

TEST_CASE("vocabulary detects bigrams and counts them like a brute-force scan") {
  std::mt19937 rng(3);
  const std::vector<std::string> filler{"market", "price", "city", "crowd", "night"};
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 30; ++d) {
    std::vector<std::string> doc;
    for (int i = 0; i < 12; ++i) doc.push_back(filler[rng() % filler.size()]);
    if (d < 20) {
      const auto at = static_cast<std::ptrdiff_t>(rng() % doc.size());
      doc.insert(doc.begin() + at, {"new", "york"});
    }
    docs.push_back(doc);
  }
  std::map<std::string, std::int64_t> bigrams;
  for (const auto& doc : docs)
    for (std::size_t i = 0; i + 1 < doc.size(); ++i) ++bigrams[doc[i] + "_" + doc[i + 1]];

  const Vocabulary v = build_vocabulary(docs, {15, 15, 3});
  REQUIRE(v.find("new_york"));
  CHECK(v.total_freq(*v.find("new_york")) == bigrams["new_york"]);
  for (const auto& [term, n] : bigrams) CHECK(v.find(term).has_value() == (n > 15));
  CHECK(v.max_phrase_length() >= 2);

  const Vocabulary again = build_vocabulary(docs, {15, 15, 3});
  CHECK(v == again);
  CHECK(v.hash() == again.hash());
  for (TermId i = 0; i < v.size(); ++i) CHECK(v.id(v.term(i)) == i);
  CHECK_THROWS_AS(v.id("telescope"), IndexError);
}

TEST_CASE("vocabulary order is descending frequency then lexicographic") {
  std::vector<std::vector<std::string>> docs{{"b", "b", "a", "a", "c", "c", "c"}};
  const Vocabulary v = build_vocabulary(docs, {0, 0, 1});
  CHECK(v.terms() == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("bow_encode counts in-vocabulary tokens") {
  const Vocabulary v = build_vocabulary({{"war", "war", "stock", "stock"}}, {0, 0, 1});
  const std::vector<std::string> toks{"war", "war", "stock"};
  const Document d = bow_encode("d", toks, v);
  REQUIRE(d.bow.size() == 2);
  std::map<std::string, int> got;
  for (const auto& e : d.bow) got[v.term(e.term)] = e.count;
  CHECK(got == std::map<std::string, int>{{"war", 2}, {"stock", 1}});

  const std::vector<std::string> oov{"zzz"};
  CHECK_THROWS_AS(bow_encode("d", oov, v), DocumentDropped);

  const std::vector<std::string> mixed{"war", "zzz", "stock", "qqq", "war", "war"};
  const Document m = bow_encode("m", mixed, v);
  int total = 0;
  for (const auto& e : m.bow) total += e.count;
  CHECK(total == 4);
  CHECK(m.length() == 4);
  CHECK(std::is_sorted(m.bow.begin(), m.bow.end(), [](auto& a, auto& b) { return a.term < b.term; }));
}

TEST_CASE("phrases take precedence over their unigrams when mapping") {
  const Vocabulary v(std::vector<std::string>{"new", "york", "new_york"}, {5, 5, 5}, {1, 1, 1});
  const std::vector<std::string> toks{"new", "york", "york", "new"};
  const auto ids = map_tokens(toks, v);
  CHECK(ids == std::vector<TermId>{2, 1, 0});
}

TEST_CASE("derive_seed_keywords picks the class-specific term") {
  const Corpus c = two_class_corpus();
  const auto idx = c.indices(Split::train);
  const SeedSets s = derive_seed_keywords(c, idx, 1);
  REQUIRE(s.size() == 2);
  CHECK(c.vocabulary.term(s.groups[0].keywords.at(0)) == "military");
  CHECK(c.vocabulary.term(s.groups[1].keywords.at(0)) == "basketball");
  CHECK(s.provenance == SeedProvenance::tfidf);
  s.validate(c.vocabulary, 3);
  CHECK_THROWS_AS(s.validate(c.vocabulary, 1), InvalidSeeds);

  const SeedSets three = derive_seed_keywords(c, idx, 3);
  for (const auto& g : three.groups) CHECK(g.keywords.size() == 3);
}

TEST_CASE("derive_seed_keywords reports a class missing from the split") {
  Corpus c = two_class_corpus();
  c.class_names.push_back("business");
  const auto idx = c.indices(Split::train);
  CHECK_THROWS_AS(derive_seed_keywords(c, idx, 1), ClassEmpty);
}

TEST_CASE("seed validation") {
  const Corpus c = two_class_corpus();
  SeedSets s;
  s.groups = {{"a", {}}};
  CHECK_THROWS_AS(s.validate(c.vocabulary), InvalidSeeds);
  s.groups = {{"a", {static_cast<TermId>(c.vocabulary.size())}}};
  CHECK_THROWS_AS(s.validate(c.vocabulary), InvalidSeeds);
}

TEST_CASE("assign_split marks the requested fraction deterministically") {
  Corpus c = two_class_corpus();
  for (int i = 0; i < 92; ++i) c.documents.push_back(c.documents[0]);
  assign_split(c, 0.2, 5);
  CHECK(c.indices(Split::train).size() == 20);
  CHECK(c.indices(Split::test).size() == 80);
  const auto first = c.split;
  assign_split(c, 0.2, 5);
  CHECK(c.split == first);
}

TEST_CASE("corpus bundle and seed file round trip") {
  const auto dir = scratch_dir("bundle");
  std::vector<RawDocument> raw;
  for (int i = 0; i < 20; ++i) {
    raw.push_back({"world", "military army war troops military border"});
    raw.push_back({"sports", "basketball court team season basketball coach"});
  }
  raw.push_back({"sports", "zzz"});
  PrepareOptions opts;
  opts.vocabulary = {5, 5, 3};
  const auto rules = TokenRules::defaults();
  const Corpus c = prepare_corpus(raw, rules, opts);
  CHECK(c.documents.size() == 40);
  CHECK(c.class_names == std::vector<std::string>{"sports", "world"});
  for (const auto& d : c.documents) {
    int sum = 0;
    for (const auto& e : d.bow) sum += e.count;
    CHECK(sum == d.length());
    CHECK(sum >= 2);
  }

  save_corpus_bundle(dir, c, rules);
  const Corpus back = load_corpus_bundle(dir);
  CHECK(back.vocabulary == c.vocabulary);
  CHECK(back.class_names == c.class_names);
  CHECK(back.split == c.split);
  REQUIRE(back.documents.size() == c.documents.size());
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    CHECK(back.documents[i].tokens == c.documents[i].tokens);
    CHECK(back.documents[i].bow == c.documents[i].bow);
    CHECK(back.documents[i].label == c.documents[i].label);
  }
  CHECK(load_bundle_rules(dir).stopwords == rules.stopwords);

  const SeedSets seeds = derive_seed_keywords(c, c.indices(Split::train), 2);
  write_seeds(dir / "seeds.json", seeds, c.vocabulary);
  CHECK(read_seeds(dir / "seeds.json", c.vocabulary) == seeds);
  nlohmann::json bad = seeds_to_json(seeds, c.vocabulary);
  bad[0]["keywords"].push_back("telescope");
  CHECK_THROWS_AS(seeds_from_json(bad, c.vocabulary), VocabularyMismatch);

  fs::remove_all(dir);
}
