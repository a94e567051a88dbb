#include "s2vntm/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "s2vntm/errors.hpp"

namespace s2vntm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileUnreadable("cannot write " + path.string());
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "none";
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "none") return Split::none;
  throw FormatError("unknown split marker '" + s + "'");
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << content;
    out.flush();
    if (!out) throw FileUnreadable("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<RawDocument> read_raw_documents(const fs::path& path, bool tsv) {
  auto in = open_in(path);
  std::vector<RawDocument> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (tsv) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw FormatError("TSV line without a tab: " + line);
      docs.push_back({line.substr(0, tab), line.substr(tab + 1)});
    } else {
      docs.push_back({std::nullopt, line});
    }
  }
  return docs;
}

Corpus prepare_corpus(const std::vector<RawDocument>& raw, const TokenRules& rules,
                      const PrepareOptions& options) {
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(raw.size());
  std::set<std::string> labels;
  for (const auto& r : raw) {
    tokenized.push_back(tokenize(r.text, rules));
    if (r.label) labels.insert(*r.label);
  }

  Corpus corpus;
  corpus.vocabulary = build_vocabulary(tokenized, options.vocabulary);
  corpus.class_names.assign(labels.begin(), labels.end());
  std::map<std::string, int> label_id;
  for (std::size_t i = 0; i < corpus.class_names.size(); ++i)
    label_id[corpus.class_names[i]] = static_cast<int>(i);

  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::optional<int> label;
    if (raw[i].label) label = label_id.at(*raw[i].label);
    try {
      corpus.documents.push_back(
          bow_encode(std::to_string(i), tokenized[i], corpus.vocabulary, label));
    } catch (const DocumentDropped&) {
    }
  }
  assign_split(corpus, options.train_fraction, options.split_seed);
  return corpus;
}

void write_vocabulary(const fs::path& path, const Vocabulary& vocab) {
  auto out = open_out(path);
  for (TermId i = 0; i < vocab.size(); ++i)
    out << vocab.term(i) << '\t' << vocab.total_freq(i) << '\t' << vocab.doc_freq(i) << '\n';
}

Vocabulary read_vocabulary(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> terms;
  std::vector<std::int64_t> total;
  std::vector<std::int64_t> df;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string term;
    std::int64_t t = 0;
    std::int64_t d = 0;
    if (!std::getline(ls, term, '\t') || !(ls >> t)) throw FormatError("bad vocabulary line: " + line);
    if (!(ls >> d)) d = 0;
    terms.push_back(term);
    total.push_back(t);
    df.push_back(d);
  }
  return Vocabulary(std::move(terms), std::move(total), std::move(df));
}

void write_bow(const fs::path& path, const std::vector<Document>& docs) {
  auto out = open_out(path);
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& e : docs[d].bow) out << d << ' ' << e.term << ' ' << e.count << '\n';
}

void save_corpus_bundle(const fs::path& dir, const Corpus& corpus, const TokenRules& rules) {
  fs::create_directories(dir);
  write_vocabulary(dir / "vocab.txt", corpus.vocabulary);
  write_bow(dir / "bow.txt", corpus.documents);
  {
    auto out = open_out(dir / "tokens.txt");
    for (const auto& doc : corpus.documents) {
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) out << (i ? " " : "") << doc.tokens[i];
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "documents.tsv");
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
      const auto& doc = corpus.documents[d];
      out << doc.id << '\t' << (doc.label ? corpus.class_names.at(*doc.label) : "-") << '\t'
          << split_name(corpus.split.empty() ? Split::none : corpus.split[d]) << '\n';
    }
  }
  {
    std::vector<std::string> words(rules.stopwords.begin(), rules.stopwords.end());
    std::sort(words.begin(), words.end());
    auto out = open_out(dir / "stopwords.txt");
    for (const auto& w : words) out << w << '\n';
  }
  json manifest = {{"format_version", 1},
                   {"class_names", corpus.class_names},
                   {"num_documents", corpus.documents.size()},
                   {"vocab_size", corpus.vocabulary.size()},
                   {"vocab_hash", corpus.vocabulary.hash()}};
  write_text_file_atomic(dir / "corpus.json", manifest.dump(2) + "\n");
}

Corpus load_corpus_bundle(const fs::path& dir) {
  const json manifest = json::parse(read_text_file(dir / "corpus.json"));
  Corpus corpus;
  corpus.vocabulary = read_vocabulary(dir / "vocab.txt");
  if (manifest.at("vocab_hash").get<std::uint64_t>() != corpus.vocabulary.hash())
    throw VocabularyMismatch("vocab.txt does not match the corpus manifest in " + dir.string());
  corpus.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  std::map<std::string, int> label_id;
  for (std::size_t i = 0; i < corpus.class_names.size(); ++i)
    label_id[corpus.class_names[i]] = static_cast<int>(i);

  auto tokens_in = open_in(dir / "tokens.txt");
  auto docs_in = open_in(dir / "documents.tsv");
  std::string tline;
  std::string dline;
  while (std::getline(docs_in, dline)) {
    if (dline.empty()) continue;
    if (!std::getline(tokens_in, tline)) throw FormatError("tokens.txt shorter than documents.tsv");
    std::istringstream ds(dline);
    std::string id;
    std::string label;
    std::string split;
    std::getline(ds, id, '\t');
    std::getline(ds, label, '\t');
    std::getline(ds, split, '\t');
    std::vector<TermId> ids;
    std::istringstream ts(tline);
    for (TermId t; ts >> t;) {
      if (t >= corpus.vocabulary.size()) throw FormatError("term id out of range in tokens.txt");
      ids.push_back(t);
    }
    std::optional<int> lab;
    if (label != "-") lab = label_id.at(label);
    corpus.documents.push_back(make_document(id, std::move(ids), lab));
    corpus.split.push_back(parse_split(split));
  }
  if (corpus.documents.size() != manifest.at("num_documents").get<std::size_t>())
    throw FormatError("document count does not match the corpus manifest");
  return corpus;
}

TokenRules load_bundle_rules(const fs::path& dir) {
  TokenRules rules = TokenRules::defaults();
  if (fs::exists(dir / "stopwords.txt")) {
    rules.stopwords.clear();
    auto in = open_in(dir / "stopwords.txt");
    for (std::string w; std::getline(in, w);)
      if (!w.empty()) rules.stopwords.insert(w);
  }
  return rules;
}

json seeds_to_json(const SeedSets& seeds, const Vocabulary& vocab) {
  json out = json::array();
  for (const auto& g : seeds.groups) {
    json words = json::array();
    for (TermId k : g.keywords) words.push_back(vocab.term(k));
    out.push_back({{"label", g.label}, {"keywords", words}});
  }
  return out;
}

SeedSets seeds_from_json(const json& j, const Vocabulary& vocab) {
  if (!j.is_array()) throw FormatError("seed file must be a JSON list");
  SeedSets seeds;
  for (const auto& g : j) {
    SeedGroup group;
    group.label = g.at("label").get<std::string>();
    for (const auto& w : g.at("keywords")) {
      const auto term = w.get<std::string>();
      auto id = vocab.find(term);
      if (!id) throw VocabularyMismatch("seed keyword '" + term + "' is not in the vocabulary");
      group.keywords.push_back(*id);
    }
    seeds.groups.push_back(std::move(group));
  }
  return seeds;
}

void write_seeds(const fs::path& path, const SeedSets& seeds, const Vocabulary& vocab) {
  write_text_file_atomic(path, seeds_to_json(seeds, vocab).dump(2) + "\n");
}

SeedSets read_seeds(const fs::path& path, const Vocabulary& vocab) {
  return seeds_from_json(json::parse(read_text_file(path)), vocab);
}

}  // namespace s2vntm
