#include "s2vntm/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "binary_io.hpp"
#include "s2vntm/errors.hpp"

namespace s2vntm {

namespace {

constexpr char kMagic[6] = {'S', '2', 'V', 'E', 'M', 'B'};
constexpr std::uint8_t kVersion = 1;

void normalize_row(RowMatrix& m, Eigen::Index r) {
  const double n = m.row(r).norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw DomainError("embedding row " + std::to_string(r) + " has no direction");
  m.row(r) /= n;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(RowMatrix vectors, std::uint64_t vocab_hash)
    : vectors_(std::move(vectors)), vocab_hash_(vocab_hash) {
  // Rows already on the sphere are left bit-identical so reloads keep the checksum.
  for (Eigen::Index r = 0; r < vectors_.rows(); ++r)
    if (!(std::abs(vectors_.row(r).norm() - 1.0) <= 1e-12)) normalize_row(vectors_, r);
}

std::uint64_t EmbeddingMatrix::checksum() const {
  return detail::fnv1a(vectors_.data(), static_cast<std::size_t>(vectors_.size()) * sizeof(double));
}

Eigen::VectorXd seeded_unit_vector(std::string_view term, int dim) {
  std::mt19937_64 rng(detail::fnv1a(term.data(), term.size()));
  return random_unit(rng, dim);
}

double cosine(TermId a, TermId b, const EmbeddingMatrix& emb) {
  if (a >= emb.rows() || b >= emb.rows()) throw IndexError("cosine: term id out of range");
  return emb.row(a).dot(emb.row(b));
}

EmbeddingMatrix train_embeddings(const Corpus& corpus, const EmbeddingOptions& opt) {
  const auto V = static_cast<Eigen::Index>(corpus.vocabulary.size());
  if (V == 0 || corpus.documents.empty()) throw EmptyVocabulary("cannot train embeddings on an empty corpus");
  if (opt.dim < 1 || opt.window < 1 || opt.negatives < 0 || opt.epochs < 1)
    throw ConfigError("invalid embedding options");

  std::mt19937_64 rng(opt.seed);
  RowMatrix word(V, opt.dim);
  RowMatrix context(V, opt.dim);
  for (Eigen::Index r = 0; r < V; ++r) {
    word.row(r) = random_unit(rng, opt.dim).transpose();
    context.row(r) = random_unit(rng, opt.dim).transpose();
  }

  // Noise distribution: unigram^0.75 as a cumulative table.
  std::vector<double> freq(static_cast<std::size_t>(V), 0.0);
  std::size_t total_tokens = 0;
  for (const auto& doc : corpus.documents) {
    for (TermId t : doc.tokens) freq[t] += 1.0;
    total_tokens += doc.tokens.size();
  }
  std::vector<double> cumulative(freq.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    acc += std::pow(freq[i], 0.75);
    cumulative[i] = acc;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_noise = [&]() {
    const double u = unit(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<TermId>(std::min<std::ptrdiff_t>(it - cumulative.begin(), V - 1));
  };

  const double total_steps = static_cast<double>(opt.epochs) * static_cast<double>(total_tokens);
  double step = 0.0;
  Eigen::VectorXd grad_word(opt.dim);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& doc : corpus.documents) {
      const auto& tokens = doc.tokens;
      const auto n = static_cast<std::ptrdiff_t>(tokens.size());
      for (std::ptrdiff_t i = 0; i < n; ++i, step += 1.0) {
        const double lr = opt.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
        const TermId center = tokens[static_cast<std::size_t>(i)];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - opt.window);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + opt.window);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const TermId target = tokens[static_cast<std::size_t>(j)];
          grad_word.setZero();
          for (int k = 0; k <= opt.negatives; ++k) {
            const TermId c = k == 0 ? target : draw_noise();
            if (k > 0 && c == target) continue;
            const double label = k == 0 ? 1.0 : 0.0;
            const double score = opt.scale * word.row(center).dot(context.row(c));
            const double g = (label - sigmoid(score)) * opt.scale * lr;
            grad_word += g * context.row(c).transpose();
            context.row(c) += g * word.row(center);
            normalize_row(context, c);
          }
          word.row(center) += grad_word.transpose();
          normalize_row(word, center);
        }
      }
    }
  }
  return EmbeddingMatrix(std::move(word), corpus.vocabulary.hash());
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, int dim) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open embedding file " + path.string());

  std::unordered_map<std::string, std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string term;
    ls >> term;
    std::vector<double> values;
    for (double v; ls >> v;) values.push_back(v);
    if (!ls.eof()) throw FormatError("non-numeric value in embedding file: " + line);
    if (first) {
      first = false;
      // word2vec-style "count dim" header
      if (values.size() == 1 && term.find_first_not_of("0123456789") == std::string::npos) continue;
    }
    if (dim == 0) dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dim)
      throw DimensionMismatch("embedding for '" + term + "' has " + std::to_string(values.size()) +
                              " values, expected " + std::to_string(dim));
    rows[term] = std::move(values);
  }
  if (dim <= 0) throw DimensionMismatch("embedding dimension is unknown (empty file?)");

  RowMatrix m(static_cast<Eigen::Index>(vocab.size()), dim);
  for (TermId id = 0; id < vocab.size(); ++id) {
    auto it = rows.find(vocab.term(id));
    if (it != rows.end()) {
      m.row(id) = Eigen::Map<const Eigen::RowVectorXd>(it->second.data(), dim);
      if (m.row(id).norm() == 0.0) m.row(id) = seeded_unit_vector(vocab.term(id), dim).transpose();
    } else {
      m.row(id) = seeded_unit_vector(vocab.term(id), dim).transpose();
    }
  }
  return EmbeddingMatrix(std::move(m), vocab.hash());
}

void save_embeddings_text(const std::filesystem::path& path, const EmbeddingMatrix& emb,
                          const Vocabulary& vocab) {
  if (static_cast<std::size_t>(emb.rows()) != vocab.size())
    throw DimensionMismatch("embedding rows do not match vocabulary size");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileUnreadable("cannot write " + path.string());
  out.precision(17);
  for (TermId id = 0; id < vocab.size(); ++id) {
    out << vocab.term(id);
    for (Eigen::Index c = 0; c < emb.dim(); ++c) out << ' ' << emb.vectors()(id, c);
    out << '\n';
  }
}

void save_embeddings_binary(const std::filesystem::path& path, const EmbeddingMatrix& emb) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileUnreadable("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  detail::put(out, kVersion);
  detail::put<std::uint64_t>(out, emb.vocab_hash());
  detail::put_matrix(out, emb.vectors());
}

EmbeddingMatrix load_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable("cannot open " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kMagic))
    throw FormatError(path.string() + " is not an embedding checkpoint");
  if (detail::get<std::uint8_t>(in) != kVersion) throw FormatError("unsupported embedding checkpoint version");
  const auto hash = detail::get<std::uint64_t>(in);
  return EmbeddingMatrix(detail::get_matrix<RowMatrix>(in), hash);
}

}  // namespace s2vntm
