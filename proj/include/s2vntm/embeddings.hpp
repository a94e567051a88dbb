#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include <Eigen/Dense>

#include "s2vntm/corpus.hpp"

namespace s2vntm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Fixed unit-norm word vectors, one row per vocabulary term. Immutable once
// built: the topic model only ever holds a const reference, and `checksum()`
// lets training assert the rows were not touched.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Rows are renormalized; a zero row throws DomainError.
  EmbeddingMatrix(RowMatrix vectors, std::uint64_t vocab_hash);

  Eigen::Index rows() const { return vectors_.rows(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  const RowMatrix& vectors() const { return vectors_; }
  auto row(TermId id) const { return vectors_.row(id); }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  // FNV-1a over the raw bytes of every row.
  std::uint64_t checksum() const;

 private:
  RowMatrix vectors_;
  std::uint64_t vocab_hash_ = 0;
};

struct EmbeddingOptions {
  int dim = 50;
  int window = 5;
  int negatives = 5;
  int epochs = 10;
  std::uint64_t seed = 1;
  double learning_rate = 0.05;
  // Inverse temperature applied to the cosine inside the logistic loss;
  // unit vectors alone cap the logit at +-1.
  double scale = 5.0;
};

// Skip-gram with negative sampling where word and context vectors are
// projected back onto the unit sphere after every update. Single-threaded
// and deterministic given options.seed.
EmbeddingMatrix train_embeddings(const Corpus& corpus, const EmbeddingOptions& options = {});

// Text format: "term v1 ... vE" per line (an optional "count dim" header line
// is skipped). Terms missing from the file get seeded_unit_vector(term).
// dim == 0 takes the dimension from the file.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                int dim = 0);
void save_embeddings_text(const std::filesystem::path& path, const EmbeddingMatrix& emb,
                          const Vocabulary& vocab);

// Binary checkpoint: "S2VEMB" magic, version byte, rows, dim, vocabulary
// hash, then row-major doubles.
void save_embeddings_binary(const std::filesystem::path& path, const EmbeddingMatrix& emb);
EmbeddingMatrix load_embeddings_binary(const std::filesystem::path& path);

Eigen::VectorXd seeded_unit_vector(std::string_view term, int dim);

double cosine(TermId a, TermId b, const EmbeddingMatrix& emb);

}  // namespace s2vntm
