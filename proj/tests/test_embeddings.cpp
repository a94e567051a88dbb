#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "s2vntm/embeddings.hpp"
#include "s2vntm/errors.hpp"
#include "s2vntm/synthetic.hpp"

using namespace s2vntm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("s2vntm_test_emb_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Corpus cooccurrence_corpus() {
  // "cat" and "kitten" always share a document; "stock" lives with finance words
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 150; ++i) {
    docs.push_back({"cat", "kitten", "purr", "cat", "kitten", "fur"});
    docs.push_back({"stock", "bond", "market", "stock", "yield", "bond"});
  }
  Corpus c;
  c.vocabulary = build_vocabulary(docs, {0, 0, 1});
  for (std::size_t i = 0; i < docs.size(); ++i)
    c.documents.push_back(bow_encode(std::to_string(i), docs[i], c.vocabulary));
  return c;
}

}  // namespace

TEST_CASE("trained embeddings are unit norm, deterministic and place co-occurring words together") {
  const Corpus c = cooccurrence_corpus();
  EmbeddingOptions opts;
  opts.dim = 16;
  opts.epochs = 5;
  opts.seed = 3;
  const EmbeddingMatrix a = train_embeddings(c, opts);
  const EmbeddingMatrix b = train_embeddings(c, opts);
  CHECK(a.rows() == static_cast<Eigen::Index>(c.vocabulary.size()));
  CHECK(a.dim() == 16);
  for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(std::abs(a.vectors().row(i).norm() - 1.0) < 1e-6);
  CHECK(a.vectors() == b.vectors());
  CHECK(a.checksum() == b.checksum());
  CHECK(a.vocab_hash() == c.vocabulary.hash());

  const TermId cat = c.vocabulary.id("cat");
  const TermId kitten = c.vocabulary.id("kitten");
  const TermId stock = c.vocabulary.id("stock");
  CHECK(cosine(cat, kitten, a) > cosine(cat, stock, a));

  opts.seed = 4;
  CHECK(train_embeddings(c, opts).checksum() != a.checksum());
}

TEST_CASE("cosine is the dot product of unit rows") {
  RowMatrix m(3, 3);
  m << 1, 0, 0, 0, 2, 0, 0.3, -1.2, 0.5;
  const EmbeddingMatrix e(m, 0);
  CHECK(cosine(0, 0, e) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(0, 1, e) == 0.0);
  const Eigen::Vector3d u(0, 2, 0), v(0.3, -1.2, 0.5);
  const double ref = u.dot(v) / (u.norm() * v.norm());
  CHECK(std::abs(cosine(1, 2, e) - ref) < 1e-12);
  CHECK(cosine(1, 2, e) == cosine(2, 1, e));
  RowMatrix z = RowMatrix::Zero(1, 3);
  CHECK_THROWS_AS(EmbeddingMatrix(z, 0), DomainError);
}

TEST_CASE("seeded unit vectors are deterministic per term") {
  const auto a = seeded_unit_vector("zzz", 50);
  CHECK(a.size() == 50);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a == seeded_unit_vector("zzz", 50));
  CHECK_FALSE(a == seeded_unit_vector("zzy", 50));
}

TEST_CASE("text loader aligns rows, fills gaps and rejects wrong dimensions") {
  const auto dir = scratch_dir("text");
  const Vocabulary v(std::vector<std::string>{"war", "stock", "zzz"}, {9, 8, 7}, {1, 1, 1});
  {
    std::ofstream out(dir / "emb.txt");
    out << "2 3\n";
    out << "stock 0 3 4\n";
    out << "war 1 0 0\n";
    out << "unused 0 0 1\n";
  }
  const EmbeddingMatrix e = load_embeddings(dir / "emb.txt", v);
  REQUIRE(e.rows() == 3);
  REQUIRE(e.dim() == 3);
  CHECK(e.vectors().row(0) == Eigen::RowVector3d(1, 0, 0));
  CHECK((e.vectors().row(1) - Eigen::RowVector3d(0, 0.6, 0.8)).norm() < 1e-15);
  CHECK((e.vectors().row(2).transpose() - seeded_unit_vector("zzz", 3)).norm() < 1e-15);

  CHECK_THROWS_AS(load_embeddings(dir / "emb.txt", v, 4), DimensionMismatch);
  {
    std::ofstream out(dir / "ragged.txt");
    out << "war 1 0 0\nstock 1 0\n";
  }
  CHECK_THROWS_AS(load_embeddings(dir / "ragged.txt", v), DimensionMismatch);
  CHECK_THROWS_AS(load_embeddings(dir / "missing.txt", v), FileUnreadable);

  save_embeddings_text(dir / "out.txt", e, v);
  CHECK(load_embeddings(dir / "out.txt", v).vectors().isApprox(e.vectors(), 1e-15));
  fs::remove_all(dir);
}

TEST_CASE("binary embeddings round trip bit for bit") {
  const auto dir = scratch_dir("bin");
  PlantedOptions po;
  po.documents = 60;
  const auto planted = make_planted_corpus(po);
  EmbeddingOptions opts;
  opts.dim = 8;
  opts.epochs = 1;
  const EmbeddingMatrix e = train_embeddings(planted.corpus, opts);
  save_embeddings_binary(dir / "e.bin", e);
  const EmbeddingMatrix back = load_embeddings_binary(dir / "e.bin");
  CHECK(back.checksum() == e.checksum());
  CHECK(back.vocab_hash() == e.vocab_hash());

  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "NOTANEMB";
  }
  CHECK_THROWS_AS(load_embeddings_binary(dir / "bad.bin"), FormatError);
  CHECK_THROWS_AS(load_embeddings_binary(dir / "none.bin"), FileUnreadable);
  fs::remove_all(dir);
}
