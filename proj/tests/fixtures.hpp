#pragma once

#include <memory>

#include "s2vntm/embeddings.hpp"
#include "s2vntm/synthetic.hpp"
#include "s2vntm/trainer.hpp"

namespace fixture {

struct Planted {
  s2vntm::PlantedCorpus data;
  std::shared_ptr<const s2vntm::EmbeddingMatrix> embeddings;
};

// Small planted corpus with cheap embeddings, for tests that train.
inline Planted small_planted(int documents = 300, int dim = 16, std::uint64_t seed = 11) {
  s2vntm::PlantedOptions po;
  po.documents = documents;
  po.seed = seed;
  Planted p{s2vntm::make_planted_corpus(po), nullptr};
  s2vntm::EmbeddingOptions eo;
  eo.dim = dim;
  eo.epochs = 3;
  p.embeddings = std::make_shared<const s2vntm::EmbeddingMatrix>(s2vntm::train_embeddings(p.data.corpus, eo));
  return p;
}

inline s2vntm::ModelConfig small_model(int topics = 4) {
  s2vntm::ModelConfig c;
  c.num_topics = topics;
  c.vocab_size = 0;
  c.embed_dim = 0;
  c.hidden_dims = {32, 16};
  return c;
}

inline s2vntm::TrainConfig short_training(int epochs = 4) {
  s2vntm::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 64;
  t.finetune_epochs = 2;
  return t;
}

}  // namespace fixture
