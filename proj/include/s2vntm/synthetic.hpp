#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2vntm/corpus.hpp"

namespace s2vntm {

// Planted-topic corpus: every document belongs to one block (its class) and
// draws each token uniformly from that block's words, or with probability
// background_fraction from a shared background pool.
struct PlantedOptions {
  int documents = 3000;
  int blocks = 3;
  int block_size = 20;
  int background_size = 40;
  double background_fraction = 0.25;
  int min_length = 30;
  int max_length = 60;
  int seeds_per_block = 1;
  double train_fraction = 0.2;
  std::uint64_t seed = 11;
};

struct PlantedCorpus {
  Corpus corpus;
  SeedSets seeds;  // first seeds_per_block words of each block, labelled by class
  std::vector<std::vector<TermId>> blocks;
  std::vector<TermId> background;
};

// Block words are named <class><two-letter index> (alphaaa, betaah, ...) and
// background words bg<two-letter index>; class names are the block names in order.
PlantedCorpus make_planted_corpus(const PlantedOptions& options = {});

// Token strings of each document, e.g. for embedding training from text.
std::vector<std::vector<std::string>> document_terms(const Corpus& corpus);

}  // namespace s2vntm
