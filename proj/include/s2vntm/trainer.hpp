#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2vntm/corpus.hpp"
#include "s2vntm/losses.hpp"
#include "s2vntm/model.hpp"
#include "s2vntm/objective.hpp"

namespace s2vntm {

struct TrainConfig {
  double lr = 0.002;
  double max_lr = 0.01;
  std::optional<double> final_lr;  // default lr / 10
  int epochs = 50;
  // When positive, caps the number of optimizer steps; the schedule then
  // spans that many steps instead of epochs x batches.
  int max_steps = 0;
  int batch_size = 256;
  std::uint64_t seed = 1;
  int finetune_epochs = 10;
  int checkpoint_every = 0;  // epochs; 0 disables
  std::filesystem::path checkpoint_path;

  double final_learning_rate() const { return final_lr.value_or(0.1 * lr); }
  void validate() const;  // throws ConfigError
};

// Linear ramp lr -> max_lr over the first half of the steps, then linear
// decay to final_lr at the last step.
class OneCycleSchedule {
 public:
  OneCycleSchedule(double lr, double max_lr, double final_lr, long total_steps);
  double at(long step) const;
  long total_steps() const { return total_; }
  long peak_step() const { return total_ / 2; }

 private:
  double lr_, max_lr_, final_lr_;
  long total_;
};

class Adam {
 public:
  explicit Adam(const std::vector<Parameter>& params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(std::vector<Parameter>& params, const Gradients& grads, double lr);
  long steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

struct EpochTelemetry {
  int epoch = 0;  // 1-based
  long steps = 0;
  double lr = 0.0;  // learning rate of the epoch's last step
  LossComponents losses;  // means over the epoch's batches; ns is unweighted
  double total = 0.0;
  std::vector<int> assignments;  // seed group -> topic after the epoch
};

nlohmann::json to_json(const EpochTelemetry& t);
EpochTelemetry epoch_telemetry_from_json(const nlohmann::json& j);

struct TrainingLog {
  std::vector<EpochTelemetry> epochs;
  std::uint64_t embedding_checksum = 0;
  double wall_seconds = 0.0;  // not part of the JSON lines

  std::string to_jsonl() const;
};

struct FitResult {
  TopicModel model;
  TrainingLog log;
};

// Called after every epoch with a snapshot of the model.
using EpochCallback = std::function<void(const EpochTelemetry&, const TopicModel&)>;

// Trains on every document of the corpus. model_cfg.vocab_size and embed_dim
// are taken from the corpus and embeddings when left at 0. Empty seeds train
// the unsupervised objective.
// Throws VocabularyMismatch, InvalidSeeds, ConfigError, DivergenceDetected.
FitResult fit(const Corpus& corpus, const SeedSets& seeds, ModelConfig model_cfg,
              const TrainConfig& train_cfg, std::shared_ptr<const EmbeddingMatrix> embeddings,
              const EpochCallback& on_epoch = {});

// Warm start from `model`, finetune_epochs of training under edited seeds.
FitResult fine_tune(const TopicModel& model, const Corpus& corpus, const SeedSets& edited_seeds,
                    const TrainConfig& train_cfg, const EpochCallback& on_epoch = {});

}  // namespace s2vntm
