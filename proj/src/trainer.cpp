#include "s2vntm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "s2vntm/checkpoint.hpp"
#include "s2vntm/errors.hpp"

namespace s2vntm {
namespace {

Rng stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return Rng(seq);
}

constexpr std::uint64_t kInitSalt = 1;
constexpr std::uint64_t kTrainSalt = 2;
constexpr std::uint64_t kFineTuneSalt = 3;

void check_vocabulary(const Corpus& corpus, const EmbeddingMatrix& emb, int vocab_size) {
  if (emb.vocab_hash() != corpus.vocabulary.hash())
    throw VocabularyMismatch("embeddings were built for a different vocabulary");
  if (static_cast<int>(corpus.vocabulary.size()) != vocab_size)
    throw VocabularyMismatch("model vocabulary size differs from the corpus");
}

void check_seed_terms(const SeedSets& seeds, int vocab_size) {
  for (const auto& g : seeds.groups)
    for (TermId id : g.keywords)
      if (static_cast<int>(id) >= vocab_size)
        throw VocabularyMismatch("seed term id " + std::to_string(id) + " is outside the vocabulary");
}

// Runs `epochs` epochs of one-cycle Adam on `model` in place.
TrainingLog run_training(TopicModel& model, const Corpus& corpus, const SeedSets& seeds,
                         const TrainConfig& cfg, int epochs, Rng& rng, const EpochCallback& on_epoch) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<const Document*> docs;
  docs.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) docs.push_back(&d);
  if (docs.empty()) throw ConfigError("corpus has no documents to train on");

  const long n = static_cast<long>(docs.size());
  const long batch = std::min<long>(cfg.batch_size, n);
  const long per_epoch = (n + batch - 1) / batch;
  long total = per_epoch * epochs;
  if (cfg.max_steps > 0) total = std::min<long>(total, cfg.max_steps);
  const OneCycleSchedule schedule(cfg.lr, cfg.max_lr, cfg.final_learning_rate(), total);
  Adam adam(model.parameters());

  TrainingLog log;
  log.embedding_checksum = model.embeddings().checksum();
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);

  long step = 0;
  for (int epoch = 1; epoch <= epochs && step < total; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochTelemetry tel;
    tel.epoch = epoch;
    long batches = 0;
    for (long b = 0; b < per_epoch && step < total; ++b) {
      std::vector<const Document*> slice;
      for (long i = b * batch; i < std::min(n, (b + 1) * batch); ++i) slice.push_back(docs[order[static_cast<std::size_t>(i)]]);
      StepRandomness randomness;
      ObjectiveResult res = evaluate_objective(model, slice, seeds, randomness, NoiseMode::draw, &rng, true);
      if (!std::isfinite(res.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " step " << step << " (recon " << res.components.recon
            << ", kl " << res.components.kl << ", ce " << res.components.ce << ", ns " << res.components.ns << ")";
        throw DivergenceDetected(msg.str());
      }
      const double lr = schedule.at(step);
      adam.step(model.parameters(), res.grads, lr);
      update_batch_norm_stats(model, res.input, res.pass);
      tel.lr = lr;
      tel.losses.recon += res.components.recon;
      tel.losses.kl += res.components.kl;
      tel.losses.ce += res.components.ce;
      tel.losses.ns += res.components.ns;
      tel.total += res.total;
      ++batches;
      ++step;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    tel.losses.recon *= inv;
    tel.losses.kl *= inv;
    tel.losses.ce *= inv;
    tel.losses.ns *= inv;
    tel.total *= inv;
    tel.steps = step;
    if (!seeds.groups.empty()) tel.assignments = match_topics(seeds, model).assignments;
    log.epochs.push_back(tel);

    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() && epoch % cfg.checkpoint_every == 0)
      save_checkpoint(cfg.checkpoint_path, model, seeds, corpus.vocabulary.hash());
    if (on_epoch) on_epoch(tel, model);
  }

  if (model.embeddings().checksum() != log.embedding_checksum)
    throw Error("word embeddings changed during training");
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0) || !(max_lr > 0.0)) throw ConfigError("lr and max_lr must be > 0");
  if (final_lr && !(*final_lr > 0.0)) throw ConfigError("final_lr must be > 0");
  if (final_learning_rate() > lr) throw ConfigError("final_lr must not exceed lr");
  if (finetune_epochs < 1) throw ConfigError("finetune_epochs must be >= 1");
  if (max_steps < 0 || checkpoint_every < 0) throw ConfigError("max_steps and checkpoint_every must be >= 0");
}

OneCycleSchedule::OneCycleSchedule(double lr, double max_lr, double final_lr, long total_steps)
    : lr_(lr), max_lr_(max_lr), final_lr_(final_lr), total_(std::max(1L, total_steps)) {}

double OneCycleSchedule::at(long step) const {
  step = std::clamp(step, 0L, total_ - 1);
  const long peak = peak_step();
  if (peak == 0) return step == 0 ? lr_ : final_lr_;
  if (step <= peak) return lr_ + (max_lr_ - lr_) * static_cast<double>(step) / static_cast<double>(peak);
  const long tail = total_ - 1 - peak;
  return max_lr_ + (final_lr_ - max_lr_) * static_cast<double>(step - peak) / static_cast<double>(tail);
}

Adam::Adam(const std::vector<Parameter>& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(std::vector<Parameter>& params, const Gradients& grads, double lr) {
  if (grads.size() != params.size()) throw ShapeMismatch("gradient count differs from parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
    params[i].value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

nlohmann::json to_json(const EpochTelemetry& t) {
  return {{"epoch", t.epoch},
          {"steps", t.steps},
          {"lr", t.lr},
          {"recon", t.losses.recon},
          {"kl", t.losses.kl},
          {"ce", t.losses.ce},
          {"ns", t.losses.ns},
          {"total", t.total},
          {"assignments", t.assignments}};
}

EpochTelemetry epoch_telemetry_from_json(const nlohmann::json& j) {
  EpochTelemetry t;
  try {
    t.epoch = j.at("epoch").get<int>();
    t.steps = j.at("steps").get<long>();
    t.lr = j.at("lr").get<double>();
    t.losses.recon = j.at("recon").get<double>();
    t.losses.kl = j.at("kl").get<double>();
    t.losses.ce = j.at("ce").get<double>();
    t.losses.ns = j.at("ns").get<double>();
    t.total = j.at("total").get<double>();
    t.assignments = j.at("assignments").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad telemetry record: ") + e.what());
  }
  return t;
}

std::string TrainingLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) out += to_json(e).dump() + "\n";
  return out;
}

FitResult fit(const Corpus& corpus, const SeedSets& seeds, ModelConfig model_cfg, const TrainConfig& train_cfg,
              std::shared_ptr<const EmbeddingMatrix> embeddings, const EpochCallback& on_epoch) {
  train_cfg.validate();
  if (!embeddings) throw ConfigError("fit needs word embeddings");
  if (model_cfg.vocab_size == 0) model_cfg.vocab_size = static_cast<int>(corpus.vocabulary.size());
  if (model_cfg.embed_dim == 0) model_cfg.embed_dim = static_cast<int>(embeddings->dim());
  if (model_cfg.num_topics < 2) throw ConfigError("training needs num_topics >= 2");
  check_vocabulary(corpus, *embeddings, model_cfg.vocab_size);
  check_seed_terms(seeds, model_cfg.vocab_size);
  if (!seeds.groups.empty()) seeds.validate(corpus.vocabulary, model_cfg.num_topics);

  Rng init = stream(train_cfg.seed, kInitSalt);
  TopicModel model(model_cfg, std::move(embeddings), init());
  Rng rng = stream(train_cfg.seed, kTrainSalt);
  TrainingLog log = run_training(model, corpus, seeds, train_cfg, train_cfg.epochs, rng, on_epoch);
  return {std::move(model), std::move(log)};
}

FitResult fine_tune(const TopicModel& model, const Corpus& corpus, const SeedSets& edited_seeds,
                    const TrainConfig& train_cfg, const EpochCallback& on_epoch) {
  train_cfg.validate();
  check_vocabulary(corpus, model.embeddings(), model.vocab_size());
  check_seed_terms(edited_seeds, model.vocab_size());
  if (!edited_seeds.groups.empty()) edited_seeds.validate(corpus.vocabulary, model.num_topics());

  TopicModel tuned = model;
  Rng rng = stream(train_cfg.seed, kFineTuneSalt);
  TrainingLog log = run_training(tuned, corpus, edited_seeds, train_cfg, train_cfg.finetune_epochs, rng, on_epoch);
  return {std::move(tuned), std::move(log)};
}

}  // namespace s2vntm
