#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "s2vntm/corpus.hpp"
#include "s2vntm/embeddings.hpp"
#include "s2vntm/vmf.hpp"

namespace s2vntm {

enum class TemperatureMode { fixed, learnable_scalar, learnable_vector };

// How a negative-sampling candidate's inclusion probability is derived from
// max over seeds of (1 - cos): clamped to [0, 1], or halved into [0, 1].
enum class NegativeProbability { clamp, halve };

struct ModelConfig {
  int num_topics = 5;
  int vocab_size = 0;
  int embed_dim = 50;
  std::vector<int> hidden_dims{256, 64};
  double dropout = 0.5;
  bool batch_norm = false;
  TemperatureMode temperature_mode = TemperatureMode::fixed;
  double temperature_init = 10.0;
  double beta = 1.0;   // seed cross-entropy weight
  double gamma = 1.0;  // negative-sampling weight
  int top_n_negatives = 30;
  // Topic matching: competitor keywords drawn from the other groups only
  // (false) or from every group including the group being matched (true).
  bool match_includes_own_group = false;
  NegativeProbability negative_probability = NegativeProbability::clamp;
  double kappa_floor = 1e-3;

  void validate() const;  // throws ConfigError
};

enum class ParamGroup { encoder, kappa_head, topic_embeddings, temperature };

const char* to_string(ParamGroup group);

struct Parameter {
  std::string name;
  ParamGroup group;
  Eigen::MatrixXd value;
};

using Gradients = std::vector<Eigen::MatrixXd>;

struct BatchNormStats {
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

// Encoder MLP phi with mu and kappa heads, topic embeddings e_t and the
// temperature parameters. Word embeddings are shared and never written.
//
// Dense layers store their weight as (fan_in x fan_out) so a sparse batch of
// bag-of-words rows multiplies straight into it.
class TopicModel {
 public:
  TopicModel(ModelConfig config, std::shared_ptr<const EmbeddingMatrix> embeddings,
             std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int num_topics() const { return config_.num_topics; }
  int vocab_size() const { return config_.vocab_size; }
  const EmbeddingMatrix& embeddings() const { return *embeddings_; }
  const std::shared_ptr<const EmbeddingMatrix>& embeddings_ptr() const { return embeddings_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Gradients zero_gradients() const;

  struct DenseLayer {
    std::size_t weight;
    std::size_t bias;
    std::optional<std::size_t> bn_scale;
    std::optional<std::size_t> bn_shift;
  };
  const std::vector<DenseLayer>& hidden_layers() const { return hidden_; }
  const DenseLayer& mu_head() const { return mu_head_; }
  const DenseLayer& kappa_head() const { return kappa_head_; }
  std::size_t topic_index() const { return topics_; }
  std::optional<std::size_t> temperature_index() const { return temperature_; }

  const Eigen::MatrixXd& topic_embeddings() const { return params_[topics_].value; }
  Eigen::MatrixXd& topic_embeddings() { return params_[topics_].value; }
  // Per-topic multiplier applied to eta before the softmax.
  Eigen::VectorXd temperature() const;

  std::vector<BatchNormStats>& batch_norm_stats() { return bn_stats_; }
  const std::vector<BatchNormStats>& batch_norm_stats() const { return bn_stats_; }

 private:
  std::size_t add_param(std::string name, ParamGroup group, Eigen::MatrixXd value);

  ModelConfig config_;
  std::shared_ptr<const EmbeddingMatrix> embeddings_;
  std::vector<Parameter> params_;
  std::vector<DenseLayer> hidden_;
  DenseLayer mu_head_{};
  DenseLayer kappa_head_{};
  std::size_t topics_ = 0;
  std::optional<std::size_t> temperature_;
  std::vector<BatchNormStats> bn_stats_;
};

using SparseInput = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Encoder input rows: log(1 + count) per vocabulary entry.
SparseInput make_encoder_input(std::span<const Document* const> docs, int vocab_size);

struct LayerCache {
  Eigen::MatrixXd pre;        // affine output
  Eigen::MatrixXd normalized; // (pre - mean) * inv_std, batch-norm only
  Eigen::RowVectorXd inv_std;
  Eigen::MatrixXd activated;  // after batch norm and ReLU
  Eigen::MatrixXd output;     // after dropout
};

struct EncoderPass {
  std::vector<LayerCache> layers;
  Eigen::MatrixXd mu_raw;   // B x T
  Eigen::MatrixXd mu;       // rows normalized
  Eigen::VectorXd kappa_raw;
  Eigen::VectorXd kappa;    // softplus(kappa_raw) + kappa_floor
};

// Dropout masks hold 0 or 1/(1-p) per unit.
using DropoutMasks = std::vector<Eigen::MatrixXd>;

DropoutMasks draw_dropout_masks(const TopicModel& model, Eigen::Index batch, Rng& rng);

// Training mode uses batch statistics for batch norm and applies `masks`
// (null: no dropout). Evaluation mode uses running statistics and never drops.
EncoderPass encode_batch(const TopicModel& model, const SparseInput& input, bool train_mode,
                         const DropoutMasks* masks);

// Accumulates parameter gradients for dL/dmu and dL/dkappa of every row.
void encoder_backward(const TopicModel& model, const SparseInput& input, const EncoderPass& pass,
                      const DropoutMasks* masks, const Eigen::MatrixXd& grad_mu,
                      const Eigen::VectorXd& grad_kappa, Gradients& grads);

// Folds the batch statistics of a training pass into the running averages.
void update_batch_norm_stats(TopicModel& model, const SparseInput& input, const EncoderPass& pass,
                             double momentum = 0.1);

// Single-document encoder. With train_mode and an rng, dropout is sampled.
VmfParams encode(const Document& doc, const TopicModel& model, bool train_mode = false,
                 Rng* rng = nullptr);

struct TopicDistribution {
  Eigen::VectorXd probs;
};

TopicDistribution temperature_apply(const Eigen::VectorXd& eta, const TopicModel& model);

// Row-wise softmax(tau * eta) for a batch of unit vectors.
Eigen::MatrixXd temperature_apply_batch(const Eigen::MatrixXd& eta, const Eigen::VectorXd& tau);

// Given dL/dt for a batch, returns dL/deta and adds dL/dtau into `grad_tau`
// (length T; the caller folds it to a scalar when the temperature is shared).
Eigen::MatrixXd temperature_backward(const Eigen::MatrixXd& eta, const Eigen::VectorXd& tau,
                                     const Eigen::MatrixXd& probs, const Eigen::MatrixXd& grad_probs,
                                     Eigen::VectorXd& grad_tau);

// softmax(e_t e_W^T), kept with its log for the loss terms.
struct DecoderState {
  Eigen::MatrixXd log_beta;  // T x V
  Eigen::MatrixXd beta;      // T x V, rows sum to 1
};

DecoderState decode(const TopicModel& model);
Eigen::MatrixXd topic_word_matrix(const TopicModel& model);

Eigen::VectorXd reconstruct(const TopicDistribution& t_d, const TopicModel& model);
Eigen::VectorXd reconstruct(const TopicDistribution& t_d, const DecoderState& decoder);

// Backpropagates dL/dlogits (T x V) of the decoder into e_t.
void decoder_backward(const TopicModel& model, const Eigen::MatrixXd& grad_logits, Gradients& grads);

// n highest-probability terms of one topic, descending, ties by term id.
std::vector<std::pair<TermId, double>> top_words(const TopicModel& model, int topic, int n);
std::vector<std::pair<TermId, double>> top_words(const DecoderState& decoder, int topic, int n);

// Deterministic inference path: mu is used directly as eta.
TopicDistribution infer_topics(const Document& doc, const TopicModel& model);
Eigen::MatrixXd infer_topics_batch(std::span<const Document* const> docs, const TopicModel& model);

}  // namespace s2vntm
