#include "s2vntm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s2vntm/errors.hpp"

namespace s2vntm {

namespace {

constexpr double kBatchNormEps = 1e-5;

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

void softmax_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

// Applies a dense layer to the previous activation (sparse input or dense).
template <typename Input>
Eigen::MatrixXd affine(const Input& input, const Eigen::MatrixXd& weight, const Eigen::MatrixXd& bias) {
  Eigen::MatrixXd out = input * weight;
  out.rowwise() += bias.col(0).transpose();
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (num_topics < 1) throw ConfigError("num_topics must be >= 1");
  if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (hidden_dims.empty()) throw ConfigError("at least one hidden layer is required");
  for (int h : hidden_dims)
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(temperature_init > 0.0)) throw ConfigError("temperature_init must be > 0");
  if (top_n_negatives < 0) throw ConfigError("top_n_negatives must be >= 0");
  if (!(kappa_floor > 0.0)) throw ConfigError("kappa_floor must be > 0");
}

const char* to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::encoder: return "encoder";
    case ParamGroup::kappa_head: return "kappa_head";
    case ParamGroup::topic_embeddings: return "topic_embeddings";
    case ParamGroup::temperature: return "temperature";
  }
  return "?";
}

TopicModel::TopicModel(ModelConfig config, std::shared_ptr<const EmbeddingMatrix> embeddings,
                       std::uint64_t seed)
    : config_(std::move(config)), embeddings_(std::move(embeddings)) {
  config_.validate();
  if (!embeddings_) throw ConfigError("topic model needs word embeddings");
  if (embeddings_->rows() != config_.vocab_size)
    throw ShapeMismatch("embedding rows (" + std::to_string(embeddings_->rows()) +
                        ") differ from vocab_size (" + std::to_string(config_.vocab_size) + ")");
  if (embeddings_->dim() != config_.embed_dim)
    throw ShapeMismatch("embedding dimension differs from embed_dim");

  Rng rng(seed);
  int fan_in = config_.vocab_size;
  for (std::size_t i = 0; i < config_.hidden_dims.size(); ++i) {
    const int width = config_.hidden_dims[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::string prefix = "hidden" + std::to_string(i);
    DenseLayer layer{};
    layer.weight = add_param(prefix + ".weight", ParamGroup::encoder, uniform_matrix(fan_in, width, bound, rng));
    layer.bias = add_param(prefix + ".bias", ParamGroup::encoder, uniform_matrix(width, 1, bound, rng));
    if (config_.batch_norm) {
      layer.bn_scale = add_param(prefix + ".bn_scale", ParamGroup::encoder, Eigen::MatrixXd::Ones(width, 1));
      layer.bn_shift = add_param(prefix + ".bn_shift", ParamGroup::encoder, Eigen::MatrixXd::Zero(width, 1));
      bn_stats_.push_back({Eigen::VectorXd::Zero(width), Eigen::VectorXd::Ones(width)});
    }
    hidden_.push_back(layer);
    fan_in = width;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  mu_head_.weight = add_param("mu.weight", ParamGroup::encoder, uniform_matrix(fan_in, config_.num_topics, bound, rng));
  mu_head_.bias = add_param("mu.bias", ParamGroup::encoder, uniform_matrix(config_.num_topics, 1, bound, rng));
  kappa_head_.weight = add_param("kappa.weight", ParamGroup::kappa_head, uniform_matrix(fan_in, 1, bound, rng));
  kappa_head_.bias = add_param("kappa.bias", ParamGroup::kappa_head, uniform_matrix(1, 1, bound, rng));

  Eigen::MatrixXd topics(config_.num_topics, config_.embed_dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < config_.num_topics; ++t) {
    for (int e = 0; e < config_.embed_dim; ++e) topics(t, e) = normal(rng);
    topics.row(t).normalize();
  }
  topics_ = add_param("topic_embeddings", ParamGroup::topic_embeddings, std::move(topics));

  switch (config_.temperature_mode) {
    case TemperatureMode::fixed:
      break;
    case TemperatureMode::learnable_scalar:
      temperature_ = add_param("temperature", ParamGroup::temperature,
                               Eigen::MatrixXd::Constant(1, 1, config_.temperature_init));
      break;
    case TemperatureMode::learnable_vector:
      temperature_ = add_param("temperature", ParamGroup::temperature,
                               Eigen::MatrixXd::Constant(config_.num_topics, 1, config_.temperature_init));
      break;
  }
}

std::size_t TopicModel::add_param(std::string name, ParamGroup group, Eigen::MatrixXd value) {
  params_.push_back({std::move(name), group, std::move(value)});
  return params_.size() - 1;
}

Gradients TopicModel::zero_gradients() const {
  Gradients g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  return g;
}

Eigen::VectorXd TopicModel::temperature() const {
  const int T = config_.num_topics;
  if (!temperature_) return Eigen::VectorXd::Constant(T, config_.temperature_init);
  const auto& v = params_[*temperature_].value;
  if (v.size() == 1) return Eigen::VectorXd::Constant(T, v(0, 0));
  return v.col(0);
}

SparseInput make_encoder_input(std::span<const Document* const> docs, int vocab_size) {
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t r = 0; r < docs.size(); ++r)
    for (const auto& e : docs[r]->bow) {
      if (static_cast<int>(e.term) >= vocab_size) throw ShapeMismatch("document term id exceeds model vocabulary");
      entries.emplace_back(static_cast<int>(r), static_cast<int>(e.term), std::log1p(static_cast<double>(e.count)));
    }
  SparseInput input(static_cast<Eigen::Index>(docs.size()), vocab_size);
  input.setFromTriplets(entries.begin(), entries.end());
  return input;
}

DropoutMasks draw_dropout_masks(const TopicModel& model, Eigen::Index batch, Rng& rng) {
  DropoutMasks masks;
  const double p = model.config().dropout;
  if (p <= 0.0) return masks;
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (int width : model.config().hidden_dims) {
    Eigen::MatrixXd m(batch, width);
    for (Eigen::Index c = 0; c < width; ++c)
      for (Eigen::Index r = 0; r < batch; ++r) m(r, c) = keep(rng) ? scale : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

EncoderPass encode_batch(const TopicModel& model, const SparseInput& input, bool train_mode,
                         const DropoutMasks* masks) {
  const auto& params = model.parameters();
  const auto& cfg = model.config();
  if (input.cols() != cfg.vocab_size) throw ShapeMismatch("encoder input width differs from vocab_size");
  const bool use_dropout = train_mode && masks && !masks->empty();

  EncoderPass pass;
  const Eigen::Index B = input.rows();
  for (std::size_t i = 0; i < model.hidden_layers().size(); ++i) {
    const auto& layer = model.hidden_layers()[i];
    LayerCache cache;
    cache.pre = i == 0 ? affine(input, params[layer.weight].value, params[layer.bias].value)
                       : affine(pass.layers.back().output, params[layer.weight].value, params[layer.bias].value);
    Eigen::MatrixXd act = cache.pre;
    if (layer.bn_scale) {
      Eigen::RowVectorXd mean;
      Eigen::RowVectorXd var;
      if (train_mode) {
        mean = cache.pre.colwise().mean();
        var = (cache.pre.rowwise() - mean).array().square().colwise().mean();
      } else {
        mean = model.batch_norm_stats()[i].running_mean.transpose();
        var = model.batch_norm_stats()[i].running_var.transpose();
      }
      cache.inv_std = (var.array() + kBatchNormEps).rsqrt();
      cache.normalized = (cache.pre.rowwise() - mean).array().rowwise() * cache.inv_std.array();
      act = (cache.normalized.array().rowwise() * params[*layer.bn_scale].value.col(0).transpose().array())
                .rowwise() +
            params[*layer.bn_shift].value.col(0).transpose().array();
    }
    cache.activated = act.cwiseMax(0.0);
    cache.output = use_dropout ? Eigen::MatrixXd(cache.activated.cwiseProduct((*masks)[i])) : cache.activated;
    pass.layers.push_back(std::move(cache));
  }

  const Eigen::MatrixXd& h = pass.layers.back().output;
  pass.mu_raw = affine(h, params[model.mu_head().weight].value, params[model.mu_head().bias].value);
  pass.mu.resize(B, cfg.num_topics);
  for (Eigen::Index r = 0; r < B; ++r) {
    const double n = pass.mu_raw.row(r).norm();
    if (n > 1e-12)
      pass.mu.row(r) = pass.mu_raw.row(r) / n;
    else
      pass.mu.row(r).setConstant(1.0 / std::sqrt(static_cast<double>(cfg.num_topics)));
  }
  const Eigen::MatrixXd k = affine(h, params[model.kappa_head().weight].value, params[model.kappa_head().bias].value);
  pass.kappa_raw = k.col(0);
  pass.kappa = pass.kappa_raw.unaryExpr([&](double x) { return softplus(x) + cfg.kappa_floor; });
  return pass;
}

void encoder_backward(const TopicModel& model, const SparseInput& input, const EncoderPass& pass,
                      const DropoutMasks* masks, const Eigen::MatrixXd& grad_mu,
                      const Eigen::VectorXd& grad_kappa, Gradients& grads) {
  const auto& params = model.parameters();
  const Eigen::Index B = input.rows();
  const bool use_dropout = masks && !masks->empty();

  Eigen::MatrixXd grad_mu_raw(B, model.num_topics());
  for (Eigen::Index r = 0; r < B; ++r) {
    const double n = pass.mu_raw.row(r).norm();
    if (n > 1e-12) {
      const auto mu = pass.mu.row(r);
      grad_mu_raw.row(r) = (grad_mu.row(r) - mu * mu.dot(grad_mu.row(r))) / n;
    } else {
      grad_mu_raw.row(r).setZero();
    }
  }
  const Eigen::VectorXd grad_kappa_raw =
      grad_kappa.cwiseProduct(pass.kappa_raw.unaryExpr([](double x) { return sigmoid(x); }));

  const Eigen::MatrixXd& h = pass.layers.back().output;
  grads[model.mu_head().weight] += h.transpose() * grad_mu_raw;
  grads[model.mu_head().bias] += grad_mu_raw.colwise().sum().transpose();
  grads[model.kappa_head().weight] += h.transpose() * grad_kappa_raw;
  grads[model.kappa_head().bias](0, 0) += grad_kappa_raw.sum();

  Eigen::MatrixXd grad_out = grad_mu_raw * params[model.mu_head().weight].value.transpose() +
                             grad_kappa_raw * params[model.kappa_head().weight].value.transpose();

  for (std::size_t li = model.hidden_layers().size(); li-- > 0;) {
    const auto& layer = model.hidden_layers()[li];
    const LayerCache& cache = pass.layers[li];
    Eigen::MatrixXd grad = use_dropout ? Eigen::MatrixXd(grad_out.cwiseProduct((*masks)[li])) : grad_out;
    grad = (cache.activated.array() > 0.0).select(grad, 0.0);
    if (layer.bn_scale) {
      const Eigen::RowVectorXd scale = params[*layer.bn_scale].value.col(0).transpose();
      grads[*layer.bn_scale] += grad.cwiseProduct(cache.normalized).colwise().sum().transpose();
      grads[*layer.bn_shift] += grad.colwise().sum().transpose();
      const Eigen::MatrixXd grad_norm = grad.array().rowwise() * scale.array();
      const Eigen::RowVectorXd sum_g = grad_norm.colwise().sum();
      const Eigen::RowVectorXd sum_gx = grad_norm.cwiseProduct(cache.normalized).colwise().sum();
      const double inv_b = 1.0 / static_cast<double>(B);
      Eigen::MatrixXd centered = grad_norm;
      centered.rowwise() -= sum_g * inv_b;
      centered -= (cache.normalized.array().rowwise() * (sum_gx * inv_b).array()).matrix();
      grad = centered.array().rowwise() * cache.inv_std.array();
    }
    grads[layer.bias] += grad.colwise().sum().transpose();
    if (li == 0) {
      grads[layer.weight] += input.transpose() * grad;
    } else {
      grads[layer.weight] += pass.layers[li - 1].output.transpose() * grad;
      grad_out = grad * params[layer.weight].value.transpose();
    }
  }
}

void update_batch_norm_stats(TopicModel& model, const SparseInput& input, const EncoderPass& pass,
                             double momentum) {
  if (!model.config().batch_norm) return;
  const double B = static_cast<double>(input.rows());
  for (std::size_t i = 0; i < pass.layers.size(); ++i) {
    const Eigen::RowVectorXd mean = pass.layers[i].pre.colwise().mean();
    Eigen::RowVectorXd var = (pass.layers[i].pre.rowwise() - mean).array().square().colwise().sum();
    var /= std::max(1.0, B - 1.0);
    auto& stats = model.batch_norm_stats()[i];
    stats.running_mean = (1.0 - momentum) * stats.running_mean + momentum * mean.transpose();
    stats.running_var = (1.0 - momentum) * stats.running_var + momentum * var.transpose();
  }
}

VmfParams encode(const Document& doc, const TopicModel& model, bool train_mode, Rng* rng) {
  const Document* docs[] = {&doc};
  const SparseInput input = make_encoder_input(docs, model.vocab_size());
  DropoutMasks masks;
  if (train_mode && rng) masks = draw_dropout_masks(model, 1, *rng);
  const EncoderPass pass = encode_batch(model, input, train_mode, &masks);
  return {pass.mu.row(0).transpose(), pass.kappa[0]};
}

Eigen::MatrixXd temperature_apply_batch(const Eigen::MatrixXd& eta, const Eigen::VectorXd& tau) {
  Eigen::MatrixXd logits = eta.array().rowwise() * tau.transpose().array();
  softmax_rows(logits);
  return logits;
}

TopicDistribution temperature_apply(const Eigen::VectorXd& eta, const TopicModel& model) {
  if (eta.size() != model.num_topics()) throw ShapeMismatch("eta length differs from num_topics");
  return {temperature_apply_batch(eta.transpose(), model.temperature()).row(0).transpose()};
}

Eigen::MatrixXd temperature_backward(const Eigen::MatrixXd& eta, const Eigen::VectorXd& tau,
                                     const Eigen::MatrixXd& probs, const Eigen::MatrixXd& grad_probs,
                                     Eigen::VectorXd& grad_tau) {
  const Eigen::VectorXd inner = probs.cwiseProduct(grad_probs).rowwise().sum();
  Eigen::MatrixXd grad_logits = grad_probs;
  grad_logits.colwise() -= inner;
  grad_logits = grad_logits.cwiseProduct(probs);
  grad_tau += grad_logits.cwiseProduct(eta).colwise().sum().transpose();
  return grad_logits.array().rowwise() * tau.transpose().array();
}

DecoderState decode(const TopicModel& model) {
  DecoderState state;
  const Eigen::MatrixXd logits = model.topic_embeddings() * model.embeddings().vectors().transpose();
  state.log_beta.resize(logits.rows(), logits.cols());
  state.beta.resize(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double mx = logits.row(t).maxCoeff();
    const double lse = mx + std::log((logits.row(t).array() - mx).exp().sum());
    state.log_beta.row(t) = logits.row(t).array() - lse;
    state.beta.row(t) = state.log_beta.row(t).array().exp();
  }
  return state;
}

Eigen::MatrixXd topic_word_matrix(const TopicModel& model) { return decode(model).beta; }

Eigen::VectorXd reconstruct(const TopicDistribution& t_d, const DecoderState& decoder) {
  if (t_d.probs.size() != decoder.beta.rows()) throw ShapeMismatch("topic distribution length differs from T");
  return decoder.beta.transpose() * t_d.probs;
}

Eigen::VectorXd reconstruct(const TopicDistribution& t_d, const TopicModel& model) {
  return reconstruct(t_d, decode(model));
}

void decoder_backward(const TopicModel& model, const Eigen::MatrixXd& grad_logits, Gradients& grads) {
  grads[model.topic_index()] += grad_logits * model.embeddings().vectors();
}

std::vector<std::pair<TermId, double>> top_words(const DecoderState& decoder, int topic, int n) {
  if (topic < 0 || topic >= decoder.beta.rows())
    throw IndexError("topic " + std::to_string(topic) + " out of range");
  const auto V = static_cast<std::size_t>(decoder.beta.cols());
  const std::size_t k = std::min<std::size_t>(V, static_cast<std::size_t>(std::max(0, n)));
  std::vector<TermId> order(V);
  std::iota(order.begin(), order.end(), 0);
  const auto row = decoder.beta.row(topic);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](TermId a, TermId b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  std::vector<std::pair<TermId, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], row[order[i]]);
  return out;
}

std::vector<std::pair<TermId, double>> top_words(const TopicModel& model, int topic, int n) {
  return top_words(decode(model), topic, n);
}

Eigen::MatrixXd infer_topics_batch(std::span<const Document* const> docs, const TopicModel& model) {
  const SparseInput input = make_encoder_input(docs, model.vocab_size());
  const EncoderPass pass = encode_batch(model, input, false, nullptr);
  return temperature_apply_batch(pass.mu, model.temperature());
}

TopicDistribution infer_topics(const Document& doc, const TopicModel& model) {
  const Document* docs[] = {&doc};
  return {infer_topics_batch(docs, model).row(0).transpose()};
}

}  // namespace s2vntm
