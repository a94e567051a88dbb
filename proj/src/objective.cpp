#include "s2vntm/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "s2vntm/errors.hpp"

namespace s2vntm {

ObjectiveResult evaluate_objective(const TopicModel& model, std::span<const Document* const> batch,
                                   const SeedSets& seeds, StepRandomness& randomness, NoiseMode mode,
                                   Rng* rng, bool with_gradients) {
  if (batch.empty()) throw ShapeMismatch("empty batch");
  if (mode == NoiseMode::draw && !rng) throw ConfigError("draw mode needs an rng");
  const auto& cfg = model.config();
  const int T = model.num_topics();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(B);
  const bool seeded = !seeds.groups.empty();

  ObjectiveResult out;
  const DecoderState decoder = decode(model);

  if (seeded) {
    if (mode == NoiseMode::draw || !randomness.match)
      randomness.match = match_topics(seeds, decoder.log_beta, cfg.match_includes_own_group);
    out.match = *randomness.match;
  }

  out.input = make_encoder_input(batch, model.vocab_size());
  if (mode == NoiseMode::draw) randomness.dropout = draw_dropout_masks(model, B, *rng);
  out.pass = encode_batch(model, out.input, true, &randomness.dropout);
  const EncoderPass& pass = out.pass;

  if (mode == NoiseMode::draw) {
    randomness.vmf.clear();
    for (Eigen::Index d = 0; d < B; ++d) randomness.vmf.push_back(draw_vmf_noise(T, pass.kappa[d], *rng));
  }
  if (static_cast<Eigen::Index>(randomness.vmf.size()) != B) throw ShapeMismatch("replayed noise size differs from batch");

  Eigen::MatrixXd eta(B, T);
  std::vector<VmfParams> vmf_params(static_cast<std::size_t>(B));
  for (Eigen::Index d = 0; d < B; ++d) {
    auto& vp = vmf_params[static_cast<std::size_t>(d)];
    vp.mu = pass.mu.row(d).transpose();
    vp.kappa = pass.kappa[d];
    eta.row(d) = vmf_transform(vp, randomness.vmf[static_cast<std::size_t>(d)]).transpose();
  }
  const Eigen::VectorXd tau = model.temperature();
  const Eigen::MatrixXd probs = temperature_apply_batch(eta, tau);

  Eigen::MatrixXd grad_beta;
  Eigen::MatrixXd grad_probs;
  if (with_gradients) {
    grad_beta = Eigen::MatrixXd::Zero(T, model.vocab_size());
    grad_probs = Eigen::MatrixXd::Zero(B, T);
  }

  double recon = 0.0;
  for (Eigen::Index d = 0; d < B; ++d) {
    for (const auto& e : batch[static_cast<std::size_t>(d)]->bow) {
      const auto col = decoder.beta.col(e.term);
      const double p = col.dot(probs.row(d).transpose());
      recon -= e.count * std::log(std::max(p, kProbabilityFloor));
      if (with_gradients && p > kProbabilityFloor) {
        const double g = -static_cast<double>(e.count) * inv_b / p;
        grad_beta.col(e.term) += g * probs.row(d).transpose();
        grad_probs.row(d) += g * col.transpose();
      }
    }
  }
  out.components.recon = recon * inv_b;

  double kl = 0.0;
  for (const auto& vp : vmf_params) kl += vmf_kl_uniform(vp);
  out.components.kl = kl * inv_b;

  if (seeded) {
    out.components.ce = ce_loss(seeds, out.match, decoder);
    if (mode == NoiseMode::draw) {
      randomness.negatives.clear();
      if (cfg.top_n_negatives > 0)
        for (std::size_t g = 0; g < seeds.size(); ++g)
          randomness.negatives.push_back(negative_sample(seeds, g, out.match, decoder, model.embeddings(),
                                                         cfg.top_n_negatives, cfg.negative_probability, *rng));
    }
    out.components.ns = ns_loss(randomness.negatives, decoder);
  }
  out.total = total_loss(out.components, cfg.beta, cfg.gamma);

  if (!with_gradients) return out;

  out.grads = model.zero_gradients();
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(T, model.vocab_size());
  if (seeded) {
    add_ce_log_prob_grad(seeds, out.match, cfg.beta, coef);
    add_ns_log_prob_grad(randomness.negatives, cfg.gamma, coef);
  }
  const Eigen::MatrixXd bg = decoder.beta.cwiseProduct(grad_beta);
  Eigen::MatrixXd grad_logits = bg + coef;
  const Eigen::VectorXd row_total = bg.rowwise().sum() + coef.rowwise().sum();
  grad_logits -= (decoder.beta.array().colwise() * row_total.array()).matrix();
  decoder_backward(model, grad_logits, out.grads);

  Eigen::VectorXd grad_tau = Eigen::VectorXd::Zero(T);
  const Eigen::MatrixXd grad_eta = temperature_backward(eta, tau, probs, grad_probs, grad_tau);
  if (auto ti = model.temperature_index()) {
    auto& g = out.grads[*ti];
    if (g.size() == 1)
      g(0, 0) += grad_tau.sum();
    else
      g.col(0) += grad_tau;
  }

  Eigen::MatrixXd grad_mu(B, T);
  Eigen::VectorXd grad_kappa(B);
  for (Eigen::Index d = 0; d < B; ++d) {
    const auto& vp = vmf_params[static_cast<std::size_t>(d)];
    const VmfGradient vg = vmf_transform_backward(vp, randomness.vmf[static_cast<std::size_t>(d)],
                                                  grad_eta.row(d).transpose());
    grad_mu.row(d) = vg.mu.transpose();
    grad_kappa[d] = vg.kappa + inv_b * vmf_kl_uniform_dkappa(T, vp.kappa);
  }
  encoder_backward(model, out.input, pass, &randomness.dropout, grad_mu, grad_kappa, out.grads);
  return out;
}

double GradientCheckReport::error(ParamGroup group) const {
  for (const auto& e : groups)
    if (e.group == group) return e.relative_error;
  throw IndexError(std::string("no gradient check entry for group ") + to_string(group));
}

GradientCheckReport gradient_check(const TopicModel& model, std::span<const Document* const> batch,
                                   const SeedSets& seeds, double epsilon, std::uint64_t seed,
                                   int coords_per_param) {
  Rng rng(seed);
  StepRandomness randomness;
  const ObjectiveResult base = evaluate_objective(model, batch, seeds, randomness, NoiseMode::draw, &rng, true);

  std::vector<Eigen::Index> active_terms;
  for (const Document* doc : batch)
    for (const auto& e : doc->bow) active_terms.push_back(e.term);
  std::sort(active_terms.begin(), active_terms.end());
  active_terms.erase(std::unique(active_terms.begin(), active_terms.end()), active_terms.end());

  struct Accum {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    int count = 0;
  };
  std::vector<std::pair<ParamGroup, Accum>> acc;
  auto slot = [&](ParamGroup g) -> Accum& {
    for (auto& [grp, a] : acc)
      if (grp == g) return a;
    acc.emplace_back(g, Accum{});
    return acc.back().second;
  };

  TopicModel probe = model;
  const std::size_t first_weight = model.hidden_layers().empty() ? static_cast<std::size_t>(-1)
                                                                 : model.hidden_layers().front().weight;
  for (std::size_t pi = 0; pi < probe.parameters().size(); ++pi) {
    auto& value = probe.parameters()[pi].value;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> coords;
    const bool sparse_rows = pi == first_weight;
    const Eigen::Index rows = sparse_rows ? static_cast<Eigen::Index>(active_terms.size()) : value.rows();
    const Eigen::Index total = rows * value.cols();
    if (total == 0) continue;
    std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);
    const int n = static_cast<int>(std::min<Eigen::Index>(total, coords_per_param));
    for (int k = 0; k < n; ++k) {
      const Eigen::Index flat = total <= coords_per_param ? k : pick(rng);
      const Eigen::Index r = flat / value.cols();
      coords.emplace_back(sparse_rows ? active_terms[static_cast<std::size_t>(r)] : r, flat % value.cols());
    }
    auto& a = slot(probe.parameters()[pi].group);
    for (const auto& [r, c] : coords) {
      const double orig = value(r, c);
      value(r, c) = orig + epsilon;
      const double up = evaluate_objective(probe, batch, seeds, randomness, NoiseMode::replay, nullptr, false).total;
      value(r, c) = orig - epsilon;
      const double down = evaluate_objective(probe, batch, seeds, randomness, NoiseMode::replay, nullptr, false).total;
      value(r, c) = orig;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = base.grads[pi](r, c);
      a.diff2 += (analytic - numeric) * (analytic - numeric);
      a.a2 += analytic * analytic;
      a.n2 += numeric * numeric;
      ++a.count;
    }
  }

  GradientCheckReport report;
  for (const auto& [group, a] : acc) {
    const double denom = std::max({std::sqrt(a.a2), std::sqrt(a.n2), 1e-300});
    report.groups.push_back({group, std::sqrt(a.diff2) / denom, a.count, std::sqrt(a.a2)});
  }
  return report;
}

}  // namespace s2vntm
