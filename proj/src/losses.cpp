#include "s2vntm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "s2vntm/errors.hpp"

namespace s2vntm {

int MatchResult::owner_of(int topic) const {
  int owner = -1;
  for (std::size_t g = 0; g < assignments.size(); ++g) {
    if (assignments[g] != topic) continue;
    if (owner < 0 || scores(static_cast<Eigen::Index>(g), topic) > scores(owner, topic)) owner = static_cast<int>(g);
  }
  return owner;
}

MatchResult match_topics(const SeedSets& seeds, const Eigen::MatrixXd& log_beta, bool include_own_group) {
  const auto G = static_cast<Eigen::Index>(seeds.size());
  const Eigen::Index T = log_beta.rows();
  MatchResult result;
  result.scores.resize(G, T);
  result.assignments.assign(seeds.size(), 0);

  for (Eigen::Index g = 0; g < G; ++g) {
    const auto& own = seeds.groups[static_cast<std::size_t>(g)].keywords;
    if (own.empty()) throw InvalidSeeds("seed group has no keywords");
    for (Eigen::Index t = 0; t < T; ++t) {
      double mean = 0.0;
      for (TermId x : own) mean += log_beta(t, x);
      mean /= static_cast<double>(own.size());

      double competitor = -std::numeric_limits<double>::infinity();
      for (Eigen::Index h = 0; h < G; ++h) {
        if (h == g && !include_own_group) continue;
        for (TermId x : seeds.groups[static_cast<std::size_t>(h)].keywords)
          competitor = std::max(competitor, log_beta(t, x));
      }
      if (!std::isfinite(competitor)) competitor = 0.0;
      result.scores(g, t) = mean - competitor;
    }
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < T; ++t)
      if (result.scores(g, t) > result.scores(g, best)) best = t;
    result.assignments[static_cast<std::size_t>(g)] = static_cast<int>(best);
  }

  for (Eigen::Index t = 0; t < T; ++t) {
    std::vector<std::size_t> sharing;
    for (std::size_t g = 0; g < result.assignments.size(); ++g)
      if (result.assignments[g] == t) sharing.push_back(g);
    if (sharing.size() >= 2) result.merged.push_back(std::move(sharing));
  }
  return result;
}

MatchResult match_topics(const SeedSets& seeds, const TopicModel& model) {
  return match_topics(seeds, decode(model).log_beta, model.config().match_includes_own_group);
}

double recon_loss(const Document& bow, const TopicDistribution& t_d, const DecoderState& decoder) {
  if (t_d.probs.size() != decoder.beta.rows()) throw ShapeMismatch("topic distribution length differs from T");
  double loss = 0.0;
  for (const auto& e : bow.bow) {
    const double p = decoder.beta.col(e.term).dot(t_d.probs);
    loss -= e.count * std::log(std::max(p, kProbabilityFloor));
  }
  return loss;
}

double recon_loss(const Document& bow, const TopicDistribution& t_d, const TopicModel& model) {
  return recon_loss(bow, t_d, decode(model));
}

double kl_loss(const VmfParams& params) { return vmf_kl_uniform(params); }

double ce_loss(const SeedSets& seeds, const MatchResult& match, const DecoderState& decoder) {
  double loss = 0.0;
  for (std::size_t g = 0; g < seeds.size(); ++g)
    for (TermId x : seeds.groups[g].keywords) loss -= decoder.log_beta(match.assignments.at(g), x);
  return loss;
}

double ce_loss(const SeedSets& seeds, const MatchResult& match, const TopicModel& model) {
  return ce_loss(seeds, match, decode(model));
}

double negative_probability(std::span<const TermId> keywords, TermId candidate,
                            const EmbeddingMatrix& emb, NegativeProbability mode) {
  double best = -std::numeric_limits<double>::infinity();
  for (TermId k : keywords) best = std::max(best, 1.0 - cosine(k, candidate, emb));
  if (mode == NegativeProbability::halve) best *= 0.5;
  return std::clamp(best, 0.0, 1.0);
}

NegativeSampleSet negative_sample(const SeedSets& seeds, std::size_t group, const MatchResult& match,
                                  const DecoderState& decoder, const EmbeddingMatrix& emb, int top_n,
                                  NegativeProbability mode, Rng& rng) {
  NegativeSampleSet set;
  set.group = group;
  set.topic = match.assignments.at(group);
  const auto& keywords = seeds.groups.at(group).keywords;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& [term, prob] : top_words(decoder, set.topic, top_n)) {
    (void)prob;
    if (std::find(keywords.begin(), keywords.end(), term) != keywords.end()) continue;
    const double p = negative_probability(keywords, term, emb, mode);
    set.candidates.push_back(term);
    set.probabilities.push_back(p);
    if (unit(rng) < p) set.sampled.push_back(term);
  }
  return set;
}

NegativeSampleSet negative_sample(const SeedSets& seeds, std::size_t group, const MatchResult& match,
                                  const TopicModel& model, Rng& rng) {
  return negative_sample(seeds, group, match, decode(model), model.embeddings(),
                         model.config().top_n_negatives, model.config().negative_probability, rng);
}

double ns_loss(std::span<const NegativeSampleSet> samples, const DecoderState& decoder) {
  double loss = 0.0;
  for (const auto& set : samples)
    for (TermId x : set.sampled) loss += decoder.log_beta(set.topic, x);
  return loss;
}

double total_loss(const LossComponents& c, double beta, double gamma) {
  return c.recon + c.kl + beta * c.ce + gamma * c.ns;
}

void add_ce_log_prob_grad(const SeedSets& seeds, const MatchResult& match, double weight,
                          Eigen::MatrixXd& coef) {
  for (std::size_t g = 0; g < seeds.size(); ++g)
    for (TermId x : seeds.groups[g].keywords) coef(match.assignments.at(g), x) -= weight;
}

void add_ns_log_prob_grad(std::span<const NegativeSampleSet> samples, double weight, Eigen::MatrixXd& coef) {
  for (const auto& set : samples)
    for (TermId x : set.sampled) coef(set.topic, x) += weight;
}

}  // namespace s2vntm
