#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "s2vntm/corpus.hpp"
#include "s2vntm/model.hpp"

namespace s2vntm {

// Probability floor inside every log of the reconstruction term.
inline constexpr double kProbabilityFloor = 1e-12;

struct MatchResult {
  std::vector<int> assignments;                  // seed group -> topic
  std::vector<std::vector<std::size_t>> merged;  // groups that share a topic (each entry size >= 2)
  Eigen::MatrixXd scores;                        // groups x topics matching score

  // Group credited with a topic: among groups matched to it, the highest
  // score, ties to the lower group index. -1 when no group is matched.
  int owner_of(int topic) const;
};

// t_s = argmax_t [ mean_{x in s} log q(x|t) - max_{x in competitors} log q(x|t) ]
// where competitors are the keywords of the other groups (or of all groups
// when include_own_group). An empty competitor set contributes 0. Ties go
// to the lowest topic index.
MatchResult match_topics(const SeedSets& seeds, const Eigen::MatrixXd& log_beta,
                         bool include_own_group = false);
MatchResult match_topics(const SeedSets& seeds, const TopicModel& model);

// -sum_w count_w log max(p_w, floor), with p = t_d x softmax(e_t e_W^T).
double recon_loss(const Document& bow, const TopicDistribution& t_d, const DecoderState& decoder);
double recon_loss(const Document& bow, const TopicDistribution& t_d, const TopicModel& model);

double kl_loss(const VmfParams& params);

// -sum_s sum_{x in s} log q(x | t_s) with t_s from the match.
double ce_loss(const SeedSets& seeds, const MatchResult& match, const DecoderState& decoder);
double ce_loss(const SeedSets& seeds, const MatchResult& match, const TopicModel& model);

struct NegativeSampleSet {
  std::size_t group = 0;
  int topic = 0;
  std::vector<TermId> candidates;     // top-N of the topic minus the group's keywords
  std::vector<double> probabilities;  // inclusion probability per candidate
  std::vector<TermId> sampled;
};

// Inclusion probability of a candidate: max over the group's keywords of
// (1 - cos), clamped to [0, 1] (or halved, per `mode`).
double negative_probability(std::span<const TermId> keywords, TermId candidate,
                            const EmbeddingMatrix& emb, NegativeProbability mode);

NegativeSampleSet negative_sample(const SeedSets& seeds, std::size_t group, const MatchResult& match,
                                  const DecoderState& decoder, const EmbeddingMatrix& emb, int top_n,
                                  NegativeProbability mode, Rng& rng);
NegativeSampleSet negative_sample(const SeedSets& seeds, std::size_t group, const MatchResult& match,
                                  const TopicModel& model, Rng& rng);

// sum_s sum_{x in ns_s} log q(x | t_s); unweighted (gamma is applied once, in total_loss).
double ns_loss(std::span<const NegativeSampleSet> samples, const DecoderState& decoder);

struct LossComponents {
  double recon = 0.0;
  double kl = 0.0;
  double ce = 0.0;
  double ns = 0.0;
};

double total_loss(const LossComponents& c, double beta, double gamma);

// Gradient helpers: accumulate dL/dlog q(x|t) into `coef` (T x V) for the
// seed and negative-sampling terms scaled by `weight`.
void add_ce_log_prob_grad(const SeedSets& seeds, const MatchResult& match, double weight,
                          Eigen::MatrixXd& coef);
void add_ns_log_prob_grad(std::span<const NegativeSampleSet> samples, double weight,
                          Eigen::MatrixXd& coef);

}  // namespace s2vntm
