#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s2vntm/losses.hpp"
#include "s2vntm/model.hpp"

namespace s2vntm {

// Every random choice one optimization step makes. Recorded on the first
// (draw) evaluation so the identical objective can be re-evaluated for
// finite differences.
struct StepRandomness {
  std::optional<MatchResult> match;
  DropoutMasks dropout;
  std::vector<VmfNoise> vmf;
  std::vector<NegativeSampleSet> negatives;
};

enum class NoiseMode { draw, replay };

struct ObjectiveResult {
  LossComponents components;  // recon and kl are batch means
  double total = 0.0;
  MatchResult match;
  Gradients grads;  // empty unless requested
  SparseInput input;
  EncoderPass pass;
};

// Training-mode objective on one batch:
//   mean_d L_Recon + mean_d L_KL + beta * L_CE + gamma * L_NS
// with one vMF sample per document. In draw mode `rng` supplies dropout,
// sampler and negative-sampling randomness and `randomness` records it; in
// replay mode `randomness` is reused verbatim (including the topic match).
ObjectiveResult evaluate_objective(const TopicModel& model, std::span<const Document* const> batch,
                                   const SeedSets& seeds, StepRandomness& randomness, NoiseMode mode,
                                   Rng* rng, bool with_gradients);

struct GradientCheckEntry {
  ParamGroup group;
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  int coordinates = 0;
  double analytic_norm = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientCheckEntry> groups;
  double error(ParamGroup group) const;  // throws IndexError when the group is absent
};

// Central finite differences against the analytic gradient with all step
// randomness frozen. Checks up to `coords_per_param` coordinates of each
// parameter tensor (first-layer rows restricted to terms present in the batch).
GradientCheckReport gradient_check(const TopicModel& model, std::span<const Document* const> batch,
                                   const SeedSets& seeds, double epsilon = 1e-6,
                                   std::uint64_t seed = 1, int coords_per_param = 40);

}  // namespace s2vntm
