#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2vntm/eval.hpp"
#include "s2vntm/model.hpp"
#include "s2vntm/trainer.hpp"

namespace s2vntm {

// Config file: one `key = value` per line, `#` starts a comment. Keys carry a
// section prefix:
//   model.num_topics  model.hidden_dims (comma list)  model.dropout
//   model.batch_norm  model.temperature_mode (fixed|learnable_scalar|learnable_vector)
//   model.temperature_init  model.beta  model.gamma  model.top_n_negatives
//   model.match_includes_own_group  model.negative_probability (clamp|halve)
//   model.kappa_floor  model.embed_dim  model.vocab_size
//   train.lr  train.max_lr  train.final_lr  train.epochs  train.max_steps
//   train.batch_size  train.seed  train.finetune_epochs  train.checkpoint_every
//   eval.rule (matched_topics|all_topics)  eval.diversity_top_k
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  EvalOptions eval;
};

// Unknown keys and malformed values throw ConfigError.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig read_config_file(const std::filesystem::path& path);
// Keys assigned in a config text, in order of appearance.
std::vector<std::string> config_keys(const std::string& text);
std::string to_config_text(const RunConfig& config);

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const EvalOptions& c);
nlohmann::json to_json(const RunConfig& c);
// Missing keys keep their defaults; unknown keys throw ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
EvalOptions eval_options_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace s2vntm
