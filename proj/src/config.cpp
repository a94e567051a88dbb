#include "s2vntm/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "s2vntm/corpus_io.hpp"
#include "s2vntm/errors.hpp"

namespace s2vntm {
namespace {

using nlohmann::json;

enum class Kind { integer, unsigned_integer, real, optional_real, boolean, text, int_list };

struct Field {
  std::string key;  // "section.name"
  Kind kind;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

const char* to_string(TemperatureMode m) {
  switch (m) {
    case TemperatureMode::fixed: return "fixed";
    case TemperatureMode::learnable_scalar: return "learnable_scalar";
    case TemperatureMode::learnable_vector: return "learnable_vector";
  }
  return "fixed";
}

TemperatureMode temperature_mode_from(const std::string& s) {
  if (s == "fixed") return TemperatureMode::fixed;
  if (s == "learnable_scalar") return TemperatureMode::learnable_scalar;
  if (s == "learnable_vector") return TemperatureMode::learnable_vector;
  throw ConfigError("unknown temperature mode '" + s + "'");
}

NegativeProbability negative_probability_from(const std::string& s) {
  if (s == "clamp") return NegativeProbability::clamp;
  if (s == "halve") return NegativeProbability::halve;
  throw ConfigError("unknown negative probability mode '" + s + "'");
}

ClassifyRule classify_rule_from(const std::string& s) {
  if (s == "matched_topics") return ClassifyRule::matched_topics;
  if (s == "all_topics") return ClassifyRule::all_topics;
  throw ConfigError("unknown classify rule '" + s + "'");
}

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for " + key + ": " + v.dump());
  }
}

#define S2V_FIELD(key, kind, getter, setter)                                     \
  Field {                                                                        \
    key, kind, [](const RunConfig& c) -> json { return getter; },                \
        [](RunConfig& c, const json& v) { setter; }                              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      S2V_FIELD("model.num_topics", Kind::integer, c.model.num_topics, c.model.num_topics = as<int>(v, "model.num_topics")),
      S2V_FIELD("model.vocab_size", Kind::integer, c.model.vocab_size, c.model.vocab_size = as<int>(v, "model.vocab_size")),
      S2V_FIELD("model.embed_dim", Kind::integer, c.model.embed_dim, c.model.embed_dim = as<int>(v, "model.embed_dim")),
      S2V_FIELD("model.hidden_dims", Kind::int_list, c.model.hidden_dims,
                c.model.hidden_dims = as<std::vector<int>>(v, "model.hidden_dims")),
      S2V_FIELD("model.dropout", Kind::real, c.model.dropout, c.model.dropout = as<double>(v, "model.dropout")),
      S2V_FIELD("model.batch_norm", Kind::boolean, c.model.batch_norm, c.model.batch_norm = as<bool>(v, "model.batch_norm")),
      S2V_FIELD("model.temperature_mode", Kind::text, to_string(c.model.temperature_mode),
                c.model.temperature_mode = temperature_mode_from(as<std::string>(v, "model.temperature_mode"))),
      S2V_FIELD("model.temperature_init", Kind::real, c.model.temperature_init,
                c.model.temperature_init = as<double>(v, "model.temperature_init")),
      S2V_FIELD("model.beta", Kind::real, c.model.beta, c.model.beta = as<double>(v, "model.beta")),
      S2V_FIELD("model.gamma", Kind::real, c.model.gamma, c.model.gamma = as<double>(v, "model.gamma")),
      S2V_FIELD("model.top_n_negatives", Kind::integer, c.model.top_n_negatives,
                c.model.top_n_negatives = as<int>(v, "model.top_n_negatives")),
      S2V_FIELD("model.match_includes_own_group", Kind::boolean, c.model.match_includes_own_group,
                c.model.match_includes_own_group = as<bool>(v, "model.match_includes_own_group")),
      S2V_FIELD("model.negative_probability", Kind::text,
                c.model.negative_probability == NegativeProbability::clamp ? "clamp" : "halve",
                c.model.negative_probability = negative_probability_from(as<std::string>(v, "model.negative_probability"))),
      S2V_FIELD("model.kappa_floor", Kind::real, c.model.kappa_floor, c.model.kappa_floor = as<double>(v, "model.kappa_floor")),
      S2V_FIELD("train.lr", Kind::real, c.train.lr, c.train.lr = as<double>(v, "train.lr")),
      S2V_FIELD("train.max_lr", Kind::real, c.train.max_lr, c.train.max_lr = as<double>(v, "train.max_lr")),
      S2V_FIELD("train.final_lr", Kind::optional_real, c.train.final_lr ? json(*c.train.final_lr) : json(nullptr),
                c.train.final_lr = v.is_null() ? std::nullopt : std::optional<double>(as<double>(v, "train.final_lr"))),
      S2V_FIELD("train.epochs", Kind::integer, c.train.epochs, c.train.epochs = as<int>(v, "train.epochs")),
      S2V_FIELD("train.max_steps", Kind::integer, c.train.max_steps, c.train.max_steps = as<int>(v, "train.max_steps")),
      S2V_FIELD("train.batch_size", Kind::integer, c.train.batch_size, c.train.batch_size = as<int>(v, "train.batch_size")),
      S2V_FIELD("train.seed", Kind::unsigned_integer, c.train.seed, c.train.seed = as<std::uint64_t>(v, "train.seed")),
      S2V_FIELD("train.finetune_epochs", Kind::integer, c.train.finetune_epochs,
                c.train.finetune_epochs = as<int>(v, "train.finetune_epochs")),
      S2V_FIELD("train.checkpoint_every", Kind::integer, c.train.checkpoint_every,
                c.train.checkpoint_every = as<int>(v, "train.checkpoint_every")),
      S2V_FIELD("eval.rule", Kind::text, c.eval.rule == ClassifyRule::matched_topics ? "matched_topics" : "all_topics",
                c.eval.rule = classify_rule_from(as<std::string>(v, "eval.rule"))),
      S2V_FIELD("eval.diversity_top_k", Kind::integer, c.eval.diversity_top_k,
                c.eval.diversity_top_k = as<int>(v, "eval.diversity_top_k")),
  };
  return table;
}

#undef S2V_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + text + "'");
  return value;
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
}

json text_to_json(const Field& f, const std::string& text) {
  switch (f.kind) {
    case Kind::integer: return parse_number<int>(text, f.key);
    case Kind::unsigned_integer: return parse_number<std::uint64_t>(text, f.key);
    case Kind::real: return parse_real(text, f.key);
    case Kind::optional_real:
      if (text.empty() || text == "none") return nullptr;
      return parse_real(text, f.key);
    case Kind::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError("bad value for " + f.key + ": '" + text + "'");
    case Kind::text: return text;
    case Kind::int_list: {
      json list = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) list.push_back(parse_number<int>(item, f.key));
      }
      return list;
    }
  }
  return nullptr;
}

std::string json_to_text(const json& v) {
  if (v.is_null()) return "none";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].dump();
    return out;
  }
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  return v.dump();
}

void apply_section(RunConfig& c, const json& j, const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + " config must be a JSON object");
  for (const auto& [k, v] : j.items()) find_field(section + "." + k).set(c, v);
}

json section_json(const RunConfig& c, const std::string& section) {
  json out = json::object();
  for (const auto& f : fields())
    if (f.key.rfind(section + ".", 0) == 0) out[f.key.substr(section.size() + 1)] = f.get(c);
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const Field& f = find_field(key);
    f.set(base, text_to_json(f, trim(line.substr(eq + 1))));
  }
  ModelConfig probe = base.model;
  if (probe.vocab_size == 0) probe.vocab_size = 1;
  if (probe.embed_dim == 0) probe.embed_dim = 1;
  probe.validate();
  base.train.validate();
  return base;
}

std::vector<std::string> config_keys(const std::string& text) {
  std::vector<std::string> keys;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (const auto eq = line.find('='); eq != std::string::npos) keys.push_back(trim(line.substr(0, eq)));
  }
  return keys;
}

RunConfig read_config_file(const std::filesystem::path& path) { return parse_config_text(read_text_file(path)); }

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + json_to_text(f.get(config)) + "\n";
  return out;
}

nlohmann::json to_json(const ModelConfig& c) {
  RunConfig rc;
  rc.model = c;
  return section_json(rc, "model");
}

nlohmann::json to_json(const TrainConfig& c) {
  RunConfig rc;
  rc.train = c;
  return section_json(rc, "train");
}

nlohmann::json to_json(const EvalOptions& c) {
  RunConfig rc;
  rc.eval = c;
  return section_json(rc, "eval");
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"model", section_json(c, "model")}, {"train", section_json(c, "train")}, {"eval", section_json(c, "eval")}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  RunConfig rc;
  apply_section(rc, j, "model");
  return rc.model;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  RunConfig rc;
  apply_section(rc, j, "train");
  return rc.train;
}

EvalOptions eval_options_from_json(const nlohmann::json& j) {
  RunConfig rc;
  apply_section(rc, j, "eval");
  return rc.eval;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  for (const auto& [k, v] : j.items()) {
    if (k != "model" && k != "train" && k != "eval") throw ConfigError("unknown config section '" + k + "'");
    apply_section(rc, v, k);
  }
  return rc;
}

}  // namespace s2vntm
