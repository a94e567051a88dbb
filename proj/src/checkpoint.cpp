#include "s2vntm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "s2vntm/config.hpp"
#include "s2vntm/errors.hpp"

namespace s2vntm {
namespace {

constexpr char kMagic[8] = {'S', '2', 'V', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TopicModel& model, const SeedSets& seeds,
                     std::uint64_t vocab_hash) {
  using namespace detail;
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put_string(out, to_json(model.config()).dump());
  put<std::uint64_t>(out, vocab_hash);
  put<std::uint64_t>(out, model.embeddings().checksum());

  put<std::uint8_t>(out, static_cast<std::uint8_t>(seeds.provenance));
  put<std::uint64_t>(out, seeds.groups.size());
  for (const auto& g : seeds.groups) {
    put_string(out, g.label);
    put<std::uint64_t>(out, g.keywords.size());
    for (TermId id : g.keywords) put<TermId>(out, id);
  }

  put<std::uint64_t>(out, model.parameters().size());
  for (const auto& p : model.parameters()) {
    put_string(out, p.name);
    put_matrix(out, p.value);
  }
  put<std::uint64_t>(out, model.batch_norm_stats().size());
  for (const auto& s : model.batch_norm_stats()) {
    put_matrix(out, s.running_mean);
    put_matrix(out, s.running_var);
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw FileUnreadable("cannot write " + tmp.string());
    const std::string bytes = out.str();
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw FileUnreadable("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::shared_ptr<const EmbeddingMatrix> embeddings) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) throw FormatError(path.string() + " is not a checkpoint");
  if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported checkpoint version");

  ModelConfig config;
  try {
    config = model_config_from_json(nlohmann::json::parse(get_string(in)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint config: ") + e.what());
  }
  const auto vocab_hash = get<std::uint64_t>(in);
  const auto checksum = get<std::uint64_t>(in);
  if (!embeddings) throw ConfigError("loading a checkpoint needs word embeddings");
  if (embeddings->checksum() != checksum)
    throw VocabularyMismatch("embeddings differ from the ones the checkpoint was trained with");

  SeedSets seeds;
  seeds.provenance = static_cast<SeedProvenance>(get<std::uint8_t>(in));
  const auto groups = get<std::uint64_t>(in);
  for (std::uint64_t g = 0; g < groups; ++g) {
    SeedGroup group;
    group.label = get_string(in);
    const auto n = get<std::uint64_t>(in);
    for (std::uint64_t k = 0; k < n; ++k) group.keywords.push_back(get<TermId>(in));
    seeds.groups.push_back(std::move(group));
  }

  TopicModel model(config, std::move(embeddings), 0);
  const auto count = get<std::uint64_t>(in);
  if (count != model.parameters().size()) throw FormatError("checkpoint parameter count differs from its config");
  for (auto& p : model.parameters()) {
    if (get_string(in) != p.name) throw FormatError("checkpoint parameter order differs from its config");
    auto value = get_matrix<Eigen::MatrixXd>(in);
    if (value.rows() != p.value.rows() || value.cols() != p.value.cols())
      throw FormatError("checkpoint parameter " + p.name + " has the wrong shape");
    p.value = std::move(value);
  }
  if (get<std::uint64_t>(in) != model.batch_norm_stats().size()) throw FormatError("batch-norm layer count mismatch");
  for (auto& s : model.batch_norm_stats()) {
    s.running_mean = get_matrix<Eigen::MatrixXd>(in).col(0);
    s.running_var = get_matrix<Eigen::MatrixXd>(in).col(0);
  }
  return {std::move(model), std::move(seeds), vocab_hash};
}

}  // namespace s2vntm
