#include "s2vntm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include "s2vntm/errors.hpp"

namespace s2vntm {

Classification classify_distribution(const Eigen::VectorXd& t_d, const SeedSets& seeds, const MatchResult& match,
                                     ClassifyRule rule) {
  if (match.assignments.empty()) throw NoMatchedTopics("no seed group is matched to a topic");
  const auto T = static_cast<int>(t_d.size());
  std::vector<int> owner(static_cast<std::size_t>(T), -1);
  double matched_mass = 0.0;
  for (int t = 0; t < T; ++t) {
    owner[static_cast<std::size_t>(t)] = match.owner_of(t);
    if (owner[static_cast<std::size_t>(t)] >= 0) matched_mass += t_d[t];
  }

  Classification out;
  out.scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(match.assignments.size()));
  for (std::size_t g = 0; g < match.assignments.size(); ++g) {
    const int t = match.assignments[g];
    if (t < 0 || t >= T) throw IndexError("matched topic out of range");
    if (owner[static_cast<std::size_t>(t)] == static_cast<int>(g))
      out.scores[static_cast<Eigen::Index>(g)] = matched_mass > 0.0 ? t_d[t] / matched_mass : 0.0;
  }

  int best = -1;
  for (int t = 0; t < T; ++t) {
    if (rule == ClassifyRule::matched_topics && owner[static_cast<std::size_t>(t)] < 0) continue;
    if (best < 0 || t_d[t] > t_d[best]) best = t;
  }
  out.topic = best;
  out.group = best >= 0 ? owner[static_cast<std::size_t>(best)] : -1;
  if (out.group >= 0 && static_cast<std::size_t>(out.group) < seeds.groups.size())
    out.label = seeds.groups[static_cast<std::size_t>(out.group)].label;
  return out;
}

Classification classify(const Document& doc, const TopicModel& model, const SeedSets& seeds,
                        const MatchResult& match, ClassifyRule rule) {
  return classify_distribution(infer_topics(doc, model).probs, seeds, match, rule);
}

double roc_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw LengthMismatch("scores and labels differ in length");
  const double P = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double N = static_cast<double>(positive.size()) - P;
  if (P == 0.0 || N == 0.0) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    double tp_step = 0.0, fp_step = 0.0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (positive[order[j]] ? tp_step : fp_step) += 1.0;
    area += fp_step * (tp + tp + tp_step) / 2.0;
    tp += tp_step;
    fp += fp_step;
    i = j;
  }
  return area / (P * N);
}

EvalReport compute_metrics(std::span<const int> predictions, std::span<const int> labels,
                           const Eigen::MatrixXd& scores, const std::vector<std::string>& class_names) {
  if (predictions.size() != labels.size()) throw LengthMismatch("predictions and labels differ in length");
  const auto L = static_cast<int>(class_names.size());
  const std::size_t n = labels.size();
  if (scores.size() != 0 && (static_cast<std::size_t>(scores.rows()) != n || scores.cols() != L))
    throw LengthMismatch("score matrix must be N x L");

  EvalReport r;
  r.labels = class_names;
  r.confusion.assign(static_cast<std::size_t>(L), std::vector<long>(static_cast<std::size_t>(L), 0));
  r.abstained.assign(static_cast<std::size_t>(L), 0);
  long correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= L) throw IndexError("label index out of range");
    if (predictions[i] < -1 || predictions[i] >= L) throw IndexError("prediction index out of range");
    if (predictions[i] < 0) {
      ++r.abstained[static_cast<std::size_t>(labels[i])];
      continue;
    }
    ++r.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])];
    if (predictions[i] == labels[i]) ++correct;
  }
  r.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;

  double f1_sum = 0.0;
  for (int c = 0; c < L; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    ClassMetrics m;
    m.label = class_names[uc];
    long predicted = 0;
    for (int t = 0; t < L; ++t) predicted += r.confusion[static_cast<std::size_t>(t)][uc];
    m.support = std::accumulate(r.confusion[uc].begin(), r.confusion[uc].end(), 0L) + r.abstained[uc];
    const double tp = static_cast<double>(r.confusion[uc][uc]);
    m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = m.support ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    f1_sum += m.f1;
    r.per_class.push_back(m);
  }
  r.macro_f1 = L ? f1_sum / L : 0.0;

  r.auc_macro = std::numeric_limits<double>::quiet_NaN();
  if (scores.size() != 0) {
    double sum = 0.0;
    int counted = 0;
    std::vector<double> col(n);
    std::unique_ptr<bool[]> pos(new bool[n]);
    for (int c = 0; c < L; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = scores(static_cast<Eigen::Index>(i), c);
        pos[i] = labels[i] == c;
      }
      const double auc = roc_auc(col, std::span<const bool>(pos.get(), n));
      if (std::isnan(auc)) continue;
      sum += auc;
      ++counted;
    }
    if (counted) r.auc_macro = sum / counted;
  }
  return r;
}

double topic_diversity(const DecoderState& decoder, int top_k) {
  const auto T = static_cast<int>(decoder.beta.rows());
  const int k = std::min<int>(top_k, static_cast<int>(decoder.beta.cols()));
  if (T == 0 || k <= 0) throw ConfigError("topic diversity needs topics and top_k >= 1");
  std::set<TermId> unique;
  for (int t = 0; t < T; ++t)
    for (const auto& [term, p] : top_words(decoder, t, k)) unique.insert(term);
  return static_cast<double>(unique.size()) / static_cast<double>(k * T);
}

double topic_diversity(const TopicModel& model, int top_k) { return topic_diversity(decode(model), top_k); }

EvalReport evaluate(const Corpus& corpus, std::span<const std::size_t> doc_indices, const TopicModel& model,
                    const SeedSets& seeds, const EvalOptions& options) {
  const DecoderState decoder = decode(model);
  const MatchResult match = match_topics(seeds, decoder.log_beta, model.config().match_includes_own_group);
  const auto L = static_cast<int>(corpus.class_names.size());

  std::vector<int> group_class;
  for (const auto& g : seeds.groups) {
    const auto it = std::find(corpus.class_names.begin(), corpus.class_names.end(), g.label);
    if (it == corpus.class_names.end()) throw ClassEmpty("seed group '" + g.label + "' names no corpus class");
    group_class.push_back(static_cast<int>(it - corpus.class_names.begin()));
  }

  std::vector<const Document*> docs;
  for (std::size_t i : doc_indices) {
    const Document& d = corpus.documents.at(i);
    if (d.label) docs.push_back(&d);
  }
  std::vector<int> predictions, labels;
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), L);
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < docs.size(); start += kChunk) {
    const std::size_t stop = std::min(docs.size(), start + kChunk);
    const std::span<const Document* const> chunk(docs.data() + start, stop - start);
    const Eigen::MatrixXd probs = infer_topics_batch(chunk, model);
    for (std::size_t i = start; i < stop; ++i) {
      const Classification c =
          classify_distribution(probs.row(static_cast<Eigen::Index>(i - start)).transpose(), seeds, match, options.rule);
      predictions.push_back(c.group >= 0 ? group_class[static_cast<std::size_t>(c.group)] : -1);
      labels.push_back(*docs[i]->label);
      for (std::size_t g = 0; g < group_class.size(); ++g)
        scores(static_cast<Eigen::Index>(i), group_class[g]) += c.scores[static_cast<Eigen::Index>(g)];
    }
  }
  EvalReport report = compute_metrics(predictions, labels, scores, corpus.class_names);
  report.topic_diversity = topic_diversity(decoder, options.diversity_top_k);
  return report;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : per_class)
    classes.push_back({{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  return {{"format_version", 1},
          {"labels", labels},
          {"accuracy", accuracy},
          {"macro_f1", macro_f1},
          {"auc_macro", number_or_null(auc_macro)},
          {"topic_diversity", topic_diversity},
          {"per_class", classes},
          {"confusion", confusion},
          {"abstained", abstained}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.labels = j.at("labels").get<std::vector<std::string>>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.auc_macro = number_or_nan(j.at("auc_macro"));
    r.topic_diversity = j.at("topic_diversity").get<double>();
    for (const auto& c : j.at("per_class"))
      r.per_class.push_back({c.at("label").get<std::string>(), c.at("precision").get<double>(),
                             c.at("recall").get<double>(), c.at("f1").get<double>(), c.at("support").get<long>()});
    r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
    r.abstained = j.at("abstained").get<std::vector<long>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad eval report: ") + e.what());
  }
  return r;
}

std::string EvalReport::confusion_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& l : labels) out << ',' << l;
  out << ",abstained\n";
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    out << labels[r];
    for (long v : confusion[r]) out << ',' << v;
    out << ',' << abstained[r] << '\n';
  }
  return out.str();
}

}  // namespace s2vntm
