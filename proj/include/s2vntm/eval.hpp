#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "s2vntm/corpus.hpp"
#include "s2vntm/losses.hpp"
#include "s2vntm/model.hpp"

namespace s2vntm {

enum class ClassifyRule {
  matched_topics,  // argmax over matched topics only
  all_topics,      // argmax over every topic; an unmatched winner abstains
};

struct EvalOptions {
  ClassifyRule rule = ClassifyRule::matched_topics;
  int diversity_top_k = 25;
};

struct Classification {
  int group = -1;  // seed group index; -1 when abstaining
  std::optional<std::string> label;
  int topic = -1;
  // Per seed group: the owned topic's probability renormalized over all
  // matched topics (0 for a group that lost its merged topic).
  Eigen::VectorXd scores;
};

// Throws NoMatchedTopics when the match assigns no group.
Classification classify_distribution(const Eigen::VectorXd& t_d, const SeedSets& seeds,
                                     const MatchResult& match,
                                     ClassifyRule rule = ClassifyRule::matched_topics);
Classification classify(const Document& doc, const TopicModel& model, const SeedSets& seeds,
                        const MatchResult& match, ClassifyRule rule = ClassifyRule::matched_topics);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct EvalReport {
  std::vector<std::string> labels;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double auc_macro = 0.0;  // NaN when no class has both positives and negatives
  double topic_diversity = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<long>> confusion;  // [true][predicted]
  std::vector<long> abstained;               // per true class

  nlohmann::json to_json() const;
  std::string confusion_csv() const;
};

EvalReport eval_report_from_json(const nlohmann::json& j);

// predictions and labels are class indices into class_names (prediction -1
// means abstain and counts as wrong); scores is N x L. Precision of a class
// that is never predicted is 0. Throws LengthMismatch.
EvalReport compute_metrics(std::span<const int> predictions, std::span<const int> labels,
                           const Eigen::MatrixXd& scores, const std::vector<std::string>& class_names);

// One-vs-rest ROC area by the trapezoid rule; tied scores form one ROC step.
double roc_auc(std::span<const double> scores, std::span<const bool> positive);

double topic_diversity(const DecoderState& decoder, int top_k = 25);
double topic_diversity(const TopicModel& model, int top_k = 25);

// Classifies the given labelled documents, maps seed-group labels onto the
// corpus class names and fills every metric including diversity. Throws
// ClassEmpty when a seed group label names no corpus class.
EvalReport evaluate(const Corpus& corpus, std::span<const std::size_t> doc_indices, const TopicModel& model,
                    const SeedSets& seeds, const EvalOptions& options = {});

}  // namespace s2vntm
