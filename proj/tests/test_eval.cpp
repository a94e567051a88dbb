#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "s2vntm/errors.hpp"
#include "s2vntm/eval.hpp"

using namespace s2vntm;

namespace {

// Mann-Whitney pair count: ties contribute one half.
double pairwise_auc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (pos[i] && !pos[j]) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

DecoderState rows_with_tops(const std::vector<std::vector<int>>& tops, int V) {
  // each topic puts decreasing mass on its listed words, a sliver elsewhere
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(tops.size()), V, 1e-6);
  for (std::size_t t = 0; t < tops.size(); ++t)
    for (std::size_t i = 0; i < tops[t].size(); ++i) beta(static_cast<Eigen::Index>(t), tops[t][i]) = 1.0 - 0.1 * i;
  for (Eigen::Index t = 0; t < beta.rows(); ++t) beta.row(t) /= beta.row(t).sum();
  return {beta.array().log().matrix(), beta};
}

MatchResult match_of(std::vector<int> assignments, Eigen::MatrixXd scores) {
  MatchResult m;
  m.assignments = std::move(assignments);
  m.scores = std::move(scores);
  return m;
}

}  // namespace

TEST_CASE("perfect predictions") {
  const std::vector<int> y{0, 1, 2, 1, 0, 2};
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(6, 3);
  for (int i = 0; i < 6; ++i) scores(i, y[i]) = 1.0;
  const EvalReport r = compute_metrics(y, y, scores, {"a", "b", "c"});
  CHECK(r.accuracy == 1.0);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.auc_macro == 1.0);
  for (const auto& c : r.per_class) CHECK(c.support == 2);
}

TEST_CASE("four-document binary ROC by hand") {
  // descending scores: pos, neg, pos, neg -> ROC (0,.5) (.5,.5) (.5,1) (1,1), area 0.75
  const std::vector<double> s{0.9, 0.8, 0.4, 0.3};
  const bool pos[] = {true, false, true, false};
  CHECK(roc_auc(s, pos) == doctest::Approx(0.75).epsilon(1e-15));
  // a tie between a positive and a negative is a diagonal step worth one half
  const std::vector<double> tied{0.9, 0.5, 0.5, 0.1};
  const bool pos2[] = {true, true, false, false};
  CHECK(roc_auc(tied, pos2) == doctest::Approx(0.875).epsilon(1e-15));
  const bool all[] = {true, true, true, true};
  CHECK(std::isnan(roc_auc(s, all)));
  const bool three[] = {true, false, true};
  CHECK_THROWS_AS(roc_auc(s, std::span<const bool>(three, 3)), LengthMismatch);
}

TEST_CASE("roc_auc equals the pairwise count on random instances") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    std::vector<double> s(n);
    std::vector<bool> p(n);
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7) / 7.0;
      p[i] = rng() % 2;
    }
    p[0] = true;
    p[1] = false;
    std::unique_ptr<bool[]> flags(new bool[n]);
    for (int i = 0; i < n; ++i) flags[i] = p[i];
    CHECK(roc_auc(s, std::span<const bool>(flags.get(), n)) ==
          doctest::Approx(pairwise_auc(s, p)).epsilon(1e-12));
  }
}

TEST_CASE("all predictions in one class of a balanced pair") {
  const std::vector<int> y{0, 0, 1, 1};
  const std::vector<int> pred{0, 0, 0, 0};
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(4, 2, 0.5);
  const EvalReport r = compute_metrics(pred, y, flat, {"a", "b"});
  CHECK(r.accuracy == 0.5);
  CHECK(r.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.auc_macro == doctest::Approx(0.5));
  CHECK(r.per_class[1].precision == 0.0);
}

TEST_CASE("confusion and per-class metrics match a brute-force count") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 2 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 40);
    std::vector<int> y(n), pred(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % L);
      pred[i] = static_cast<int>(rng() % (L + 1)) - 1;
    }
    std::vector<std::string> names;
    for (int c = 0; c < L; ++c) names.push_back("c" + std::to_string(c));
    const EvalReport r = compute_metrics(pred, y, Eigen::MatrixXd(), names);

    int correct = 0;
    double f1_sum = 0.0;
    for (int c = 0; c < L; ++c) {
      int tp = 0, fp = 0, fn = 0, abst = 0;
      std::vector<long> row(L, 0);
      for (int i = 0; i < n; ++i) {
        if (y[i] == c && pred[i] >= 0) ++row[pred[i]];
        if (y[i] == c && pred[i] < 0) ++abst;
        if (pred[i] == c && y[i] == c) ++tp;
        if (pred[i] == c && y[i] != c) ++fp;
        if (pred[i] != c && y[i] == c) ++fn;
      }
      correct += tp;
      CHECK(r.confusion[c] == row);
      CHECK(r.abstained[c] == abst);
      const double prec = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
      const double rec = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      CHECK(r.per_class[c].f1 == doctest::Approx(f1).epsilon(1e-14));
      f1_sum += f1;
    }
    CHECK(r.accuracy == doctest::Approx(static_cast<double>(correct) / n).epsilon(1e-15));
    CHECK(r.macro_f1 == doctest::Approx(f1_sum / L).epsilon(1e-14));
    CHECK(std::isnan(r.auc_macro));
  }
  const std::vector<int> a{0, 1}, b{0};
  CHECK_THROWS_AS(compute_metrics(a, b, Eigen::MatrixXd(), {"x", "y"}), LengthMismatch);
  CHECK_THROWS_AS(compute_metrics(a, a, Eigen::MatrixXd::Zero(3, 2), {"x", "y"}), LengthMismatch);
}

TEST_CASE("topic diversity") {
  CHECK(topic_diversity(rows_with_tops({{0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}}, 12), 4) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(topic_diversity(rows_with_tops({{0, 1, 2, 3}, {4, 5, 6, 7}}, 12), 4) == 1.0);
  CHECK(topic_diversity(rows_with_tops({{0, 1, 2, 3}, {0, 1, 8, 9}}, 12), 4) == doctest::Approx(0.75));
}

TEST_CASE("classification restricted to matched topics") {
  const SeedSets seeds{{{"world", {0}}, {"sports", {1}}}, SeedProvenance::user};
  Eigen::MatrixXd sc = Eigen::MatrixXd::Zero(2, 4);
  const MatchResult m = match_of({2, 0}, sc);

  Eigen::Vector4d t(0.2, 0.1, 0.3, 0.4);
  Classification c = classify_distribution(t, seeds, m);
  CHECK(c.topic == 2);
  CHECK(c.group == 0);
  CHECK(c.label == "world");
  CHECK(c.scores[0] == doctest::Approx(0.6));
  CHECK(c.scores[1] == doctest::Approx(0.4));

  // uniform over the two matched topics: lower index wins
  c = classify_distribution(Eigen::Vector4d(0.3, 0.1, 0.3, 0.3), seeds, m);
  CHECK(c.topic == 0);
  CHECK(c.label == "sports");

  // the all-topics rule abstains when an unmatched topic wins
  c = classify_distribution(t, seeds, m, ClassifyRule::all_topics);
  CHECK(c.topic == 3);
  CHECK(c.group == -1);
  CHECK_FALSE(c.label);

  CHECK_THROWS_AS(classify_distribution(t, SeedSets{}, MatchResult{}), NoMatchedTopics);
}

TEST_CASE("merged groups credit the higher-scoring one") {
  const SeedSets seeds{{{"a", {0}}, {"b", {1}}}, SeedProvenance::user};
  Eigen::MatrixXd sc(2, 3);
  sc << 0.0, -3.0, 0.0,
        0.0, -1.0, 0.0;
  const MatchResult m = match_of({1, 1}, sc);
  const Classification c = classify_distribution(Eigen::Vector3d(0.2, 0.5, 0.3), seeds, m);
  CHECK(c.group == 1);
  CHECK(c.scores[0] == 0.0);
  CHECK(c.scores[1] == doctest::Approx(1.0));
}

TEST_CASE("planted model labels seed-only documents by their group") {
  const auto p = fixture::small_planted(600);
  TrainConfig tc = fixture::short_training(25);
  const FitResult r = fit(p.data.corpus, p.data.seeds, fixture::small_model(), tc, p.embeddings);
  const MatchResult m = match_topics(p.data.seeds, r.model);
  for (std::size_t g = 0; g < p.data.seeds.size(); ++g) {
    const TermId kw = p.data.seeds.groups[g].keywords[0];
    const Document d = make_document("probe", {kw, kw, kw});
    const Classification c = classify(d, r.model, p.data.seeds, m);
    CHECK(c.label == p.data.seeds.groups[g].label);
    const Classification again = classify(d, r.model, p.data.seeds, m);
    CHECK(again.scores == c.scores);
  }

  const auto test = p.data.corpus.indices(Split::test);
  const EvalReport rep = evaluate(p.data.corpus, test, r.model, p.data.seeds);
  CHECK(rep.labels == p.data.corpus.class_names);
  CHECK(rep.topic_diversity >= 0.25);
  CHECK(rep.topic_diversity <= 1.0);
  long total = 0;
  for (std::size_t c = 0; c < rep.confusion.size(); ++c)
    for (long v : rep.confusion[c]) total += v;
  for (long v : rep.abstained) total += v;
  CHECK(total == static_cast<long>(test.size()));

  const EvalReport back = eval_report_from_json(nlohmann::json::parse(rep.to_json().dump()));
  CHECK(back.to_json() == rep.to_json());
  CHECK(rep.confusion_csv().rfind("true\\predicted,alpha,beta,gamma,abstained\n", 0) == 0);

  SeedSets stray = p.data.seeds;
  stray.groups[0].label = "unknown";
  CHECK_THROWS_AS(evaluate(p.data.corpus, test, r.model, stray), ClassEmpty);
}

TEST_CASE("report JSON writes a missing AUC as null") {
  EvalReport r;
  r.auc_macro = std::nan("");
  const auto j = r.to_json();
  CHECK(j["auc_macro"].is_null());
  CHECK(std::isnan(eval_report_from_json(j).auc_macro));
  CHECK_THROWS_AS(eval_report_from_json(nlohmann::json::object()), FormatError);
}
