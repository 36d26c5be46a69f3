#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prediag/core.hpp"
#include "prediag/error.hpp"
#include "prediag/eval.hpp"

using namespace prediag;
using namespace prediag::eval;

namespace {

// Confusion matrix whose precision and recall are exactly p/1000 and r/1000.
ConfusionMatrix realize(std::size_t p, std::size_t r) {
  ConfusionMatrix cm;
  cm.tp = p * r;
  cm.fp = r * 1000 - cm.tp;
  cm.fn = p * 1000 - cm.tp;
  cm.tn = 500000;
  return cm;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

} // namespace

TEST_CASE("confusion counts") {
  const std::vector<Label> labels{1, 1, 0, 0};
  const auto cm = confusion(labels, std::vector<Label>{1, 0, 0, 0});
  CHECK(cm == ConfusionMatrix{1, 0, 1, 2});
  const auto perfect = confusion(labels, labels);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);
  const auto inverted = confusion(labels, std::vector<Label>{0, 0, 1, 1});
  CHECK(inverted == ConfusionMatrix{perfect.fn, perfect.tn, perfect.tp, perfect.fp});
  CHECK_THROWS_AS(confusion(labels, std::vector<Label>{1}), InvalidArgument);
  CHECK_THROWS_AS(confusion(std::vector<Label>{}, std::vector<Label>{}), InvalidArgument);
}

TEST_CASE("metric formulas") {
  const auto m = metrics({2, 1, 1, 6});
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // tp / (tp + fn) with fn = 1
  CHECK(m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.specificity == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
  CHECK(1.0 / m.f1 == doctest::Approx((1.0 / m.precision + 1.0 / m.recall) / 2.0).epsilon(1e-14));

  const auto none = metrics({0, 0, 3, 5});
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  const auto no_pos = metrics({0, 2, 0, 5});
  CHECK(no_pos.recall == 0.0);
  CHECK_THROWS_AS(metrics({0, 0, 0, 0}), InvalidArgument);
}

TEST_CASE("two-decimal F1 from reported precision and recall") {
  // lung abnormalities: P 86.1%, R 85.7%, F1 0.86; heart murmurs: P 83.8%, R 84.0%, F1 0.84
  const auto lung = metrics(realize(861, 857));
  CHECK(lung.precision == doctest::Approx(0.861).epsilon(1e-12));
  CHECK(lung.recall == doctest::Approx(0.857).epsilon(1e-12));
  CHECK(round2(lung.f1) == 0.86);
  const auto heart = metrics(realize(838, 840));
  CHECK(round2(heart.f1) == 0.84);
  CHECK(round2(f1_score(0.861, 0.857)) == 0.86);
  CHECK(round2(f1_score(0.838, 0.840)) == 0.84);
}

TEST_CASE("roc and auc") {
  SUBCASE("hand cases") {
    CHECK(roc_auc(std::vector<Label>{1, 0}, std::vector<double>{0.9, 0.1}).auc == 1.0);
    CHECK(roc_auc(std::vector<Label>{1, 0}, std::vector<double>{0.1, 0.9}).auc == 0.0);
    CHECK(roc_auc(std::vector<Label>{1, 1, 0, 0}, std::vector<double>{0.8, 0.4, 0.6, 0.2}).auc == 0.75);
    CHECK(roc_auc(std::vector<Label>{1, 0}, std::vector<double>{0.5, 0.5}).auc == 0.5);
  }
  SUBCASE("curve endpoints and monotonicity") {
    const auto r = roc_auc(std::vector<Label>{1, 0, 1, 0, 1}, std::vector<double>{0.3, 0.3, 0.9, 0.1, 0.2});
    REQUIRE(r.points.size() >= 2);
    CHECK(r.points.front().fpr == 0.0);
    CHECK(r.points.front().tpr == 0.0);
    CHECK(r.points.back().fpr == 1.0);
    CHECK(r.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
      CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
      CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
    }
  }
  SUBCASE("trapezoid equals concordance on random tied scores") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng.below(60);
      std::vector<Label> labels(n);
      std::vector<double> scores(n);
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<Label>(rng.below(2));
        scores[i] = static_cast<double>(rng.below(8)) / 8.0;
      }
      labels[0] = 0;
      labels[1] = 1;
      const auto r = roc_auc(labels, scores);
      CHECK(std::abs(r.auc - oracle::concordance_auc(labels, scores)) < 1e-9);
    }
  }
  SUBCASE("monotone score transforms change nothing") {
    const std::vector<Label> labels{1, 0, 1, 1, 0, 0, 1};
    const std::vector<double> s{0.2, 0.4, 0.9, 0.4, 0.1, 0.7, 0.55};
    std::vector<double> t;
    for (double v : s) t.push_back(std::exp(3.0 * v) - 7.0);
    const auto a = roc_auc(labels, s);
    const auto b = roc_auc(labels, t);
    CHECK(a.auc == b.auc);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].fpr == b.points[i].fpr);
      CHECK(a.points[i].tpr == b.points[i].tpr);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(roc_auc(std::vector<Label>{1, 1}, std::vector<double>{0.1, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(roc_auc(std::vector<Label>{1, 0}, std::vector<double>{0.1, NAN}), InvalidArgument);
  }
}

TEST_CASE("stratified k-fold") {
  std::vector<Label> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i % 2);
  Rng rng(4);
  const auto folds = stratified_kfold(labels, 5, rng);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    REQUIRE(f.test.size() == 2);
    CHECK(labels[f.test[0]] + labels[f.test[1]] == 1);
    CHECK(f.train.size() == 8);
    for (auto i : f.test) CHECK(seen.insert(i).second);
    for (auto i : f.test) CHECK(std::find(f.train.begin(), f.train.end(), i) == f.train.end());
  }
  CHECK(seen.size() == 10);

  Rng again(4);
  const auto folds2 = stratified_kfold(labels, 5, again);
  for (std::size_t k = 0; k < 5; ++k) CHECK(folds[k].test == folds2[k].test);

  Rng r3(1);
  CHECK_THROWS_AS(stratified_kfold(labels, 6, r3), InvalidArgument);
  CHECK_THROWS_AS(stratified_kfold(labels, 1, r3), InvalidArgument);
}

TEST_CASE("reports") {
  const std::vector<Label> labels{1, 1, 0, 0};
  const std::vector<Label> preds{1, 0, 0, 0};
  const std::vector<double> scores{0.8, 0.4, 0.6, 0.2};
  const auto rep = make_report("demo", labels, preds, scores);
  REQUIRE(rep.auc.has_value());
  CHECK(*rep.auc == 0.75);
  const auto j = report_to_json(rep);
  CHECK(j["name"] == "demo");
  CHECK(j["confusion"]["tp"] == 1);
  CHECK(j["accuracy"] == 0.75);
  CHECK(j["auc"] == 0.75);
  CHECK(j["roc_points"].front() == json::Json::array({0.0, 0.0}));
  CHECK(j["roc_points"].back() == json::Json::array({1.0, 1.0}));

  const auto table = report_table(rep);
  CHECK(table.find("Accuracy") != std::string::npos);
  CHECK(table.find("75.0%") != std::string::npos);
  CHECK(table.find("F1-Score") != std::string::npos);

  const auto csv = roc_csv(rep.roc_points);
  CHECK(csv.rfind("fpr,tpr\n0,0\n", 0) == 0);

  const auto single = make_report("one class", std::vector<Label>{1, 1}, std::vector<Label>{1, 0},
                                  std::vector<double>{0.3, -0.2});
  CHECK(!single.auc.has_value());
  CHECK(report_to_json(single)["auc"].is_null());
}
