#include "prediag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions) {
  if (labels.size() != predictions.size()) throw InvalidArgument("labels and predictions differ in length");
  if (labels.empty()) throw InvalidArgument("cannot build a confusion matrix from no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require_binary_label(labels[i]);
    require_binary_label(predictions[i]);
    if (labels[i] == 1) {
      (predictions[i] == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (predictions[i] == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("metrics need a non-empty confusion matrix");
  Metrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

RocCurve roc_auc(std::span<const Label> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InvalidArgument("labels and scores differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require_binary_label(labels[i]);
    if (!std::isfinite(scores[i])) throw InvalidArgument("ROC scores must be finite");
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("ROC analysis needs both classes");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
    roc.points.push_back({ratio(fp, negatives), ratio(tp, positives)});
  }
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto& a = roc.points[k - 1];
    const auto& b = roc.points[k];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

std::vector<Fold> stratified_kfold(std::span<const Label> labels, std::size_t k, Rng& rng) {
  if (k < 2) throw InvalidArgument("k-fold splitting needs k >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require_binary_label(labels[i]);
    by_class[labels[i]].push_back(i);
  }
  for (auto& members : by_class) {
    if (members.size() < k)
      throw InvalidArgument("a class has " + std::to_string(members.size()) + " samples, fewer than k = " +
                            std::to_string(k));
  }
  std::vector<Fold> folds(k);
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i-- > 1;) std::swap(members[i], members[rng.below(i + 1)]);
    for (std::size_t i = 0; i < members.size(); ++i) folds[i % k].test.push_back(members[i]);
  }
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(folds[f].test.begin(), folds[f].test.end());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
  }
  for (auto& fold : folds) std::sort(fold.train.begin(), fold.train.end());
  return folds;
}

EvalReport make_report(std::string name, std::span<const Label> labels, std::span<const Label> predictions,
                       std::span<const double> scores) {
  EvalReport report;
  report.name = std::move(name);
  report.confusion = confusion(labels, predictions);
  report.metrics = metrics(report.confusion);
  const std::size_t pos = report.confusion.tp + report.confusion.fn;
  if (pos > 0 && pos < labels.size()) {
    auto roc = roc_auc(labels, scores);
    report.auc = roc.auc;
    report.roc_points = std::move(roc.points);
  }
  return report;
}

json::Json report_to_json(const EvalReport& report) {
  json::Json j;
  j["name"] = report.name;
  j["confusion"] = {{"tp", report.confusion.tp},
                    {"fp", report.confusion.fp},
                    {"fn", report.confusion.fn},
                    {"tn", report.confusion.tn}};
  j["accuracy"] = report.metrics.accuracy;
  j["precision"] = report.metrics.precision;
  j["recall"] = report.metrics.recall;
  j["specificity"] = report.metrics.specificity;
  j["f1"] = report.metrics.f1;
  j["auc"] = report.auc ? json::Json(*report.auc) : json::Json(nullptr);
  j["roc_points"] = json::Json::array();
  for (const auto& p : report.roc_points) j["roc_points"].push_back(json::Json::array({p.fpr, p.tpr}));
  return j;
}

std::string report_table(const EvalReport& report) {
  auto percent = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return std::string(buf);
  };
  auto fixed = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << report.name << "\n";
  out << "+----------------------+----------+\n";
  out << "| Metric               | Value    |\n";
  out << "+----------------------+----------+\n";
  auto row = [&](const std::string& metric, const std::string& value) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "| %-20s | %-8s |\n", metric.c_str(), value.c_str());
    out << buf;
  };
  row("Accuracy", percent(report.metrics.accuracy));
  row("Precision", percent(report.metrics.precision));
  row("Recall (Sensitivity)", percent(report.metrics.recall));
  row("Specificity", percent(report.metrics.specificity));
  row("F1-Score", fixed(report.metrics.f1));
  row("AUC", report.auc ? fixed(*report.auc) : "n/a");
  out << "+----------------------+----------+\n";
  out << "TP=" << report.confusion.tp << " FP=" << report.confusion.fp << " FN=" << report.confusion.fn
      << " TN=" << report.confusion.tn << "\n";
  return out.str();
}

std::string roc_csv(const std::vector<RocPoint>& points) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : points) out += io::format_real(p.fpr) + "," + io::format_real(p.tpr) + "\n";
  return out;
}

} // namespace prediag::eval
