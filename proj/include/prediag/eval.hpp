#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prediag/core.hpp"
#include "prediag/json_util.hpp"

namespace prediag::eval {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0; ///< sensitivity
  double specificity = 0.0;
  double f1 = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  double auc = 0.0;
  std::vector<RocPoint> points;
};

struct EvalReport {
  std::string name;
  ConfusionMatrix confusion;
  Metrics metrics;
  std::optional<double> auc; ///< absent when only one class is present
  std::vector<RocPoint> roc_points;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Class 1 is the positive class.
ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions);

/// Zero denominators yield 0 for the affected metric.
Metrics metrics(const ConfusionMatrix& cm);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// Threshold sweep over distinct scores, descending. Tied scores move in one
/// diagonal step. AUC by the trapezoidal rule.
RocCurve roc_auc(std::span<const Label> labels, std::span<const double> scores);

/// Per-class shuffle, then round-robin assignment to k folds.
std::vector<Fold> stratified_kfold(std::span<const Label> labels, std::size_t k, Rng& rng);

EvalReport make_report(std::string name, std::span<const Label> labels, std::span<const Label> predictions,
                       std::span<const double> scores);

json::Json report_to_json(const EvalReport& report);
/// Metric table in the Metric | Value layout.
std::string report_table(const EvalReport& report);
std::string roc_csv(const std::vector<RocPoint>& points);

} // namespace prediag::eval
