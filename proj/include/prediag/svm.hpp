#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::ml {

struct Prediction {
  double score = 0.0; ///< SVM decision value or forest positive-vote fraction
  Label label = 0;
};

/// RBF kernel SVM. Only vectors with alpha > 1e-8 are retained.
struct SvmModel {
  std::vector<FeatureVector> support_vectors;
  std::vector<double> alpha_y; ///< alpha_i * y_i with y in {-1,+1}
  double bias = 0.0;
  double gamma = 0.0;
  double c = 0.0;

  std::size_t dimension() const { return support_vectors.empty() ? 0 : support_vectors.front().size(); }
  void validate() const;
};

struct SmoParams {
  double c = 10.0;
  double gamma = 0.0;
  double tol = 1e-3;
  int max_passes = 10;
  std::size_t cache_rows = 256; ///< minimum; grows to the full matrix within 256 MiB
  std::size_t max_sweeps = 5000;
  unsigned threads = 1;
};

struct SmoResult {
  SvmModel model;
  std::vector<double> alphas; ///< one per training sample
  std::size_t sweeps = 0;
  bool converged = false;
};

double kernel_rbf(std::span<const double> x, std::span<const double> y, double gamma);

/// 1 / (d * Var) over every feature entry; 1/d when the variance is zero.
double scale_gamma(const LabeledDataset& data);

/// Simplified SMO with a maximal |E_i - E_j| second-choice heuristic and an
/// index-order fallback when that pair cannot make progress.
SmoResult train_svm_smo_detailed(const LabeledDataset& data, const SmoParams& params);

SvmModel train_svm_smo(const LabeledDataset& data, double c, double gamma, double tol = 1e-3, int max_passes = 10);

double svm_decision(const SvmModel& model, std::span<const double> x);

/// label = 1 iff score >= 0.
Prediction svm_predict(const SvmModel& model, std::span<const double> x);

} // namespace prediag::ml
