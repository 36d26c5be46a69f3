#include "prediag/svm.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <string>
#include <unordered_map>

#include "prediag/error.hpp"
#include "prediag/parallel.hpp"

namespace prediag::ml {

namespace {

constexpr double kRetainAlpha = 1e-8;
constexpr double kMinStep = 1e-12;
constexpr double kMinAlphaStep = 1e-5;
constexpr std::size_t kCacheBudgetBytes = std::size_t{256} << 20;

/// Least-recently-used cache of kernel matrix rows.
class KernelCache {
public:
  KernelCache(const LabeledDataset& data, double gamma, std::size_t capacity, unsigned threads)
      : data_(data), gamma_(gamma), capacity_(std::max<std::size_t>(2, capacity)), threads_(threads) {
    // Hold the whole matrix when it fits the byte budget.
    const std::size_t budget_rows = kCacheBudgetBytes / (sizeof(double) * std::max<std::size_t>(1, data.size()));
    capacity_ = std::max(capacity_, std::min(budget_rows, data.size()));
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->values;
    }
    if (order_.size() >= capacity_) {
      index_.erase(order_.back().index);
      order_.pop_back();
    }
    Entry entry{i, std::vector<double>(data_.size())};
    const auto& xi = data_.features(i);
    parallel_for(data_.size(), threads_, [&](std::size_t k) {
      entry.values[k] = k == i ? 1.0 : kernel_rbf(xi, data_.features(k), gamma_);
    });
    order_.push_front(std::move(entry));
    index_[i] = order_.begin();
    return order_.front().values;
  }

private:
  struct Entry {
    std::size_t index;
    std::vector<double> values;
  };

  const LabeledDataset& data_;
  double gamma_;
  std::size_t capacity_;
  unsigned threads_;
  std::list<Entry> order_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

class SmoSolver {
public:
  SmoSolver(const LabeledDataset& data, const SmoParams& params)
      : data_(data), p_(params), cache_(data, params.gamma, params.cache_rows, params.threads),
        y_(data.size()), alpha_(data.size(), 0.0), error_(data.size()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      y_[i] = data.label(i) == 1 ? 1.0 : -1.0;
      error_[i] = -y_[i];
    }
  }

  SmoResult run() {
    const std::size_t n = data_.size();
    int quiet_passes = 0;
    std::size_t sweeps = 0;
    while (quiet_passes < p_.max_passes && sweeps < p_.max_sweeps) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (violates_kkt(i) && optimize_for(i)) ++changed;
      ++sweeps;
      quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    }

    SmoResult result;
    result.alphas = alpha_;
    result.sweeps = sweeps;
    result.converged = quiet_passes >= p_.max_passes;
    SvmModel& m = result.model;
    m.bias = bias_;
    m.gamma = p_.gamma;
    m.c = p_.c;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha_[i] > kRetainAlpha) {
        m.support_vectors.push_back(data_.features(i));
        m.alpha_y.push_back(alpha_[i] * y_[i]);
      }
    }
    if (m.support_vectors.empty()) throw TrainingError("SMO finished without any support vectors");
    return result;
  }

private:
  bool violates_kkt(std::size_t i) const {
    const double r = y_[i] * error_[i];
    return (r < -p_.tol && alpha_[i] < p_.c) || (r > p_.tol && alpha_[i] > 0.0);
  }

  bool optimize_for(std::size_t i) {
    const std::size_t n = data_.size();
    std::size_t best = i;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gap = std::abs(error_[i] - error_[j]);
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best != i && take_step(i, best)) return true;
    for (std::size_t offset = 1; offset < n; ++offset) {
      const std::size_t j = (i + offset) % n;
      if (j != best && take_step(i, j)) return true;
    }
    return false;
  }

  bool take_step(std::size_t i, std::size_t j) {
    const double c = p_.c;
    const double ai_old = alpha_[i];
    const double aj_old = alpha_[j];
    double lo, hi;
    if (y_[i] != y_[j]) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c, c + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c);
      hi = std::min(c, ai_old + aj_old);
    }
    if (hi - lo < kMinStep) return false;

    const double kij = cache_.row(i)[j];
    const double eta = 2.0 * kij - 2.0; // K(i,i) = K(j,j) = 1
    if (eta >= 0.0) return false;

    const double ei = error_[i];
    const double ej = error_[j];
    double aj = std::clamp(aj_old - y_[j] * (ei - ej) / eta, lo, hi);
    if (std::abs(aj - aj_old) < kMinAlphaStep) return false;
    double ai = ai_old + y_[i] * y_[j] * (aj_old - aj);
    if (ai < kMinStep) ai = 0.0;
    if (ai > c - kMinStep * c) ai = c;

    const double dai = (ai - ai_old) * y_[i];
    const double daj = (aj - aj_old) * y_[j];
    const double b1 = bias_ - ei - dai - daj * kij;
    const double b2 = bias_ - ej - dai * kij - daj;
    double b;
    if (ai > 0.0 && ai < c) {
      b = b1;
    } else if (aj > 0.0 && aj < c) {
      b = b2;
    } else {
      b = 0.5 * (b1 + b2);
    }

    alpha_[i] = ai;
    alpha_[j] = aj;
    const auto& row_i = cache_.row(i);
    const auto& row_j = cache_.row(j);
    const double db = b - bias_;
    for (std::size_t k = 0; k < error_.size(); ++k) error_[k] += dai * row_i[k] + daj * row_j[k] + db;
    bias_ = b;
    return true;
  }

  const LabeledDataset& data_;
  SmoParams p_;
  KernelCache cache_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double bias_ = 0.0;
};

} // namespace

void SvmModel::validate() const {
  if (support_vectors.empty()) throw InvalidArgument("SVM model has no support vectors");
  if (support_vectors.size() != alpha_y.size()) throw InvalidArgument("SVM support vector and coefficient counts differ");
  const std::size_t d = support_vectors.front().size();
  for (const auto& sv : support_vectors)
    if (sv.size() != d) throw InvalidArgument("SVM support vectors have mixed lengths");
  if (!(gamma >= 0.0) || !(c > 0.0)) throw InvalidArgument("SVM model has invalid gamma or C");
}

double kernel_rbf(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size())
    throw InvalidArgument("kernel arguments differ in length (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  if (!(gamma >= 0.0)) throw InvalidArgument("RBF gamma must be non-negative");
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    ss += d * d;
  }
  return std::exp(-gamma * ss);
}

double scale_gamma(const LabeledDataset& data) {
  if (data.empty()) throw InvalidArgument("cannot derive gamma from an empty dataset");
  double sum = 0.0, sum_sq = 0.0;
  const double count = static_cast<double>(data.size() * data.dimension());
  for (const auto& fv : data.all_features()) {
    for (double v : fv) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - mean * mean);
  const double d = static_cast<double>(data.dimension());
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

SmoResult train_svm_smo_detailed(const LabeledDataset& data, const SmoParams& params) {
  if (!(params.c > 0.0)) throw InvalidArgument("SVM C must be positive");
  if (!(params.gamma >= 0.0)) throw InvalidArgument("RBF gamma must be non-negative");
  if (data.empty()) throw TrainingError("cannot train an SVM on an empty dataset");
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.size()) throw TrainingError("SVM training data contains a single class");
  return SmoSolver(data, params).run();
}

SvmModel train_svm_smo(const LabeledDataset& data, double c, double gamma, double tol, int max_passes) {
  SmoParams params;
  params.c = c;
  params.gamma = gamma;
  params.tol = tol;
  params.max_passes = max_passes;
  return train_svm_smo_detailed(data, params).model;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension())
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.dimension()));
  double score = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    score += model.alpha_y[i] * kernel_rbf(model.support_vectors[i], x, model.gamma);
  return score;
}

Prediction svm_predict(const SvmModel& model, std::span<const double> x) {
  const double score = svm_decision(model, x);
  return {score, score >= 0.0 ? 1 : 0};
}

} // namespace prediag::ml
