#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prediag/core.hpp"
#include "prediag/svm.hpp"

namespace prediag::ml {

struct TreeNode {
  int feature = -1; ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  ///< x[feature] <= threshold
  int right = -1;
  std::array<std::uint32_t, 2> counts{0, 0}; ///< class counts, leaves only

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes in pre-order; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  /// Majority class of the reached leaf; ties go to class 1.
  Label vote(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12; ///< 0 means unlimited
  std::size_t min_samples_leaf = 2;
  std::size_t mtry = 0;       ///< 0 means ceil(sqrt(d))
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  ForestParams params; ///< mtry holds the resolved value

  void validate() const;
  bool operator==(const ForestModel&) const = default;
};

/// Sum of squared child class counts over child size, kept as an exact
/// fraction. Larger is purer (lower weighted Gini).
struct SplitScore {
  unsigned __int128 numerator = 0;
  unsigned __int128 denominator = 1;
};

/// True when a is strictly purer than b.
bool purer(const SplitScore& a, const SplitScore& b);

struct Split {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  SplitScore score;
  double weighted_gini = 0.0; ///< (n_l g_l + n_r g_r) / n
};

double gini_impurity(std::uint64_t count0, std::uint64_t count1);

/// Midpoint between consecutive distinct sorted values, never equal to the upper one.
double split_midpoint(double lower, double upper);

/// Best (feature, threshold) over `features` for the samples in `rows`
/// (repeats allowed, as in a bootstrap). Ties prefer the lower feature
/// index, then the lower threshold.
Split best_split(const LabeledDataset& data, std::span<const std::size_t> rows, std::span<const std::size_t> features,
                 std::size_t min_samples_leaf);

ForestModel train_random_forest(const LabeledDataset& data, const ForestParams& params = {}, unsigned threads = 1);

/// Bootstrap rows drawn for one tree, in draw order.
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t tree_seed);

/// prob = fraction of trees voting 1; label = 1 iff prob >= 0.5.
Prediction forest_predict(const ForestModel& model, std::span<const double> x);

} // namespace prediag::ml
