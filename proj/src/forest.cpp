#include "prediag/forest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prediag/error.hpp"
#include "prediag/parallel.hpp"

namespace prediag::ml {

namespace {

using u128 = unsigned __int128;

class TreeBuilder {
public:
  TreeBuilder(const LabeledDataset& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

private:
  int grow(DecisionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::array<std::uint32_t, 2> counts{0, 0};
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data_.label(r))];

    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_reached = params_.max_depth != 0 && depth >= params_.max_depth;
    const bool too_small = rows.size() < 2 * params_.min_samples_leaf;
    if (!pure && !depth_reached && !too_small) {
      const auto features = sample_features();
      const Split split = best_split(data_, rows, features, params_.min_samples_leaf);
      if (split.valid) {
        std::vector<std::size_t> left, right;
        for (std::size_t r : rows)
          (data_.features(r)[split.feature] <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[index].feature = static_cast<int>(split.feature);
        tree.nodes[index].threshold = split.threshold;
        const int l = grow(tree, std::move(left), depth + 1);
        const int r = grow(tree, std::move(right), depth + 1);
        tree.nodes[index].left = l;
        tree.nodes[index].right = r;
        return index;
      }
    }
    tree.nodes[index].counts = counts;
    return index;
  }

  std::vector<std::size_t> sample_features() {
    const std::size_t d = data_.dimension();
    std::vector<std::size_t> pool(d);
    for (std::size_t k = 0; k < d; ++k) pool[k] = k;
    for (std::size_t k = 0; k < params_.mtry; ++k) std::swap(pool[k], pool[k + rng_.below(d - k)]);
    pool.resize(params_.mtry);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  const LabeledDataset& data_;
  const ForestParams& params_;
  Rng& rng_;
};

} // namespace

Label DecisionTree::vote(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf())
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                       : nodes[i].right);
  return nodes[i].counts[1] >= nodes[i].counts[0] ? 1 : 0;
}

void ForestModel::validate() const {
  if (trees.empty()) throw InvalidArgument("forest has no trees");
  if (n_features == 0) throw InvalidArgument("forest has zero features");
  for (const auto& tree : trees) {
    if (tree.nodes.empty()) throw InvalidArgument("forest contains an empty tree");
    const int n = static_cast<int>(tree.nodes.size());
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        if (node.counts[0] + node.counts[1] == 0) throw InvalidArgument("forest leaf has no samples");
      } else if (static_cast<std::size_t>(node.feature) >= n_features || node.left <= 0 || node.right <= 0 ||
                 node.left >= n || node.right >= n) {
        throw InvalidArgument("forest node references an invalid feature or child");
      }
    }
  }
}

bool purer(const SplitScore& a, const SplitScore& b) {
  return a.numerator * b.denominator > b.numerator * a.denominator;
}

double gini_impurity(std::uint64_t count0, std::uint64_t count1) {
  const std::uint64_t n = count0 + count1;
  if (n == 0) throw InvalidArgument("Gini impurity of an empty node is undefined");
  const double p0 = static_cast<double>(count0) / static_cast<double>(n);
  const double p1 = static_cast<double>(count1) / static_cast<double>(n);
  return 1.0 - (p0 * p0 + p1 * p1);
}

double split_midpoint(double lower, double upper) {
  const double mid = lower + (upper - lower) / 2.0;
  return mid < upper ? mid : lower;
}

Split best_split(const LabeledDataset& data, std::span<const std::size_t> rows, std::span<const std::size_t> features,
                 std::size_t min_samples_leaf) {
  Split best;
  const std::size_t n = rows.size();
  if (n < 2) return best;
  std::uint64_t total[2] = {0, 0};
  for (std::size_t r : rows) ++total[data.label(r)];

  std::vector<std::pair<double, Label>> column(n);
  for (std::size_t feature : features) {
    for (std::size_t i = 0; i < n; ++i) column[i] = {data.features(rows[i])[feature], data.label(rows[i])};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::uint64_t left[2] = {0, 0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[column[i].second];
      if (column[i].first == column[i + 1].first) continue;
      const std::uint64_t nl = i + 1;
      const std::uint64_t nr = n - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const std::uint64_t r0 = total[0] - left[0];
      const std::uint64_t r1 = total[1] - left[1];
      // sum_l/nl + sum_r/nr as one fraction
      const u128 sum_l = static_cast<u128>(left[0]) * left[0] + static_cast<u128>(left[1]) * left[1];
      const u128 sum_r = static_cast<u128>(r0) * r0 + static_cast<u128>(r1) * r1;
      SplitScore score{sum_l * nr + sum_r * nl, static_cast<u128>(nl) * nr};
      // Candidates arrive in ascending (feature, threshold) order, so only a
      // strictly purer split replaces the incumbent.
      if (!best.valid || purer(score, best.score)) {
        best.valid = true;
        best.feature = feature;
        best.threshold = split_midpoint(column[i].first, column[i + 1].first);
        best.score = score;
        best.weighted_gini = (static_cast<double>(nl) * gini_impurity(left[0], left[1]) +
                              static_cast<double>(nr) * gini_impurity(r0, r1)) /
                             static_cast<double>(n);
      }
    }
  }
  return best;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.below(n);
  return rows;
}

ForestModel train_random_forest(const LabeledDataset& data, const ForestParams& params, unsigned threads) {
  if (data.empty()) throw TrainingError("cannot train a forest on an empty dataset");
  if (params.n_trees == 0) throw InvalidArgument("forest needs at least one tree");
  if (params.min_samples_leaf == 0) throw InvalidArgument("min_samples_leaf must be at least 1");
  const std::size_t d = data.dimension();
  ForestModel model;
  model.n_features = d;
  model.params = params;
  if (model.params.mtry == 0)
    model.params.mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (model.params.mtry > d)
    throw InvalidArgument("mtry " + std::to_string(model.params.mtry) + " exceeds feature count " + std::to_string(d));

  model.trees.resize(params.n_trees);
  parallel_for(params.n_trees, threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = params.seed + t;
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(data.size());
    for (auto& r : rows) r = rng.below(data.size());
    model.trees[t] = TreeBuilder(data, model.params, rng).build(std::move(rows));
  });
  return model;
}

Prediction forest_predict(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.n_features)
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, forest expects " +
                          std::to_string(model.n_features));
  std::size_t votes = 0;
  for (const auto& tree : model.trees) votes += static_cast<std::size_t>(tree.vote(x));
  const double prob = static_cast<double>(votes) / static_cast<double>(model.trees.size());
  return {prob, prob >= 0.5 ? 1 : 0};
}

} // namespace prediag::ml
