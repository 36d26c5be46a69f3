#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "prediag/core.hpp"
#include "prediag/error.hpp"
#include "prediag/svm.hpp"

using namespace prediag;
using namespace prediag::ml;

namespace {

LabeledDataset separable_2d(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  LabeledDataset d;
  while (d.size() < n) {
    const double x = rng.uniform() * 4 - 2;
    const double y = rng.uniform() * 4 - 2;
    const double side = x + y;
    if (std::abs(side) < 0.5) continue; // keep a margin
    d.add({x, y}, side > 0 ? 1 : 0);
  }
  if (d.positives() == 0 || d.positives() == n) return separable_2d(seed + 1000, n);
  return d;
}

std::vector<std::vector<double>> gram(const LabeledDataset& d, double gamma) {
  std::vector<std::vector<double>> k(d.size(), std::vector<double>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      double dist = 0.0;
      for (std::size_t f = 0; f < d.dimension(); ++f) {
        const double diff = d.features(i)[f] - d.features(j)[f];
        dist += diff * diff;
      }
      k[i][j] = std::exp(-gamma * dist);
    }
  return k;
}

std::vector<double> signs(const LabeledDataset& d) {
  std::vector<double> y;
  for (auto l : d.labels()) y.push_back(l == 1 ? 1.0 : -1.0);
  return y;
}

} // namespace

TEST_CASE("rbf kernel") {
  const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};
  CHECK(kernel_rbf(a, a, 3.0) == 1.0);
  CHECK(kernel_rbf(a, b, 0.0) == 1.0);
  CHECK(kernel_rbf(a, b, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_rbf(a, b, 0.5) == doctest::Approx(0.367879).epsilon(1e-6));
  const std::vector<double> c{1.0};
  CHECK_THROWS_AS(kernel_rbf(a, c, 1.0), InvalidArgument);
  CHECK_THROWS_AS(kernel_rbf(a, b, -1.0), InvalidArgument);
}

TEST_CASE("scale gamma") {
  LabeledDataset d;
  d.add({0.0, 2.0}, 0);
  d.add({2.0, 0.0}, 1);
  // entries {0,2,2,0}: mean 1, variance 1
  CHECK(scale_gamma(d) == doctest::Approx(0.5));
  LabeledDataset flat;
  flat.add({1.0, 1.0, 1.0, 1.0}, 0);
  flat.add({1.0, 1.0, 1.0, 1.0}, 1);
  CHECK(scale_gamma(flat) == doctest::Approx(0.25));
}

TEST_CASE("two-point problem matches the hand-derived dual") {
  LabeledDataset d;
  d.add({-1.0}, 0);
  d.add({1.0}, 1);
  SmoParams p;
  p.c = 10.0;
  p.gamma = 0.5;
  const auto r = train_svm_smo_detailed(d, p);
  // alpha1 = alpha2 = a maximizes 2a - a^2 (1 - e^-2)
  const double expected = 1.0 / (1.0 - std::exp(-2.0));
  CHECK(expected == doctest::Approx(1.156).epsilon(1e-3));
  REQUIRE(r.model.support_vectors.size() == 2);
  CHECK(std::abs(r.alphas[0] - expected) < 1e-3);
  CHECK(std::abs(r.alphas[1] - expected) < 1e-3);
  CHECK(r.alphas[0] == doctest::Approx(r.alphas[1]).epsilon(1e-12));
  const std::vector<double> pos{1.0}, neg{-1.0};
  CHECK(svm_decision(r.model, pos) > 0.0);
  CHECK(svm_decision(r.model, neg) < 0.0);
  CHECK(svm_predict(r.model, neg).label == 0);
  CHECK(svm_predict(r.model, pos).label == 1);
  CHECK(r.converged);
}

TEST_CASE("xor is learned exactly") {
  LabeledDataset d;
  d.add({0.0, 0.0}, 0);
  d.add({1.0, 1.0}, 0);
  d.add({0.0, 1.0}, 1);
  d.add({1.0, 0.0}, 1);
  SmoParams p;
  p.c = 10.0;
  p.gamma = 2.0;
  const auto r = train_svm_smo_detailed(d, p);
  for (std::size_t i = 0; i < 4; ++i) CHECK(svm_predict(r.model, d.features(i)).label == d.label(i));
  const double grid = oracle::dual_grid_optimum(gram(d, 2.0), signs(d), 10.0);
  CHECK(std::abs(oracle::dual_objective(gram(d, 2.0), signs(d), r.alphas) - grid) < 1e-3);
}

TEST_CASE("KKT conditions and training accuracy on separable sets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = separable_2d(seed, 20);
    SmoParams p;
    p.c = 10.0;
    p.gamma = 0.5;
    const auto r = train_svm_smo_detailed(d, p);
    const auto y = signs(d);
    double balance = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double a = r.alphas[i];
      const double margin = y[i] * svm_decision(r.model, d.features(i));
      CHECK(a >= 0.0);
      CHECK(a <= p.c);
      balance += a * y[i];
      // retained alphas are > 1e-8; smaller ones count as zero
      if (a <= 1e-8) CHECK(margin >= 1.0 - p.tol);
      else if (a >= p.c) CHECK(margin <= 1.0 + p.tol);
      else CHECK(std::abs(margin - 1.0) <= p.tol);
      CHECK(svm_predict(r.model, d.features(i)).label == d.label(i));
    }
    CHECK(std::abs(balance) < 1e-6);
    CHECK(r.converged);
  }
}

TEST_CASE("dual objective matches the grid oracle on tiny problems") {
  Rng rng(77);
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(3);
    LabeledDataset d;
    for (std::size_t i = 0; i < n; ++i) d.add({rng.uniform() * 2 - 1, rng.uniform() * 2 - 1}, static_cast<Label>(i % 2));
    const double c = trial % 2 == 0 ? 1.0 : 5.0;
    SmoParams p;
    p.c = c;
    p.gamma = 1.0;
    const auto r = train_svm_smo_detailed(d, p);
    const auto k = gram(d, p.gamma);
    const double got = oracle::dual_objective(k, signs(d), r.alphas);
    const double best = oracle::dual_grid_optimum(k, signs(d), c);
    CHECK(std::abs(got - best) < 1e-3);
    ++compared;
  }
  CHECK(compared == 30);
}

TEST_CASE("kernel cache size does not change the model") {
  const auto d = separable_2d(5, 40);
  SmoParams a;
  a.gamma = 0.5;
  SmoParams b = a;
  b.cache_rows = 1;
  b.threads = 4;
  const auto ra = train_svm_smo_detailed(d, a);
  const auto rb = train_svm_smo_detailed(d, b);
  CHECK(ra.alphas == rb.alphas);
  CHECK(ra.model.bias == rb.model.bias);
}

TEST_CASE("training preconditions") {
  LabeledDataset one;
  one.add({0.0}, 1);
  one.add({1.0}, 1);
  CHECK_THROWS_AS(train_svm_smo(one, 10.0, 0.5), TrainingError);
  LabeledDataset two;
  two.add({0.0}, 0);
  two.add({1.0}, 1);
  CHECK_THROWS_AS(train_svm_smo(two, 0.0, 0.5), InvalidArgument);
  const auto m = train_svm_smo(two, 10.0, 0.5);
  const std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(svm_predict(m, wrong), InvalidArgument);
}

TEST_CASE("support vectors of a separable model classify as their label") {
  const auto d = separable_2d(9, 20);
  const auto m = train_svm_smo(d, 10.0, 0.5);
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s)
    CHECK(svm_predict(m, m.support_vectors[s]).label == (m.alpha_y[s] > 0 ? 1 : 0));
}
