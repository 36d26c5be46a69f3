#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace prediag {

/// SplitMix64 generator. A plain value: copies advance independently.
class Rng {
public:
  constexpr explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n) noexcept;

  /// Standard normal deviate (Box-Muller, one value per call).
  double gaussian() noexcept;

  constexpr std::uint64_t state() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

using Label = int;

/// Row-major grayscale image of doubles.
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0);
  GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  double& at(std::size_t x, std::size_t y) noexcept { return pixels_[y * width_ + x]; }
  double at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }

  /// Border-replicating accessor.
  double clamped(long x, long y) const noexcept;

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  bool operator==(const GrayImage&) const = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 0;

  bool operator==(const AudioSignal&) const = default;
};

using FeatureVector = std::vector<double>;

/// Feature vectors of one common length with binary labels.
class LabeledDataset {
public:
  LabeledDataset() = default;
  LabeledDataset(std::vector<FeatureVector> features, std::vector<Label> labels);

  void add(FeatureVector features, Label label);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dimension() const noexcept { return dim_; }

  const FeatureVector& features(std::size_t i) const { return features_[i]; }
  Label label(std::size_t i) const { return labels_[i]; }
  const std::vector<FeatureVector>& all_features() const noexcept { return features_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  /// Count of samples with label 1.
  std::size_t positives() const noexcept;

  LabeledDataset subset(std::span<const std::size_t> indices) const;

private:
  std::vector<FeatureVector> features_;
  std::vector<Label> labels_;
  std::size_t dim_ = 0;
};

void require_binary_label(Label label);

} // namespace prediag
