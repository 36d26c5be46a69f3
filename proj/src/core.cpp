#include "prediag/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "prediag/error.hpp"

namespace prediag {

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64()) * 0x1.0p-64;
}

std::size_t Rng::below(std::size_t n) noexcept {
  // Multiply-shift keeps the mapping identical on every platform.
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

double Rng::gaussian() noexcept {
  const double u1 = 1.0 - uniform(); // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, double fill)
    : GrayImage(width, height, std::vector<double>(width * height, fill)) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be positive");
  if (pixels_.size() != width * height)
    throw InvalidArgument("pixel count " + std::to_string(pixels_.size()) + " does not match " +
                          std::to_string(width) + "x" + std::to_string(height));
  for (double p : pixels_)
    if (!std::isfinite(p)) throw InvalidArgument("image contains a non-finite pixel");
}

double GrayImage::clamped(long x, long y) const noexcept {
  x = std::clamp<long>(x, 0, static_cast<long>(width_) - 1);
  y = std::clamp<long>(y, 0, static_cast<long>(height_) - 1);
  return pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)];
}

void require_binary_label(Label label) {
  if (label != 0 && label != 1)
    throw InvalidArgument("labels must be 0 or 1, got " + std::to_string(label));
}

LabeledDataset::LabeledDataset(std::vector<FeatureVector> features, std::vector<Label> labels) {
  if (features.size() != labels.size())
    throw InvalidArgument("feature and label counts differ");
  features_.reserve(features.size());
  labels_.reserve(labels.size());
  for (std::size_t i = 0; i < features.size(); ++i) add(std::move(features[i]), labels[i]);
}

void LabeledDataset::add(FeatureVector features, Label label) {
  require_binary_label(label);
  if (features.empty()) throw InvalidArgument("empty feature vector");
  if (labels_.empty()) {
    dim_ = features.size();
  } else if (features.size() != dim_) {
    throw InvalidArgument("feature vector length " + std::to_string(features.size()) +
                          " differs from dataset dimension " + std::to_string(dim_));
  }
  for (double v : features)
    if (!std::isfinite(v)) throw InvalidArgument("feature vector contains a non-finite value");
  features_.push_back(std::move(features));
  labels_.push_back(label);
}

std::size_t LabeledDataset::positives() const noexcept {
  std::size_t n = 0;
  for (Label l : labels_) n += (l == 1);
  return n;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  for (std::size_t i : indices) out.add(features_.at(i), labels_.at(i));
  return out;
}

} // namespace prediag
