#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::img {

/// Binary edge mask with the dimensions of its source image.
struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  bool at(std::size_t x, std::size_t y) const { return pixels[y * width + x] != 0; }
  std::size_t count() const;
  /// The mask as a {0,1} intensity image.
  GrayImage to_image() const;
};

struct CannyParams {
  double sigma = 1.4;
  double low = 0.05;
  double high = 0.15;
};

struct HogConfig {
  std::size_t cell_size = 8;
  std::size_t block_size = 2;
  std::size_t bins = 9;
  bool signed_orientation = false;

  void validate() const;
  /// Descriptor length for an image of the given size.
  std::size_t descriptor_length(std::size_t width, std::size_t height) const;
};

struct Gradients {
  GrayImage magnitude;
  GrayImage angle; ///< degrees in [0, 180)
};

namespace aug {
struct FlipH {};
struct FlipV {};
struct Rotate { double degrees; };
struct Brightness { double factor; };
struct Zoom { double factor; };
} // namespace aug

using AugmentSpec = std::variant<aug::FlipH, aug::FlipV, aug::Rotate, aug::Brightness, aug::Zoom>;

/// Parses "flip_h", "flip_v", "rotate:DEG", "brightness:F" or "zoom:F".
AugmentSpec parse_augment(std::string_view text);
std::string to_string(const AugmentSpec& spec);

/// Divides every pixel by 255.
GrayImage normalize_image(const GrayImage& image);

/// Bilinear resampling with half-pixel centers and clamped borders.
GrayImage resize_bilinear(const GrayImage& image, std::size_t out_width, std::size_t out_height);

/// Applies one augmentation. Multiples of 90 degrees rotate by exact index
/// permutation (dimensions swap for odd multiples); other angles resample
/// bilinearly about the center with zero fill. Brightness clips to [0,1].
GrayImage augment(const GrayImage& image, const AugmentSpec& spec);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), replicated borders.
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// Normalized 1-D Gaussian kernel of radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// 3x3 Sobel magnitude and unsigned orientation. Requires at least 3x3.
Gradients sobel_gradients(const GrayImage& image);

EdgeMap canny(const GrayImage& image, const CannyParams& params = {});

/// Per-block vectors captured after clipping and before renormalization.
struct HogTrace {
  std::vector<std::vector<double>> clipped_blocks;
};

/// Dalal-Triggs HOG with L2-Hys block normalization.
FeatureVector hog(const GrayImage& image, const HogConfig& cfg = {}, HogTrace* trace = nullptr);

} // namespace prediag::img
