#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::thermal {

struct ThermalConfig {
  std::size_t width = 128;
  std::size_t height = 128;
  double vessel_width = 12.0;
  double base_temp = 0.45;
  double axial_gradient = 0.0008;
  double clot_amplitude = 0.25; ///< may be negative for cold clots
  double clot_sigma = 6.0;
  double noise_sigma = 0.03;
  double clot_margin = 16.0;
  double background = 0.2;

  void validate() const;
};

/// Geometry of one synthetic scene. The hotspot lies on the vessel centerline.
struct Scene {
  double vessel_column = 0.0;
  double hotspot_row = 0.0;
  bool has_clot = false;
};

/// Draws vessel column then hotspot row, for either label, so positive and
/// negative samples from one seed share geometry and noise.
Scene draw_scene(const ThermalConfig& cfg, Label label, Rng& rng);

/// Noise-free field: background, vessel band with axial gradient and a
/// half-cosine transverse profile, plus the Gaussian hotspot when present.
GrayImage render_scene(const ThermalConfig& cfg, const Scene& scene);

/// Adds i.i.d. Gaussian noise and clips to [0,1].
GrayImage add_noise(const ThermalConfig& cfg, GrayImage field, Rng& rng);

GrayImage generate_sample(const ThermalConfig& cfg, Label label, Rng& rng);

struct ThermalSample {
  GrayImage image;
  Label label = 0;
  std::uint64_t seed = 0;
};

/// Exactly round(n * positive_fraction) positives in rng-shuffled order.
/// Each sample is generated from its own recorded seed.
std::vector<ThermalSample> generate_dataset(const ThermalConfig& cfg, std::size_t n, double positive_fraction,
                                            Rng& rng, unsigned threads = 1);

/// Static scene with independent noise per frame.
std::vector<GrayImage> generate_frame_sequence(const ThermalConfig& cfg, Label label, std::size_t n_frames,
                                               Rng& rng);

} // namespace prediag::thermal
