#include "prediag/synththermal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prediag/error.hpp"
#include "prediag/parallel.hpp"

namespace prediag::thermal {

void ThermalConfig::validate() const {
  if (width == 0 || height == 0) throw InvalidArgument("thermal image dimensions must be positive");
  if (!(vessel_width > 0.0) || !(base_temp > 0.0) || !(axial_gradient >= 0.0) || !(clot_sigma > 0.0) ||
      !(noise_sigma >= 0.0) || !(clot_margin >= 0.0) || !std::isfinite(clot_amplitude))
    throw InvalidArgument("thermal parameters must be positive and finite");
  if (!(clot_sigma < static_cast<double>(std::min(width, height)) / 4.0))
    throw InvalidArgument("clot_sigma must be below a quarter of the smaller image side");
  if (2.0 * clot_margin > static_cast<double>(std::min(width, height)) - 1.0)
    throw InvalidArgument("clot_margin leaves no room for the hotspot");
}

Scene draw_scene(const ThermalConfig& cfg, Label label, Rng& rng) {
  cfg.validate();
  require_binary_label(label);
  const double span_x = static_cast<double>(cfg.width - 1) - 2.0 * cfg.clot_margin;
  const double span_y = static_cast<double>(cfg.height - 1) - 2.0 * cfg.clot_margin;
  Scene scene;
  scene.vessel_column = cfg.clot_margin + rng.uniform() * span_x;
  scene.hotspot_row = cfg.clot_margin + rng.uniform() * span_y;
  scene.has_clot = label == 1;
  return scene;
}

GrayImage render_scene(const ThermalConfig& cfg, const Scene& scene) {
  cfg.validate();
  GrayImage field(cfg.width, cfg.height, cfg.background);
  const double half = cfg.vessel_width / 2.0;
  const double two_sigma_sq = 2.0 * cfg.clot_sigma * cfg.clot_sigma;
  for (std::size_t y = 0; y < cfg.height; ++y) {
    const double peak = cfg.base_temp + cfg.axial_gradient * static_cast<double>(y);
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const double dx = static_cast<double>(x) - scene.vessel_column;
      double v = cfg.background;
      if (std::abs(dx) <= half) v += (peak - cfg.background) * std::cos(std::numbers::pi * dx / cfg.vessel_width);
      if (scene.has_clot) {
        const double dy = static_cast<double>(y) - scene.hotspot_row;
        v += cfg.clot_amplitude * std::exp(-(dx * dx + dy * dy) / two_sigma_sq);
      }
      field.at(x, y) = v;
    }
  }
  return field;
}

GrayImage add_noise(const ThermalConfig& cfg, GrayImage field, Rng& rng) {
  for (double& p : field.pixels()) {
    if (cfg.noise_sigma > 0.0) p += cfg.noise_sigma * rng.gaussian();
    p = std::clamp(p, 0.0, 1.0);
  }
  return field;
}

GrayImage generate_sample(const ThermalConfig& cfg, Label label, Rng& rng) {
  const Scene scene = draw_scene(cfg, label, rng);
  return add_noise(cfg, render_scene(cfg, scene), rng);
}

std::vector<ThermalSample> generate_dataset(const ThermalConfig& cfg, std::size_t n, double positive_fraction,
                                            Rng& rng, unsigned threads) {
  cfg.validate();
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0))
    throw InvalidArgument("positive fraction must lie in [0, 1]");
  const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(n) * positive_fraction));
  std::vector<Label> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  for (std::size_t i = n; i-- > 1;) std::swap(labels[i], labels[rng.below(i + 1)]);

  std::vector<ThermalSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = labels[i];
    out[i].seed = rng.next_u64();
  }
  parallel_for(n, threads, [&](std::size_t i) {
    Rng local(out[i].seed);
    out[i].image = generate_sample(cfg, out[i].label, local);
  });
  return out;
}

std::vector<GrayImage> generate_frame_sequence(const ThermalConfig& cfg, Label label, std::size_t n_frames,
                                               Rng& rng) {
  if (n_frames == 0) throw InvalidArgument("frame sequence must contain at least one frame");
  const Scene scene = draw_scene(cfg, label, rng);
  const GrayImage field = render_scene(cfg, scene);
  std::vector<GrayImage> frames;
  frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) frames.push_back(add_noise(cfg, field, rng));
  return frames;
}

} // namespace prediag::thermal
