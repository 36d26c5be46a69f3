#include "prediag/imageproc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <numbers>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::img {

namespace {

constexpr double kHogEpsilon = 1e-6;
constexpr double kHogClip = 0.2;

struct RawGradients {
  std::vector<double> gx;
  std::vector<double> gy;
};

RawGradients sobel_raw(const GrayImage& image) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  RawGradients g{std::vector<double>(w * h), std::vector<double>(w * h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const long xl = static_cast<long>(x);
      const long yl = static_cast<long>(y);
      auto p = [&](long dx, long dy) { return image.clamped(xl + dx, yl + dy); };
      const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      g.gx[y * w + x] = gx;
      g.gy[y * w + x] = gy;
    }
  }
  return g;
}

double orientation_degrees(double gx, double gy, bool full_circle) {
  double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  const double period = full_circle ? 360.0 : 180.0;
  deg = std::fmod(deg, period);
  if (deg < 0.0) deg += period;
  if (deg >= period) deg -= period; // fmod of tiny negatives can round up to the period
  return deg;
}

double bilinear_sample(const GrayImage& image, double sx, double sy) {
  const double max_x = static_cast<double>(image.width() - 1);
  const double max_y = static_cast<double>(image.height() - 1);
  sx = std::clamp(sx, 0.0, max_x);
  sy = std::clamp(sy, 0.0, max_y);
  const auto x0 = static_cast<std::size_t>(std::floor(sx));
  const auto y0 = static_cast<std::size_t>(std::floor(sy));
  const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  const double top = image.at(x0, y0) * (1.0 - fx) + image.at(x1, y0) * fx;
  const double bottom = image.at(x0, y1) * (1.0 - fx) + image.at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

GrayImage rotate_quarter_turns(const GrayImage& image, int turns) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  switch (((turns % 4) + 4) % 4) {
  case 0:
    return image;
  case 1: {
    GrayImage out(h, w);
    for (std::size_t y = 0; y < w; ++y)
      for (std::size_t x = 0; x < h; ++x) out.at(x, y) = image.at(w - 1 - y, x);
    return out;
  }
  case 2: {
    GrayImage out(w, h);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(x, y) = image.at(w - 1 - x, h - 1 - y);
    return out;
  }
  default: {
    GrayImage out(h, w);
    for (std::size_t y = 0; y < w; ++y)
      for (std::size_t x = 0; x < h; ++x) out.at(x, y) = image.at(y, h - 1 - x);
    return out;
  }
  }
}

GrayImage rotate_resampled(const GrayImage& image, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = (static_cast<double>(image.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height()) - 1.0) / 2.0;
  const double max_x = static_cast<double>(image.width() - 1);
  const double max_y = static_cast<double>(image.height() - 1);
  GrayImage out(image.width(), image.height());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cx + c * dx - s * dy;
      const double sy = cy + s * dx + c * dy;
      constexpr double slack = 1e-9;
      if (sx < -slack || sy < -slack || sx > max_x + slack || sy > max_y + slack) continue;
      out.at(x, y) = bilinear_sample(image, sx, sy);
    }
  }
  return out;
}

GrayImage zoom_center(const GrayImage& image, double factor) {
  const double w = static_cast<double>(image.width());
  const double h = static_cast<double>(image.height());
  const double crop_w = w / factor;
  const double crop_h = h / factor;
  const double x0 = (w - crop_w) / 2.0;
  const double y0 = (h - crop_h) / 2.0;
  GrayImage out(image.width(), image.height());
  for (std::size_t y = 0; y < image.height(); ++y) {
    const double sy = y0 + (static_cast<double>(y) + 0.5) * (crop_h / h) - 0.5;
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double sx = x0 + (static_cast<double>(x) + 0.5) * (crop_w / w) - 0.5;
      out.at(x, y) = bilinear_sample(image, sx, sy);
    }
  }
  return out;
}

double parse_factor(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw InvalidArgument("bad " + std::string(what) + " value '" + std::string(text) + "'");
  return value;
}

} // namespace

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

GrayImage EdgeMap::to_image() const {
  std::vector<double> values(pixels.begin(), pixels.end());
  return GrayImage(width, height, std::move(values));
}

void HogConfig::validate() const {
  if (cell_size < 2) throw InvalidArgument("HOG cell_size must be at least 2");
  if (bins < 2) throw InvalidArgument("HOG bins must be at least 2");
  if (block_size < 1) throw InvalidArgument("HOG block_size must be at least 1");
}

std::size_t HogConfig::descriptor_length(std::size_t width, std::size_t height) const {
  const std::size_t cells_x = width / cell_size;
  const std::size_t cells_y = height / cell_size;
  if (cells_x < block_size || cells_y < block_size) return 0;
  return (cells_x - block_size + 1) * (cells_y - block_size + 1) * block_size * block_size * bins;
}

AugmentSpec parse_augment(std::string_view text) {
  if (text == "flip_h") return aug::FlipH{};
  if (text == "flip_v") return aug::FlipV{};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("unknown augmentation '" + std::string(text) + "'");
  const auto name = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  if (name == "rotate") return aug::Rotate{parse_factor(arg, "rotation")};
  if (name == "brightness") return aug::Brightness{parse_factor(arg, "brightness")};
  if (name == "zoom") return aug::Zoom{parse_factor(arg, "zoom")};
  throw InvalidArgument("unknown augmentation '" + std::string(text) + "'");
}

std::string to_string(const AugmentSpec& spec) {
  struct Visitor {
    std::string operator()(aug::FlipH) const { return "flip_h"; }
    std::string operator()(aug::FlipV) const { return "flip_v"; }
    std::string operator()(aug::Rotate r) const { return "rotate:" + io::format_shortest(r.degrees); }
    std::string operator()(aug::Brightness b) const { return "brightness:" + io::format_shortest(b.factor); }
    std::string operator()(aug::Zoom z) const { return "zoom:" + io::format_shortest(z.factor); }
  };
  return std::visit(Visitor{}, spec);
}

GrayImage normalize_image(const GrayImage& image) {
  GrayImage out = image;
  for (double& p : out.pixels()) p /= 255.0;
  return out;
}

GrayImage resize_bilinear(const GrayImage& image, std::size_t out_width, std::size_t out_height) {
  if (out_width == 0 || out_height == 0) throw InvalidArgument("resize target must be at least 1x1");
  if (out_width == image.width() && out_height == image.height()) return image;
  const double scale_x = static_cast<double>(image.width()) / static_cast<double>(out_width);
  const double scale_y = static_cast<double>(image.height()) / static_cast<double>(out_height);
  GrayImage out(out_width, out_height);
  for (std::size_t y = 0; y < out_height; ++y) {
    const double sy = (static_cast<double>(y) + 0.5) * scale_y - 0.5;
    for (std::size_t x = 0; x < out_width; ++x) {
      const double sx = (static_cast<double>(x) + 0.5) * scale_x - 0.5;
      out.at(x, y) = bilinear_sample(image, sx, sy);
    }
  }
  return out;
}

GrayImage augment(const GrayImage& image, const AugmentSpec& spec) {
  struct Visitor {
    const GrayImage& image;

    GrayImage operator()(aug::FlipH) const {
      GrayImage out(image.width(), image.height());
      for (std::size_t y = 0; y < image.height(); ++y)
        for (std::size_t x = 0; x < image.width(); ++x) out.at(x, y) = image.at(image.width() - 1 - x, y);
      return out;
    }
    GrayImage operator()(aug::FlipV) const {
      GrayImage out(image.width(), image.height());
      for (std::size_t y = 0; y < image.height(); ++y)
        for (std::size_t x = 0; x < image.width(); ++x) out.at(x, y) = image.at(x, image.height() - 1 - y);
      return out;
    }
    GrayImage operator()(aug::Rotate r) const {
      if (!std::isfinite(r.degrees)) throw InvalidArgument("rotation angle must be finite");
      const double quarters = r.degrees / 90.0;
      if (quarters == std::round(quarters)) return rotate_quarter_turns(image, static_cast<int>(std::fmod(quarters, 4.0)));
      return rotate_resampled(image, r.degrees);
    }
    GrayImage operator()(aug::Brightness b) const {
      if (!(b.factor > 0.0)) throw InvalidArgument("brightness factor must be positive");
      GrayImage out = image;
      for (double& p : out.pixels()) p = std::clamp(p * b.factor, 0.0, 1.0);
      return out;
    }
    GrayImage operator()(aug::Zoom z) const {
      if (!(z.factor > 0.0)) throw InvalidArgument("zoom factor must be positive");
      if (z.factor < 1.0) throw InvalidArgument("zoom factor must be at least 1");
      return zoom_center(image, z.factor);
    }
  };
  return std::visit(Visitor{image}, spec);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("blur sigma must be positive");
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;
  return kernel;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const long radius = static_cast<long>(kernel.size() / 2);
  const std::size_t w = image.width();
  const std::size_t h = image.height();

  GrayImage horizontal(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               image.clamped(static_cast<long>(x) + k, static_cast<long>(y));
      horizontal.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               horizontal.clamped(static_cast<long>(x), static_cast<long>(y) + k);
      out.at(x, y) = acc;
    }
  }
  return out;
}

Gradients sobel_gradients(const GrayImage& image) {
  if (image.width() < 3 || image.height() < 3) throw InvalidArgument("Sobel requires an image of at least 3x3");
  const auto raw = sobel_raw(image);
  const std::size_t n = raw.gx.size();
  std::vector<double> mag(n), ang(n);
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::hypot(raw.gx[i], raw.gy[i]);
    ang[i] = orientation_degrees(raw.gx[i], raw.gy[i], false);
  }
  return {GrayImage(image.width(), image.height(), std::move(mag)),
          GrayImage(image.width(), image.height(), std::move(ang))};
}

EdgeMap canny(const GrayImage& image, const CannyParams& params) {
  if (!(params.low > 0.0)) throw InvalidArgument("Canny low threshold must be positive");
  if (!(params.low < params.high)) throw InvalidArgument("Canny low threshold must be below the high threshold");
  const GrayImage blurred = gaussian_blur(image, params.sigma);
  const Gradients grad = sobel_gradients(blurred);
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  const auto& mag = grad.magnitude;

  // Non-maximum suppression along the gradient direction quantized to
  // 0/45/90/135 degrees. A pixel must beat its backward neighbour strictly
  // and its forward neighbour weakly, so a two-pixel plateau thins to one.
  std::vector<double> thin(w * h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double m = mag.at(x, y);
      if (m <= 0.0) continue;
      const double a = grad.angle.at(x, y);
      long dx = 1, dy = 0;
      if (a >= 22.5 && a < 67.5) {
        dx = 1; dy = 1;
      } else if (a >= 67.5 && a < 112.5) {
        dx = 0; dy = 1;
      } else if (a >= 112.5 && a < 157.5) {
        dx = -1; dy = 1;
      }
      const long xl = static_cast<long>(x);
      const long yl = static_cast<long>(y);
      const double backward = mag.clamped(xl - dx, yl - dy);
      const double forward = mag.clamped(xl + dx, yl + dy);
      if (m > backward && m >= forward) thin[y * w + x] = m;
    }
  }

  EdgeMap edges{w, h, std::vector<std::uint8_t>(w * h, 0)};
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < thin.size(); ++i) {
    if (thin[i] >= params.high) {
      edges.pixels[i] = 1;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    const long x = static_cast<long>(i % w);
    const long y = static_cast<long>(i / w);
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        const long nx = x + dx;
        const long ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (edges.pixels[j] == 0 && thin[j] >= params.low) {
          edges.pixels[j] = 1;
          frontier.push_back(j);
        }
      }
    }
  }
  return edges;
}

FeatureVector hog(const GrayImage& image, const HogConfig& cfg, HogTrace* trace) {
  cfg.validate();
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  if (w % cfg.cell_size != 0 || h % cfg.cell_size != 0)
    throw InvalidArgument("image " + std::to_string(w) + "x" + std::to_string(h) +
                          " is not divisible by HOG cell size " + std::to_string(cfg.cell_size));
  const std::size_t cells_x = w / cfg.cell_size;
  const std::size_t cells_y = h / cfg.cell_size;
  if (cells_x < cfg.block_size || cells_y < cfg.block_size)
    throw InvalidArgument("image too small for one HOG block");

  const auto raw = sobel_raw(image);
  const std::size_t bins = cfg.bins;
  const double bin_width = (cfg.signed_orientation ? 360.0 : 180.0) / static_cast<double>(bins);
  std::vector<double> cells(cells_x * cells_y * bins, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      const double m = std::hypot(raw.gx[i], raw.gy[i]);
      if (m == 0.0) continue;
      const double pos = orientation_degrees(raw.gx[i], raw.gy[i], cfg.signed_orientation) / bin_width;
      const double base = std::floor(pos);
      const double frac = pos - base;
      const std::size_t b0 = static_cast<std::size_t>(base) % bins;
      const std::size_t b1 = (b0 + 1) % bins;
      double* hist = &cells[((y / cfg.cell_size) * cells_x + x / cfg.cell_size) * bins];
      hist[b0] += m * (1.0 - frac);
      hist[b1] += m * frac;
    }
  }

  const std::size_t blocks_x = cells_x - cfg.block_size + 1;
  const std::size_t blocks_y = cells_y - cfg.block_size + 1;
  const std::size_t block_len = cfg.block_size * cfg.block_size * bins;
  FeatureVector out;
  out.reserve(blocks_x * blocks_y * block_len);
  std::vector<double> block(block_len);
  auto l2_scale = [](std::vector<double>& v) {
    double ss = 0.0;
    for (double e : v) ss += e * e;
    const double inv = 1.0 / std::sqrt(ss + kHogEpsilon * kHogEpsilon);
    for (double& e : v) e *= inv;
  };
  for (std::size_t by = 0; by < blocks_y; ++by) {
    for (std::size_t bx = 0; bx < blocks_x; ++bx) {
      std::size_t k = 0;
      for (std::size_t cy = by; cy < by + cfg.block_size; ++cy)
        for (std::size_t cx = bx; cx < bx + cfg.block_size; ++cx)
          for (std::size_t b = 0; b < bins; ++b) block[k++] = cells[(cy * cells_x + cx) * bins + b];
      l2_scale(block);
      for (double& e : block) e = std::min(e, kHogClip);
      if (trace) trace->clipped_blocks.push_back(block);
      l2_scale(block);
      out.insert(out.end(), block.begin(), block.end());
    }
  }
  return out;
}

} // namespace prediag::img
