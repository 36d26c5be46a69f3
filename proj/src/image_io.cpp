#include "prediag/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::img {

namespace {

class HeaderReader {
public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t next_uint() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw DataError("PNM header value too large");
    }
    if (digits == 0) throw DataError("malformed PNM header");
    return value;
  }

  /// Consumes the single whitespace byte that ends the header.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw DataError("malformed PNM header");
    return pos_ + 1;
  }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

} // namespace

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw DataError("not a binary PGM/PPM file");
  const bool color = bytes[1] == '6';
  HeaderReader header(bytes);
  const std::size_t width = header.next_uint();
  const std::size_t height = header.next_uint();
  const std::size_t maxval = header.next_uint();
  if (width == 0 || height == 0) throw DataError("PNM image has zero size");
  if (maxval != 255) throw DataError("PNM maxval must be 255, got " + std::to_string(maxval));
  const std::size_t offset = header.raster_offset();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t needed = width * height * channels;
  if (bytes.size() - offset < needed) throw DataError("PNM raster is truncated");

  std::vector<double> pixels(width * height);
  const auto* raster = bytes.data() + offset;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (color) {
      pixels[i] = 0.299 * raster[3 * i] + 0.587 * raster[3 * i + 1] + 0.114 * raster[3 * i + 2];
    } else {
      pixels[i] = raster[i];
    }
  }
  return GrayImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.pixels().size());
  for (double p : image.pixels())
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(p), 0L, 255L)));
  return out;
}

GrayImage read_image(const std::filesystem::path& path) {
  try {
    return decode_pnm(io::read_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  io::write_atomic(path, encode_pgm(image));
}

GrayImage to_byte_range(const GrayImage& image) {
  GrayImage out = image;
  for (double& p : out.pixels()) p *= 255.0;
  return out;
}

} // namespace prediag::img
