#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::img {

/// Decodes binary PGM (P5) or PPM (P6) with maxval 255. Color input is
/// reduced to luminance 0.299R + 0.587G + 0.114B. Pixels stay in [0,255].
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);

/// Encodes a P5 image. Pixels are rounded and clamped to [0,255].
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

GrayImage read_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Scales a [0,1] image to [0,255] for writing.
GrayImage to_byte_range(const GrayImage& image);

} // namespace prediag::img
