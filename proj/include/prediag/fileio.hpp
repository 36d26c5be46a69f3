#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prediag::io {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_atomic(const std::filesystem::path& path, std::string_view text);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_real(double value);

/// Shortest text that parses back to the same double.
std::string format_shortest(double value);

} // namespace prediag::io
