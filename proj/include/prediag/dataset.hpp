#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prediag/core.hpp"

namespace prediag::data {

inline constexpr const char* kManifestName = "manifest.csv";

/// One manifest row. `filename` is relative to the dataset directory and
/// names either a file or, for frame sequences, a directory.
struct ManifestEntry {
  std::string filename;
  Label label = 0;
  std::optional<std::uint64_t> seed;
};

/// Reads DIR/manifest.csv ("filename,label,seed" header, seed may be empty).
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries);

/// Regular files in `dir`, sorted by name.
std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir);

} // namespace prediag::data
