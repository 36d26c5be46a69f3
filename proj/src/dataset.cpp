#include "prediag/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "prediag/error.hpp"
#include "prediag/fileio.hpp"

namespace prediag::data {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

} // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::istringstream in(io::read_text(path));
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() < 2 || cells[0] != "filename" || cells[1] != "label")
        throw DataError(where + ": expected header \"filename,label,seed\"");
      continue;
    }
    if (cells.size() < 2 || cells.size() > 3) throw DataError(where + ": expected 2 or 3 columns");
    if (cells[0].empty()) throw DataError(where + ": empty filename");
    ManifestEntry e;
    e.filename = cells[0];
    if (cells[1] == "0") e.label = 0;
    else if (cells[1] == "1") e.label = 1;
    else throw DataError(where + ": label must be 0 or 1");
    if (cells.size() == 3 && !cells[2].empty()) {
      std::uint64_t seed = 0;
      const auto* end = cells[2].data() + cells[2].size();
      auto [ptr, ec] = std::from_chars(cells[2].data(), end, seed);
      if (ec != std::errc{} || ptr != end) throw DataError(where + ": seed must be an unsigned integer");
      e.seed = seed;
    }
    entries.push_back(std::move(e));
  }
  if (!header_seen) throw DataError(path.string() + ": empty manifest");
  if (entries.empty()) throw DataError(path.string() + ": manifest lists no samples");
  return entries;
}

void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries) {
  std::string text = "filename,label,seed\n";
  for (const auto& e : entries) {
    text += e.filename + "," + std::to_string(e.label) + ",";
    if (e.seed) text += std::to_string(*e.seed);
    text += "\n";
  }
  io::write_atomic(dir / kManifestName, text);
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw DataError("cannot list " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it)
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

} // namespace prediag::data
