#pragma once

#include <string>

#include <json.hpp>

namespace prediag::json {

using Json = nlohmann::ordered_json;

enum class RealStyle {
  Shortest, ///< shortest text that round-trips
  Scientific17 ///< "%.16e": always 17 significant digits
};

/// Deterministic serialization: insertion-ordered keys, two-space indent,
/// reals in the requested style, trailing newline.
std::string dump(const Json& value, RealStyle style = RealStyle::Shortest);

/// Compact single-line form, same number formatting.
std::string dump_line(const Json& value, RealStyle style = RealStyle::Shortest);

} // namespace prediag::json
