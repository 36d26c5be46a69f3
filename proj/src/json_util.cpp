#include "prediag/json_util.hpp"

#include <cmath>
#include <cstdio>

#include "prediag/error.hpp"

namespace prediag::json {

namespace {

std::string format_number(double v, RealStyle style) {
  if (!std::isfinite(v)) throw InvalidArgument("cannot serialize a non-finite number");
  if (style == RealStyle::Shortest) return Json(v).dump();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write(std::string& out, const Json& v, RealStyle style, int indent, int depth) {
  const bool pretty = indent > 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (v.type()) {
  case Json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    bool first = true;
    for (const auto& [key, child] : v.items()) {
      if (!first) out += ',';
      first = false;
      newline(depth + 1);
      out += Json(key).dump();
      out += pretty ? ": " : ":";
      write(out, child, style, indent, depth + 1);
    }
    newline(depth);
    out += '}';
    return;
  }
  case Json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    bool first = true;
    for (const auto& child : v) {
      if (!first) out += ',';
      first = false;
      newline(depth + 1);
      write(out, child, style, indent, depth + 1);
    }
    newline(depth);
    out += ']';
    return;
  }
  case Json::value_t::number_float:
    out += format_number(v.get<double>(), style);
    return;
  default:
    out += v.dump();
    return;
  }
}

} // namespace

std::string dump(const Json& value, RealStyle style) {
  std::string out;
  write(out, value, style, 2, 0);
  out += '\n';
  return out;
}

std::string dump_line(const Json& value, RealStyle style) {
  std::string out;
  write(out, value, style, 0, 0);
  return out;
}

} // namespace prediag::json
