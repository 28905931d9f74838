#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "usersim/error.hpp"

namespace usersim::detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("expected a number, got '" + std::string(s) + "' in '" + std::string(context) + "'");
  }
  return v;
}

inline std::size_t to_size(std::string_view s, std::string_view context) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("expected a count, got '" + std::string(s) + "' in '" + std::string(context) + "'");
  }
  return v;
}

inline std::vector<double> to_doubles(std::string_view s, std::string_view context) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(trim(part), context));
  return out;
}

}  // namespace usersim::detail
