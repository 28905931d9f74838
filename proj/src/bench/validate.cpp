#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "usersim/bench.hpp"
#include "usersim/detail/spec_string.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

namespace {

Pmf read_pmf(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object()) throw ConfigError("reference statistic '" + name + "' must be an object");
  Pmf p;
  double total = 0.0;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("reference '" + name + "' has a non-numeric probability");
    const double v = value.get<double>();
    if (v < 0.0) throw ConfigError("reference '" + name + "' has a negative probability");
    p[detail::to_size(key, name)] += v;
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("reference '" + name + "' does not sum to 1");
  return p;
}

Pmf normalize(const std::map<std::size_t, std::size_t>& counts) {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c;
  Pmf p;
  for (const auto& [k, c] : counts) p[k] = static_cast<double>(c) / static_cast<double>(n);
  return p;
}

}  // namespace

BehaviorStats parse_reference(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), ParseError::Where::ByteOffset, e.byte);
  }
  if (!j.is_object()) throw ConfigError("reference statistics must be a JSON object");
  BehaviorStats s;
  for (const auto& [key, value] : j.items()) {
    if (key == "query_length") {
      s.query_length = read_pmf(value, key);
    } else if (key == "session_length") {
      s.session_length = read_pmf(value, key);
    } else if (key == "clicks_per_query") {
      s.clicks_per_query = read_pmf(value, key);
    } else {
      throw ConfigError("unknown reference statistic '" + key + "'");
    }
  }
  return s;
}

double js_divergence(const Pmf& p, const Pmf& q) {
  auto term = [](double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; };
  std::map<std::size_t, std::pair<double, double>> joint;
  for (const auto& [k, v] : p) joint[k].first = v;
  for (const auto& [k, v] : q) joint[k].second = v;
  double d = 0.0;
  for (const auto& [_, pq] : joint) {
    const double m = 0.5 * (pq.first + pq.second);
    d += 0.5 * term(pq.first, m) + 0.5 * term(pq.second, m);
  }
  return std::clamp(d, 0.0, std::log(2.0));
}

BehaviorStats empirical_stats(const std::vector<session::SessionSummary>& sessions) {
  std::map<std::size_t, std::size_t> qlen;
  std::map<std::size_t, std::size_t> slen;
  std::map<std::size_t, std::size_t> clicks;
  for (const auto& s : sessions) {
    slen[s.queries] += 1;
    for (auto l : s.query_lengths) qlen[l] += 1;
    for (auto c : s.clicks_per_query) clicks[c] += 1;
  }
  BehaviorStats out;
  if (!qlen.empty()) out.query_length = normalize(qlen);
  if (!slen.empty()) out.session_length = normalize(slen);
  if (!clicks.empty()) out.clicks_per_query = normalize(clicks);
  return out;
}

std::vector<Divergence> compare_behavior_stats(const std::vector<session::SessionSummary>& sessions,
                                               const BehaviorStats& reference, double threshold) {
  const auto empirical = empirical_stats(sessions);
  std::vector<Divergence> out;
  auto compare = [&](const char* name, const std::optional<Pmf>& sim, const std::optional<Pmf>& ref) {
    if (!ref) return;
    // No observations at all is as far from the reference as a pmf can be.
    const double d = sim ? js_divergence(*sim, *ref) : std::log(2.0);
    out.push_back({name, d, d > threshold});
  };
  compare("query_length", empirical.query_length, reference.query_length);
  compare("session_length", empirical.session_length, reference.session_length);
  compare("clicks_per_query", empirical.clicks_per_query, reference.clicks_per_query);
  return out;
}

}  // namespace usersim::bench
