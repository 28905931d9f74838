#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "usersim/bench.hpp"
#include "usersim/detail/spec_string.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

std::vector<Tester> parse_testers(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), ParseError::Where::Line, e.line());
  }
  std::vector<Tester> out;
  for (const auto& [name, section] : tree) {
    if (section.empty()) throw ConfigError("tester key '" + name + "' outside any section");
    Tester t;
    t.name = name;
    for (const auto& [key, node] : section) {
      const auto value = detail::trim(node.data());
      if (key == "a") {
        t.system_a = value;
      } else if (key == "b") {
        t.system_b = value;
      } else if (key == "metric") {
        if (!known_metric(value)) throw ConfigError("unknown metric '" + value + "' in tester " + name);
        t.metric = value;
      } else if (key == "confidence") {
        t.confidence = detail::to_double(value, name + ".confidence");
      } else if (key == "topics") {
        for (const auto& id : detail::split(value, ',')) {
          if (!detail::trim(id).empty()) t.topics.push_back(detail::trim(id));
        }
      } else {
        throw ConfigError("unknown tester key '" + name + "." + key + "'");
      }
    }
    if (t.system_a.empty() || t.system_b.empty()) throw ConfigError("tester " + name + " needs systems a and b");
    if (t.system_a == t.system_b) throw ConfigError("tester " + name + " compares a system with itself");
    if (!(t.confidence > 0.0 && t.confidence < 1.0)) throw ConfigError("tester " + name + ": confidence outside (0,1)");
    out.push_back(std::move(t));
  }
  return out;
}

TesterOutcome sign_test(const std::string& name, const std::vector<double>& a, const std::vector<double>& b,
                        double confidence) {
  if (a.size() != b.size()) throw ContractViolation("sign test needs paired samples");
  TesterOutcome o;
  o.name = name;
  for (std::size_t i = 0; i < a.size(); ++i) {
    o.mean_a += a[i];
    o.mean_b += b[i];
    if (a[i] > b[i]) ++o.wins;
    if (a[i] < b[i]) ++o.losses;
  }
  if (!a.empty()) {
    o.mean_a /= static_cast<double>(a.size());
    o.mean_b /= static_cast<double>(b.size());
  }
  // P(Bin(n, 1/2) >= wins)
  const std::size_t n = o.wins + o.losses;
  double p = 0.0;
  for (std::size_t k = o.wins; k <= n && n > 0; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  o.p_value = n == 0 ? 1.0 : std::min(1.0, p);
  o.pass = o.wins > o.losses && o.p_value <= 1.0 - confidence;
  return o;
}

PassRate tester_pass_rate(const session::UserProfile& user, const std::vector<Tester>& testers,
                          const ExperimentConfig& config, const TestCollection& data) {
  if (testers.empty()) throw ContractViolation("need at least one tester");
  auto system = [&](const std::string& name) -> const SystemConfig& {
    const auto it =
        std::find_if(config.systems.begin(), config.systems.end(), [&](const auto& s) { return s.name == name; });
    if (it == config.systems.end()) throw ConfigError("tester refers to unknown system '" + name + "'");
    return *it;
  };
  auto mean_metric = [&](const SystemConfig& s, const Topic& topic, const std::string& metric) {
    const session::SystemUnderTest sut{data.index.get(), s.scorer, s.k, s.name};
    double sum = 0.0;
    for (std::size_t r = 0; r < config.runs; ++r) {
      Rng rng(cell_seed(config.seed, {topic.id, s.name, user.name, r}));
      const auto log = session::run_session(user, topic, sut, data.qrels, config.budget, rng);
      sum += log_metric(metric, log, data.qrels, config.metric_params);
    }
    return sum / static_cast<double>(config.runs);
  };

  PassRate result;
  std::size_t passed = 0;
  for (const auto& t : testers) {
    const auto& a = system(t.system_a);
    const auto& b = system(t.system_b);
    std::vector<std::string> ids = t.topics.empty() ? config.topic_ids : t.topics;
    if (ids.empty()) {
      for (const auto& topic : data.topics) ids.push_back(topic.id);
    }
    std::vector<double> va;
    std::vector<double> vb;
    for (const auto& id : ids) {
      const auto& topic = data.topic(id);
      va.push_back(mean_metric(a, topic, t.metric));
      vb.push_back(mean_metric(b, topic, t.metric));
    }
    auto verdict = sign_test(t.name, va, vb, t.confidence);
    passed += verdict.pass ? 1 : 0;
    result.verdicts.push_back(std::move(verdict));
  }
  result.rate = static_cast<double>(passed) / static_cast<double>(testers.size());
  return result;
}

}  // namespace usersim::bench
