#include <algorithm>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "usersim/bench.hpp"
#include "usersim/detail/spec_string.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

using detail::split;
using detail::to_double;
using detail::to_size;
using detail::trim;

namespace {

using Section = std::vector<std::pair<std::string, std::string>>;

std::map<std::string, Section> read_ini(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), ParseError::Where::Line, e.line());
  }
  std::map<std::string, Section> out;
  for (const auto& [name, section] : tree) {
    if (section.empty()) throw ConfigError("key '" + name + "' outside any section");
    auto& s = out[name];
    for (const auto& [key, value] : section) s.emplace_back(key, trim(value.data()));
  }
  return out;
}

/// Splits `name.field = value` keys into per-name maps, keeping first-seen order.
std::vector<std::pair<std::string, std::map<std::string, std::string>>> group(const Section& s,
                                                                              const std::string& where) {
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> out;
  for (const auto& [key, value] : s) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw ConfigError("[" + where + "] keys must look like name.field, got '" + key + "'");
    }
    const auto name = key.substr(0, dot);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == name; });
    if (it == out.end()) it = out.insert(out.end(), {name, {}});
    if (!it->second.emplace(key.substr(dot + 1), value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return out;
}

session::QuerySpec parse_query(const std::string& spec) {
  using namespace querysim;
  const auto p = split(spec, ':');
  if (p[0] == "known-item") {
    session::KnownItemQueries q;
    if (p.size() > 1) {
      if (p[1] == "uniform") {
        q.spec.doc_prior = DocPrior::Uniform;
      } else if (p[1] == "length") {
        q.spec.doc_prior = DocPrior::LengthProportional;
      } else {
        throw ConfigError("unknown document prior in '" + spec + "'");
      }
    }
    if (p.size() > 2) q.spec.length_pmf = detail::to_doubles(p[2], spec);
    if (p.size() > 3) q.spec.noise = to_double(p[3], spec);
    if (p.size() > 4) throw ConfigError("too many fields in '" + spec + "'");
    return q;
  }
  if (p[0] == "adhoc") {
    session::AdhocQueries q;
    if (p.size() > 1) {
      if (p[1] == "frequent") {
        q.spec.source = TopicModelSource::FrequentTerms;
      } else if (p[1] == "discriminative") {
        q.spec.source = TopicModelSource::DiscriminativeTerms;
      } else if (p[1] == "seed") {
        q.spec.source = TopicModelSource::SeedQuery;
      } else {
        throw ConfigError("unknown topic model source in '" + spec + "'");
      }
    }
    if (p.size() > 2) q.spec.mix = to_double(p[2], spec);
    if (p.size() > 3) q.spec.length = to_size(p[3], spec);
    if (p.size() > 4) {
      if (p[4] != "dynamic") throw ConfigError("expected 'dynamic' in '" + spec + "'");
      q.spec.dynamic = true;
    }
    if (p.size() > 5) throw ConfigError("too many fields in '" + spec + "'");
    if (q.spec.mix < 0.0 || q.spec.mix > 1.0) throw ConfigError("mixture weight outside [0,1] in '" + spec + "'");
    return q;
  }
  if (p[0] == "strategy" && (p.size() == 2 || p.size() == 3)) {
    session::StrategyQueries q{parse_strategy(p[1]), 5};
    if (p.size() == 3) q.pool_size = to_size(p[2], spec);
    return q;
  }
  if (p[0] == "controlled" && (p.size() == 2 || p.size() == 3)) {
    session::ControlledQueries q;
    if (p[1] == "single") {
      q.type = QueryType::Single;
    } else if (p[1] == "pair") {
      q.type = QueryType::Pair;
    } else if (p[1] == "variable") {
      q.type = QueryType::Variable;
    } else {
      throw ConfigError("unknown query type in '" + spec + "'");
    }
    if (p.size() == 3) q.threshold = to_double(p[2], spec);
    return q;
  }
  if (p[0] == "pre" && p.size() <= 3) {
    session::PreQueries q;
    if (p.size() > 1) q.candidates = to_size(p[1], spec);
    if (p.size() > 2) q.params.alpha = to_double(p[2], spec);
    if (q.candidates == 0) throw ConfigError("PRE needs at least one candidate");
    if (q.params.alpha < 0.0 || q.params.alpha > 1.0) throw ConfigError("PRE alpha outside [0,1]");
    return q;
  }
  throw ConfigError("unknown query preset '" + spec + "'");
}

}  // namespace

session::UserProfile parse_user(const std::string& name, const std::map<std::string, std::string>& keys) {
  session::UserProfile u;
  u.name = name;
  for (const auto& [key, value] : keys) {
    const std::string ctx = name + "." + key;
    if (key == "query") {
      u.query = parse_query(value);
    } else if (key == "scan") {
      u.scan = behavior::parse_scan(value);
    } else if (key == "click") {
      u.click = behavior::parse_click(value);
    } else if (key == "judge") {
      u.judge = behavior::parse_judge(value);
    } else if (key == "stop") {
      u.stop.query = behavior::parse_query_stop(value);
    } else if (key == "session") {
      u.stop.session = behavior::parse_session_stop(value);
    } else if (key == "scent") {
      u.scent = behavior::parse_scent(value);
    } else if (key == "snippets") {
      if (value == "perfect") {
        u.snippets = engine::SnippetMode::Perfect;
      } else if (value == "textual") {
        u.snippets = engine::SnippetMode::Textual;
      } else {
        throw ConfigError("snippets must be perfect or textual in '" + ctx + "'");
      }
    } else if (key == "window") {
      u.snippet_window = to_size(value, ctx);
      if (u.snippet_window == 0) throw ConfigError("snippet window must be >= 1");
    } else if (key == "query_limit") {
      u.query_limit = to_size(value, ctx);
    } else if (key == "background_terms") {
      u.background_terms = to_size(value, ctx);
    } else if (key == "lambda") {
      u.relevance.lambda = to_double(value, ctx);
    } else if (key.rfind("cost.", 0) == 0) {
      const double v = to_double(value, ctx);
      if (v < 0.0) throw ConfigError("costs must be >= 0 in '" + ctx + "'");
      const auto field = key.substr(5);
      if (field == "topic") {
        u.cost.topic = v;
      } else if (field == "query") {
        u.cost.query = v;
      } else if (field == "serp_entry") {
        u.cost.serp_entry = v;
      } else if (field == "snippet") {
        u.cost.snippet = v;
      } else if (field == "read_rate") {
        u.cost.read_rate = v;
      } else if (field == "judge") {
        u.cost.judge = v;
      } else {
        throw ConfigError("unknown cost '" + ctx + "'");
      }
    } else {
      throw ConfigError("unknown user setting '" + ctx + "'");
    }
  }
  return u;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto ini = read_ini(text);
  static const std::set<std::string> known = {"corpus", "systems", "users", "budget", "metrics", "run"};
  for (const auto& [name, _] : ini) {
    if (known.count(name) == 0) throw ConfigError("unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) -> const Section& {
    static const Section none;
    const auto it = ini.find(name);
    return it == ini.end() ? none : it->second;
  };
  auto require = [&](const std::string& name) -> const Section& {
    if (ini.count(name) == 0) throw ConfigError("missing section [" + name + "]");
    return ini.at(name);
  };

  ExperimentConfig c;
  for (const auto& [key, value] : require("corpus")) {
    auto path = base_dir / value;
    if (key == "docs") {
      c.docs = path;
    } else if (key == "topics") {
      c.topics = path;
    } else if (key == "qrels") {
      c.qrels = path;
    } else if (key == "topic_ids") {
      for (const auto& id : split(value, ',')) {
        if (!trim(id).empty()) c.topic_ids.push_back(trim(id));
      }
    } else {
      throw ConfigError("unknown [corpus] key '" + key + "'");
    }
  }

  for (const auto& [name, keys] : group(require("systems"), "systems")) {
    SystemConfig s{name, engine::Bm25{}, 10};
    for (const auto& [key, value] : keys) {
      if (key == "scorer") {
        s.scorer = engine::parse_scorer(value);
      } else if (key == "k") {
        s.k = to_size(value, name + ".k");
        if (s.k == 0) throw ConfigError("system '" + name + "' needs k >= 1");
      } else {
        throw ConfigError("unknown system setting '" + name + "." + key + "'");
      }
    }
    c.systems.push_back(std::move(s));
  }
  for (const auto& [name, keys] : group(require("users"), "users")) c.users.push_back(parse_user(name, keys));
  if (c.systems.empty() || c.users.empty()) throw ConfigError("need at least one system and one user");

  for (const auto& [key, value] : section("budget")) {
    if (key == "seconds") {
      c.budget = to_double(value, "budget.seconds");
    } else {
      throw ConfigError("unknown [budget] key '" + key + "'");
    }
  }
  for (const auto& [key, value] : section("metrics")) {
    if (key == "list") {
      c.metrics.clear();
      for (const auto& m : split(value, ',')) {
        const auto name = trim(m);
        if (!known_metric(name)) throw ConfigError("unknown metric '" + name + "'");
        c.metrics.push_back(name);
      }
    } else if (key == "tau") {
      c.metric_params.tau = to_double(value, "metrics.tau");
    } else if (key == "k") {
      c.metric_params.k = to_size(value, "metrics.k");
    } else if (key == "b") {
      c.metric_params.b = to_double(value, "metrics.b");
    } else if (key == "bq") {
      c.metric_params.bq = to_double(value, "metrics.bq");
    } else {
      throw ConfigError("unknown [metrics] key '" + key + "'");
    }
  }
  for (const auto& [key, value] : section("run")) {
    if (key == "runs") {
      c.runs = to_size(value, "run.runs");
    } else if (key == "seed") {
      c.seed = to_size(value, "run.seed");
    } else if (key == "threads") {
      c.threads = std::max<std::size_t>(1, to_size(value, "run.threads"));
    } else if (key == "logs") {
      c.write_logs = value == "true" || value == "1" || value == "yes";
    } else {
      throw ConfigError("unknown [run] key '" + key + "'");
    }
  }
  if (c.runs == 0) throw ConfigError("runs must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path.string()), path.parent_path());
}

const Topic& TestCollection::topic(std::string_view id) const {
  const auto it = std::find_if(topics.begin(), topics.end(), [&](const Topic& t) { return t.id == id; });
  if (it == topics.end()) throw ConfigError("unknown topic '" + std::string(id) + "'");
  return *it;
}

TestCollection load_collection(const ExperimentConfig& config) {
  TestCollection data;
  data.index = std::make_shared<engine::Index>(engine::build_index(parse_documents(read_file(config.docs.string()))));
  data.topics = parse_trec_topics(read_file(config.topics.string()));
  data.qrels = parse_qrels(read_file(config.qrels.string()));
  for (const auto& id : config.topic_ids) data.topic(id);
  return data;
}

}  // namespace usersim::bench
