#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "usersim/corpus.hpp"
#include "usersim/engine.hpp"
#include "usersim/measures.hpp"
#include "usersim/session.hpp"

namespace usersim::bench {

// --- configuration ----------------------------------------------------------------

struct SystemConfig {
  std::string name;
  engine::ScorerSpec scorer;
  std::size_t k = 10;
};

/// Log-based metrics by name: gain, cost, utility, relevant_found, queries,
/// clicks, snippets, sdcg.
double log_metric(std::string_view metric, const session::InteractionLog& log, const QrelsTable& qrels,
                  const measures::MetricParams& params);
bool known_metric(std::string_view metric);

struct ExperimentConfig {
  std::filesystem::path docs;
  std::filesystem::path topics;
  std::filesystem::path qrels;
  std::vector<SystemConfig> systems;
  std::vector<session::UserProfile> users;
  std::vector<std::string> topic_ids;  // empty = every topic
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  double budget = session::kUnlimitedBudget;
  std::vector<std::string> metrics = {"gain", "cost", "utility"};
  measures::MetricParams metric_params;
  std::size_t threads = 1;
  bool write_logs = true;
};

/// User profile from `key = preset` pairs (query, scan, click, judge, stop,
/// session, scent, snippets, window, ...). Unknown keys or presets throw ConfigError.
session::UserProfile parse_user(const std::string& name, const std::map<std::string, std::string>& keys);

/// INI text with sections [corpus] [systems] [users] [budget] [metrics] [run].
/// Relative corpus paths resolve against `base_dir`. Every name and preset is
/// resolved here, so errors surface before any session runs.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// --- data -------------------------------------------------------------------------

struct TestCollection {
  std::shared_ptr<const engine::Index> index;
  std::vector<Topic> topics;
  QrelsTable qrels;

  const Topic& topic(std::string_view id) const;
};

TestCollection load_collection(const ExperimentConfig& config);

struct SynthSpec {
  std::size_t topics = 50;
  std::size_t relevant_per_topic = 5;
  std::size_t noise_docs = 250;
  std::size_t topic_vocabulary = 20;
  std::size_t background_vocabulary = 400;
  std::size_t doc_length = 60;
  double topic_share = 0.3;  // fraction of a relevant document's tokens drawn from its topic
  std::uint64_t seed = 1;
};

/// Collection with planted relevance: each topic owns a vocabulary its
/// relevant documents (grades 1..3) draw from; everything else is background.
TestCollection synthetic_collection(const SynthSpec& spec);

// --- sweeps -----------------------------------------------------------------------

struct CellKey {
  std::string topic;
  std::string system;
  std::string user;
  std::size_t run = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellResult {
  CellKey key;
  std::map<std::string, double> metrics;
  std::string log_file;  // relative to the output directory; empty when logs are not written
  session::SessionSummary summary;
};

struct TesterOutcome {
  std::string name;
  bool pass = false;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  double p_value = 1.0;
};

struct Report {
  std::vector<CellResult> cells;  // sorted by key
  std::vector<TesterOutcome> testers;
  std::map<std::string, double> divergences;

  /// `topic,system,user,run,metric,value` with a header line.
  std::string csv() const;
  /// Per (system, user) means over topics and runs.
  std::string text() const;
};

/// Seed for one session: hash of the global seed with user, topic, system and run.
std::uint64_t cell_seed(std::uint64_t global, const CellKey& key);

/// Runs every (user, topic, system, run) cell. With `out_dir`, writes
/// results.csv, report.txt and one log per session under logs/.
Report run_sweep(const ExperimentConfig& config, const TestCollection& data,
                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// --- testers --------------------------------------------------------------------

struct Tester {
  std::string name;
  std::string system_a;
  std::string system_b;  // expected: A > B
  std::vector<std::string> topics;  // empty = every topic in the config
  std::string metric = "gain";
  double confidence = 0.95;
};

/// INI sections, one per tester: a, b, metric, confidence, topics.
std::vector<Tester> parse_testers(std::string_view text);

struct PassRate {
  double rate = 0.0;
  std::vector<TesterOutcome> verdicts;
};

/// One-sided paired sign test over per-topic means; ties are dropped.
TesterOutcome sign_test(const std::string& name, const std::vector<double>& a, const std::vector<double>& b,
                        double confidence);

/// Runs `user` against each tester's systems and scores the sign test. The
/// fraction passed doubles as the simulator's reliability estimate.
PassRate tester_pass_rate(const session::UserProfile& user, const std::vector<Tester>& testers,
                          const ExperimentConfig& config, const TestCollection& data);

// --- validation -------------------------------------------------------------------

using Pmf = std::map<std::size_t, double>;

struct BehaviorStats {
  std::optional<Pmf> query_length;
  std::optional<Pmf> session_length;
  std::optional<Pmf> clicks_per_query;
};

/// JSON object with optional keys query_length, session_length and
/// clicks_per_query, each mapping a count (as a string) to its probability.
BehaviorStats parse_reference(std::string_view json);

/// Jensen-Shannon divergence in nats; lies in [0, ln 2].
double js_divergence(const Pmf& p, const Pmf& q);

BehaviorStats empirical_stats(const std::vector<session::SessionSummary>& sessions);

struct Divergence {
  std::string statistic;
  double value;
  bool flagged;
};

std::vector<Divergence> compare_behavior_stats(const std::vector<session::SessionSummary>& sessions,
                                               const BehaviorStats& reference, double threshold = 0.05);

}  // namespace usersim::bench
