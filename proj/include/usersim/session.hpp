#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "usersim/behavior.hpp"
#include "usersim/corpus.hpp"
#include "usersim/engine.hpp"
#include "usersim/querysim.hpp"
#include "usersim/random.hpp"

namespace usersim::session {

// --- profile --------------------------------------------------------------------

/// A fresh known-item target is drawn per session; it is the only relevant document.
struct KnownItemQueries {
  querysim::KnownItemSpec spec;
};
struct AdhocQueries {
  querysim::AdhocSpec spec;
};
/// Pool of the `pool_size` most likely topic terms, walked by the strategy.
struct StrategyQueries {
  querysim::Strategy strategy = querysim::Strategy::S1;
  std::size_t pool_size = 5;
};
struct ControlledQueries {
  querysim::QueryType type = querysim::QueryType::Single;
  double threshold = 0.0;
};
/// Each query is the PRE argmax over `candidates` draws from `sampler`.
struct PreQueries {
  querysim::PreParams params;
  querysim::MatchKnowledge knowledge;
  querysim::AdhocSpec sampler;
  std::size_t candidates = 10;
};

using QuerySpec = std::variant<KnownItemQueries, AdhocQueries, StrategyQueries, ControlledQueries, PreQueries>;

struct UserProfile {
  std::string name = "user";
  QuerySpec query = StrategyQueries{};
  behavior::ScanModel scan = behavior::FixedDepthScan{10};
  behavior::ClickModel click = behavior::PerfectSnippetClick{};
  behavior::JudgeModel judge = behavior::ThresholdJudge{1};
  behavior::StopPolicy stop;
  behavior::CostModel cost;
  behavior::ScentModel scent;
  engine::SnippetMode snippets = engine::SnippetMode::Perfect;
  std::size_t snippet_window = 10;
  behavior::RelevanceModelWeights relevance;
  std::size_t background_terms = 10;  // k_exp
  std::size_t query_limit = 100;      // hard cap independent of the stop policy
};

struct SystemUnderTest {
  const engine::Index* index = nullptr;
  engine::ScorerSpec scorer = engine::Bm25{};
  std::size_t k = 10;
  std::string name = "system";
};

// --- log ------------------------------------------------------------------------

namespace event {
struct SessionStart {
  std::string topic;
  bool examined_topic = true;  // false when the budget was exhausted up front
};
struct QueryIssued {
  Query query;
};
struct SerpShown {
  std::size_t results;
};
struct SerpSkipped {};
struct SnippetExamined {
  std::size_t rank;
  std::string doc;
  int grade;  // ground truth
};
struct Click {
  std::size_t rank;
  std::string doc;
};
struct DocJudged {
  std::string doc;
  bool relevant;  // the simulated user's verdict
  int grade;      // ground truth
  std::size_t length;
};
struct StopQuery {
  std::string reason;
};
struct SessionEnd {
  std::string reason;
};
}  // namespace event

using Payload = std::variant<event::SessionStart, event::QueryIssued, event::SerpShown, event::SerpSkipped,
                             event::SnippetExamined, event::Click, event::DocJudged, event::StopQuery,
                             event::SessionEnd>;

/// `time` is the session clock in seconds after the event's action completed.
struct Event {
  double time = 0.0;
  Payload payload;
};

std::string_view kind_name(const Payload& payload);

struct InteractionLog {
  std::vector<Event> events;

  bool empty() const { return events.empty(); }
  double duration() const { return events.empty() ? 0.0 : events.back().time; }
};

/// Seconds charged for an event under `cost`.
double event_cost(const behavior::CostModel& cost, const Payload& payload);

class MalformedLog : public std::runtime_error {
 public:
  MalformedLog(std::size_t index, std::string_view kind, const std::string& why);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Throws MalformedLog naming the first event that breaks well-formedness.
void check_log(const InteractionLog& log);

/// One `time \t kind \t json` line per event; times in shortest round-trip form.
std::string serialize_log(const InteractionLog& log);
InteractionLog parse_log(std::string_view text);

struct SessionSummary {
  std::string topic;
  std::size_t queries = 0;
  std::size_t snippets_examined = 0;
  std::size_t clicks = 0;
  std::size_t relevant_found = 0;  // distinct judged documents with qrels grade >= 1
  std::vector<double> gain_trace;  // cumulative grade over documents the user judged relevant
  double total_cost = 0.0;
  std::vector<std::size_t> query_lengths;
  std::vector<std::size_t> clicks_per_query;
};

SessionSummary log_summary(const InteractionLog& log, const QrelsTable& qrels);

// --- state ----------------------------------------------------------------------

struct SessionState {
  const Topic* topic = nullptr;
  std::size_t query_index = 0;
  behavior::KnowledgeState knowledge;
  behavior::QueryState query;
  behavior::SessionCounters counters;
  double cost = 0.0;
  double gain = 0.0;
  std::size_t serp_position = 0;
};

/// Pools a document judged relevant into θ_RD.
void update_knowledge(SessionState& state, const Document& doc);

/// Fresh knowledge for a topic: θ_T over title and description, θ_B by expansion.
behavior::KnowledgeState initial_knowledge(const Topic& topic, const engine::Index& index,
                                           const UserProfile& profile);

inline constexpr double kUnlimitedBudget = std::numeric_limits<double>::infinity();

/// One simulated search session. Deterministic for a fixed rng state.
InteractionLog run_session(const UserProfile& profile, const Topic& topic, const SystemUnderTest& system,
                           const QrelsTable& qrels, double budget, Rng& rng);

}  // namespace usersim::session
