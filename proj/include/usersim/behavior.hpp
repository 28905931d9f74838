#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "usersim/corpus.hpp"
#include "usersim/engine.hpp"
#include "usersim/random.hpp"

namespace usersim::behavior {

// --- knowledge ----------------------------------------------------------------

struct RelevanceModelWeights {
  double topic = 1.0;       // w_T
  double interaction = 1.0; // w_I
  double background = 1.0;  // w_B
  double lambda = 0.5;      // weight of the user mixture against θ_C

  double normalizer() const { return topic + interaction + background; }
};

/// P(t|θ_R) = λ·(w_T/z·θ_T + w_I/z·θ_RD + w_B/z·θ_B) + (1-λ)·θ_C.
/// Empty components contribute nothing; throws ConfigError when z = 0.
LanguageModel build_relevance_model(const LanguageModel& topic, const LanguageModel& relevant_docs,
                                    const LanguageModel& background, const LanguageModel& collection,
                                    const RelevanceModelWeights& weights);

/// (1/|d|)·Σ_t P(t|d)·log(P(t|θ_R)/P(t|θ_C)). Throws on an empty text or a
/// term unsupported by either model.
double relevance_score(const TokenSeq& text, const LanguageModel& relevance, const LanguageModel& collection);
inline double relevance_score(const Document& doc, const LanguageModel& relevance, const LanguageModel& collection) {
  return relevance_score(doc.tokens(), relevance, collection);
}

/// Background knowledge θ_B: the `k` terms with highest document-level PMI with
/// the topic terms, weighted by PMI.
LanguageModel expand_background(const TokenSeq& topic_terms, const Collection& collection, std::size_t k);

/// The simulated user's evolving knowledge: θ_RD pooled over documents judged
/// relevant, plus the fixed θ_T, θ_B and θ_C it is mixed with.
class KnowledgeState {
 public:
  KnowledgeState() = default;
  KnowledgeState(LanguageModel topic, LanguageModel background, std::shared_ptr<const LanguageModel> collection,
                 RelevanceModelWeights weights);

  /// Pools the document's terms into θ_RD. Repeated documents are ignored.
  void add_relevant(const Document& doc);
  void add_seen_snippet(TokenSeq text) { seen_snippets_.push_back(std::move(text)); }

  const LanguageModel& topic() const { return topic_; }
  const LanguageModel& relevant_docs() const { return relevant_docs_; }
  const LanguageModel& background() const { return background_; }
  const LanguageModel* collection() const { return collection_.get(); }
  std::size_t relevant_found() const { return relevant_ids_.size(); }
  const std::vector<TokenSeq>& seen_snippets() const { return seen_snippets_; }

  bool has_relevance_model() const { return collection_ != nullptr && !collection_->empty(); }
  /// θ_R for the current state. Throws ConfigError without a collection model.
  const LanguageModel& relevance_model() const;

 private:
  void rebuild();

  LanguageModel topic_;
  LanguageModel background_;
  std::shared_ptr<const LanguageModel> collection_;
  RelevanceModelWeights weights_;
  LanguageModel::Map relevant_counts_;
  std::vector<std::string> relevant_ids_;
  LanguageModel relevant_docs_;
  LanguageModel relevance_;
  std::vector<TokenSeq> seen_snippets_;
};

// --- scanning -------------------------------------------------------------------

struct FixedDepthScan {
  std::size_t depth = 10;
};
struct PersistentScan {
  double p = 0.8;
};
struct CascadeScan {};

using ScanModel = std::variant<FixedDepthScan, PersistentScan, CascadeScan>;

struct BrowseState {
  std::size_t next_rank = 1;
  bool clicked = false;
  bool stopped = false;
};

/// Whether the snippet at `rank` is examined. Ranks must arrive as 1, 2, 3, ...
/// (ContractViolation otherwise); once false, every later rank is false.
bool examine_next(const ScanModel& scan, std::size_t rank, BrowseState& state, Rng& rng);

// --- clicking -------------------------------------------------------------------

struct PerfectSnippetClick {};
/// Empty table means π_C(i) = 1/log2(i+1); ranks beyond a table use its last entry.
struct PositionClick {
  std::vector<double> by_rank;
};
struct GradeClick {
  std::array<double, 4> by_grade{};
};
struct AttractivenessClick {
  double threshold = 0.0;
};

using ClickModel = std::variant<PerfectSnippetClick, PositionClick, GradeClick, AttractivenessClick>;

GradeClick maxwell2015_clicks();
GradeClick baskaya2013_clicks();

double click_prob(const ClickModel& model, const engine::Snippet& snippet, const KnowledgeState& knowledge);

// --- judging --------------------------------------------------------------------

struct ThresholdJudge {
  int min_grade = 1;  // μ_R on grades
};
struct StochasticJudge {
  std::array<double, 4> by_grade{};
};
struct LmJudge {
  double threshold = 0.0;  // μ_R on the normalized log-likelihood
};

using JudgeModel = std::variant<ThresholdJudge, StochasticJudge, LmJudge>;

StochasticJudge maxwell2015_judgments();
StochasticJudge baskaya2013_judgments();

struct Grade {
  int value;
};
struct LmScore {
  double value;
};

/// Grade input for threshold/stochastic judges, score input for LM judges;
/// a mismatch throws ConfigError.
double judge_prob(const JudgeModel& model, Grade grade);
double judge_prob(const JudgeModel& model, LmScore score);
inline bool needs_lm_score(const JudgeModel& model) { return std::holds_alternative<LmJudge>(model); }

// --- SERP entry -------------------------------------------------------------------

struct ScentModel {
  bool always = true;
  double base = 1.0;
  double slope = 0.0;
  std::size_t depth = 5;  // snippets inspected for the scent estimate

  static ScentModel always_enter() { return {}; }
  static ScentModel naive() { return {false, 0.9, 0.0, 5}; }
  static ScentModel average() { return {false, 0.5, 0.5, 5}; }
  static ScentModel savvy() { return {false, 0.2, 0.8, 5}; }

  double enter_probability(double scent) const;
};

/// Fraction of the top `depth` snippets whose grade is >= 1 (unset grades count as 0).
double serp_scent(const engine::Serp& serp, std::size_t depth);

bool serp_entry_decision(const ScentModel& scent, const engine::Serp& serp, Rng& rng);
bool serp_entry_decision(const ScentModel& scent, double scent_value, Rng& rng);

// --- stopping ---------------------------------------------------------------------

enum class SimilarityMetric { Overlap, Kl };

namespace stop {
struct FixedDepth {
  std::size_t depth;
};
struct TotalNonRelevant {
  std::size_t limit;
};
struct ContiguousNonRelevant {
  std::size_t limit;
};
struct Satisfaction {
  std::size_t target;
};
struct SatisfactionOrFrustration {
  std::size_t target;
  std::size_t limit;
};
struct Difference {
  double threshold = 0.6;
  SimilarityMetric metric = SimilarityMetric::Overlap;
};
struct RateOfGain {
  double threshold;
  std::size_t min_docs;
};
struct TimeOnSerp {
  double seconds;
};
struct TimeSinceRelevant {
  double seconds;
};

struct MaxQueries {
  std::size_t limit;
};
struct SessionSatisfaction {
  std::size_t target;
};
struct SessionFrustration {
  std::size_t limit;
};
struct TimeBudget {
  double seconds;
};
}  // namespace stop

using QueryStopPolicy = std::variant<stop::FixedDepth, stop::TotalNonRelevant, stop::ContiguousNonRelevant,
                                     stop::Satisfaction, stop::SatisfactionOrFrustration, stop::Difference,
                                     stop::RateOfGain, stop::TimeOnSerp, stop::TimeSinceRelevant>;
using SessionStopPolicy =
    std::variant<stop::MaxQueries, stop::SessionSatisfaction, stop::SessionFrustration, stop::TimeBudget>;

struct StopPolicy {
  QueryStopPolicy query = stop::FixedDepth{10};
  SessionStopPolicy session = stop::MaxQueries{5};
};

/// Per-query counters, updated by the caller for the current snippet before
/// stop_decision is consulted. `seen_snippets` excludes the current one.
struct QueryState {
  std::size_t examined = 0;
  std::size_t clicked = 0;
  std::size_t relevant = 0;
  std::size_t nonrelevant = 0;
  std::size_t nonrelevant_streak = 0;
  std::vector<double> gain_trace;  // discounted gain per examined rank
  double elapsed = 0.0;            // seconds since the query was issued
  double last_relevant_elapsed = 0.0;
  std::vector<TokenSeq> seen_snippets;

  /// Records the outcome of one examined snippet.
  void record(bool judged_relevant, double discounted_gain);
};

struct StopDecision {
  bool stop = false;
  std::string reason;

  static StopDecision keep_going() { return {}; }
  static StopDecision stop_query(std::string why) { return {true, std::move(why)}; }
};

double term_overlap(const TokenSeq& a, const TokenSeq& b);
/// KL(current || seen) with `seen` mixed 9:1 with `current` so support is shared.
double snippet_divergence(const TokenSeq& current, const TokenSeq& seen);

StopDecision stop_decision(const QueryStopPolicy& policy, const QueryState& state, const TokenSeq& current_snippet);

struct SessionCounters {
  std::size_t queries = 0;
  std::size_t relevant = 0;
  std::size_t nonrelevant = 0;
  double elapsed = 0.0;
};

struct SessionDecision {
  bool abandon = false;
  std::string reason;
};

SessionDecision session_continue(const SessionStopPolicy& policy, const SessionCounters& counters,
                                 bool strategy_exhausted = false);

// --- costs ------------------------------------------------------------------------

struct CostModel {
  double topic = 5.0;       // reading the topic description
  double query = 8.0;       // formulating and typing a query
  double serp_entry = 1.0;  // initial SERP impression
  double snippet = 1.5;     // examining one snippet
  double read_rate = 0.018; // a, seconds per word
  double judge = 7.8;       // b, seconds to assess a document
};

enum class Action { TopicExamination, Query, SerpEntry, Snippet, Click, DocumentRead, Stop };

/// Document reads cost a·l + b with l in words; other actions their constant.
double action_cost(const CostModel& cost, Action action, std::size_t words = 0);

// --- presets ----------------------------------------------------------------------

ScanModel parse_scan(std::string_view spec);
ClickModel parse_click(std::string_view spec);
JudgeModel parse_judge(std::string_view spec);
ScentModel parse_scent(std::string_view spec);
QueryStopPolicy parse_query_stop(std::string_view spec);
SessionStopPolicy parse_session_stop(std::string_view spec);

}  // namespace usersim::behavior
