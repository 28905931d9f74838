#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "usersim/corpus.hpp"
#include "usersim/random.hpp"

namespace usersim::querysim {

// --- generative models ------------------------------------------------------

enum class DocPrior { Uniform, LengthProportional };

struct KnownItemSpec {
  DocPrior doc_prior = DocPrior::Uniform;
  std::vector<double> length_pmf = {0.0, 1.0};  // P(l = i + 1); must sum to 1
  double noise = 0.0;                           // λ_noise; 0 = pure document model
};

struct KnownItemQuery {
  Query query;
  std::string target;
};

/// Samples a target document by the prior, a length from P(l) and that many
/// terms from (1-λ_noise)·P(t|θ_d) + λ_noise·P(t|C).
KnownItemQuery gen_known_item(const Collection& collection, const KnownItemSpec& spec, Rng& rng);

/// Same term model for a fixed target (used for follow-up queries in a session).
Query gen_known_item_for(const Collection& collection, const Document& target, const KnownItemSpec& spec,
                         Rng& rng);

enum class TopicModelSource { FrequentTerms, DiscriminativeTerms, SeedQuery };

struct AdhocSpec {
  TopicModelSource source = TopicModelSource::SeedQuery;
  double mix = 0.8;  // λ_mix on the topic model
  std::size_t length = 3;
  bool dynamic = false;
};

/// Snippet texts the user has seen so far in the session.
struct SessionContext {
  std::vector<TokenSeq> seen;
};

/// θ_T for the chosen source; with `context`, seen snippet tokens are pooled in.
LanguageModel topic_model(const Topic& topic, std::span<const Document* const> relevant,
                          const LanguageModel& collection_lm, TopicModelSource source,
                          const SessionContext* context = nullptr);

/// The sampling distribution λ_mix·P(t|θ_T) + (1-λ_mix)·P(t|C).
LanguageModel adhoc_distribution(const Topic& topic, std::span<const Document* const> relevant,
                                 const LanguageModel& collection_lm, const AdhocSpec& spec,
                                 const SessionContext* context = nullptr);

Query gen_adhoc(const Topic& topic, std::span<const Document* const> relevant, const LanguageModel& collection_lm,
                const AdhocSpec& spec, Rng& rng, const SessionContext* context = nullptr);

/// Draws `n` i.i.d. terms from `lm`.
Query sample_terms(const LanguageModel& lm, std::size_t n, Rng& rng);

// --- controlled sequences ---------------------------------------------------

enum class QueryType { Single, Pair, Variable };

struct RankedTerm {
  std::string term;
  double score;  // p_R(t)·log(p_R(t)/p_C(t))
};

std::vector<RankedTerm> discriminative_terms(std::span<const Document* const> relevant,
                                             const LanguageModel& collection_lm);

/// Queries of descending discriminative power, never reusing a term. Pair
/// queries take two fresh terms; variable queries grow by one term each step
/// (1, 2, 3, ...). Stops when a query cannot be completed from terms scoring
/// at least `threshold`.
std::vector<Query> controlled_sequence(std::span<const Document* const> relevant, const LanguageModel& collection_lm,
                                       QueryType type, double threshold);

// --- reformulation strategies -----------------------------------------------

enum class Strategy { S1, S2, S3, S4, S5 };

Strategy parse_strategy(std::string_view name);

class StrategyExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered, duplicate-free terms a strategy builds queries from.
class TermPool {
 public:
  explicit TermPool(std::vector<std::string> terms);
  /// Top `size` terms by descending P(t|θ_T) of title+description (ties keep text order).
  static TermPool from_topic(const Topic& topic, std::size_t size, bool skip_stopwords = true);

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
};

/// Query number `step` (1-based) of the strategy sequence. Throws StrategyExhausted.
Query reformulate(Strategy strategy, const TermPool& pool, std::size_t step);
std::optional<Query> try_reformulate(Strategy strategy, const TermPool& pool, std::size_t step);

// --- optimization-based selection -------------------------------------------

struct MatchKnowledge {
  bool full = true;
  double epsilon = 0.01;
  double lambda = 0.1;                           // JM weight on `background` for partial knowledge
  const LanguageModel* background = nullptr;     // the user's notion of the collection
};

/// ∏_{t∈q} m(t,d) with ε-clamped per-term match factors.
double match_prob(const Query& q, const Document& d, const MatchKnowledge& knowledge);

struct PreParams {
  double alpha = 0.5;
  double effort_weight = 1.0;  // λ_E
  double cost_per_word = 1.0;  // E(q) = c_word·|q|
  std::size_t nonrel_sample = 100;
};

struct PreScore {
  double log_recall;
  double log_precision;
  double effort;
  double score;
};

struct PreSelection {
  Query query;
  std::size_t index;
  std::vector<PreScore> scores;
};

/// argmax over candidates of α·log Rec + (1-α)·log Prec − λ_E·E(q); ties by first occurrence.
PreSelection pre_select_query(std::span<const Query> candidates, std::span<const Document* const> relevant,
                              std::span<const Document* const> nonrelevant, const PreParams& params,
                              const MatchKnowledge& knowledge);

}  // namespace usersim::querysim
