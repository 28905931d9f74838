#include <algorithm>
#include <cmath>
#include <set>

#include "usersim/error.hpp"
#include "usersim/querysim.hpp"

namespace usersim::querysim {

std::vector<RankedTerm> discriminative_terms(std::span<const Document* const> relevant,
                                             const LanguageModel& collection_lm) {
  if (relevant.empty()) throw ContractViolation("controlled generation needs a non-empty R");
  std::vector<TokenSeq> texts;
  for (const auto* d : relevant) texts.push_back(d->tokens());
  const LanguageModel pr = build_lm(texts);
  std::vector<RankedTerm> out;
  out.reserve(pr.size());
  for (const auto& [t, p] : pr.probs()) {
    const double pc = collection_lm.prob(t);
    if (pc <= 0.0) throw DomainError("collection model assigns zero probability to '" + t + "'");
    out.push_back({t, p * std::log(p / pc)});
  }
  // Map order breaks score ties alphabetically.
  std::stable_sort(out.begin(), out.end(), [](const RankedTerm& a, const RankedTerm& b) { return a.score > b.score; });
  return out;
}

std::vector<Query> controlled_sequence(std::span<const Document* const> relevant, const LanguageModel& collection_lm,
                                       QueryType type, double threshold) {
  const auto ranked = discriminative_terms(relevant, collection_lm);
  std::size_t usable = 0;
  while (usable < ranked.size() && ranked[usable].score >= threshold) ++usable;

  std::vector<Query> out;
  std::size_t next = 0;
  for (std::size_t len = 1;; ++len) {
    const std::size_t want = type == QueryType::Single ? 1 : type == QueryType::Pair ? 2 : len;
    if (next + want > usable) break;
    Query q;
    for (std::size_t i = 0; i < want; ++i) q.push_back(ranked[next + i].term);
    next += want;
    out.push_back(std::move(q));
  }
  return out;
}

Strategy parse_strategy(std::string_view name) {
  if (name == "S1" || name == "s1") return Strategy::S1;
  if (name == "S2" || name == "s2") return Strategy::S2;
  if (name == "S3" || name == "s3") return Strategy::S3;
  if (name == "S4" || name == "s4") return Strategy::S4;
  if (name == "S5" || name == "s5") return Strategy::S5;
  throw ConfigError("unknown reformulation strategy '" + std::string(name) + "'");
}

TermPool::TermPool(std::vector<std::string> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ConfigError("term pool must not be empty");
  std::set<std::string_view> seen;
  for (const auto& t : terms_) {
    if (!seen.insert(t).second) throw ConfigError("duplicate term '" + t + "' in term pool");
  }
}

TermPool TermPool::from_topic(const Topic& topic, std::size_t size, bool skip_stopwords) {
  // Count occurrences, remembering first-seen position for tie-breaking.
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto* part : {&topic.title, &topic.description}) {
    for (const auto& t : *part) {
      if (skip_stopwords && is_stopword(t)) continue;
      if (counts[t]++ == 0) order.emplace_back(t, order.size());
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const auto& a, const auto& b) { return counts[a.first] > counts[b.first]; });
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < order.size() && i < size; ++i) terms.push_back(order[i].first);
  return TermPool(std::move(terms));
}

std::optional<Query> try_reformulate(Strategy strategy, const TermPool& pool, std::size_t step) {
  if (step == 0) throw ContractViolation("reformulation steps are 1-based");
  const auto& t = pool.terms();
  // Terms are 1-based in the strategy listings; at(i) is t_i.
  auto need = [&](std::size_t highest) { return highest <= t.size(); };
  auto at = [&](std::size_t i) { return t[i - 1]; };
  switch (strategy) {
    case Strategy::S1:
      if (!need(step)) return std::nullopt;
      return Query{at(step)};
    case Strategy::S2:
      if (!need(step + 1)) return std::nullopt;
      return Query{at(1), at(step + 1)};
    case Strategy::S3:
      if (!need(step + 2)) return std::nullopt;
      return Query{at(1), at(2), at(step + 2)};
    case Strategy::S4:
    case Strategy::S5: {
      const std::size_t len = strategy == Strategy::S4 ? step : step + 1;
      if (!need(len)) return std::nullopt;
      return Query(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(len));
    }
  }
  return std::nullopt;
}

Query reformulate(Strategy strategy, const TermPool& pool, std::size_t step) {
  auto q = try_reformulate(strategy, pool, step);
  if (!q) throw StrategyExhausted("term pool exhausted at step " + std::to_string(step));
  return std::move(*q);
}

double match_prob(const Query& q, const Document& d, const MatchKnowledge& knowledge) {
  const double eps = knowledge.epsilon;
  if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("match epsilon must lie in (0, 0.5)");
  const auto tokens = d.tokens();
  std::optional<LanguageModel> known;
  if (!knowledge.full) {
    if (tokens.empty() && (knowledge.background == nullptr || knowledge.background->empty())) {
      known.emplace();
    } else if (knowledge.background != nullptr && !knowledge.background->empty()) {
      known = build_lm(tokens, Smoothing::jelinek_mercer(knowledge.lambda), knowledge.background);
    } else {
      known = build_lm(tokens);
    }
  }
  double p = 1.0;
  for (const auto& t : q) {
    double m;
    if (knowledge.full) {
      m = std::find(tokens.begin(), tokens.end(), t) != tokens.end() ? 1.0 - eps : eps;
    } else {
      m = std::clamp(known->prob(t), eps, 1.0 - eps);
    }
    p *= m;
  }
  return p;
}

PreSelection pre_select_query(std::span<const Query> candidates, std::span<const Document* const> relevant,
                              std::span<const Document* const> nonrelevant, const PreParams& params,
                              const MatchKnowledge& knowledge) {
  if (candidates.empty()) throw ContractViolation("query selection needs at least one candidate");
  if (params.alpha < 0.0 || params.alpha > 1.0) throw ConfigError("alpha must lie in [0,1]");
  if (params.effort_weight < 0.0) throw ConfigError("effort weight must be non-negative");

  PreSelection sel;
  sel.scores.reserve(candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Query& q = candidates[i];
    PreScore s{0.0, 0.0, params.cost_per_word * static_cast<double>(q.size()), 0.0};
    for (const auto* d : relevant) s.log_recall += std::log(match_prob(q, *d, knowledge));
    for (const auto* d : nonrelevant) s.log_precision += std::log1p(-match_prob(q, *d, knowledge));
    s.score = params.alpha * s.log_recall + (1.0 - params.alpha) * s.log_precision - params.effort_weight * s.effort;
    sel.scores.push_back(s);
    if (s.score > sel.scores[best].score) best = i;
  }
  sel.index = best;
  sel.query = candidates[best];
  return sel;
}

}  // namespace usersim::querysim
