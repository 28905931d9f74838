#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "usersim/behavior.hpp"
#include "usersim/detail/overloaded.hpp"
#include "usersim/error.hpp"

namespace usersim::behavior {

using detail::Overloaded;

void QueryState::record(bool judged_relevant, double discounted_gain) {
  ++examined;
  if (judged_relevant) {
    ++relevant;
    nonrelevant_streak = 0;
    last_relevant_elapsed = elapsed;
  } else {
    ++nonrelevant;
    ++nonrelevant_streak;
  }
  gain_trace.push_back(discounted_gain);
}

double term_overlap(const TokenSeq& a, const TokenSeq& b) {
  const std::set<std::string_view> sa(a.begin(), a.end());
  const std::set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (auto t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double snippet_divergence(const TokenSeq& current, const TokenSeq& seen) {
  if (current.empty()) return 0.0;
  const LanguageModel p = build_lm(current);
  if (seen.empty()) return std::numeric_limits<double>::infinity();
  const LanguageModel s = build_lm(seen);
  const std::pair<double, const LanguageModel*> parts[] = {{0.9, &s}, {0.1, &p}};
  return kl_divergence(p, mixture(parts));
}

StopDecision stop_decision(const QueryStopPolicy& policy, const QueryState& st, const TokenSeq& current) {
  if (st.nonrelevant_streak > st.nonrelevant) throw ContractViolation("non-relevant streak exceeds total");
  return std::visit(
      Overloaded{
          [&](const stop::FixedDepth& p) {
            return st.examined >= p.depth ? StopDecision::stop_query("fixed_depth") : StopDecision::keep_going();
          },
          [&](const stop::TotalNonRelevant& p) {
            return st.nonrelevant >= p.limit ? StopDecision::stop_query("total_nonrelevant")
                                             : StopDecision::keep_going();
          },
          [&](const stop::ContiguousNonRelevant& p) {
            return st.nonrelevant_streak >= p.limit ? StopDecision::stop_query("contiguous_nonrelevant")
                                                    : StopDecision::keep_going();
          },
          [&](const stop::Satisfaction& p) {
            return st.relevant >= p.target ? StopDecision::stop_query("satisfaction") : StopDecision::keep_going();
          },
          [&](const stop::SatisfactionOrFrustration& p) {
            if (st.relevant >= p.target) return StopDecision::stop_query("satisfaction");
            if (st.nonrelevant >= p.limit) return StopDecision::stop_query("total_nonrelevant");
            return StopDecision::keep_going();
          },
          [&](const stop::Difference& p) {
            for (const auto& seen : st.seen_snippets) {
              const bool too_similar = p.metric == SimilarityMetric::Overlap
                                           ? term_overlap(current, seen) >= p.threshold
                                           : snippet_divergence(current, seen) <= p.threshold;
              if (too_similar) return StopDecision::stop_query("difference");
            }
            return StopDecision::keep_going();
          },
          [&](const stop::RateOfGain& p) {
            if (st.examined < p.min_docs || st.elapsed <= 0.0) return StopDecision::keep_going();
            const double gain = std::accumulate(st.gain_trace.begin(), st.gain_trace.end(), 0.0);
            return gain / st.elapsed < p.threshold ? StopDecision::stop_query("rate_of_gain")
                                                   : StopDecision::keep_going();
          },
          [&](const stop::TimeOnSerp& p) {
            return st.elapsed >= p.seconds ? StopDecision::stop_query("time") : StopDecision::keep_going();
          },
          [&](const stop::TimeSinceRelevant& p) {
            return st.elapsed - st.last_relevant_elapsed >= p.seconds ? StopDecision::stop_query("time_since_relevant")
                                                                      : StopDecision::keep_going();
          },
      },
      policy);
}

SessionDecision session_continue(const SessionStopPolicy& policy, const SessionCounters& c, bool strategy_exhausted) {
  if (strategy_exhausted) return {true, "queries_exhausted"};
  return std::visit(Overloaded{
                        [&](const stop::MaxQueries& p) {
                          return c.queries >= p.limit ? SessionDecision{true, "max_queries"} : SessionDecision{};
                        },
                        [&](const stop::SessionSatisfaction& p) {
                          return c.relevant >= p.target ? SessionDecision{true, "satisfied"} : SessionDecision{};
                        },
                        [&](const stop::SessionFrustration& p) {
                          return c.nonrelevant >= p.limit ? SessionDecision{true, "frustrated"} : SessionDecision{};
                        },
                        [&](const stop::TimeBudget& p) {
                          return c.elapsed >= p.seconds ? SessionDecision{true, "time_budget"} : SessionDecision{};
                        },
                    },
                    policy);
}

}  // namespace usersim::behavior
