#include <array>

#include "usersim/bench.hpp"
#include "usersim/detail/overloaded.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

namespace {

constexpr std::array<std::string_view, 8> kMetrics = {"gain",   "cost",   "utility",  "relevant_found",
                                                      "queries", "clicks", "snippets", "sdcg"};

// Examined grades per query, in rank order.
std::vector<measures::Ranking> examined_rankings(const session::InteractionLog& log) {
  std::vector<measures::Ranking> out;
  for (const auto& e : log.events) {
    if (std::holds_alternative<session::event::QueryIssued>(e.payload)) out.emplace_back();
    if (const auto* s = std::get_if<session::event::SnippetExamined>(&e.payload)) out.back().push_back(s->grade);
  }
  return out;
}

}  // namespace

bool known_metric(std::string_view metric) {
  for (auto m : kMetrics) {
    if (m == metric) return true;
  }
  return false;
}

double log_metric(std::string_view metric, const session::InteractionLog& log, const QrelsTable& qrels,
                  const measures::MetricParams& params) {
  if (metric == "gain" || metric == "cost" || metric == "utility") {
    const auto rc = measures::session_reward_cost(log, {0.0, 1.0, 2.0, 3.0}, params.tau);
    return metric == "gain" ? rc.reward : metric == "cost" ? rc.cost : rc.utility;
  }
  if (metric == "sdcg") return measures::sdcg(examined_rankings(log), params.b, params.bq, params.k);
  const auto s = session::log_summary(log, qrels);
  if (metric == "relevant_found") return static_cast<double>(s.relevant_found);
  if (metric == "queries") return static_cast<double>(s.queries);
  if (metric == "clicks") return static_cast<double>(s.clicks);
  if (metric == "snippets") return static_cast<double>(s.snippets_examined);
  throw ConfigError("unknown metric '" + std::string(metric) + "'");
}

}  // namespace usersim::bench
