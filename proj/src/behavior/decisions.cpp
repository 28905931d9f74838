#include <algorithm>
#include <cmath>

#include "usersim/behavior.hpp"
#include "usersim/detail/overloaded.hpp"
#include "usersim/error.hpp"

namespace usersim::behavior {

namespace {

using detail::Overloaded;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
}

int clamp_grade(int g) { return std::clamp(g, 0, 3); }

}  // namespace

bool examine_next(const ScanModel& scan, std::size_t rank, BrowseState& state, Rng& rng) {
  if (rank != state.next_rank) {
    throw ContractViolation("snippets must be examined in rank order: expected rank " +
                            std::to_string(state.next_rank) + ", got " + std::to_string(rank));
  }
  ++state.next_rank;
  if (state.stopped) return false;

  const bool go = std::visit(Overloaded{
                                 [&](const FixedDepthScan& s) { return rank <= s.depth; },
                                 [&](const PersistentScan& s) {
                                   check_probability(s.p, "persistence");
                                   return rank == 1 || bernoulli(rng, s.p);
                                 },
                                 [&](const CascadeScan&) { return !state.clicked; },
                             },
                             scan);
  if (!go) state.stopped = true;
  return go;
}

GradeClick maxwell2015_clicks() { return GradeClick{{0.21, 0.36, 0.36, 0.36}}; }
GradeClick baskaya2013_clicks() { return GradeClick{{0.27, 0.27, 0.34, 0.61}}; }
StochasticJudge maxwell2015_judgments() { return StochasticJudge{{0.53, 0.71, 0.71, 0.71}}; }
StochasticJudge baskaya2013_judgments() { return StochasticJudge{{0.20, 0.88, 0.95, 0.97}}; }

double click_prob(const ClickModel& model, const engine::Snippet& snippet, const KnowledgeState& knowledge) {
  auto need_grade = [&]() {
    if (!snippet.grade) throw ConfigError("click model needs snippet grades (perfect snippet mode)");
    return clamp_grade(*snippet.grade);
  };
  return std::visit(Overloaded{
                        [&](const PerfectSnippetClick&) { return need_grade() >= 1 ? 1.0 : 0.0; },
                        [&](const GradeClick& m) {
                          const double p = m.by_grade[static_cast<std::size_t>(need_grade())];
                          check_probability(p, "click probability");
                          return p;
                        },
                        [&](const PositionClick& m) {
                          if (m.by_rank.empty()) return 1.0 / std::log2(static_cast<double>(snippet.rank) + 1.0);
                          const double p = m.by_rank[std::min(snippet.rank, m.by_rank.size()) - 1];
                          check_probability(p, "click probability");
                          return p;
                        },
                        [&](const AttractivenessClick& m) {
                          const auto text = snippet.text();
                          if (text.empty()) return 0.0;
                          const double s =
                              relevance_score(text, knowledge.relevance_model(), *knowledge.collection());
                          return s >= m.threshold ? 1.0 : 0.0;
                        },
                    },
                    model);
}

double judge_prob(const JudgeModel& model, Grade grade) {
  return std::visit(Overloaded{
                        [&](const ThresholdJudge& m) { return grade.value >= m.min_grade ? 1.0 : 0.0; },
                        [&](const StochasticJudge& m) {
                          const double p = m.by_grade[static_cast<std::size_t>(clamp_grade(grade.value))];
                          check_probability(p, "judgment probability");
                          return p;
                        },
                        [&](const LmJudge&) -> double {
                          throw ConfigError("language-model judge takes a relevance score, not a grade");
                        },
                    },
                    model);
}

double judge_prob(const JudgeModel& model, LmScore score) {
  if (const auto* m = std::get_if<LmJudge>(&model)) return score.value >= m->threshold ? 1.0 : 0.0;
  throw ConfigError("grade-based judge takes a relevance grade, not a score");
}

double ScentModel::enter_probability(double scent) const {
  if (always) return 1.0;
  return std::clamp(base + slope * scent, 0.0, 1.0);
}

double serp_scent(const engine::Serp& serp, std::size_t depth) {
  const std::size_t n = std::min(depth, serp.results.size());
  if (n == 0) return 0.0;
  std::size_t good = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (serp.results[i].grade.value_or(0) >= 1) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(n);
}

bool serp_entry_decision(const ScentModel& scent, double scent_value, Rng& rng) {
  if (scent.always) return true;
  return bernoulli(rng, scent.enter_probability(scent_value));
}

bool serp_entry_decision(const ScentModel& scent, const engine::Serp& serp, Rng& rng) {
  if (scent.always) return true;
  return serp_entry_decision(scent, serp_scent(serp, scent.depth), rng);
}

double action_cost(const CostModel& cost, Action action, std::size_t words) {
  switch (action) {
    case Action::TopicExamination:
      return cost.topic;
    case Action::Query:
      return cost.query;
    case Action::SerpEntry:
      return cost.serp_entry;
    case Action::Snippet:
      return cost.snippet;
    case Action::DocumentRead:
      return cost.read_rate * static_cast<double>(words) + cost.judge;
    case Action::Click:
    case Action::Stop:
      return 0.0;
  }
  return 0.0;
}

}  // namespace usersim::behavior
