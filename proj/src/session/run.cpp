#include <algorithm>
#include <cmath>
#include <optional>

#include "usersim/detail/overloaded.hpp"
#include "usersim/error.hpp"
#include "usersim/session.hpp"

namespace usersim::session {

using detail::Overloaded;

void update_knowledge(SessionState& state, const Document& doc) { state.knowledge.add_relevant(doc); }

behavior::KnowledgeState initial_knowledge(const Topic& topic, const engine::Index& index,
                                           const UserProfile& profile) {
  TokenSeq topic_terms = topic.title;
  topic_terms.insert(topic_terms.end(), topic.description.begin(), topic.description.end());
  auto coll = index.collection_ptr();
  std::shared_ptr<const LanguageModel> coll_lm(coll, &coll->lm());
  LanguageModel background;
  if (!coll->empty()) background = behavior::expand_background(topic_terms, *coll, profile.background_terms);
  return behavior::KnowledgeState(build_lm(topic_terms), std::move(background), std::move(coll_lm),
                                  profile.relevance);
}

namespace {

bool needs_relevance_model(const UserProfile& p) {
  return std::holds_alternative<behavior::AttractivenessClick>(p.click) || behavior::needs_lm_score(p.judge) ||
         (p.snippets == engine::SnippetMode::Textual && !p.scent.always);
}

/// Textual SERPs carry no grades, so scent is the share of top snippets the
/// user's relevance model scores above the collection.
double textual_scent(const engine::Serp& serp, const behavior::KnowledgeState& k, std::size_t depth) {
  const std::size_t n = std::min(depth, serp.results.size());
  if (n == 0) return 0.0;
  std::size_t good = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto text = serp.results[i].text();
    if (!text.empty() && behavior::relevance_score(text, k.relevance_model(), *k.collection()) >= 0.0) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(n);
}

class QueryGenerator {
 public:
  QueryGenerator(const UserProfile& profile, const Topic& topic, const Collection& coll,
                 std::vector<const Document*> relevant, std::vector<const Document*> nonrelevant, Rng& rng)
      : profile_(profile),
        topic_(topic),
        coll_(coll),
        relevant_(std::move(relevant)),
        nonrelevant_(std::move(nonrelevant)) {
    std::visit(Overloaded{
                   [&](const KnownItemQueries& q) {
                     if (coll.empty()) throw ContractViolation("known-item sessions need a non-empty collection");
                     const auto pick = querysim::gen_known_item(coll, q.spec, rng);
                     target_ = coll.find(pick.target);
                     first_ = pick.query;
                   },
                   [&](const StrategyQueries& q) { pool_.emplace(querysim::TermPool::from_topic(topic, q.pool_size)); },
                   [&](const ControlledQueries& q) {
                     controlled_ = querysim::controlled_sequence(relevant_, coll.lm(), q.type, q.threshold);
                   },
                   [](const auto&) {},
               },
               profile.query);
  }

  const Document* target() const { return target_; }

  /// Query number `j` (1-based), or nothing when the user runs out of ideas.
  std::optional<Query> next(std::size_t j, const querysim::SessionContext& ctx, Rng& rng) {
    return std::visit(
        Overloaded{
            [&](const KnownItemQueries& q) -> std::optional<Query> {
              if (j == 1) return first_;
              return querysim::gen_known_item_for(coll_, *target_, q.spec, rng);
            },
            [&](const AdhocQueries& q) -> std::optional<Query> {
              return querysim::gen_adhoc(topic_, relevant_, coll_.lm(), q.spec, rng, q.spec.dynamic ? &ctx : nullptr);
            },
            [&](const StrategyQueries& q) { return querysim::try_reformulate(q.strategy, *pool_, j); },
            [&](const ControlledQueries&) -> std::optional<Query> {
              if (j > controlled_.size()) return std::nullopt;
              return controlled_[j - 1];
            },
            [&](const PreQueries& q) -> std::optional<Query> {
              const auto dist = querysim::adhoc_distribution(topic_, relevant_, coll_.lm(), q.sampler,
                                                             q.sampler.dynamic ? &ctx : nullptr);
              std::vector<Query> cands;
              for (std::size_t c = 0; c < std::max<std::size_t>(q.candidates, 1); ++c) {
                cands.push_back(querysim::sample_terms(dist, q.sampler.length, rng));
              }
              std::vector<const Document*> sample;
              std::sample(nonrelevant_.begin(), nonrelevant_.end(), std::back_inserter(sample),
                          q.params.nonrel_sample, rng);
              auto knowledge = q.knowledge;
              if (!knowledge.full && knowledge.background == nullptr) knowledge.background = &coll_.lm();
              return querysim::pre_select_query(cands, relevant_, sample, q.params, knowledge).query;
            },
        },
        profile_.query);
  }

 private:
  const UserProfile& profile_;
  const Topic& topic_;
  const Collection& coll_;
  std::vector<const Document*> relevant_;
  std::vector<const Document*> nonrelevant_;
  const Document* target_ = nullptr;
  Query first_;
  std::optional<querysim::TermPool> pool_;
  std::vector<Query> controlled_;
};

}  // namespace

InteractionLog run_session(const UserProfile& profile, const Topic& topic, const SystemUnderTest& system,
                           const QrelsTable& qrels, double budget, Rng& rng) {
  if (system.index == nullptr) throw ContractViolation("system has no index");
  const engine::Index& index = *system.index;
  const Collection& coll = index.collection();

  InteractionLog log;
  double clock = 0.0;
  auto emit = [&](Payload p) {
    clock += event_cost(profile.cost, p);
    log.events.push_back({clock, std::move(p)});
  };
  auto over_budget = [&] { return clock >= budget; };

  if (!(budget > 0.0)) {
    emit(event::SessionStart{topic.id, false});
    emit(event::SessionEnd{"budget"});
    return log;
  }

  std::vector<const Document*> relevant;
  std::vector<const Document*> nonrelevant;
  const bool known_item = std::holds_alternative<KnownItemQueries>(profile.query);
  if (!known_item) {
    for (const auto& d : coll.documents()) {
      (qrels.grade(topic.id, d.id) >= 1 ? relevant : nonrelevant).push_back(&d);
    }
  }
  QueryGenerator queries(profile, topic, coll, relevant, nonrelevant, rng);
  const Document* target = queries.target();
  auto grade_of = [&](const std::string& doc) -> int {
    if (known_item) return target != nullptr && doc == target->id ? 1 : 0;
    return qrels.grade(topic.id, doc);
  };

  SessionState state;
  state.topic = &topic;
  if (needs_relevance_model(profile)) state.knowledge = initial_knowledge(topic, index, profile);

  engine::SnippetOptions snippet_opts{profile.snippet_window, profile.snippets, {}};
  if (profile.snippets == engine::SnippetMode::Perfect) snippet_opts.grade_of = grade_of;

  querysim::SessionContext context;

  emit(event::SessionStart{topic.id, true});
  auto end_for_budget = [&](bool in_query) {
    if (in_query) emit(event::StopQuery{"budget"});
    emit(event::SessionEnd{"budget"});
  };
  if (over_budget()) {
    end_for_budget(false);
    return log;
  }

  for (std::size_t j = 1;; ++j) {
    if (j > profile.query_limit) {
      emit(event::SessionEnd{"query_limit"});
      break;
    }
    auto query = queries.next(j, context, rng);
    if (!query) {
      emit(event::SessionEnd{behavior::session_continue(profile.stop.session, state.counters, true).reason});
      break;
    }
    state.query_index = j;
    emit(event::QueryIssued{*query});
    ++state.counters.queries;
    if (over_budget()) {
      end_for_budget(true);
      return log;
    }

    const auto serp = engine::search(index, *query, system.scorer, system.k, snippet_opts);
    const double scent = profile.scent.always ? 1.0
                         : profile.snippets == engine::SnippetMode::Perfect
                             ? behavior::serp_scent(serp, profile.scent.depth)
                             : textual_scent(serp, state.knowledge, profile.scent.depth);
    if (!behavior::serp_entry_decision(profile.scent, scent, rng)) {
      emit(event::SerpSkipped{});
      emit(event::StopQuery{"serp_skipped"});
    } else {
      emit(event::SerpShown{serp.results.size()});
      const double issued_at = clock;
      state.query = {};
      behavior::BrowseState browse;
      std::string reason;
      for (std::size_t rank = 1;; ++rank) {
        if (over_budget()) {
          end_for_budget(true);
          return log;
        }
        if (rank > serp.results.size()) {
          reason = "end_of_serp";
          break;
        }
        if (!behavior::examine_next(profile.scan, rank, browse, rng)) {
          reason = "scan";
          break;
        }
        const auto& snippet = serp.results[rank - 1];
        const Document& doc = *coll.find(snippet.doc_id);
        const int truth = grade_of(doc.id);
        state.serp_position = rank;
        emit(event::SnippetExamined{rank, doc.id, truth});

        bool judged_relevant = false;
        double discounted = 0.0;
        if (bernoulli(rng, behavior::click_prob(profile.click, snippet, state.knowledge))) {
          browse.clicked = true;
          ++state.query.clicked;
          emit(event::Click{rank, doc.id});
          const double p_rel =
              behavior::needs_lm_score(profile.judge)
                  ? behavior::judge_prob(profile.judge,
                                         behavior::LmScore{behavior::relevance_score(
                                             doc, state.knowledge.relevance_model(), *state.knowledge.collection())})
                  : behavior::judge_prob(profile.judge, behavior::Grade{truth});
          judged_relevant = bernoulli(rng, p_rel);
          emit(event::DocJudged{doc.id, judged_relevant, truth, doc.length()});
          if (judged_relevant) {
            if (state.knowledge.has_relevance_model()) update_knowledge(state, doc);
            state.gain += truth;
            discounted = truth / std::log2(static_cast<double>(rank) + 1.0);
          }
        }
        state.cost = clock;
        state.query.elapsed = clock - issued_at;
        state.query.record(judged_relevant, discounted);
        ++(judged_relevant ? state.counters.relevant : state.counters.nonrelevant);

        const auto text = snippet.text();
        const auto decision = behavior::stop_decision(profile.stop.query, state.query, text);
        state.query.seen_snippets.push_back(text);
        context.seen.push_back(text);
        if (state.knowledge.has_relevance_model()) state.knowledge.add_seen_snippet(text);
        if (decision.stop) {
          reason = decision.reason;
          break;
        }
      }
      emit(event::StopQuery{reason});
    }

    state.counters.elapsed = clock;
    if (over_budget()) {
      end_for_budget(false);
      break;
    }
    const auto next = behavior::session_continue(profile.stop.session, state.counters);
    if (next.abandon) {
      emit(event::SessionEnd{next.reason});
      break;
    }
  }
  return log;
}

}  // namespace usersim::session
