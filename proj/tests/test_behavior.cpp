#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "usersim/behavior.hpp"
#include "usersim/error.hpp"

using namespace usersim;
using namespace usersim::behavior;
using Catch::Matchers::WithinAbs;

namespace {

engine::Snippet graded(int grade, std::size_t rank = 1) {
  engine::Snippet s;
  s.doc_id = "d";
  s.rank = rank;
  s.grade = grade;
  return s;
}

engine::Serp serp_with(std::vector<int> grades) {
  engine::Serp serp;
  for (std::size_t i = 0; i < grades.size(); ++i) serp.results.push_back(graded(grades[i], i + 1));
  return serp;
}

}  // namespace

TEST_CASE("fixed-depth scanning") {
  Rng rng(1);
  BrowseState st;
  const ScanModel scan = FixedDepthScan{3};
  for (std::size_t r = 1; r <= 3; ++r) CHECK(examine_next(scan, r, st, rng));
  CHECK_FALSE(examine_next(scan, 4, st, rng));
  CHECK_FALSE(examine_next(scan, 5, st, rng));
}

TEST_CASE("ranks must arrive in order") {
  Rng rng(1);
  BrowseState st;
  CHECK_THROWS_AS(examine_next(FixedDepthScan{3}, 2, st, rng), ContractViolation);
}

TEST_CASE("cascade stops below a click") {
  Rng rng(1);
  BrowseState st;
  CHECK(examine_next(CascadeScan{}, 1, st, rng));
  CHECK(examine_next(CascadeScan{}, 2, st, rng));
  st.clicked = true;
  CHECK_FALSE(examine_next(CascadeScan{}, 3, st, rng));
}

TEST_CASE("persistent scanning examines rank i with probability p^(i-1)") {
  Rng rng(2);
  const double p = 0.7;
  const int trials = 100000;
  std::vector<double> seen(8, 0.0);
  for (int t = 0; t < trials; ++t) {
    BrowseState st;
    for (std::size_t r = 1; r <= seen.size(); ++r) {
      if (examine_next(PersistentScan{p}, r, st, rng)) seen[r - 1] += 1.0 / trials;
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK_THAT(seen[i], WithinAbs(std::pow(p, double(i)), 0.01));
}

TEST_CASE("click tables") {
  const KnowledgeState none;
  CHECK(click_prob(maxwell2015_clicks(), graded(0), none) == 0.21);
  for (int g : {1, 2, 3}) CHECK(click_prob(maxwell2015_clicks(), graded(g), none) == 0.36);
  CHECK(click_prob(baskaya2013_clicks(), graded(0), none) == 0.27);
  CHECK(click_prob(baskaya2013_clicks(), graded(1), none) == 0.27);
  CHECK(click_prob(baskaya2013_clicks(), graded(2), none) == 0.34);
  CHECK(click_prob(baskaya2013_clicks(), graded(3), none) == 0.61);
  CHECK(click_prob(PerfectSnippetClick{}, graded(0), none) == 0.0);
  CHECK(click_prob(PerfectSnippetClick{}, graded(2), none) == 1.0);
  CHECK(click_prob(PositionClick{}, graded(0, 1), none) == 1.0);
  CHECK_THAT(click_prob(PositionClick{}, graded(0, 3), none), WithinAbs(0.5, 1e-15));
  CHECK(click_prob(PositionClick{{0.5, 0.3}}, graded(0, 5), none) == 0.3);

  engine::Snippet ungraded;
  ungraded.doc_id = "d";
  CHECK_THROWS_AS(click_prob(baskaya2013_clicks(), ungraded, none), ConfigError);
}

TEST_CASE("judging tables and thresholds") {
  CHECK(judge_prob(maxwell2015_judgments(), Grade{0}) == 0.53);
  for (int g : {1, 2, 3}) CHECK(judge_prob(maxwell2015_judgments(), Grade{g}) == 0.71);
  const double baskaya[] = {0.20, 0.88, 0.95, 0.97};
  for (int g = 0; g <= 3; ++g) CHECK(judge_prob(baskaya2013_judgments(), Grade{g}) == baskaya[g]);
  CHECK(judge_prob(ThresholdJudge{2}, Grade{1}) == 0.0);
  CHECK(judge_prob(ThresholdJudge{2}, Grade{2}) == 1.0);
  CHECK(judge_prob(LmJudge{0.1}, LmScore{0.2}) == 1.0);
  CHECK(judge_prob(LmJudge{0.1}, LmScore{0.0}) == 0.0);
  CHECK_THROWS_AS(judge_prob(LmJudge{0.1}, Grade{1}), ConfigError);
}

TEST_CASE("relevance model mixture") {
  const auto t = LanguageModel::from_weights({{"a", 1.0}});
  const auto rd = LanguageModel::from_weights({{"b", 1.0}});
  const auto b = LanguageModel::from_weights({{"a", 0.5}, {"b", 0.5}});
  const auto c = LanguageModel::from_weights({{"a", 0.25}, {"b", 0.75}});

  SECTION("lambda 0 is the collection") {
    const auto r = build_relevance_model(t, rd, b, c, {1, 1, 1, 0.0});
    CHECK_THAT(r.prob("a"), WithinAbs(0.25, 1e-12));
  }
  SECTION("topic only") {
    const auto r = build_relevance_model(t, rd, b, c, {1, 0, 0, 1.0});
    CHECK_THAT(r.prob("a"), WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.prob("b"), WithinAbs(0.0, 1e-12));
  }
  SECTION("all weights 1, lambda 0.5") {
    // a: 0.5·(1 + 0 + 0.5)/3 + 0.5·0.25; b: 0.5·(0 + 1 + 0.5)/3 + 0.5·0.75
    const auto r = build_relevance_model(t, rd, b, c, {1, 1, 1, 0.5});
    CHECK_THAT(r.prob("a"), WithinAbs(0.375, 1e-12));
    CHECK_THAT(r.prob("b"), WithinAbs(0.625, 1e-12));
    CHECK_THAT(r.total(), WithinAbs(1.0, 1e-9));
  }
  CHECK_THROWS_AS(build_relevance_model(t, rd, b, c, {0, 0, 0, 0.5}), ConfigError);
}

TEST_CASE("normalized log-likelihood scores") {
  const auto c = LanguageModel::from_weights({{"a", 0.25}, {"b", 0.75}});
  CHECK(relevance_score(TokenSeq{"a", "b", "b"}, c, c) == 0.0);
  const auto r = LanguageModel::from_weights({{"a", 0.5}, {"b", 0.5}});
  CHECK_THAT(relevance_score(TokenSeq{"a"}, r, c), WithinAbs(std::log(2.0), 1e-12));
  // Swapping a background term for one the relevance model favours raises the score.
  CHECK(relevance_score(TokenSeq{"a", "a"}, r, c) > relevance_score(TokenSeq{"a", "b"}, r, c));
  CHECK_THROWS_AS(relevance_score(TokenSeq{}, r, c), DomainError);
}

TEST_CASE("background expansion by co-occurrence") {
  auto d = [](std::string id, TokenSeq body) { return Document{std::move(id), {}, std::move(body)}; };
  // "mirror" appears with the topic term in every topic document and nowhere else.
  const auto c = Collection::build({d("1", {"hubble", "mirror", "the"}), d("2", {"hubble", "mirror", "lens"}),
                                    d("3", {"the", "lens"}), d("4", {"the", "cat"})});
  const auto bg = expand_background({"hubble"}, *c, 2);
  const auto ranked = bg.ranked_terms();
  REQUIRE_FALSE(ranked.empty());
  CHECK(ranked.front() == "mirror");
  CHECK_THAT(bg.total(), WithinAbs(1.0, 1e-9));
  const auto fallback = expand_background({"hubble", "hubble", "x"}, *c, 0);
  CHECK_THAT(fallback.prob("hubble"), WithinAbs(2.0 / 3.0, 1e-12));
  const auto lonely = Collection::build({d("1", {"hubble"})});
  CHECK_THAT(expand_background({"hubble"}, *lonely, 3).prob("hubble"), WithinAbs(1.0, 1e-12));
}

TEST_CASE("knowledge pools relevant documents") {
  const auto coll = std::make_shared<const LanguageModel>(LanguageModel::from_weights({{"a", 0.5}, {"b", 0.5}}));
  KnowledgeState k(LanguageModel::from_weights({{"a", 1}}), {}, coll, {});
  k.add_relevant(Document{"d1", {}, {"a", "a", "b"}});
  CHECK_THAT(k.relevant_docs().prob("a"), WithinAbs(2.0 / 3.0, 1e-12));
  k.add_relevant(Document{"d2", {}, {"b"}});
  CHECK_THAT(k.relevant_docs().prob("a"), WithinAbs(0.5, 1e-12));
  CHECK_THAT(k.relevant_docs().prob("b"), WithinAbs(0.5, 1e-12));
  k.add_relevant(Document{"d2", {}, {"b"}});
  CHECK(k.relevant_found() == 2);
  CHECK_THAT(k.relevance_model().total(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("SERP entry") {
  Rng rng(3);
  CHECK(serp_entry_decision(ScentModel::always_enter(), serp_with({0, 0}), rng));
  CHECK(ScentModel::savvy().enter_probability(1.0) == 1.0);
  CHECK(ScentModel::naive().enter_probability(0.0) == 0.9);
  CHECK(ScentModel::naive().enter_probability(1.0) == 0.9);
  CHECK(ScentModel{false, 0.8, 0.5, 5}.enter_probability(1.0) == 1.0);
  CHECK(ScentModel{false, -0.5, 0.1, 5}.enter_probability(1.0) == 0.0);
  CHECK_THAT(serp_scent(serp_with({1, 0, 2, 0, 0, 3}), 5), WithinAbs(0.4, 1e-15));
  int entered = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) entered += serp_entry_decision(ScentModel::average(), 0.5, rng) ? 1 : 0;
  CHECK_THAT(entered / double(n), WithinAbs(0.75, 0.01));
}

TEST_CASE("query-level stopping rules") {
  QueryState st;
  SECTION("frustration fires on the third non-relevant snippet") {
    const QueryStopPolicy p = stop::TotalNonRelevant{3};
    st.record(false, 0);
    st.record(true, 1);
    st.record(false, 0);
    CHECK_FALSE(stop_decision(p, st, {}).stop);
    st.record(false, 0);
    CHECK(stop_decision(p, st, {}).reason == "total_nonrelevant");
  }
  SECTION("satisfaction at the first relevant") {
    st.record(true, 1);
    CHECK(stop_decision(stop::Satisfaction{1}, st, {}).reason == "satisfaction");
  }
  SECTION("fixed depth ignores grades") {
    for (int i = 0; i < 4; ++i) {
      st.record(i % 2 == 0, 1);
      CHECK(stop_decision(stop::FixedDepth{4}, st, {}).stop == (i == 3));
    }
  }
  SECTION("contiguous non-relevant") {
    st.record(false, 0);
    st.record(true, 1);
    st.record(false, 0);
    CHECK_FALSE(stop_decision(stop::ContiguousNonRelevant{2}, st, {}).stop);
    st.record(false, 0);
    CHECK(stop_decision(stop::ContiguousNonRelevant{2}, st, {}).stop);
  }
  SECTION("difference by overlap and by divergence") {
    st.seen_snippets = {{"a", "b", "c"}};
    CHECK(stop_decision(stop::Difference{0.5, SimilarityMetric::Overlap}, st, {"a", "b", "d"}).stop);  // 2/4
    CHECK_FALSE(stop_decision(stop::Difference{0.6, SimilarityMetric::Overlap}, st, {"a", "b", "d"}).stop);
    CHECK(stop_decision(stop::Difference{0.3, SimilarityMetric::Kl}, st, {"a", "b", "c"}).stop);
    CHECK_FALSE(stop_decision(stop::Difference{0.3, SimilarityMetric::Kl}, st, {"x", "y"}).stop);
  }
  SECTION("rate of gain") {
    st.record(true, 1.0);
    st.record(false, 0.0);
    st.elapsed = 20.0;
    CHECK(stop_decision(stop::RateOfGain{0.1, 2}, st, {}).stop);
    CHECK_FALSE(stop_decision(stop::RateOfGain{0.1, 3}, st, {}).stop);
    CHECK_FALSE(stop_decision(stop::RateOfGain{0.04, 2}, st, {}).stop);
  }
  SECTION("time rules") {
    st.elapsed = 5.0;
    st.record(true, 1.0);
    st.elapsed = 30.0;
    CHECK(stop_decision(stop::TimeOnSerp{30.0}, st, {}).stop);
    CHECK_FALSE(stop_decision(stop::TimeSinceRelevant{30.0}, st, {}).stop);
    CHECK(stop_decision(stop::TimeSinceRelevant{25.0}, st, {}).stop);
  }
  SECTION("inconsistent counters") {
    st.nonrelevant_streak = 2;
    CHECK_THROWS_AS(stop_decision(stop::FixedDepth{1}, st, {}), ContractViolation);
  }
}

TEST_CASE("combined stopping fires no later than either rule") {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t ns = 1 + rng() % 4, nf = 1 + rng() % 4;
    QueryState st;
    std::optional<std::size_t> sat, fru, both;
    for (std::size_t i = 1; i <= 30; ++i) {
      st.record(bernoulli(rng, 0.4), 1.0);
      if (!sat && stop_decision(stop::Satisfaction{ns}, st, {}).stop) sat = i;
      if (!fru && stop_decision(stop::TotalNonRelevant{nf}, st, {}).stop) fru = i;
      if (!both && stop_decision(stop::SatisfactionOrFrustration{ns, nf}, st, {}).stop) both = i;
    }
    if (sat) CHECK(*both <= *sat);
    if (fru) CHECK(*both <= *fru);
  }
}

TEST_CASE("session-level decisions") {
  CHECK(session_continue(stop::MaxQueries{5}, {5, 0, 0, 0.0}).abandon);
  CHECK_FALSE(session_continue(stop::MaxQueries{5}, {4, 0, 0, 0.0}).abandon);
  CHECK(session_continue(stop::TimeBudget{60}, {1, 0, 0, 61.0}).abandon);
  CHECK(session_continue(stop::SessionSatisfaction{3}, {2, 3, 0, 10.0}).reason == "satisfied");
  CHECK(session_continue(stop::SessionFrustration{3}, {2, 0, 3, 10.0}).reason == "frustrated");
  CHECK(session_continue(stop::MaxQueries{5}, {1, 0, 0, 0.0}, true).reason == "queries_exhausted");
}

TEST_CASE("action costs") {
  const CostModel cost;
  CHECK(action_cost(cost, Action::DocumentRead, 100) == 9.6);
  CHECK(action_cost(cost, Action::DocumentRead, 0) == 7.8);
  CHECK(action_cost(cost, Action::Query) == cost.query);
  CHECK(action_cost(cost, Action::Snippet) == cost.snippet);
  CHECK(action_cost(cost, Action::Click) == 0.0);
}

TEST_CASE("presets resolve by name") {
  CHECK(std::get<FixedDepthScan>(parse_scan("fixed:3")).depth == 3);
  CHECK(std::holds_alternative<CascadeScan>(parse_scan("cascade")));
  CHECK_THROWS_AS(parse_scan("persistent:1"), ConfigError);
  CHECK(std::get<GradeClick>(parse_click("grade:baskaya2013")).by_grade[3] == 0.61);
  CHECK(std::get<GradeClick>(parse_click("grade:0.1,0.2,0.3,0.4")).by_grade[1] == 0.2);
  CHECK_THROWS_AS(parse_click("grade:nosuch"), ConfigError);
  CHECK(std::get<stop::TotalNonRelevant>(parse_query_stop("frustration:3")).limit == 3);
  CHECK(std::get<stop::Difference>(parse_query_stop("difference:0.4:kl")).metric == SimilarityMetric::Kl);
  CHECK_THROWS_AS(parse_query_stop("frustration:0"), ConfigError);
  CHECK(parse_scent("savvy").base == 0.2);
  CHECK(std::get<stop::MaxQueries>(parse_session_stop("max-queries:5")).limit == 5);
  CHECK_THROWS_AS(parse_session_stop("forever"), ConfigError);
  CHECK(std::get<StochasticJudge>(parse_judge("stochastic:maxwell2015")).by_grade[0] == 0.53);
}
