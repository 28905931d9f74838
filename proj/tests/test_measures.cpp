#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "usersim/error.hpp"
#include "usersim/measures.hpp"

using namespace usersim;
using namespace usersim::measures;
using Catch::Matchers::WithinAbs;

namespace {

MetricParams at(std::size_t k) {
  MetricParams p;
  p.k = k;
  return p;
}

Ranking random_ranking(Rng& rng, std::size_t max_len) {
  Ranking r(1 + rng() % max_len);
  for (auto& g : r) g = static_cast<int>(rng() % 4);
  return r;
}

}  // namespace

TEST_CASE("precision") {
  CHECK_THAT(classic(Classic::PrecisionAtK, {1, 0, 1}, at(3)), WithinAbs(2.0 / 3.0, 1e-15));
  // Short rankings count the missing ranks as misses.
  CHECK_THAT(classic(Classic::PrecisionAtK, {1, 0, 1}, at(10)), WithinAbs(0.2, 1e-15));
  CHECK(classic(Classic::PrecisionAtK, {}, at(5)) == 0.0);
  CHECK_THROWS_AS(classic(Classic::PrecisionAtK, {1}, at(0)), ContractViolation);
}

TEST_CASE("average precision") {
  CHECK_THAT(classic(Classic::AveragePrecision, {1, 0, 1}, at(10)), WithinAbs((1.0 + 2.0 / 3.0) / 2.0, 1e-15));
  // Relevant documents the ranking missed still count in the denominator.
  CHECK_THAT(classic(Classic::AveragePrecision, {0, 1}, at(10), Ranking{2, 1, 0}), WithinAbs(0.25, 1e-15));
  CHECK(classic(Classic::AveragePrecision, {0, 0}, at(10)) == 0.0);
}

TEST_CASE("discounted cumulative gain") {
  CHECK_THAT(dcg({3, 2}, 2), WithinAbs(3.0 + 2.0 / std::log2(3.0), 1e-12));
  CHECK_THAT(dcg({3, 2, 1}, 2), WithinAbs(3.0 + 2.0 / std::log2(3.0), 1e-12));
  CHECK_THAT(dcg({0, 1}, 5, 10.0), WithinAbs(1.0 / std::log10(3.0), 1e-12));
  CHECK_THAT(classic(Classic::NdcgAtK, {3, 2, 1}, at(3)), WithinAbs(1.0, 1e-15));
  CHECK(classic(Classic::NdcgAtK, {1, 2, 3}, at(3)) < 1.0);
  CHECK(classic(Classic::NdcgAtK, {0, 0}, at(3)) == 0.0);
  CHECK(parse_classic("NDCG@k") == Classic::NdcgAtK);
  CHECK_THROWS_AS(parse_classic("MRR"), ConfigError);
}

TEST_CASE("rank-biased precision") {
  CHECK_THAT(rbp({1, 1, 0}, 0.8, 1), WithinAbs(0.36, 1e-12));
  CHECK_THAT(rbp({3, 3, 0}, 0.8, 3), WithinAbs(0.36, 1e-12));
  CHECK_THAT(rbp({1}, 0.5, 2), WithinAbs(0.25, 1e-15));
  CHECK_THROWS_AS(rbp({1}, 1.0, 3), ContractViolation);
  CHECK_THROWS_AS(rbp({4}, 0.5, 3), ContractViolation);
}

TEST_CASE("expected reciprocal rank") {
  CHECK_THAT(err({3}, 3), WithinAbs(7.0 / 8.0, 1e-15));
  CHECK_THAT(err({0, 3}, 3), WithinAbs(7.0 / 16.0, 1e-15));
  // R1 = 1/8, R2 = 7/8: 1/8 + (7/8)(7/8)/2
  CHECK_THAT(err({1, 3}, 3), WithinAbs(0.125 + 49.0 / 128.0, 1e-15));
  CHECK(err({}, 3) == 0.0);
}

TEST_CASE("C/W/L framework") {
  SECTION("a user who always stops at rank 1") {
    const auto r = cwl({2, 3}, CwlModel::table({0.0}));
    REQUIRE(r.W.size() == 1);
    CHECK(r.W[0] == 1.0);
    CHECK(r.L[0] == 1.0);
    CHECK_THAT(r.expected_rate_of_gain, WithinAbs(2.0 / 3.0, 1e-15));
  }
  SECTION("constant continuation reproduces RBP") {
    for (double p : {0.2, 0.5, 0.8}) {
      const auto r = cwl({3, 0, 1, 2}, CwlModel::constant(p));
      CHECK_THAT(r.expected_rate_of_gain, WithinAbs(rbp({3, 0, 1, 2}, p, 3), 1e-9));
    }
  }
  SECTION("weights are distributions") {
    const auto r = cwl({1, 2}, CwlModel::table({0.9, 0.5, 0.3}));
    double w = 0.0, l = 0.0;
    for (double x : r.W) w += x;
    for (double x : r.L) l += x;
    CHECK_THAT(w, WithinAbs(1.0, 1e-9));
    CHECK_THAT(l, WithinAbs(1.0, 1e-9));
  }
  SECTION("never stopping is an error") {
    auto m = CwlModel::constant(1.0);
    m.max_depth = 1000;
    CHECK_THROWS_AS(cwl({1}, m), DomainError);
    CHECK_THROWS_AS(cwl({1}, CwlModel::constant(1.5)), ContractViolation);
  }
}

TEST_CASE("session DCG") {
  CHECK_THAT(sdcg({{3}, {2}}, 2.0, 4.0, 10), WithinAbs(3.0 + 2.0 / 1.5, 1e-12));
  CHECK_THAT(sdcg({{3, 2}}, 2.0, 4.0, 10), WithinAbs(dcg({3, 2}, 10), 1e-15));
  CHECK_THROWS_AS(sdcg({}, 2.0, 4.0, 10), ContractViolation);
}

TEST_CASE("session reward and cost") {
  using namespace session;
  InteractionLog log;
  log.events = {{5, event::SessionStart{"T"}},          {13, event::QueryIssued{{"a"}}},
                {14, event::SerpShown{2}},              {15.5, event::SnippetExamined{1, "d1", 2}},
                {15.5, event::Click{1, "d1"}},          {30, event::DocJudged{"d1", true, 2, 10}},
                {31.5, event::SnippetExamined{2, "d2", 3}}, {31.5, event::Click{2, "d2"}},
                {50, event::DocJudged{"d2", true, 3, 10}},  {60, event::StopQuery{"x"}},
                {60, event::SessionEnd{"y"}}};
  const auto rc = session_reward_cost(log, {0, 1, 2, 3}, 0.01);
  CHECK(rc.reward == 5.0);
  CHECK(rc.cost == 60.0);
  CHECK_THAT(rc.utility, WithinAbs(4.4, 1e-12));

  const behavior::CostModel costs;
  const auto recosted = session_reward_cost(log, {0, 1, 2, 3}, 0.01, &costs);
  double expected = 0.0;
  for (const auto& e : log.events) expected += event_cost(costs, e.payload);
  CHECK_THAT(recosted.cost, WithinAbs(expected, 1e-12));
}

TEST_CASE("Monte-Carlo expectation") {
  auto sample = [](Rng& rng) { return uniform01(rng); };
  const auto e = expectation(sample, 20000, 7);
  CHECK_THAT(e.mean, WithinAbs(0.5, 4 * e.std_error));
  CHECK_THAT(e.std_error, WithinAbs(std::sqrt(1.0 / 12.0 / 20000.0), 1e-4));
  const auto threaded = expectation(sample, 20000, 7, 4);
  CHECK(threaded.mean == e.mean);
  CHECK(threaded.std_error == e.std_error);
  CHECK_THROWS_AS(expectation(sample, 1, 7), ContractViolation);
}

TEST_CASE("raising a grade never lowers a metric") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    auto r = random_ranking(rng, 10);
    const std::size_t i = rng() % r.size();
    if (r[i] == 3) continue;
    auto better = r;
    ++better[i];
    CHECK(dcg(better, 10) >= dcg(r, 10));
    CHECK(rbp(better, 0.8, 3) >= rbp(r, 0.8, 3));
    CHECK(err(better, 3) >= err(r, 3) - 1e-15);
    CHECK(classic(Classic::PrecisionAtK, better, at(10)) >= classic(Classic::PrecisionAtK, r, at(10)));
  }
}

TEST_CASE("metrics stay in their ranges") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto r = random_ranking(rng, 12);
    for (auto m : {Classic::PrecisionAtK, Classic::AveragePrecision, Classic::NdcgAtK}) {
      const double v = classic(m, r, at(10));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(rbp(r, 0.8, 3) <= 1.0);
    CHECK(err(r, 3) <= 1.0);
  }
}
