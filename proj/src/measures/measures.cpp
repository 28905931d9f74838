#include "usersim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "usersim/detail/parallel.hpp"
#include "usersim/error.hpp"

namespace usersim::measures {

namespace {

void check_grades(const Ranking& r, int g_max) {
  if (g_max < 1) throw ContractViolation("g_max must be >= 1");
  for (int g : r) {
    if (g < 0 || g > g_max) throw ContractViolation("grade " + std::to_string(g) + " outside 0..g_max");
  }
}

Ranking sorted_desc(Ranking r) {
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

}  // namespace

Classic parse_classic(std::string_view name) {
  if (name == "P@k" || name == "P") return Classic::PrecisionAtK;
  if (name == "AP") return Classic::AveragePrecision;
  if (name == "DCG@k" || name == "DCG") return Classic::DcgAtK;
  if (name == "NDCG@k" || name == "NDCG") return Classic::NdcgAtK;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

double dcg(const Ranking& ranking, std::size_t k, double base) {
  if (!(base > 1.0)) throw ContractViolation("DCG log base must exceed 1");
  const double lb = std::log(base);
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    s += ranking[i] / (std::log(static_cast<double>(i) + 2.0) / lb);
  }
  return s;
}

double classic(Classic metric, const Ranking& ranking, const MetricParams& params, const std::optional<Ranking>& ideal) {
  if (params.k == 0) throw ContractViolation("k must be >= 1");
  const Ranking& ref = ideal ? *ideal : ranking;
  switch (metric) {
    case Classic::PrecisionAtK: {
      const auto n = std::min(params.k, ranking.size());
      const auto hits = std::count_if(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(n),
                                      [](int g) { return g >= 1; });
      return static_cast<double>(hits) / static_cast<double>(params.k);
    }
    case Classic::AveragePrecision: {
      const auto total = std::count_if(ref.begin(), ref.end(), [](int g) { return g >= 1; });
      if (total == 0) return 0.0;
      double sum = 0.0;
      std::size_t hits = 0;
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i] >= 1) sum += static_cast<double>(++hits) / static_cast<double>(i + 1);
      }
      return sum / static_cast<double>(total);
    }
    case Classic::DcgAtK:
      return dcg(ranking, params.k);
    case Classic::NdcgAtK: {
      const double best = dcg(sorted_desc(ref), params.k);
      return best > 0.0 ? dcg(ranking, params.k) / best : 0.0;
    }
  }
  return 0.0;
}

double rbp(const Ranking& ranking, double p, int g_max) {
  if (!(p >= 0.0 && p < 1.0)) throw ContractViolation("RBP persistence must lie in [0,1)");
  check_grades(ranking, g_max);
  double s = 0.0;
  double w = 1.0;
  for (int g : ranking) {
    s += w * g / g_max;
    w *= p;
  }
  return (1.0 - p) * s;
}

double err(const Ranking& ranking, int g_max) {
  check_grades(ranking, g_max);
  const double denom = std::ldexp(1.0, g_max);
  double s = 0.0;
  double go_on = 1.0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const double r = (std::ldexp(1.0, ranking[i]) - 1.0) / denom;
    s += go_on * r / static_cast<double>(i + 1);
    go_on *= 1.0 - r;
  }
  return s;
}

CwlModel CwlModel::constant(double p) {
  return {[p](std::size_t) { return p; }};
}

CwlModel CwlModel::table(std::vector<double> c) {
  if (c.empty()) throw ContractViolation("continuation table is empty");
  return {[c = std::move(c)](std::size_t i) { return c[std::min(i, c.size()) - 1]; }};
}

CwlResult cwl(const Ranking& ranking, const CwlModel& model, int g_max) {
  check_grades(ranking, g_max);
  if (!model.continuation) throw ContractViolation("C/W/L model has no continuation function");
  CwlResult out;
  std::vector<double> survival;  // ∏_{j<i} C(j)
  double s = 1.0;
  std::size_t i = 1;
  for (; i <= model.max_depth && s >= 1e-12; ++i) {
    const double c = model.continuation(i);
    if (!(c >= 0.0 && c <= 1.0)) throw ContractViolation("C(i) outside [0,1] at rank " + std::to_string(i));
    survival.push_back(s);
    out.L.push_back(s * (1.0 - c));
    s *= c;
  }
  if (s > 1e-9) throw DomainError("non-terminating user model");

  const double wsum = std::accumulate(survival.begin(), survival.end(), 0.0);
  const double lsum = std::accumulate(out.L.begin(), out.L.end(), 0.0);
  out.W.resize(survival.size());
  double cum = 0.0;
  for (std::size_t r = 0; r < survival.size(); ++r) {
    const double gain = r < ranking.size() ? static_cast<double>(ranking[r]) / g_max : 0.0;
    cum += gain;
    out.W[r] = survival[r] / wsum;
    out.L[r] /= lsum;
    out.expected_rate_of_gain += out.W[r] * gain;
    out.expected_total_gain += out.L[r] * cum;
  }
  return out;
}

double sdcg(const std::vector<Ranking>& session, double b, double bq, std::size_t k) {
  if (session.empty()) throw ContractViolation("sDCG needs at least one ranking");
  if (!(bq > 1.0)) throw ContractViolation("query discount base must exceed 1");
  double s = 0.0;
  for (std::size_t j = 0; j < session.size(); ++j) {
    const double disc = 1.0 + std::log(static_cast<double>(j + 1)) / std::log(bq);
    s += dcg(session[j], k, b) / disc;
  }
  return s;
}

RewardCost session_reward_cost(const session::InteractionLog& log, const std::array<double, 4>& gains, double tau,
                               const behavior::CostModel* cost) {
  RewardCost rc;
  std::set<std::string> seen;
  for (const auto& ev : log.events) {
    if (cost != nullptr) rc.cost += session::event_cost(*cost, ev.payload);
    if (const auto* j = std::get_if<session::event::DocJudged>(&ev.payload)) {
      if (j->relevant && seen.insert(j->doc).second) {
        rc.reward += gains.at(static_cast<std::size_t>(std::clamp(j->grade, 0, 3)));
      }
    }
  }
  if (cost == nullptr) rc.cost = log.duration();
  rc.utility = rc.reward - tau * rc.cost;
  return rc;
}

Estimate expectation(const std::function<double(Rng&)>& sample, std::size_t n, std::uint64_t seed,
                     std::size_t threads) {
  if (n < 2) throw ContractViolation("expectation needs n >= 2 runs");
  std::vector<double> v(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {"run", std::to_string(i)}));
    v[i] = sample(rng);
  });
  Estimate e;
  e.n = n;
  e.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return e;
}

Estimate simulator_expectation(const LogMetric& metric, const session::UserProfile& profile, const Topic& topic,
                               const session::SystemUnderTest& system, const QrelsTable& qrels, std::size_t n,
                               std::uint64_t seed, double budget, std::size_t threads) {
  return expectation(
      [&](Rng& rng) { return metric(session::run_session(profile, topic, system, qrels, budget, rng)); }, n, seed,
      threads);
}

}  // namespace usersim::measures
