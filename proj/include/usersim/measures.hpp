#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "usersim/behavior.hpp"
#include "usersim/random.hpp"
#include "usersim/session.hpp"

namespace usersim::measures {

/// Relevance grades in rank order.
using Ranking = std::vector<int>;

enum class Classic { PrecisionAtK, AveragePrecision, DcgAtK, NdcgAtK };

Classic parse_classic(std::string_view name);  // "P@k", "AP", "DCG@k", "NDCG@k"

struct MetricParams {
  std::size_t k = 10;
  double p = 0.8;     // RBP persistence
  int g_max = 3;
  double b = 2.0;     // sDCG rank discount base
  double bq = 4.0;    // sDCG query discount base
  double tau = 0.01;  // utility = R - τ·C
};

/// P@k counts missing ranks below m as non-relevant (divides by k). AP divides
/// by the number of relevant items in `ideal`; NDCG normalizes by the sorted
/// `ideal` grades. An absent `ideal` means the ranking itself.
double classic(Classic metric, const Ranking& ranking, const MetricParams& params,
               const std::optional<Ranking>& ideal = std::nullopt);

/// Graded DCG@k: Σ g_i / log_b(i+1).
double dcg(const Ranking& ranking, std::size_t k, double base = 2.0);

/// (1-p)·Σ (g_i/g_max)·p^{i-1}.
double rbp(const Ranking& ranking, double p, int g_max);

/// Cascade ERR with stop probability (2^g - 1)/2^g_max.
double err(const Ranking& ranking, int g_max);

struct CwlModel {
  std::function<double(std::size_t rank)> continuation;  // C(i), i 1-based
  std::size_t max_depth = 1'000'000;

  static CwlModel constant(double p);
  /// C(i) from a table; ranks past its end continue with the last entry.
  static CwlModel table(std::vector<double> c);
};

struct CwlResult {
  std::vector<double> W;
  std::vector<double> L;
  double expected_rate_of_gain = 0.0;   // ERG = Σ W(i)·r_i
  double expected_total_gain = 0.0;     // ETG = Σ L(i)·Σ_{j≤i} r_j
};

/// Gains are g/g_max; ranks past the ranking carry no gain. W and L run until
/// the survival mass drops below 1e-12, and throw DomainError if it is still
/// above 1e-9 at `max_depth`.
CwlResult cwl(const Ranking& ranking, const CwlModel& model, int g_max = 3);

/// Σ_j DCG_b@k(ranking_j) / (1 + log_bq j).
double sdcg(const std::vector<Ranking>& session, double b, double bq, std::size_t k);

struct RewardCost {
  double reward = 0.0;
  double cost = 0.0;
  double utility = 0.0;
};

/// Reward: gains[grade] summed over distinct documents the user judged relevant.
/// Cost: the log's elapsed seconds, or re-costed under `cost` when given.
RewardCost session_reward_cost(const session::InteractionLog& log, const std::array<double, 4>& gains, double tau,
                               const behavior::CostModel* cost = nullptr);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error of `sample` over `n` independent streams
/// seeded from `seed`. Runs may spread over `threads`; the result depends only
/// on (n, seed).
Estimate expectation(const std::function<double(Rng&)>& sample, std::size_t n, std::uint64_t seed,
                     std::size_t threads = 1);

using LogMetric = std::function<double(const session::InteractionLog&)>;

/// Monte-Carlo estimate of E_I[metric] over sessions of one (user, topic, system).
Estimate simulator_expectation(const LogMetric& metric, const session::UserProfile& profile, const Topic& topic,
                               const session::SystemUnderTest& system, const QrelsTable& qrels, std::size_t n,
                               std::uint64_t seed, double budget = session::kUnlimitedBudget,
                               std::size_t threads = 1);

}  // namespace usersim::measures
