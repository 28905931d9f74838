// Named model presets as used in experiment configs, e.g. "grade:baskaya2013"
// or "frustration:3". Grammar: name[:arg[:arg]].

#include <algorithm>

#include "usersim/behavior.hpp"
#include "usersim/detail/spec_string.hpp"
#include "usersim/error.hpp"

namespace usersim::behavior {

using detail::split;
using detail::to_double;
using detail::to_doubles;
using detail::to_size;

namespace {

[[noreturn]] void unknown(std::string_view kind, std::string_view spec) {
  throw ConfigError("unknown " + std::string(kind) + " preset '" + std::string(spec) + "'");
}

std::array<double, 4> grade_table(std::string_view arg, std::string_view spec) {
  const auto v = to_doubles(arg, spec);
  if (v.size() != 4) throw ConfigError("grade table needs 4 probabilities (grades 0..3) in '" + std::string(spec) + "'");
  std::array<double, 4> out{};
  std::copy(v.begin(), v.end(), out.begin());
  for (double p : out) {
    if (p < 0.0 || p > 1.0) throw ConfigError("probability outside [0,1] in '" + std::string(spec) + "'");
  }
  return out;
}

std::size_t positive_count(std::string_view arg, std::string_view spec) {
  const auto n = to_size(arg, spec);
  if (n == 0) throw ConfigError("threshold must be > 0 in '" + std::string(spec) + "'");
  return n;
}

double positive_number(std::string_view arg, std::string_view spec) {
  const double v = to_double(arg, spec);
  if (!(v > 0.0)) throw ConfigError("threshold must be > 0 in '" + std::string(spec) + "'");
  return v;
}

}  // namespace

ScanModel parse_scan(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p[0] == "fixed" && p.size() == 2) return FixedDepthScan{positive_count(p[1], spec)};
  if (p[0] == "persistent" && p.size() == 2) {
    const double v = to_double(p[1], spec);
    if (v < 0.0 || v >= 1.0) throw ConfigError("persistence must lie in [0,1)");
    return PersistentScan{v};
  }
  if (p[0] == "cascade" && p.size() == 1) return CascadeScan{};
  unknown("scan", spec);
}

ClickModel parse_click(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p[0] == "perfect" && p.size() == 1) return PerfectSnippetClick{};
  if (p[0] == "grade" && p.size() == 2) {
    if (p[1] == "baskaya2013") return baskaya2013_clicks();
    if (p[1] == "maxwell2015") return maxwell2015_clicks();
    return GradeClick{grade_table(p[1], spec)};
  }
  if (p[0] == "position") {
    if (p.size() == 1) return PositionClick{};
    if (p.size() == 2) {
      auto v = to_doubles(p[1], spec);
      for (double x : v) {
        if (x < 0.0 || x > 1.0) throw ConfigError("probability outside [0,1] in '" + std::string(spec) + "'");
      }
      return PositionClick{std::move(v)};
    }
  }
  if (p[0] == "attractive" && p.size() == 2) return AttractivenessClick{to_double(p[1], spec)};
  unknown("click", spec);
}

JudgeModel parse_judge(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p[0] == "threshold" && p.size() == 2) return ThresholdJudge{static_cast<int>(to_size(p[1], spec))};
  if (p[0] == "stochastic" && p.size() == 2) {
    if (p[1] == "baskaya2013") return baskaya2013_judgments();
    if (p[1] == "maxwell2015") return maxwell2015_judgments();
    return StochasticJudge{grade_table(p[1], spec)};
  }
  if (p[0] == "lm" && p.size() == 2) return LmJudge{to_double(p[1], spec)};
  unknown("judge", spec);
}

ScentModel parse_scent(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p.size() == 1) {
    if (p[0] == "always") return ScentModel::always_enter();
    if (p[0] == "naive") return ScentModel::naive();
    if (p[0] == "average") return ScentModel::average();
    if (p[0] == "savvy") return ScentModel::savvy();
  }
  if (p[0] == "scent" && p.size() == 3) return ScentModel{false, to_double(p[1], spec), to_double(p[2], spec), 5};
  unknown("scent", spec);
}

QueryStopPolicy parse_query_stop(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p.size() == 2) {
    if (p[0] == "fixed") return stop::FixedDepth{positive_count(p[1], spec)};
    if (p[0] == "frustration") return stop::TotalNonRelevant{positive_count(p[1], spec)};
    if (p[0] == "contiguous") return stop::ContiguousNonRelevant{positive_count(p[1], spec)};
    if (p[0] == "satisfaction") return stop::Satisfaction{positive_count(p[1], spec)};
    if (p[0] == "time") return stop::TimeOnSerp{positive_number(p[1], spec)};
    if (p[0] == "since-relevant") return stop::TimeSinceRelevant{positive_number(p[1], spec)};
  }
  if (p[0] == "combination" && p.size() == 3) {
    return stop::SatisfactionOrFrustration{positive_count(p[1], spec), positive_count(p[2], spec)};
  }
  if (p[0] == "difference" && (p.size() == 2 || p.size() == 3)) {
    stop::Difference d{positive_number(p[1], spec), SimilarityMetric::Overlap};
    if (p.size() == 3) {
      if (p[2] == "kl") {
        d.metric = SimilarityMetric::Kl;
      } else if (p[2] != "overlap") {
        unknown("difference metric", spec);
      }
    }
    return d;
  }
  if (p[0] == "rate" && p.size() == 3) return stop::RateOfGain{positive_number(p[1], spec), to_size(p[2], spec)};
  unknown("query stopping", spec);
}

SessionStopPolicy parse_session_stop(std::string_view spec) {
  const auto p = split(spec, ':');
  if (p.size() == 2) {
    if (p[0] == "max-queries") return stop::MaxQueries{positive_count(p[1], spec)};
    if (p[0] == "satisfaction") return stop::SessionSatisfaction{positive_count(p[1], spec)};
    if (p[0] == "frustration") return stop::SessionFrustration{positive_count(p[1], spec)};
    if (p[0] == "time") return stop::TimeBudget{positive_number(p[1], spec)};
  }
  unknown("session stopping", spec);
}

}  // namespace usersim::behavior
