#include <algorithm>
#include <cmath>

#include "usersim/corpus.hpp"
#include "usersim/error.hpp"

namespace usersim {

LanguageModel LanguageModel::from_weights(Map weights, Smoothing smoothing) {
  double total = 0.0;
  for (const auto& [term, w] : weights) {
    if (!(w >= 0.0)) throw DomainError("negative or NaN weight for term '" + term + "'");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("no probability mass");
  LanguageModel lm;
  for (auto& [term, w] : weights) {
    if (w > 0.0) lm.probs_.emplace(term, w / total);
  }
  lm.smoothing_ = smoothing;
  return lm;
}

LanguageModel LanguageModel::uniform(const std::vector<std::string>& terms) {
  Map w;
  for (const auto& t : terms) w[t] = 1.0;
  return from_weights(std::move(w));
}

double LanguageModel::prob(std::string_view term) const {
  auto it = probs_.find(term);
  return it == probs_.end() ? 0.0 : it->second;
}

double LanguageModel::total() const {
  double s = 0.0;
  for (const auto& [_, p] : probs_) s += p;
  return s;
}

std::vector<std::string> LanguageModel::ranked_terms() const {
  std::vector<std::pair<std::string, double>> v(probs_.begin(), probs_.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto& [t, _] : v) out.push_back(std::move(t));
  return out;
}

LanguageModel build_lm(std::span<const TokenSeq> texts, Smoothing smoothing, const LanguageModel* background) {
  LanguageModel::Map counts;
  double n = 0.0;
  for (const auto& text : texts) {
    for (const auto& t : text) {
      counts[t] += 1.0;
      n += 1.0;
    }
  }

  if (smoothing.kind == SmoothingKind::None) {
    if (n == 0.0) throw DomainError("no probability mass");
    return LanguageModel::from_weights(std::move(counts));
  }

  if (background == nullptr || background->empty()) {
    throw ConfigError("smoothing requires a non-empty background model");
  }

  LanguageModel::Map w;
  if (smoothing.kind == SmoothingKind::JelinekMercer) {
    const double lambda = smoothing.param;
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("Jelinek-Mercer lambda must lie in [0,1]");
    // With no observed text the background carries all of the mass.
    const double fg = n > 0.0 ? 1.0 - lambda : 0.0;
    const double bg = n > 0.0 ? lambda : 1.0;
    for (const auto& [t, c] : counts) w[t] += fg * c / n;
    for (const auto& [t, p] : background->probs()) w[t] += bg * p;
  } else {
    const double mu = smoothing.param;
    if (!(mu >= 0.0)) throw ConfigError("Dirichlet mu must be non-negative");
    if (n + mu == 0.0) throw DomainError("no probability mass");
    for (const auto& [t, c] : counts) w[t] += c / (n + mu);
    for (const auto& [t, p] : background->probs()) w[t] += mu * p / (n + mu);
  }
  return LanguageModel::from_weights(std::move(w), smoothing);
}

LanguageModel build_lm(const TokenSeq& text, Smoothing smoothing, const LanguageModel* background) {
  return build_lm(std::span<const TokenSeq>(&text, 1), smoothing, background);
}

LanguageModel mixture(std::span<const std::pair<double, const LanguageModel*>> components) {
  LanguageModel::Map w;
  for (const auto& [weight, lm] : components) {
    if (weight < 0.0) throw DomainError("negative mixture weight");
    if (weight == 0.0 || lm == nullptr) continue;
    for (const auto& [t, p] : lm->probs()) w[t] += weight * p;
  }
  return LanguageModel::from_weights(std::move(w));
}

double kl_divergence(const LanguageModel& p, const LanguageModel& q) {
  double kl = 0.0;
  for (const auto& [t, pt] : p.probs()) {
    if (pt <= 0.0) continue;
    const double qt = q.prob(t);
    if (qt <= 0.0) throw DomainError("KL divergence undefined: q('" + t + "') = 0");
    kl += pt * std::log(pt / qt);
  }
  return std::max(kl, 0.0);
}

}  // namespace usersim
