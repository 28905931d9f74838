#include <algorithm>
#include <cmath>
#include <set>

#include "usersim/behavior.hpp"
#include "usersim/error.hpp"

namespace usersim::behavior {

LanguageModel build_relevance_model(const LanguageModel& topic, const LanguageModel& relevant_docs,
                                    const LanguageModel& background, const LanguageModel& collection,
                                    const RelevanceModelWeights& w) {
  const double z = w.normalizer();
  if (w.topic < 0.0 || w.interaction < 0.0 || w.background < 0.0) {
    throw ConfigError("relevance model weights must be non-negative");
  }
  if (!(z > 0.0)) throw ConfigError("relevance model weights sum to zero");
  if (w.lambda < 0.0 || w.lambda > 1.0) throw ConfigError("relevance model lambda must lie in [0,1]");
  const std::pair<double, const LanguageModel*> parts[] = {
      {w.lambda * w.topic / z, &topic},
      {w.lambda * w.interaction / z, &relevant_docs},
      {w.lambda * w.background / z, &background},
      {1.0 - w.lambda, &collection},
  };
  return mixture(parts);
}

double relevance_score(const TokenSeq& text, const LanguageModel& relevance, const LanguageModel& collection) {
  if (text.empty()) throw DomainError("cannot score an empty document");
  const LanguageModel doc = build_lm(text);
  double s = 0.0;
  for (const auto& [t, p] : doc.probs()) {
    const double pr = relevance.prob(t);
    const double pc = collection.prob(t);
    if (pr <= 0.0 || pc <= 0.0) throw DomainError("term '" + t + "' unsupported by the relevance or collection model");
    s += p * std::log(pr / pc);
  }
  return s / static_cast<double>(text.size());
}

LanguageModel expand_background(const TokenSeq& topic_terms, const Collection& collection, std::size_t k) {
  if (topic_terms.empty()) throw ContractViolation("background expansion needs topic terms");
  if (collection.empty()) throw ContractViolation("background expansion needs a non-empty collection");
  if (k == 0) return build_lm(topic_terms);

  const std::set<std::string_view> topic(topic_terms.begin(), topic_terms.end());
  std::map<std::string_view, std::size_t> co;
  std::size_t topic_docs = 0;
  for (const auto& d : collection.documents()) {
    std::set<std::string_view> terms;
    for (const auto* part : {&d.title, &d.body}) terms.insert(part->begin(), part->end());
    const bool on_topic = std::any_of(terms.begin(), terms.end(), [&](auto t) { return topic.count(t) > 0; });
    if (!on_topic) continue;
    ++topic_docs;
    for (auto t : terms) {
      if (topic.count(t) == 0) ++co[t];
    }
  }
  if (co.empty()) return LanguageModel::uniform(std::vector<std::string>(topic.begin(), topic.end()));

  const double n = static_cast<double>(collection.size());
  std::vector<std::pair<std::string, double>> pmi;
  for (const auto& [t, c] : co) {
    const double df = static_cast<double>(collection.stats().df(t));
    pmi.emplace_back(std::string(t), std::log(static_cast<double>(c) * n / (df * static_cast<double>(topic_docs))));
  }
  std::stable_sort(pmi.begin(), pmi.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  pmi.resize(std::min(k, pmi.size()));

  LanguageModel::Map w;
  for (const auto& [t, v] : pmi) {
    if (v > 0.0) w[t] = v;
  }
  if (w.empty()) {
    for (const auto& [t, _] : pmi) w[t] = 1.0;
  }
  return LanguageModel::from_weights(std::move(w));
}

KnowledgeState::KnowledgeState(LanguageModel topic, LanguageModel background,
                               std::shared_ptr<const LanguageModel> collection, RelevanceModelWeights weights)
    : topic_(std::move(topic)),
      background_(std::move(background)),
      collection_(std::move(collection)),
      weights_(weights) {
  rebuild();
}

void KnowledgeState::add_relevant(const Document& doc) {
  if (std::find(relevant_ids_.begin(), relevant_ids_.end(), doc.id) != relevant_ids_.end()) return;
  relevant_ids_.push_back(doc.id);
  for (const auto* part : {&doc.title, &doc.body}) {
    for (const auto& t : *part) relevant_counts_[t] += 1.0;
  }
  if (!relevant_counts_.empty()) relevant_docs_ = LanguageModel::from_weights(relevant_counts_);
  rebuild();
}

void KnowledgeState::rebuild() {
  if (has_relevance_model()) {
    relevance_ = build_relevance_model(topic_, relevant_docs_, background_, *collection_, weights_);
  }
}

const LanguageModel& KnowledgeState::relevance_model() const {
  if (!has_relevance_model()) throw ConfigError("relevance model requested without a collection model");
  return relevance_;
}

}  // namespace usersim::behavior
