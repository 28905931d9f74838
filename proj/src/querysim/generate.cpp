#include <algorithm>
#include <cmath>

#include "usersim/error.hpp"
#include "usersim/querysim.hpp"

namespace usersim::querysim {

namespace {

class TermSampler {
 public:
  explicit TermSampler(const LanguageModel& lm) {
    std::vector<double> w;
    terms_.reserve(lm.size());
    w.reserve(lm.size());
    for (const auto& [t, p] : lm.probs()) {
      terms_.push_back(&t);
      w.push_back(p);
    }
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  const std::string& operator()(Rng& rng) { return *terms_[dist_(rng)]; }

 private:
  std::vector<const std::string*> terms_;
  std::discrete_distribution<std::size_t> dist_;
};

std::size_t sample_length(const std::vector<double>& pmf, Rng& rng) {
  std::discrete_distribution<std::size_t> d(pmf.begin(), pmf.end());
  return d(rng) + 1;
}

void check_known_item(const KnownItemSpec& spec) {
  if (spec.length_pmf.empty()) throw ConfigError("known-item length pmf must cover at least length 1");
  double s = 0.0;
  for (double p : spec.length_pmf) {
    if (p < 0.0) throw ConfigError("negative probability in known-item length pmf");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("known-item length pmf must sum to 1");
  if (spec.noise < 0.0 || spec.noise > 1.0) throw ConfigError("known-item noise must lie in [0,1]");
}

LanguageModel known_item_term_model(const Collection& c, const Document& d, double noise) {
  const auto tokens = d.tokens();
  if (tokens.empty()) {
    if (noise == 1.0 && !c.lm().empty()) return c.lm();
    throw DomainError("document '" + d.id + "' has an empty vocabulary");
  }
  const LanguageModel doc_lm = build_lm(tokens);
  if (noise == 0.0) return doc_lm;
  const std::pair<double, const LanguageModel*> parts[] = {{1.0 - noise, &doc_lm}, {noise, &c.lm()}};
  return mixture(parts);
}

}  // namespace

Query sample_terms(const LanguageModel& lm, std::size_t n, Rng& rng) {
  if (lm.empty()) throw DomainError("cannot sample from an empty language model");
  TermSampler sampler(lm);
  Query q;
  q.reserve(n);
  for (std::size_t i = 0; i < n; ++i) q.push_back(sampler(rng));
  return q;
}

Query gen_known_item_for(const Collection& collection, const Document& target, const KnownItemSpec& spec,
                         Rng& rng) {
  check_known_item(spec);
  const LanguageModel lm = known_item_term_model(collection, target, spec.noise);
  return sample_terms(lm, sample_length(spec.length_pmf, rng), rng);
}

KnownItemQuery gen_known_item(const Collection& collection, const KnownItemSpec& spec, Rng& rng) {
  check_known_item(spec);
  if (collection.empty()) throw ContractViolation("known-item generation needs a non-empty collection");
  std::vector<double> prior;
  prior.reserve(collection.size());
  for (const auto& d : collection.documents()) {
    prior.push_back(spec.doc_prior == DocPrior::Uniform ? 1.0 : static_cast<double>(d.length()));
  }
  if (std::all_of(prior.begin(), prior.end(), [](double w) { return w == 0.0; })) {
    throw DomainError("length-proportional prior over a collection of empty documents");
  }
  std::discrete_distribution<std::size_t> pick(prior.begin(), prior.end());
  constexpr int kAttempts = 100;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const Document& d = collection.at(pick(rng));
    if (d.length() == 0 && spec.noise < 1.0) continue;
    return {gen_known_item_for(collection, d, spec, rng), d.id};
  }
  throw DomainError("no document with a non-empty vocabulary after 100 attempts");
}

LanguageModel topic_model(const Topic& topic, std::span<const Document* const> relevant,
                          const LanguageModel& collection_lm, TopicModelSource source,
                          const SessionContext* context) {
  std::vector<TokenSeq> texts;
  if (source == TopicModelSource::SeedQuery) {
    texts.push_back(topic.title);
    texts.push_back(topic.description);
  } else {
    if (relevant.empty()) throw ContractViolation("relevant-set topic models need a non-empty R");
    for (const auto* d : relevant) texts.push_back(d->tokens());
  }
  if (context != nullptr) {
    for (const auto& s : context->seen) texts.push_back(s);
  }

  if (source != TopicModelSource::DiscriminativeTerms) return build_lm(texts);

  // Weight each term by its positive relative-entropy contribution.
  const LanguageModel pr = build_lm(texts);
  LanguageModel::Map w;
  for (const auto& [t, p] : pr.probs()) {
    const double pc = collection_lm.prob(t);
    const double contrib = pc > 0.0 ? p * std::log(p / pc) : p;
    if (contrib > 0.0) w[t] = contrib;
  }
  if (w.empty()) return pr;
  return LanguageModel::from_weights(std::move(w));
}

LanguageModel adhoc_distribution(const Topic& topic, std::span<const Document* const> relevant,
                                 const LanguageModel& collection_lm, const AdhocSpec& spec,
                                 const SessionContext* context) {
  if (spec.mix < 0.0 || spec.mix > 1.0) throw ConfigError("adhoc mixture weight must lie in [0,1]");
  const LanguageModel theta_t =
      topic_model(topic, relevant, collection_lm, spec.source, spec.dynamic ? context : nullptr);
  const std::pair<double, const LanguageModel*> parts[] = {{spec.mix, &theta_t}, {1.0 - spec.mix, &collection_lm}};
  return mixture(parts);
}

Query gen_adhoc(const Topic& topic, std::span<const Document* const> relevant, const LanguageModel& collection_lm,
                const AdhocSpec& spec, Rng& rng, const SessionContext* context) {
  return sample_terms(adhoc_distribution(topic, relevant, collection_lm, spec, context), spec.length, rng);
}

}  // namespace usersim::querysim
