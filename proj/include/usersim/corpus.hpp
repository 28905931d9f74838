#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace usersim {

using Token = std::string;
using TokenSeq = std::vector<Token>;
using Query = TokenSeq;

struct TokenizeOptions {
  bool remove_stopwords = false;
  bool stem = false;  // plural-stripping "S" stemmer
};

/// Lowercase, split on non-alphanumeric ASCII, drop empty tokens. Bytes >= 0x80
/// are kept inside tokens so UTF-8 words survive intact.
TokenSeq tokenize(std::string_view text, const TokenizeOptions& opts = {});

bool is_stopword(std::string_view token);

std::string join(const TokenSeq& tokens, std::string_view sep = " ");

struct Document {
  std::string id;
  TokenSeq title;
  TokenSeq body;

  /// Title followed by body; the text the user reads.
  TokenSeq tokens() const;
  std::size_t length() const { return title.size() + body.size(); }
};

struct Topic {
  std::string id;
  TokenSeq title;
  TokenSeq description;
  TokenSeq narrative;
};

/// Graded relevance judgments. Unjudged pairs read as grade 0.
class QrelsTable {
 public:
  static constexpr int kMaxGrade = 3;

  void set(const std::string& topic, const std::string& doc, int grade);
  int grade(std::string_view topic, std::string_view doc) const;
  bool judged(std::string_view topic, std::string_view doc) const;

  /// Documents of `topic` with grade >= min_grade, ascending by id.
  std::vector<std::string> relevant(std::string_view topic, int min_grade = 1) const;

  std::size_t size() const;
  const std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>>& entries() const {
    return table_;
  }

 private:
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>> table_;
};

enum class SmoothingKind { None, JelinekMercer, Dirichlet };

struct Smoothing {
  SmoothingKind kind = SmoothingKind::None;
  double param = 0.0;  // λ (background weight) for JM, μ for Dirichlet

  static Smoothing none() { return {}; }
  static Smoothing jelinek_mercer(double lambda) { return {SmoothingKind::JelinekMercer, lambda}; }
  static Smoothing dirichlet(double mu) { return {SmoothingKind::Dirichlet, mu}; }
};

/// Unigram term distribution. Probabilities sum to 1 (within 1e-9) whenever
/// the model is non-empty; out-of-vocabulary terms have probability 0.
class LanguageModel {
 public:
  using Map = std::map<std::string, double, std::less<>>;

  LanguageModel() = default;

  /// Normalizes non-negative weights. Throws DomainError on a non-positive total.
  static LanguageModel from_weights(Map weights, Smoothing smoothing = {});
  static LanguageModel uniform(const std::vector<std::string>& terms);

  double prob(std::string_view term) const;
  const Map& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  bool empty() const { return probs_.empty(); }
  double total() const;
  const Smoothing& smoothing() const { return smoothing_; }

  /// Terms by descending probability, ties by ascending term.
  std::vector<std::string> ranked_terms() const;

 private:
  Map probs_;
  Smoothing smoothing_;
};

/// Maximum-likelihood estimate over pooled token counts, optionally smoothed
/// against `background`. JM: (1-λ)·P_ml + λ·P_bg. Dirichlet: (c + μ·P_bg)/(N + μ).
LanguageModel build_lm(std::span<const TokenSeq> texts, Smoothing smoothing = {},
                       const LanguageModel* background = nullptr);
LanguageModel build_lm(const TokenSeq& text, Smoothing smoothing = {}, const LanguageModel* background = nullptr);

/// Σ_i w_i · P_i, renormalized. Weights must be non-negative with positive sum
/// over non-empty components.
LanguageModel mixture(std::span<const std::pair<double, const LanguageModel*>> components);

/// KL(p || q) in nats. Throws DomainError where q(t) = 0 < p(t).
double kl_divergence(const LanguageModel& p, const LanguageModel& q);

struct CollectionStats {
  std::size_t doc_count = 0;
  double avg_doc_length = 0.0;
  std::size_t total_tokens = 0;
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::unordered_map<std::string, std::size_t> coll_freq;

  std::size_t df(std::string_view term) const;
  std::size_t cf(std::string_view term) const;
};

/// Immutable document collection with id lookup, statistics and the
/// maximum-likelihood collection model θ_C.
class Collection {
 public:
  /// Throws ConfigError naming the first duplicate or empty id.
  static std::shared_ptr<const Collection> build(std::vector<Document> docs);

  std::span<const Document> documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& at(std::size_t index) const { return docs_.at(index); }
  const Document* find(std::string_view id) const;
  std::ptrdiff_t index_of(std::string_view id) const;
  const CollectionStats& stats() const { return stats_; }
  const LanguageModel& lm() const { return lm_; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  CollectionStats stats_;
  LanguageModel lm_;
};

// --- text formats ---------------------------------------------------------

/// TREC topic records (<num>, <title>, <desc>, <narr>; <top> wrappers optional).
/// Throws ParseError with the byte offset of a record lacking <num> or <title>.
std::vector<Topic> parse_trec_topics(std::string_view text, const TokenizeOptions& opts = {});
std::string serialize_trec_topics(std::span<const Topic> topics);

/// "topic iteration doc grade" lines. Last duplicate wins.
QrelsTable parse_qrels(std::string_view text);
std::string serialize_qrels(const QrelsTable& qrels);

/// One document per line: "docid \t title \t body".
std::vector<Document> parse_documents(std::string_view text, const TokenizeOptions& opts = {});
std::string serialize_documents(std::span<const Document> docs);

std::string read_file(const std::string& path);

}  // namespace usersim
