#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "usersim/corpus.hpp"

namespace usersim::engine {

struct Posting {
  std::uint32_t doc;  // position in Collection::documents()
  std::uint32_t tf;
};

/// Inverted index over an immutable collection. Postings are sorted by
/// document position, which is also ascending-id order.
class Index {
 public:
  static Index build(std::vector<Document> docs);

  const Collection& collection() const { return *collection_; }
  std::shared_ptr<const Collection> collection_ptr() const { return collection_; }
  const CollectionStats& stats() const { return collection_->stats(); }
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t doc_length(std::uint32_t doc) const { return doc_lengths_[doc]; }
  std::size_t vocabulary_size() const { return postings_.size(); }

 private:
  std::shared_ptr<const Collection> collection_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::size_t> doc_lengths_;
};

inline Index build_index(std::vector<Document> docs) { return Index::build(std::move(docs)); }

struct TfIdf {};
struct Bm25 {
  double k1 = 1.2;
  double b = 0.75;
};
struct BooleanAnd {};
struct RandomScorer {
  std::uint64_t seed = 0;
};

using ScorerSpec = std::variant<TfIdf, Bm25, BooleanAnd, RandomScorer>;

/// Parses "tfidf", "bm25", "bm25:1.2:0.75", "boolean", "random:7".
ScorerSpec parse_scorer(std::string_view spec);
std::string to_string(const ScorerSpec& spec);

struct ScoredDoc {
  std::uint32_t doc;
  double score;
};

/// Top-k by descending score, ties by ascending document id.
std::vector<ScoredDoc> rank(const Index& index, const Query& query, const ScorerSpec& scorer, std::size_t k);

enum class SnippetMode { Perfect, Textual };

struct Snippet {
  std::string doc_id;
  std::size_t rank = 1;
  TokenSeq title;
  TokenSeq excerpt;
  std::optional<int> grade;  // set in perfect mode only

  TokenSeq text() const;
};

struct Serp {
  Query query;
  std::vector<Snippet> results;
  std::size_t page_size = 10;
};

Snippet make_snippet(const Document& doc, const Query& query, std::size_t window, SnippetMode mode,
                     std::optional<int> grade, std::size_t rank = 1);

struct SnippetOptions {
  std::size_t window = 10;
  SnippetMode mode = SnippetMode::Textual;
  std::function<int(const std::string& doc_id)> grade_of;  // required for perfect mode
};

/// Throws ContractViolation for k = 0 and ConfigError for perfect mode without a grader.
Serp search(const Index& index, const Query& query, const ScorerSpec& scorer, std::size_t k,
            const SnippetOptions& snippets = {});

}  // namespace usersim::engine
