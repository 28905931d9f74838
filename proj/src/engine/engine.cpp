#include "usersim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "usersim/error.hpp"
#include "usersim/random.hpp"

namespace usersim::engine {

Index Index::build(std::vector<Document> docs) {
  Index idx;
  idx.collection_ = Collection::build(std::move(docs));
  const auto all = idx.collection_->documents();
  idx.doc_lengths_.reserve(all.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) {
    std::unordered_map<std::string_view, std::uint32_t> tf;
    for (const auto* part : {&all[i].title, &all[i].body}) {
      for (const auto& t : *part) ++tf[t];
    }
    for (const auto& [term, n] : tf) idx.postings_[std::string(term)].push_back({i, n});
    idx.doc_lengths_.push_back(all[i].length());
  }
  // Postings in id order so ties and merges are independent of input order.
  for (auto& [_, plist] : idx.postings_) {
    std::sort(plist.begin(), plist.end(), [&](const Posting& a, const Posting& b) { return all[a.doc].id < all[b.doc].id; });
  }
  return idx;
}

std::span<const Posting> Index::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

ScorerSpec parse_scorer(std::string_view spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  const std::string& name = parts[0];
  auto num = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric argument in scorer '" + std::string(spec) + "'");
    }
  };
  if (name == "tfidf" && parts.size() == 1) return TfIdf{};
  if (name == "boolean" && parts.size() == 1) return BooleanAnd{};
  if (name == "bm25") {
    Bm25 s;
    if (parts.size() == 3) {
      s.k1 = num(1);
      s.b = num(2);
    } else if (parts.size() != 1) {
      throw ConfigError("bm25 takes bm25 or bm25:k1:b");
    }
    if (!(s.k1 > 0.0) || s.b < 0.0 || s.b > 1.0) throw ConfigError("bm25 requires k1 > 0 and 0 <= b <= 1");
    return s;
  }
  if (name == "random" && parts.size() <= 2) {
    RandomScorer r;
    if (parts.size() == 2) r.seed = static_cast<std::uint64_t>(num(1));
    return r;
  }
  throw ConfigError("unknown scorer '" + std::string(spec) + "'");
}

std::string to_string(const ScorerSpec& spec) {
  struct V {
    std::string operator()(const TfIdf&) const { return "tfidf"; }
    std::string operator()(const BooleanAnd&) const { return "boolean"; }
    std::string operator()(const Bm25& s) const {
      std::ostringstream o;
      o << "bm25:" << s.k1 << ":" << s.b;
      return o.str();
    }
    std::string operator()(const RandomScorer& s) const { return "random:" + std::to_string(s.seed); }
  };
  return std::visit(V{}, spec);
}

namespace {

std::uint64_t query_hash(const Query& q) {
  std::uint64_t h = fnv1a("");
  for (const auto& t : q) h = fnv1a(t, fnv1a(" ", h));
  return h;
}

}  // namespace

std::vector<ScoredDoc> rank(const Index& index, const Query& query, const ScorerSpec& scorer, std::size_t k) {
  if (k == 0) throw ContractViolation("search requires k >= 1");
  const auto docs = index.collection().documents();
  const auto& stats = index.stats();
  const double n = static_cast<double>(stats.doc_count);
  std::unordered_map<std::uint32_t, double> acc;

  if (const auto* r = std::get_if<RandomScorer>(&scorer)) {
    const std::uint64_t qh = query_hash(query);
    for (std::uint32_t d = 0; d < docs.size(); ++d) {
      const std::uint64_t h = mix64(r->seed ^ mix64(qh ^ fnv1a(docs[d].id)));
      acc[d] = static_cast<double>(h >> 11) * 0x1.0p-53;
    }
  } else if (std::holds_alternative<BooleanAnd>(scorer)) {
    if (!query.empty()) {
      std::unordered_map<std::uint32_t, std::size_t> hits;
      std::vector<std::string_view> uniq(query.begin(), query.end());
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (auto t : uniq) {
        for (const auto& p : index.postings(t)) ++hits[p.doc];
      }
      for (const auto& [d, c] : hits) {
        if (c == uniq.size()) acc[d] = 0.0;
      }
    }
  } else {
    for (const auto& t : query) {
      const auto plist = index.postings(t);
      if (plist.empty()) continue;
      const double df = static_cast<double>(plist.size());
      for (const auto& p : plist) {
        const double tf = static_cast<double>(p.tf);
        double s = 0.0;
        if (const auto* bm = std::get_if<Bm25>(&scorer)) {
          const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
          const double dl = static_cast<double>(index.doc_length(p.doc));
          s = idf * tf * (bm->k1 + 1.0) / (tf + bm->k1 * (1.0 - bm->b + bm->b * dl / stats.avg_doc_length));
        } else {
          s = tf * std::log(n / df);
        }
        acc[p.doc] += s;
      }
    }
  }

  std::vector<ScoredDoc> out;
  out.reserve(acc.size());
  for (const auto& [d, s] : acc) out.push_back({d, s});
  auto better = [&](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return docs[a.doc].id < docs[b.doc].id;
  };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

TokenSeq Snippet::text() const {
  TokenSeq all = title;
  all.insert(all.end(), excerpt.begin(), excerpt.end());
  return all;
}

Snippet make_snippet(const Document& doc, const Query& query, std::size_t window, SnippetMode mode,
                     std::optional<int> grade, std::size_t rank) {
  if (window == 0) throw ContractViolation("snippet window must be >= 1");
  if (rank == 0) throw ContractViolation("snippet rank is 1-based");
  const TokenSeq& body = doc.body.empty() ? doc.title : doc.body;
  std::size_t hit = body.size();
  for (std::size_t i = 0; i < body.size() && hit == body.size(); ++i) {
    if (std::find(query.begin(), query.end(), body[i]) != query.end()) hit = i;
  }
  std::size_t start = 0;
  if (hit != body.size()) {
    // Center the window on the first match, shifted to stay inside the text.
    start = hit >= (window - 1) / 2 ? hit - (window - 1) / 2 : 0;
    if (start + window > body.size()) start = body.size() > window ? body.size() - window : 0;
  }
  const std::size_t end = std::min(body.size(), start + window);

  Snippet s;
  s.doc_id = doc.id;
  s.rank = rank;
  s.title = doc.title;
  s.excerpt.assign(body.begin() + static_cast<std::ptrdiff_t>(start), body.begin() + static_cast<std::ptrdiff_t>(end));
  if (mode == SnippetMode::Perfect) s.grade = grade;
  return s;
}

Serp search(const Index& index, const Query& query, const ScorerSpec& scorer, std::size_t k,
            const SnippetOptions& snippets) {
  if (snippets.mode == SnippetMode::Perfect && !snippets.grade_of) {
    throw ConfigError("perfect snippets need a grade source");
  }
  Serp serp;
  serp.query = query;
  serp.page_size = k;
  const auto hits = rank(index, query, scorer, k);
  serp.results.reserve(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const Document& d = index.collection().at(hits[i].doc);
    std::optional<int> g;
    if (snippets.mode == SnippetMode::Perfect) g = snippets.grade_of(d.id);
    serp.results.push_back(make_snippet(d, query, snippets.window, snippets.mode, g, i + 1));
  }
  return serp;
}

}  // namespace usersim::engine
