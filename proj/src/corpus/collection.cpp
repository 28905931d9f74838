#include <fstream>
#include <set>
#include <sstream>

#include "usersim/corpus.hpp"
#include "usersim/error.hpp"

namespace usersim {

std::size_t CollectionStats::df(std::string_view term) const {
  auto it = doc_freq.find(std::string(term));
  return it == doc_freq.end() ? 0 : it->second;
}

std::size_t CollectionStats::cf(std::string_view term) const {
  auto it = coll_freq.find(std::string(term));
  return it == coll_freq.end() ? 0 : it->second;
}

std::shared_ptr<const Collection> Collection::build(std::vector<Document> docs) {
  auto c = std::shared_ptr<Collection>(new Collection());
  c->docs_ = std::move(docs);
  LanguageModel::Map counts;
  for (std::size_t i = 0; i < c->docs_.size(); ++i) {
    const Document& d = c->docs_[i];
    if (d.id.empty()) throw ConfigError("document at position " + std::to_string(i) + " has an empty id");
    if (!c->by_id_.emplace(d.id, i).second) throw ConfigError("duplicate document id '" + d.id + "'");
    std::set<std::string_view> seen;
    for (const auto* part : {&d.title, &d.body}) {
      for (const auto& t : *part) {
        ++c->stats_.coll_freq[t];
        counts[t] += 1.0;
        if (seen.insert(t).second) ++c->stats_.doc_freq[t];
      }
    }
    c->stats_.total_tokens += d.length();
  }
  c->stats_.doc_count = c->docs_.size();
  if (!c->docs_.empty()) {
    c->stats_.avg_doc_length =
        static_cast<double>(c->stats_.total_tokens) / static_cast<double>(c->stats_.doc_count);
  }
  if (!counts.empty()) c->lm_ = LanguageModel::from_weights(std::move(counts));
  return c;
}

const Document* Collection::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

std::ptrdiff_t Collection::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace usersim
