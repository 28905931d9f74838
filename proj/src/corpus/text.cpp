#include "usersim/corpus.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

namespace usersim {

namespace {

constexpr std::string_view kStopwords[] = {
    "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",    "at",
    "be",    "been",  "but",   "by",    "can",   "could", "do",    "does",  "for",   "from",  "had",
    "has",   "have",  "he",    "her",   "his",   "how",   "i",     "if",    "in",    "into",  "is",
    "it",    "its",   "may",   "more",  "no",    "not",   "of",    "on",    "or",    "other", "our",
    "she",   "so",    "some",  "such",  "than",  "that",  "the",   "their", "then",  "there", "these",
    "they",  "this",  "to",    "was",   "we",    "were",  "which", "will",  "with"};
static_assert(std::is_sorted(std::begin(kStopwords), std::end(kStopwords)));

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

// Harman's S stemmer.
void s_stem(std::string& w) {
  auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() && std::string_view(w).substr(w.size() - suf.size()) == suf;
  };
  if (ends("ies") && !ends("eies") && !ends("aies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends("es") && !ends("aes") && !ends("ees") && !ends("oes")) {
    w.erase(w.size() - 1);
  } else if (ends("s") && !ends("us") && !ends("ss")) {
    w.erase(w.size() - 1);
  }
}

}  // namespace

bool is_stopword(std::string_view token) {
  return std::binary_search(std::begin(kStopwords), std::end(kStopwords), token);
}

TokenSeq tokenize(std::string_view text, const TokenizeOptions& opts) {
  TokenSeq out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (!(opts.remove_stopwords && is_stopword(cur))) {
      if (opts.stem) s_stem(cur);
      out.push_back(std::move(cur));
    }
    cur.clear();
  };
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string join(const TokenSeq& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

TokenSeq Document::tokens() const {
  TokenSeq all;
  all.reserve(length());
  all.insert(all.end(), title.begin(), title.end());
  all.insert(all.end(), body.begin(), body.end());
  return all;
}

}  // namespace usersim
