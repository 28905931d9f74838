#include <algorithm>
#include <array>
#include <charconv>
#include <optional>
#include <sstream>

#include "usersim/corpus.hpp"
#include "usersim/error.hpp"

namespace usersim {

// --- qrels ------------------------------------------------------------------

void QrelsTable::set(const std::string& topic, const std::string& doc, int grade) {
  if (grade < 0 || grade > kMaxGrade) throw DomainError("grade outside 0.." + std::to_string(kMaxGrade));
  table_[topic][doc] = grade;
}

int QrelsTable::grade(std::string_view topic, std::string_view doc) const {
  auto t = table_.find(topic);
  if (t == table_.end()) return 0;
  auto d = t->second.find(doc);
  return d == t->second.end() ? 0 : d->second;
}

bool QrelsTable::judged(std::string_view topic, std::string_view doc) const {
  auto t = table_.find(topic);
  return t != table_.end() && t->second.find(doc) != t->second.end();
}

std::vector<std::string> QrelsTable::relevant(std::string_view topic, int min_grade) const {
  std::vector<std::string> out;
  auto t = table_.find(topic);
  if (t == table_.end()) return out;
  for (const auto& [doc, g] : t->second) {
    if (g >= min_grade) out.push_back(doc);
  }
  return out;
}

std::size_t QrelsTable::size() const {
  std::size_t n = 0;
  for (const auto& [_, docs] : table_) n += docs.size();
  return n;
}

QrelsTable parse_qrels(std::string_view text) {
  QrelsTable q;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string topic, iter, doc, grade_s, extra;
    if (!(ls >> topic)) continue;  // blank line
    if (!(ls >> iter >> doc >> grade_s) || (ls >> extra)) {
      throw ParseError("qrels line must have 4 fields", ParseError::Where::Line, lineno);
    }
    int grade = 0;
    auto [ptr, ec] = std::from_chars(grade_s.data(), grade_s.data() + grade_s.size(), grade);
    if (ec != std::errc() || ptr != grade_s.data() + grade_s.size()) {
      throw ParseError("non-integer grade '" + grade_s + "'", ParseError::Where::Line, lineno);
    }
    if (grade < 0 || grade > QrelsTable::kMaxGrade) {
      throw ParseError("grade " + grade_s + " outside 0..3", ParseError::Where::Line, lineno);
    }
    q.set(topic, doc, grade);
  }
  return q;
}

std::string serialize_qrels(const QrelsTable& qrels) {
  std::string out;
  for (const auto& [topic, docs] : qrels.entries()) {
    for (const auto& [doc, g] : docs) {
      out += topic + " 0 " + doc + " " + std::to_string(g) + "\n";
    }
  }
  return out;
}

// --- TREC topics ---------------------------------------------------------------

namespace {

enum class Field { Num, Title, Desc, Narr, Close };

struct Marker {
  std::size_t offset;
  std::size_t length;
  Field field;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<Marker> find_markers(std::string_view text) {
  static const std::array<std::pair<std::string_view, Field>, 10> tags = {{{"<num>", Field::Num},
                                                                           {"<title>", Field::Title},
                                                                           {"<desc>", Field::Desc},
                                                                           {"<narr>", Field::Narr},
                                                                           {"</num>", Field::Close},
                                                                           {"</title>", Field::Close},
                                                                           {"</desc>", Field::Close},
                                                                           {"</narr>", Field::Close},
                                                                           {"<top>", Field::Close},
                                                                           {"</top>", Field::Close}}};
  const std::string low = lower(text);
  std::vector<Marker> out;
  for (std::size_t pos = low.find('<'); pos != std::string::npos; pos = low.find('<', pos + 1)) {
    for (const auto& [tag, field] : tags) {
      if (low.compare(pos, tag.size(), tag) == 0) {
        out.push_back({pos, tag.size(), field});
        break;
      }
    }
  }
  return out;
}

std::string_view strip_label(std::string_view body, std::string_view label) {
  auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  body.remove_prefix(first);
  if (body.size() >= label.size() && lower(body.substr(0, label.size())) == label) {
    body.remove_prefix(label.size());
  }
  return body;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<Topic> parse_trec_topics(std::string_view text, const TokenizeOptions& opts) {
  const auto markers = find_markers(text);
  std::vector<Topic> topics;

  struct Pending {
    std::size_t offset;
    std::optional<std::string> num;
    std::optional<TokenSeq> title;
    TokenSeq desc, narr;
  };
  std::optional<Pending> cur;

  auto finish = [&]() {
    if (!cur) return;
    if (!cur->title) throw ParseError("topic record without <title>", ParseError::Where::ByteOffset, cur->offset);
    if (!cur->num || cur->num->empty()) {
      throw ParseError("topic record without <num>", ParseError::Where::ByteOffset, cur->offset);
    }
    topics.push_back(Topic{*cur->num, std::move(*cur->title), std::move(cur->desc), std::move(cur->narr)});
    cur.reset();
  };

  for (std::size_t i = 0; i < markers.size(); ++i) {
    const Marker& m = markers[i];
    if (m.field == Field::Close) continue;
    const std::size_t begin = m.offset + m.length;
    const std::size_t end = i + 1 < markers.size() ? markers[i + 1].offset : text.size();
    const std::string_view body = text.substr(begin, end - begin);

    switch (m.field) {
      case Field::Num:
        finish();
        cur = Pending{m.offset, trim(strip_label(body, "number:")), std::nullopt, {}, {}};
        break;
      case Field::Title:
        if (!cur) throw ParseError("topic record without <num>", ParseError::Where::ByteOffset, m.offset);
        cur->title = tokenize(strip_label(body, "topic:"), opts);
        if (cur->title->empty()) throw ParseError("empty <title>", ParseError::Where::ByteOffset, m.offset);
        break;
      case Field::Desc:
        if (!cur) throw ParseError("topic record without <num>", ParseError::Where::ByteOffset, m.offset);
        cur->desc = tokenize(strip_label(body, "description:"), opts);
        break;
      case Field::Narr:
        if (!cur) throw ParseError("topic record without <num>", ParseError::Where::ByteOffset, m.offset);
        cur->narr = tokenize(strip_label(body, "narrative:"), opts);
        break;
      case Field::Close:
        break;
    }
  }
  finish();
  return topics;
}

std::string serialize_trec_topics(std::span<const Topic> topics) {
  std::string out;
  for (const auto& t : topics) {
    out += "<top>\n<num> Number: " + t.id + "\n";
    out += "<title> " + join(t.title) + "\n\n";
    out += "<desc> Description:\n" + join(t.description) + "\n\n";
    out += "<narr> Narrative:\n" + join(t.narrative) + "\n</top>\n\n";
  }
  return out;
}

// --- documents ------------------------------------------------------------------

std::vector<Document> parse_documents(std::string_view text, const TokenizeOptions& opts) {
  std::vector<Document> docs;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    auto t1 = line.find('\t');
    if (t1 == std::string_view::npos) throw ParseError("expected 'docid<TAB>title<TAB>body'", ParseError::Where::Line, lineno);
    auto t2 = line.find('\t', t1 + 1);
    Document d;
    d.id = trim(line.substr(0, t1));
    if (d.id.empty()) throw ParseError("empty document id", ParseError::Where::Line, lineno);
    if (t2 == std::string_view::npos) {
      d.title = tokenize(line.substr(t1 + 1), opts);
    } else {
      d.title = tokenize(line.substr(t1 + 1, t2 - t1 - 1), opts);
      d.body = tokenize(line.substr(t2 + 1), opts);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

std::string serialize_documents(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) out += d.id + "\t" + join(d.title) + "\t" + join(d.body) + "\n";
  return out;
}

}  // namespace usersim
