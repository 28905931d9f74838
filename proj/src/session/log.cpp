#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "usersim/detail/overloaded.hpp"
#include "usersim/error.hpp"
#include "usersim/session.hpp"

namespace usersim::session {

using detail::Overloaded;
using Json = nlohmann::ordered_json;

std::string_view kind_name(const Payload& payload) {
  static constexpr std::string_view names[] = {"SessionStart",    "QueryIssued", "SerpShown",
                                               "SerpSkipped",     "SnippetExamined", "Click",
                                               "DocJudged",       "StopQuery",   "SessionEnd"};
  static_assert(std::size(names) == std::variant_size_v<Payload>);
  return names[payload.index()];
}

double event_cost(const behavior::CostModel& cost, const Payload& payload) {
  using behavior::Action;
  return std::visit(Overloaded{
                        [&](const event::SessionStart& e) {
                          return e.examined_topic ? action_cost(cost, Action::TopicExamination) : 0.0;
                        },
                        [&](const event::QueryIssued&) { return action_cost(cost, Action::Query); },
                        [&](const event::SerpShown&) { return action_cost(cost, Action::SerpEntry); },
                        [&](const event::SerpSkipped&) { return action_cost(cost, Action::SerpEntry); },
                        [&](const event::SnippetExamined&) { return action_cost(cost, Action::Snippet); },
                        [&](const event::Click&) { return action_cost(cost, Action::Click); },
                        [&](const event::DocJudged& e) { return action_cost(cost, Action::DocumentRead, e.length); },
                        [&](const event::StopQuery&) { return action_cost(cost, Action::Stop); },
                        [&](const event::SessionEnd&) { return action_cost(cost, Action::Stop); },
                    },
                    payload);
}

MalformedLog::MalformedLog(std::size_t index, std::string_view kind, const std::string& why)
    : std::runtime_error("malformed log at event " + std::to_string(index) + " (" + std::string(kind) +
                         "): " + why),
      index_(index) {}

void check_log(const InteractionLog& log) {
  if (log.events.empty()) throw MalformedLog(0, "none", "log is empty");
  enum class Phase { Idle, Query, Serp };
  Phase phase = Phase::Idle;
  std::size_t last_rank = 0;
  const event::SnippetExamined* last_snippet = nullptr;
  const event::Click* last_click = nullptr;
  double last_time = 0.0;

  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& ev = log.events[i];
    const auto kind = kind_name(ev.payload);
    auto fail = [&](const std::string& why) { throw MalformedLog(i, kind, why); };

    if (!(ev.time >= last_time)) fail("time offset decreases");
    last_time = ev.time;
    const bool first = i == 0;
    const bool last = i + 1 == log.events.size();
    if (first != std::holds_alternative<event::SessionStart>(ev.payload)) {
      fail(first ? "log must start with SessionStart" : "SessionStart after the first event");
    }
    if (last != std::holds_alternative<event::SessionEnd>(ev.payload)) {
      fail(last ? "log must end with SessionEnd" : "events after SessionEnd");
    }

    std::visit(Overloaded{
                   [&](const event::SessionStart&) {},
                   [&](const event::QueryIssued&) {
                     if (phase != Phase::Idle) fail("query issued before the previous one stopped");
                     phase = Phase::Query;
                   },
                   [&](const event::SerpShown&) {
                     if (phase != Phase::Query) fail("SERP without a query");
                     phase = Phase::Serp;
                     last_rank = 0;
                     last_snippet = nullptr;
                     last_click = nullptr;
                   },
                   [&](const event::SerpSkipped&) {
                     if (phase != Phase::Query) fail("SERP skipped without a query");
                   },
                   [&](const event::SnippetExamined& e) {
                     if (phase != Phase::Serp) fail("snippet examined outside a SERP");
                     if (e.rank <= last_rank) fail("snippet ranks must increase within a SERP");
                     last_rank = e.rank;
                     last_snippet = &e;
                   },
                   [&](const event::Click& e) {
                     if (phase != Phase::Serp || last_snippet == nullptr || last_snippet->rank != e.rank ||
                         last_snippet->doc != e.doc) {
                       fail("click not preceded by an examination of rank " + std::to_string(e.rank));
                     }
                     last_click = &e;
                   },
                   [&](const event::DocJudged& e) {
                     if (last_click == nullptr || last_click->doc != e.doc) fail("judgment without a click");
                     last_click = nullptr;
                   },
                   [&](const event::StopQuery&) {
                     if (phase == Phase::Idle) fail("stop without a query");
                     phase = Phase::Idle;
                   },
                   [&](const event::SessionEnd&) {
                     if (phase != Phase::Idle) fail("session ended inside a query");
                   },
               },
               ev.payload);
  }
}

namespace {

Json to_json(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const event::SessionStart& e) {
                          return Json{{"topic", e.topic}, {"examined_topic", e.examined_topic}};
                        },
                        [](const event::QueryIssued& e) { return Json{{"query", e.query}}; },
                        [](const event::SerpShown& e) { return Json{{"results", e.results}}; },
                        [](const event::SerpSkipped&) { return Json::object(); },
                        [](const event::SnippetExamined& e) {
                          return Json{{"rank", e.rank}, {"doc", e.doc}, {"grade", e.grade}};
                        },
                        [](const event::Click& e) { return Json{{"rank", e.rank}, {"doc", e.doc}}; },
                        [](const event::DocJudged& e) {
                          return Json{
                              {"doc", e.doc}, {"relevant", e.relevant}, {"grade", e.grade}, {"length", e.length}};
                        },
                        [](const event::StopQuery& e) { return Json{{"reason", e.reason}}; },
                        [](const event::SessionEnd& e) { return Json{{"reason", e.reason}}; },
                    },
                    payload);
}

Payload from_json(std::string_view kind, const Json& j) {
  auto str = [&](const char* k) { return j.at(k).get<std::string>(); };
  auto count = [&](const char* k) { return j.at(k).get<std::size_t>(); };
  if (kind == "SessionStart") return event::SessionStart{str("topic"), j.value("examined_topic", true)};
  if (kind == "QueryIssued") return event::QueryIssued{j.at("query").get<Query>()};
  if (kind == "SerpShown") return event::SerpShown{count("results")};
  if (kind == "SerpSkipped") return event::SerpSkipped{};
  if (kind == "SnippetExamined") return event::SnippetExamined{count("rank"), str("doc"), j.at("grade").get<int>()};
  if (kind == "Click") return event::Click{count("rank"), str("doc")};
  if (kind == "DocJudged") {
    return event::DocJudged{str("doc"), j.at("relevant").get<bool>(), j.at("grade").get<int>(), count("length")};
  }
  if (kind == "StopQuery") return event::StopQuery{str("reason")};
  if (kind == "SessionEnd") return event::SessionEnd{str("reason")};
  throw std::invalid_argument("unknown event kind '" + std::string(kind) + "'");
}

}  // namespace

std::string serialize_log(const InteractionLog& log) {
  std::string out;
  char buf[32];
  for (const auto& ev : log.events) {
    const auto res = std::to_chars(buf, buf + sizeof buf, ev.time);
    out.append(buf, res.ptr);
    out += '\t';
    out += kind_name(ev.payload);
    out += '\t';
    out += to_json(ev.payload).dump();
    out += '\n';
  }
  return out;
}

InteractionLog parse_log(std::string_view text) {
  InteractionLog log;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw ParseError("expected 'time<TAB>kind<TAB>payload'", ParseError::Where::Line, line_no);
    Event ev;
    const auto time = line.substr(0, t1);
    const auto res = std::from_chars(time.data(), time.data() + time.size(), ev.time);
    if (res.ec != std::errc() || res.ptr != time.data() + time.size()) {
      throw ParseError("bad time offset '" + std::string(time) + "'", ParseError::Where::Line, line_no);
    }
    try {
      ev.payload = from_json(line.substr(t1 + 1, t2 - t1 - 1), Json::parse(line.substr(t2 + 1)));
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad event: ") + e.what(), ParseError::Where::Line, line_no);
    }
    log.events.push_back(std::move(ev));
  }
  return log;
}

SessionSummary log_summary(const InteractionLog& log, const QrelsTable& qrels) {
  SessionSummary s;
  if (log.events.empty()) return s;
  check_log(log);
  std::set<std::string> found;
  double gain = 0.0;
  for (const auto& ev : log.events) {
    std::visit(Overloaded{
                   [&](const event::SessionStart& e) { s.topic = e.topic; },
                   [&](const event::QueryIssued& e) {
                     ++s.queries;
                     s.query_lengths.push_back(e.query.size());
                     s.clicks_per_query.push_back(0);
                   },
                   [&](const event::SnippetExamined&) { ++s.snippets_examined; },
                   [&](const event::Click&) {
                     ++s.clicks;
                     ++s.clicks_per_query.back();
                   },
                   [&](const event::DocJudged& e) {
                     if (qrels.grade(s.topic, e.doc) >= 1) found.insert(e.doc);
                     if (e.relevant) {
                       gain += e.grade;
                       s.gain_trace.push_back(gain);
                     }
                   },
                   [](const auto&) {},
               },
               ev.payload);
  }
  s.relevant_found = found.size();
  s.total_cost = log.duration();
  return s;
}

}  // namespace usersim::session
