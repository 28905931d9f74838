#include <algorithm>
#include <set>

#include "usersim/detail/spec_string.hpp"
#include "usersim/dialogue.hpp"
#include "usersim/error.hpp"

namespace usersim::dialogue {

namespace {

std::set<std::string> placeholders(const std::string& pattern) {
  std::set<std::string> out;
  for (std::size_t pos = pattern.find('{'); pos != std::string::npos; pos = pattern.find('{', pos + 1)) {
    const auto close = pattern.find('}', pos);
    if (close == std::string::npos) throw ConfigError("unterminated placeholder in template '" + pattern + "'");
    out.insert(pattern.substr(pos + 1, close - pos - 1));
  }
  return out;
}

std::string fill(const std::string& pattern, const DialogueAct& act) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    const auto open = pattern.find('{', i);
    if (open == std::string::npos) {
      out.append(pattern, i);
      break;
    }
    const auto close = pattern.find('}', open);
    if (close == std::string::npos) throw ConfigError("unterminated placeholder in template '" + pattern + "'");
    out.append(pattern, i, open - i);
    const auto name = pattern.substr(open + 1, close - open - 1);
    const auto it = std::find_if(act.slots.begin(), act.slots.end(), [&](const auto& sv) { return sv.slot == name; });
    if (it == act.slots.end()) {
      throw ConfigError("template placeholder {" + name + "} not carried by " + act.to_string());
    }
    out += it->value.empty() ? it->slot : it->value;
    i = close + 1;
  }
  return out;
}

}  // namespace

Templates parse_templates(std::string_view text) {
  Templates t;
  std::size_t line_no = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'INTENT: pattern'", ParseError::Where::Line, line_no);
    auto intent = detail::trim(line.substr(0, colon));
    auto pattern = detail::trim(line.substr(colon + 1));
    if (intent.empty() || pattern.empty()) {
      throw ParseError("expected 'INTENT: pattern'", ParseError::Where::Line, line_no);
    }
    placeholders(pattern);
    t.by_intent[intent].push_back(std::move(pattern));
  }
  return t;
}

std::string realize(const DialogueAct& act, const Templates& templates, Rng& rng) {
  if (act.is(intent::Bye)) return std::string(kClosing);
  const auto it = templates.by_intent.find(act.intent.name);
  if (it == templates.by_intent.end() || it->second.empty()) {
    throw ConfigError("no template for intent " + act.intent.name);
  }
  std::set<std::string> slots;
  for (const auto& sv : act.slots) slots.insert(sv.slot);

  std::vector<const std::string*> exact;
  for (const auto& p : it->second) {
    if (placeholders(p) == slots) exact.push_back(&p);
  }
  if (!exact.empty()) {
    const auto pick = std::min(exact.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(exact.size())));
    return fill(*exact[pick], act);
  }
  if (act.slots.size() > 1) {
    std::string out;
    for (const auto& sv : act.slots) {
      if (!out.empty()) out += " and ";
      out += realize(DialogueAct{act.intent, {sv}}, templates, rng);
    }
    return out;
  }
  // No arity match: use any variant, which reports the placeholder it cannot fill.
  return fill(it->second.front(), act);
}

}  // namespace usersim::dialogue
