#include <algorithm>
#include <cmath>

#include "usersim/detail/spec_string.hpp"
#include "usersim/dialogue.hpp"
#include "usersim/error.hpp"

namespace usersim::dialogue {

void DialogueAct::validate() const {
  if (intent.name.empty()) throw ContractViolation("dialogue act without an intent");
  if (is(intent::Bye) && !slots.empty()) throw ContractViolation("BYE carries no slots");
  if ((is(intent::Inform) || is(intent::Request)) && slots.empty()) {
    throw ContractViolation(intent.name + " needs at least one slot");
  }
  for (const auto& sv : slots) {
    if (sv.slot.empty()) throw ContractViolation(intent.name + " has an unnamed slot");
  }
}

std::string DialogueAct::to_string() const {
  std::string s = intent.name;
  if (slots.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0) s += ',';
    s += slots[i].slot;
    if (!slots[i].value.empty()) s += "=" + slots[i].value;
  }
  return s + ')';
}

const SlotValue* Goal::constraint(std::string_view slot) const {
  const auto it = std::find_if(constraints.begin(), constraints.end(), [&](const auto& c) { return c.slot == slot; });
  return it == constraints.end() ? nullptr : &*it;
}

SlotValue* Goal::request(std::string_view slot) {
  const auto it = std::find_if(requests.begin(), requests.end(), [&](const auto& r) { return r.slot == slot; });
  return it == requests.end() ? nullptr : &*it;
}

const SlotValue* Goal::request(std::string_view slot) const { return const_cast<Goal*>(this)->request(slot); }

bool Goal::all_requests_filled() const {
  return std::all_of(requests.begin(), requests.end(), [](const auto& r) { return !r.value.empty(); });
}

void Goal::validate() const {
  std::set<std::string> seen;
  for (const auto& c : constraints) {
    if (!seen.insert(c.slot).second) throw ContractViolation("duplicate constraint slot '" + c.slot + "'");
  }
  for (const auto& r : requests) {
    if (!seen.insert(r.slot).second) throw ContractViolation("slot '" + r.slot + "' is both constraint and request");
  }
}

Agenda Agenda::from_top_down(std::vector<DialogueAct> items) {
  Agenda a;
  a.stack_.assign(items.rbegin(), items.rend());
  return a;
}

const DialogueAct& Agenda::top() const {
  if (stack_.empty()) throw ContractViolation("agenda is empty");
  return stack_.back();
}

bool Agenda::well_formed() const {
  if (stack_.empty() || !stack_.front().is(intent::Bye)) return false;
  for (std::size_t i = 0; i < stack_.size(); ++i) {
    if (i > 0 && stack_[i].is(intent::Bye)) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (stack_[i] == stack_[j]) return false;
    }
  }
  return true;
}

Agenda init_agenda(const Goal& goal) {
  goal.validate();
  Agenda a;
  a.push(DialogueAct::bye());
  for (auto it = goal.requests.rbegin(); it != goal.requests.rend(); ++it) a.push(DialogueAct::request(it->slot));
  for (auto it = goal.constraints.rbegin(); it != goal.constraints.rend(); ++it) {
    a.push(DialogueAct::inform(it->slot, it->value));
  }
  return a;
}

DialogueAct pop_user_act(Agenda& agenda, std::size_t n) {
  auto& st = agenda.items();
  if (n == 0 || n > st.size()) {
    throw ContractViolation("cannot pop " + std::to_string(n) + " acts from an agenda of " +
                            std::to_string(st.size()));
  }
  const auto first = st.end() - static_cast<std::ptrdiff_t>(n);
  if (n > 1) {
    const Intent& i = st.back().intent;
    const bool mergeable = !st.back().is(intent::Bye) &&
                           std::all_of(first, st.end(), [&](const DialogueAct& a) { return a.intent == i; });
    if (!mergeable) throw ContractViolation("top " + std::to_string(n) + " agenda acts cannot be merged");
  }
  DialogueAct act{st.back().intent, {}};
  for (auto it = st.rbegin(); it != st.rbegin() + static_cast<std::ptrdiff_t>(n); ++it) {
    act.slots.insert(act.slots.end(), it->slots.begin(), it->slots.end());
  }
  st.erase(first, st.end());
  return act;
}

// --- ontology and preferences --------------------------------------------------

const SlotSpec* Ontology::find(std::string_view name) const {
  const auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.name == name; });
  return it == slots.end() ? nullptr : &*it;
}

Ontology parse_ontology(std::string_view text) {
  Ontology o;
  std::size_t line_no = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto colon = line.find(':');
    std::vector<std::string> head;
    for (const auto& w : detail::split(detail::trim(line.substr(0, colon)), ' ')) {
      if (!w.empty()) head.push_back(w);
    }
    const bool ok = (head.size() == 2 || (head.size() == 3 && head[2] == "requestable")) && head[0] == "slot";
    if (!ok) throw ParseError("expected 'slot <name> [requestable] [: values]'", ParseError::Where::Line, line_no);
    SlotSpec spec{head[1], {}, head.size() == 3};
    if (o.find(spec.name) != nullptr) {
      throw ParseError("duplicate slot '" + spec.name + "'", ParseError::Where::Line, line_no);
    }
    if (colon != std::string::npos) {
      for (const auto& v : detail::split(line.substr(colon + 1), '|')) {
        auto value = detail::trim(v);
        if (value.empty()) throw ParseError("empty value for slot '" + spec.name + "'", ParseError::Where::Line, line_no);
        spec.values.push_back(std::move(value));
      }
    }
    o.slots.push_back(std::move(spec));
  }
  return o;
}

double PreferenceStore::get(const std::string& slot, const std::string& value, Rng& rng) {
  const auto key = std::make_pair(slot, value);
  if (const auto it = prefs_.find(key); it != prefs_.end()) return it->second;
  const double p = bernoulli(rng, 0.5) ? 1.0 : -1.0;
  prefs_.emplace(key, p);
  return p;
}

std::optional<double> PreferenceStore::peek(const std::string& slot, const std::string& value) const {
  const auto it = prefs_.find({slot, value});
  if (it == prefs_.end()) return std::nullopt;
  return it->second;
}

void PreferenceStore::set(const std::string& slot, const std::string& value, double pref) {
  if (!(pref >= -1.0 && pref <= 1.0)) throw ContractViolation("preference must lie in [-1, 1]");
  prefs_[{slot, value}] = pref;
}

namespace {

std::size_t pick(std::size_t n, Rng& rng) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

/// `k` of `pool` in their original order.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + pick(pool.size() - i, rng)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Goal sample_goal(const Ontology& ontology, std::size_t n_c, std::size_t n_r, Rng& rng, PreferenceStore* prefs) {
  std::vector<std::size_t> informable;
  for (std::size_t i = 0; i < ontology.slots.size(); ++i) {
    if (!ontology.slots[i].values.empty()) informable.push_back(i);
  }
  if (informable.size() < n_c) throw ConfigError("ontology has fewer than " + std::to_string(n_c) + " informable slots");
  Goal g;
  const auto chosen = choose(informable, n_c, rng);
  for (auto i : chosen) {
    const auto& spec = ontology.slots[i];
    std::vector<std::size_t> liked;
    if (prefs != nullptr) {
      for (std::size_t v = 0; v < spec.values.size(); ++v) {
        if (prefs->get(spec.name, spec.values[v], rng) > 0.0) liked.push_back(v);
      }
    }
    const std::size_t v = liked.empty() ? pick(spec.values.size(), rng) : liked[pick(liked.size(), rng)];
    g.constraints.push_back({spec.name, spec.values[v]});
  }
  std::vector<std::size_t> requestable;
  for (std::size_t i = 0; i < ontology.slots.size(); ++i) {
    if (ontology.slots[i].requestable && !std::binary_search(chosen.begin(), chosen.end(), i)) requestable.push_back(i);
  }
  if (requestable.size() < n_r) throw ConfigError("ontology has fewer than " + std::to_string(n_r) + " requestable slots");
  for (auto i : choose(requestable, n_r, rng)) g.requests.push_back({ontology.slots[i].name, ""});
  return g;
}

// --- system acts ------------------------------------------------------------------

void AgendaRules::validate() const {
  for (double p : {p_negate, p_inform, p_deny}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("corrective push probabilities must lie in [0,1]");
  }
  if (std::abs(p_negate + p_inform + p_deny - 1.0) > 1e-9) throw ConfigError("corrective push probabilities must sum to 1");
}

void cleanup(Agenda& agenda, const Goal& goal) {
  auto& st = agenda.items();
  std::vector<DialogueAct> kept;  // built top first
  for (auto it = st.rbegin(); it != st.rend(); ++it) {
    DialogueAct act = *it;
    if (act.is(intent::Bye)) continue;
    if (act.is(intent::Request)) {
      std::erase_if(act.slots, [&](const SlotValue& sv) {
        const auto* r = goal.request(sv.slot);
        return r != nullptr && !r->value.empty();
      });
      if (act.slots.empty()) continue;
    }
    if (act.is(intent::Inform)) {
      std::erase_if(act.slots, [&](const SlotValue& sv) {
        const auto* c = goal.constraint(sv.slot);
        return c != nullptr && c->value != sv.value;
      });
      if (act.slots.empty()) continue;
    }
    if (std::find(kept.begin(), kept.end(), act) != kept.end()) continue;
    kept.push_back(std::move(act));
  }
  kept.push_back(DialogueAct::bye());
  st.assign(kept.rbegin(), kept.rend());
}

void receive_system_act(Agenda& agenda, Goal& goal, PreferenceStore& prefs, const DialogueAct& sys,
                        const AgendaRules& rules, Rng& rng) {
  sys.validate();
  rules.validate();
  if (sys.is(intent::Inform)) {
    for (const auto& sv : sys.slots) {
      if (auto* r = goal.request(sv.slot); r != nullptr && r->value.empty() && !sv.value.empty()) r->value = sv.value;
      const auto* c = goal.constraint(sv.slot);
      if (c == nullptr || c->value == sv.value || c->value == kDontCare) continue;
      const double u = uniform01(rng);
      if (u < rules.p_negate) {
        agenda.push({intent::Negate, {}});
      } else if (u < rules.p_negate + rules.p_inform) {
        agenda.push(DialogueAct::inform(c->slot, c->value));
      } else {
        agenda.push({intent::Deny, {sv, *c}});
      }
    }
  } else if (sys.is(intent::Request)) {
    for (const auto& sv : sys.slots) {
      const auto* c = goal.constraint(sv.slot);
      agenda.push(DialogueAct::inform(sv.slot, c != nullptr ? c->value : std::string(kDontCare)));
    }
  } else if (sys.is(intent::NoMatch)) {
    // Relax the least important constraint that still binds.
    for (auto it = goal.constraints.rbegin(); it != goal.constraints.rend(); ++it) {
      if (it->value == kDontCare) continue;
      it->value = std::string(kDontCare);
      agenda.push(DialogueAct::inform(it->slot, it->value));
      break;
    }
  } else if (sys.is(intent::Offer) || sys.is(intent::Recommend)) {
    bool liked = true;
    for (const auto& sv : sys.slots) liked = prefs.get(sv.slot, sv.value, rng) > 0.0 && liked;
    agenda.push({liked ? intent::Affirm : intent::Negate, {}});
  }
  cleanup(agenda, goal);
}

// --- interaction model ------------------------------------------------------------

InteractionModel InteractionModel::permissive() {
  InteractionModel m;
  m.accept_all = true;
  return m;
}

InteractionModel InteractionModel::basic() {
  using namespace intent;
  InteractionModel m;
  m.start = Inform;
  m.user_intents = {Inform, Request, Negate, Deny, Affirm, Bye};
  for (const auto& i : m.user_intents) m.transitions[i] = m.user_intents;
  m.expected[Inform] = {Inform, Request, Offer, Recommend, NoMatch};
  m.expected[Request] = {Inform, NoMatch};
  m.expected[Negate] = {Inform, Request, Offer, Recommend};
  m.expected[Deny] = {Inform, Request, Offer, Recommend};
  m.expected[Affirm] = {Inform, Request, Offer, Bye};
  m.expected[Bye] = {Bye};
  return m;
}

void InteractionModel::validate() const {
  if (accept_all) return;
  if (user_intents.count(start) == 0) throw ContractViolation("start intent " + start.name + " is not a user intent");
  std::set<Intent> seen{start};
  std::vector<Intent> todo{start};
  while (!todo.empty()) {
    const Intent i = todo.back();
    todo.pop_back();
    const auto it = transitions.find(i);
    if (it == transitions.end()) continue;
    for (const auto& j : it->second) {
      if (seen.insert(j).second) todo.push_back(j);
    }
  }
  for (const auto& i : user_intents) {
    if (seen.count(i) == 0) throw ContractViolation("intent " + i.name + " is unreachable from " + start.name);
  }
}

bool check_expected(const InteractionModel& model, const DialogueAct& user, const DialogueAct& sys) {
  if (model.accept_all) return true;
  if (model.user_intents.count(user.intent) == 0) {
    throw ContractViolation("intent " + user.intent.name + " is not in the interaction model");
  }
  const auto it = model.expected.find(user.intent);
  return it != model.expected.end() && it->second.count(sys.intent) > 0;
}

}  // namespace usersim::dialogue
