#include <algorithm>

#include "usersim/dialogue.hpp"
#include "usersim/error.hpp"

namespace usersim::dialogue {

std::size_t DialogueLog::user_turns() const {
  return static_cast<std::size_t>(
      std::count_if(utterances.begin(), utterances.end(), [](const auto& u) { return u.speaker == Speaker::User; }));
}

namespace {

bool top_two_mergeable(const Agenda& agenda) {
  const auto& st = agenda.items();
  if (st.size() < 2) return false;
  const auto& a = st[st.size() - 1];
  const auto& b = st[st.size() - 2];
  return a.intent == b.intent && !a.is(intent::Bye);
}

}  // namespace

DialogueLog run_dialogue(DialogueConfig config, const SystemFn& system, std::size_t max_turns, Rng& rng) {
  config.goal.validate();
  config.rules.validate();
  config.model.validate();
  DialogueLog log;
  Goal& goal = config.goal;
  Agenda agenda = init_agenda(goal);
  std::set<std::string> violated;  // constraint slots the system last contradicted
  std::size_t replacements = 0;

  auto say = [&](Speaker who, const DialogueAct& act) {
    std::string text = config.templates != nullptr ? realize(act, *config.templates, rng) : act.to_string();
    log.utterances.push_back({who, act, std::move(text)});
  };

  std::size_t turns = 0;
  for (;;) {
    if (turns >= max_turns) {
      log.end_reason = "max_turns";
      break;
    }
    const std::size_t n = top_two_mergeable(agenda) && bernoulli(rng, config.p_init) ? 2 : 1;
    const DialogueAct user = pop_user_act(agenda, n);
    say(Speaker::User, user);
    ++turns;
    if (user.is(intent::Bye)) {
      log.end_reason = "bye";
      break;
    }

    DialogueAct sys;
    try {
      sys = system(user, rng);
      sys.validate();
    } catch (const std::exception&) {
      log.end_reason = "malformed_system_act";
      break;
    }
    say(Speaker::System, sys);

    if (!check_expected(config.model, user, sys)) {
      if (replacements == config.replacement_budget) {
        log.end_reason = "replacement_budget";
        break;
      }
      ++replacements;
      agenda.push(user);  // repeat the act the system did not understand
    }
    if (sys.is(intent::Inform)) {
      for (const auto& sv : sys.slots) {
        const auto* c = goal.constraint(sv.slot);
        if (c == nullptr) continue;
        if (c->value == sv.value || c->value == kDontCare) {
          violated.erase(sv.slot);
        } else {
          violated.insert(sv.slot);
        }
      }
    }
    receive_system_act(agenda, goal, config.prefs, sys, config.rules, rng);
    if (sys.is(intent::Bye)) {
      log.end_reason = "system_bye";
      break;
    }
  }
  const bool reached_end = log.end_reason == "bye" || log.end_reason == "system_bye";
  log.success = reached_end && goal.all_requests_filled() && violated.empty();
  log.final_goal = goal;
  return log;
}

SystemFn cooperative_system(std::map<std::string, std::string> database) {
  return [db = std::move(database)](const DialogueAct& user, Rng&) -> DialogueAct {
    if (user.is(intent::Bye)) return DialogueAct::bye();
    if (user.is(intent::Request)) {
      DialogueAct a{intent::Inform, {}};
      for (const auto& sv : user.slots) {
        const auto it = db.find(sv.slot);
        a.slots.push_back({sv.slot, it != db.end() ? it->second : "unknown"});
      }
      return a;
    }
    if (!user.slots.empty()) return {intent::Inform, user.slots};
    return DialogueAct::request("more");
  };
}

DialogueStats corpus_stats(const std::vector<DialogueLog>& logs) {
  if (logs.empty()) throw ContractViolation("corpus statistics need at least one dialogue");
  DialogueStats s;
  std::size_t utterances = 0;
  std::size_t user = 0;
  std::size_t requested = 0;
  std::size_t provided = 0;
  std::size_t successes = 0;
  for (const auto& log : logs) {
    utterances += log.utterances.size();
    successes += log.success ? 1 : 0;
    for (std::size_t i = 0; i < log.utterances.size(); ++i) {
      const auto& u = log.utterances[i];
      if (u.speaker != Speaker::User) continue;
      ++user;
      s.intent_distribution[u.act.intent.name] += 1.0;
      if (!u.act.is(intent::Request)) continue;
      const Utterance* reply = i + 1 < log.utterances.size() ? &log.utterances[i + 1] : nullptr;
      for (const auto& sv : u.act.slots) {
        ++requested;
        if (reply == nullptr || reply->speaker != Speaker::System) continue;
        const auto& rs = reply->act.slots;
        if (std::any_of(rs.begin(), rs.end(), [&](const SlotValue& r) { return r.slot == sv.slot && !r.value.empty(); })) {
          ++provided;
        }
      }
    }
  }
  const std::size_t system = utterances - user;
  s.avg_length = static_cast<double>(utterances) / static_cast<double>(logs.size());
  s.user_system_ratio = system > 0 ? static_cast<double>(user) / static_cast<double>(system) : 0.0;
  if (user > 0) {
    for (auto& [_, v] : s.intent_distribution) v /= static_cast<double>(user);
  }
  s.cooperativeness = requested > 0 ? static_cast<double>(provided) / static_cast<double>(requested) : 0.0;
  s.success_rate = static_cast<double>(successes) / static_cast<double>(logs.size());
  return s;
}

}  // namespace usersim::dialogue
