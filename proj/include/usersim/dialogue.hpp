#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "usersim/random.hpp"

namespace usersim::dialogue {

// --- acts -------------------------------------------------------------------------

/// Open set of dialogue intents; domains add their own beyond the built-ins.
struct Intent {
  std::string name;

  friend auto operator<=>(const Intent&, const Intent&) = default;
};

namespace intent {
inline const Intent Inform{"INFORM"};
inline const Intent Request{"REQUEST"};
inline const Intent Negate{"NEGATE"};
inline const Intent Deny{"DENY"};
inline const Intent Affirm{"AFFIRM"};
inline const Intent Bye{"BYE"};
inline const Intent Greeting{"GREETING"};
inline const Intent Offer{"OFFER"};
inline const Intent Recommend{"RECOMMEND"};
inline const Intent NoMatch{"NOMATCH"};
}  // namespace intent

inline constexpr std::string_view kDontCare = "dontcare";

struct SlotValue {
  std::string slot;
  std::string value;  // empty for requested slots

  friend auto operator<=>(const SlotValue&, const SlotValue&) = default;
};

struct DialogueAct {
  Intent intent;
  std::vector<SlotValue> slots;

  static DialogueAct inform(std::string slot, std::string value) { return {intent::Inform, {{slot, value}}}; }
  static DialogueAct request(std::string slot) { return {intent::Request, {{slot, ""}}}; }
  static DialogueAct bye() { return {intent::Bye, {}}; }

  bool is(const Intent& i) const { return intent == i; }
  /// Throws ContractViolation unless BYE has no slots and INFORM/REQUEST have some.
  void validate() const;
  /// INFORM(type=bar,drinks=beer), REQUEST(name), BYE.
  std::string to_string() const;

  friend bool operator==(const DialogueAct&, const DialogueAct&) = default;
};

// --- goal and agenda ------------------------------------------------------------

struct Goal {
  std::vector<SlotValue> constraints;  // priority order: first is most important
  std::vector<SlotValue> requests;     // empty value = still unknown

  const SlotValue* constraint(std::string_view slot) const;
  SlotValue* request(std::string_view slot);
  const SlotValue* request(std::string_view slot) const;
  bool all_requests_filled() const;
  /// Throws ContractViolation when a slot is both a constraint and a request.
  void validate() const;
};

class Agenda {
 public:
  Agenda() = default;
  /// Items listed top first, the order used when writing agendas out.
  static Agenda from_top_down(std::vector<DialogueAct> items);

  void push(DialogueAct act) { stack_.push_back(std::move(act)); }
  const DialogueAct& top() const;
  std::size_t size() const { return stack_.size(); }
  bool empty() const { return stack_.empty(); }
  std::vector<DialogueAct> top_down() const { return {stack_.rbegin(), stack_.rend()}; }
  /// Bottom first.
  const std::vector<DialogueAct>& items() const { return stack_; }
  std::vector<DialogueAct>& items() { return stack_; }

  /// Exactly one BYE, at the bottom, and no duplicate acts.
  bool well_formed() const;

  friend bool operator==(const Agenda&, const Agenda&) = default;

 private:
  std::vector<DialogueAct> stack_;  // back() is the top
};

/// INFORM per constraint on top, REQUEST per request below, BYE at the bottom.
Agenda init_agenda(const Goal& goal);

/// Pops `n` acts and merges them into one; all must share an intent other than BYE
/// when n > 1 (ContractViolation otherwise).
DialogueAct pop_user_act(Agenda& agenda, std::size_t n);

// --- ontology, preferences, goals ----------------------------------------------

struct SlotSpec {
  std::string name;
  std::vector<std::string> values;
  bool requestable = false;
};

struct Ontology {
  std::vector<SlotSpec> slots;

  const SlotSpec* find(std::string_view name) const;
};

/// Lines `slot <name> [requestable] [: v1 | v2 | ...]`; '#' starts a comment.
Ontology parse_ontology(std::string_view text);

class PreferenceStore {
 public:
  /// Stored preference, or a fresh one drawn uniformly from {-1, 1} and kept.
  double get(const std::string& slot, const std::string& value, Rng& rng);
  std::optional<double> peek(const std::string& slot, const std::string& value) const;
  /// Throws ContractViolation outside [-1, 1].
  void set(const std::string& slot, const std::string& value, double pref);
  std::size_t size() const { return prefs_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, double> prefs_;
};

/// `n_c` constraint slots (with a value domain) and `n_r` requestable slots,
/// each kept in ontology order. With `prefs`, constraint values are drawn from
/// those the user likes when any exist.
Goal sample_goal(const Ontology& ontology, std::size_t n_c, std::size_t n_r, Rng& rng,
                 PreferenceStore* prefs = nullptr);

// --- reacting to the system -------------------------------------------------------

struct AgendaRules {
  // Corrective push when the system contradicts a constraint.
  double p_negate = 0.2;
  double p_inform = 0.6;
  double p_deny = 0.2;

  static AgendaRules deterministic_inform() { return {0.0, 1.0, 0.0}; }
  void validate() const;
};

/// Goal update from the system act, the pushes it triggers, then cleanup.
void receive_system_act(Agenda& agenda, Goal& goal, PreferenceStore& prefs, const DialogueAct& sys,
                        const AgendaRules& rules, Rng& rng);

/// Drops REQUESTs for filled slots, INFORMs that no longer match the goal and
/// duplicates (keeping the topmost), and leaves a single BYE at the bottom.
void cleanup(Agenda& agenda, const Goal& goal);

// --- interaction model ------------------------------------------------------------

struct InteractionModel {
  Intent start = intent::Inform;
  std::set<Intent> user_intents;
  std::map<Intent, std::set<Intent>> transitions;  // user intent -> next user intents
  std::map<Intent, std::set<Intent>> expected;     // user intent -> acceptable system intents
  bool accept_all = false;

  /// Everything is expected.
  static InteractionModel permissive();
  /// INFORM/REQUEST/NEGATE/DENY/AFFIRM/BYE with the usual system replies.
  static InteractionModel basic();

  /// Throws ContractViolation when some user intent is unreachable from `start`.
  void validate() const;
};

/// Whether `sys` is an acceptable reply to `user`. Unknown user intents throw.
bool check_expected(const InteractionModel& model, const DialogueAct& user, const DialogueAct& sys);

// --- generation -------------------------------------------------------------------

inline constexpr std::string_view kClosing = "Thank you, goodbye.";

struct Templates {
  std::map<std::string, std::vector<std::string>> by_intent;
};

/// Lines `INTENT: pattern with {slot} placeholders`; '#' starts a comment.
Templates parse_templates(std::string_view text);

/// Fills a template whose placeholders match the act's slots; REQUEST slots
/// render their name. Multi-slot acts without such a template are joined from
/// single-slot realizations. Throws ConfigError for a missing template or a
/// placeholder the act does not carry.
std::string realize(const DialogueAct& act, const Templates& templates, Rng& rng);

// --- conversational search ------------------------------------------------------

/// States 0 = start, 1..n = subtopics, n+1 = end (absorbing).
class TransitionTable {
 public:
  explicit TransitionTable(Eigen::MatrixXd c, std::vector<std::vector<std::string>> queries = {});
  /// Relevance-dependent: `rel` after a relevant answer, `nonrel` otherwise.
  /// The start rows must agree, since nothing has been answered yet.
  TransitionTable(Eigen::MatrixXd rel, Eigen::MatrixXd nonrel, std::vector<std::vector<std::string>> queries = {});

  std::size_t subtopics() const { return static_cast<std::size_t>(rel_.rows()) - 2; }
  std::size_t start() const { return 0; }
  std::size_t end() const { return subtopics() + 1; }
  bool relevance_dependent() const { return dependent_; }
  const Eigen::MatrixXd& matrix(bool relevant = true) const { return relevant ? rel_ : nonrel_; }
  bool has_queries() const { return !queries_.empty(); }
  const std::vector<std::string>& queries(std::size_t subtopic) const;

 private:
  void check(const Eigen::MatrixXd& m) const;

  Eigen::MatrixXd rel_;
  Eigen::MatrixXd nonrel_;
  bool dependent_ = false;
  std::vector<std::vector<std::string>> queries_;
};

/// Next state from the applicable row. Relevance is required for relevance-dependent
/// tables except from the start state.
std::size_t subtopic_step(const TransitionTable& table, std::size_t state, std::optional<bool> relevance, Rng& rng);

/// Row-normalized transition counts over state paths (each from start to end).
/// Rows never left go straight to the end state.
Eigen::MatrixXd estimate_transitions(const std::vector<std::vector<std::size_t>>& paths, std::size_t subtopics);

struct PersistenceParams {
  double leave_if_relevant = 0.0;     // P(L=l | Q=q, R=r)
  double leave_if_nonrelevant = 0.0;  // P(L=l | Q=q, R=not r)
};

/// Turn 1 always queries; later turns continue unless the user leaves.
bool continue_querying(const PersistenceParams& params, std::size_t turn, bool previous_relevant, Rng& rng);

struct ConversationTurn {
  std::size_t state;
  std::string query;
  bool relevant;
};

struct ConversationLog {
  std::vector<ConversationTurn> turns;
  std::vector<std::size_t> path;  // visited states, start first
  std::string end_reason;         // end_state, persistence, max_turns
};

/// Judges the system's answer to `query` for `subtopic`.
using AnswerFn = std::function<bool(std::size_t subtopic, const std::string& query, Rng& rng)>;

ConversationLog run_conversation(const TransitionTable& table, const PersistenceParams& persistence,
                                 const AnswerFn& answer, std::size_t max_turns, Rng& rng);

// --- task-oriented dialogue loop --------------------------------------------------

enum class Speaker { User, System };

struct Utterance {
  Speaker speaker;
  DialogueAct act;
  std::string text;
};

struct DialogueLog {
  std::vector<Utterance> utterances;
  Goal final_goal;
  bool success = false;
  std::string end_reason;  // bye, system_bye, max_turns, replacement_budget, malformed_system_act

  std::size_t user_turns() const;
};

struct DialogueConfig {
  Goal goal;
  AgendaRules rules;
  InteractionModel model = InteractionModel::permissive();
  const Templates* templates = nullptr;
  double p_init = 0.3;  // P(n = 2) when the top two acts share an intent
  std::size_t replacement_budget = 2;
  PreferenceStore prefs;
};

using SystemFn = std::function<DialogueAct(const DialogueAct& user, Rng& rng)>;

DialogueLog run_dialogue(DialogueConfig config, const SystemFn& system, std::size_t max_turns, Rng& rng);

/// Echoes INFORMs, answers REQUESTs from `database`, says BYE to BYE.
SystemFn cooperative_system(std::map<std::string, std::string> database);

struct DialogueStats {
  double avg_length = 0.0;  // utterances per dialogue
  double user_system_ratio = 0.0;
  std::map<std::string, double> intent_distribution;  // over user acts
  double cooperativeness = 0.0;  // requested slots the next system act provided
  double success_rate = 0.0;
};

DialogueStats corpus_stats(const std::vector<DialogueLog>& logs);

}  // namespace usersim::dialogue
