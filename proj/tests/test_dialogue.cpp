#include <catch2/catch_amalgamated.hpp>

#include "usersim/dialogue.hpp"
#include "usersim/error.hpp"

using namespace usersim;
using namespace usersim::dialogue;
using Catch::Matchers::WithinAbs;

namespace {

const char* kBarOntology = R"(# restaurant domain
slot type : bar
slot drinks : beer
slot area : central
slot name requestable
slot addr requestable
slot phone requestable
)";

Goal bar_goal() {
  return {{{"type", "bar"}, {"drinks", "beer"}, {"area", "central"}}, {{"name", ""}, {"addr", ""}, {"phone", ""}}};
}

std::vector<std::string> listing(const Agenda& a) {
  std::vector<std::string> out;
  for (const auto& act : a.top_down()) out.push_back(act.to_string());
  return out;
}

Ontology big_ontology() {
  return parse_ontology(R"(
slot food : thai | pizza | sushi | tapas
slot area : north | south | central
slot price : cheap | moderate | expensive
slot stars : 1 | 2 | 3
slot name requestable
slot addr requestable
slot phone requestable
slot hours requestable
)");
}

}  // namespace

TEST_CASE("acts render and validate") {
  CHECK(DialogueAct{intent::Inform, {{"type", "bar"}, {"drinks", "beer"}}}.to_string() == "INFORM(type=bar,drinks=beer)");
  CHECK(DialogueAct::request("name").to_string() == "REQUEST(name)");
  CHECK(DialogueAct::bye().to_string() == "BYE");
  CHECK_THROWS_AS((DialogueAct{intent::Bye, {{"x", "y"}}}.validate()), ContractViolation);
  CHECK_THROWS_AS((DialogueAct{intent::Inform, {}}.validate()), ContractViolation);
  CHECK_NOTHROW((DialogueAct{intent::Negate, {}}.validate()));
}

TEST_CASE("the bar goal from its ontology") {
  Rng rng(1);
  const auto goal = sample_goal(parse_ontology(kBarOntology), 3, 3, rng);
  CHECK(goal.constraints == bar_goal().constraints);
  CHECK(goal.requests == bar_goal().requests);
}

TEST_CASE("sampled goals") {
  const auto onto = big_ontology();
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto g = sample_goal(onto, 1 + i % 4, i % 3, rng);
    CHECK_NOTHROW(g.validate());
    for (const auto& c : g.constraints) {
      const auto& vals = onto.find(c.slot)->values;
      CHECK(std::find(vals.begin(), vals.end(), c.value) != vals.end());
    }
    for (const auto& r : g.requests) CHECK(r.value.empty());
  }
  const auto lookup = sample_goal(onto, 0, 2, rng);
  CHECK(lookup.constraints.empty());
  CHECK(lookup.requests.size() == 2);
  CHECK_THROWS_AS(sample_goal(onto, 5, 0, rng), ConfigError);
  CHECK_THROWS_AS(sample_goal(onto, 0, 5, rng), ConfigError);
}

TEST_CASE("goals follow stored preferences") {
  const auto onto = big_ontology();
  Rng rng(3);
  PreferenceStore prefs;
  for (const auto& v : onto.find("food")->values) prefs.set("food", v, v == "sushi" ? 1.0 : -1.0);
  for (int i = 0; i < 50; ++i) {
    const auto g = sample_goal(onto, 4, 0, rng, &prefs);
    CHECK(g.constraint("food")->value == "sushi");
  }
}

TEST_CASE("ontology parse errors carry the line") {
  try {
    parse_ontology("slot a : x\nslto b\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(parse_ontology("slot a\nslot a\n"), ParseError);
}

TEST_CASE("initial agenda and popping") {
  auto a = init_agenda(bar_goal());
  CHECK(listing(a) == std::vector<std::string>{"INFORM(type=bar)", "INFORM(drinks=beer)", "INFORM(area=central)",
                                               "REQUEST(name)", "REQUEST(addr)", "REQUEST(phone)", "BYE"});
  CHECK(a.well_formed());
  const auto act = pop_user_act(a, 2);
  CHECK(act.to_string() == "INFORM(type=bar,drinks=beer)");
  CHECK(listing(a) ==
        std::vector<std::string>{"INFORM(area=central)", "REQUEST(name)", "REQUEST(addr)", "REQUEST(phone)", "BYE"});
  // INFORM and REQUEST do not merge.
  CHECK_THROWS_AS(pop_user_act(a, 2), ContractViolation);
  CHECK(pop_user_act(a, 1).to_string() == "INFORM(area=central)");

  auto empty = init_agenda({});
  CHECK(listing(empty) == std::vector<std::string>{"BYE"});
  CHECK(pop_user_act(empty, 1).is(intent::Bye));
  CHECK(empty.empty());
  CHECK_THROWS_AS(pop_user_act(empty, 1), ContractViolation);

  auto two = Agenda::from_top_down({DialogueAct::bye(), DialogueAct::bye()});
  CHECK_FALSE(two.well_formed());
  CHECK_THROWS_AS(pop_user_act(two, 2), ContractViolation);
}

TEST_CASE("agenda size matches the goal") {
  Rng rng(4);
  const auto onto = big_ontology();
  for (int i = 0; i < 50; ++i) {
    const auto g = sample_goal(onto, i % 5, i % 4, rng);
    const auto a = init_agenda(g);
    CHECK(a.size() == g.constraints.size() + g.requests.size() + 1);
    auto copy = a;
    DialogueAct last;
    while (!copy.empty()) last = pop_user_act(copy, 1);
    CHECK(last.is(intent::Bye));
  }
}

TEST_CASE("system acts update goal and agenda") {
  Rng rng(5);
  PreferenceStore prefs;
  const auto rules = AgendaRules::deterministic_inform();

  SECTION("a contradicted constraint is restated") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    pop_user_act(a, 3);
    receive_system_act(a, g, prefs, DialogueAct::inform("area", "north"), rules, rng);
    CHECK(a.top().to_string() == "INFORM(area=central)");
    CHECK(a.well_formed());
  }
  SECTION("an answered request is filled and dropped") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    receive_system_act(a, g, prefs, DialogueAct::inform("phone", "123"), rules, rng);
    CHECK(g.request("phone")->value == "123");
    const auto l = listing(a);
    CHECK(std::find(l.begin(), l.end(), "REQUEST(phone)") == l.end());
    CHECK(l.size() == 6);
  }
  SECTION("irrelevant acts leave the agenda alone") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    const auto before = a;
    receive_system_act(a, g, prefs, DialogueAct::inform("music", "jazz"), rules, rng);
    receive_system_act(a, g, prefs, {intent::Greeting, {}}, rules, rng);
    CHECK(a == before);
  }
  SECTION("system requests are answered from the goal") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    pop_user_act(a, 1);
    receive_system_act(a, g, prefs, DialogueAct::request("type"), rules, rng);
    CHECK(a.top().to_string() == "INFORM(type=bar)");
    receive_system_act(a, g, prefs, DialogueAct::request("music"), rules, rng);
    CHECK(a.top().to_string() == "INFORM(music=dontcare)");
  }
  SECTION("no match relaxes the least important constraint") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    receive_system_act(a, g, prefs, {intent::NoMatch, {}}, rules, rng);
    CHECK(g.constraint("area")->value == "dontcare");
    CHECK(g.constraint("type")->value == "bar");
    CHECK(a.top().to_string() == "INFORM(area=dontcare)");
    CHECK(a.well_formed());
  }
  SECTION("offers are judged by preference") {
    Goal g = bar_goal();
    auto a = init_agenda(g);
    prefs.set("name", "The Eagle", 1.0);
    receive_system_act(a, g, prefs, {intent::Offer, {{"name", "The Eagle"}}}, rules, rng);
    CHECK(a.top().is(intent::Affirm));
    prefs.set("name", "The Mill", -0.5);
    receive_system_act(a, g, prefs, {intent::Offer, {{"name", "The Mill"}}}, rules, rng);
    CHECK(a.top().is(intent::Negate));
  }
}

TEST_CASE("corrective pushes follow the configured split") {
  Rng rng(6);
  PreferenceStore prefs;
  std::map<std::string, int> counts;
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    Goal g = bar_goal();
    Agenda a;
    a.push(DialogueAct::bye());
    receive_system_act(a, g, prefs, DialogueAct::inform("area", "north"), AgendaRules{}, rng);
    ++counts[a.top().intent.name];
  }
  CHECK_THAT(counts["NEGATE"] / double(n), WithinAbs(0.2, 0.01));
  CHECK_THAT(counts["INFORM"] / double(n), WithinAbs(0.6, 0.01));
  CHECK_THAT(counts["DENY"] / double(n), WithinAbs(0.2, 0.01));
  CHECK_THROWS_AS((AgendaRules{0.5, 0.5, 0.5}.validate()), ConfigError);
}

TEST_CASE("agenda invariants and goal monotonicity under random system acts") {
  Rng rng(7);
  const auto onto = big_ontology();
  const std::vector<std::string> slots = {"food", "area", "price", "name", "addr", "phone", "hours", "music"};
  for (int trial = 0; trial < 300; ++trial) {
    PreferenceStore prefs;
    Goal g = sample_goal(onto, 1 + trial % 4, trial % 4, rng);
    auto a = init_agenda(g);
    for (int step = 0; step < 10; ++step) {
      const auto before = g;
      const auto& slot = slots[rng() % slots.size()];
      DialogueAct sys;
      switch (rng() % 4) {
        case 0: sys = DialogueAct::inform(slot, "v" + std::to_string(rng() % 3)); break;
        case 1: sys = DialogueAct::request(slot); break;
        case 2: sys = {intent::Offer, {{slot, "x"}}}; break;
        default: sys = {intent::NoMatch, {}}; break;
      }
      receive_system_act(a, g, prefs, sys, AgendaRules{}, rng);
      REQUIRE(a.well_formed());
      for (const auto& r : before.requests) {
        if (!r.value.empty()) CHECK(g.request(r.slot)->value == r.value);
      }
      for (std::size_t i = 0; i < g.constraints.size(); ++i) {
        const bool same = g.constraints[i].value == before.constraints[i].value;
        CHECK((same || (sys.is(intent::NoMatch) && g.constraints[i].value == kDontCare)));
      }
    }
  }
}

TEST_CASE("interaction model conformance") {
  const auto m = InteractionModel::basic();
  CHECK(check_expected(m, DialogueAct::request("name"), DialogueAct::inform("name", "x")));
  CHECK_FALSE(check_expected(m, DialogueAct::request("name"), {intent::Greeting, {}}));
  CHECK(check_expected(InteractionModel::permissive(), {intent::Greeting, {}}, {intent::Greeting, {}}));
  CHECK_THROWS_AS(check_expected(m, {intent::Greeting, {}}, DialogueAct::bye()), ContractViolation);

  InteractionModel broken = m;
  broken.user_intents.insert(intent::Greeting);
  CHECK_THROWS_AS(broken.validate(), ContractViolation);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("template realization") {
  const auto t = parse_templates(R"(
INFORM: I am looking for a {type}
INFORM: Somewhere {area} please
INFORM: A {type} in the {area}
REQUEST: What is the {name}?
)");
  Rng rng(8);
  CHECK(realize(DialogueAct::inform("type", "bar"), t, rng) == "I am looking for a bar");
  CHECK(realize({intent::Inform, {{"type", "pub"}, {"area", "north"}}}, t, rng) == "A pub in the north");
  const auto singles = parse_templates("INFORM: a {type}\nINFORM: in the {area}\n");
  CHECK(realize({intent::Inform, {{"type", "pub"}, {"area", "north"}}}, singles, rng) == "a pub and in the north");
  CHECK(realize(DialogueAct::request("name"), t, rng) == "What is the name?");
  CHECK(realize(DialogueAct::bye(), t, rng) == kClosing);
  CHECK_THROWS_AS(realize(DialogueAct::inform("drinks", "beer"), t, rng), ConfigError);
  CHECK_THROWS_AS(realize({intent::Negate, {}}, t, rng), ConfigError);
  CHECK_THROWS_AS(parse_templates("INFORM {type}\n"), ParseError);
  Rng a(9), b(9);
  CHECK(realize(DialogueAct::inform("area", "x"), t, a) == realize(DialogueAct::inform("area", "x"), t, b));
}

TEST_CASE("dialogues against a cooperative system") {
  const auto sys = cooperative_system({{"name", "The Eagle"}, {"addr", "Bene't St"}, {"phone", "123"}});
  SECTION("the bar goal") {
    DialogueConfig cfg;
    cfg.goal = bar_goal();
    cfg.p_init = 0.0;
    Rng rng(10);
    const auto log = run_dialogue(cfg, sys, 50, rng);
    CHECK(log.success);
    CHECK(log.end_reason == "bye");
    CHECK(log.user_turns() == 7);
    CHECK(log.final_goal.request("addr")->value == "Bene't St");
  }
  SECTION("merging shortens the dialogue") {
    DialogueConfig cfg;
    cfg.goal = bar_goal();
    cfg.p_init = 1.0;
    Rng rng(10);
    const auto log = run_dialogue(cfg, sys, 50, rng);
    CHECK(log.success);
    CHECK(log.user_turns() < 7);
    CHECK(log.utterances.front().act.to_string() == "INFORM(type=bar,drinks=beer)");
  }
  SECTION("no turns") {
    DialogueConfig cfg;
    cfg.goal = bar_goal();
    Rng rng(10);
    const auto log = run_dialogue(cfg, sys, 0, rng);
    CHECK(log.utterances.empty());
    CHECK_FALSE(log.success);
    CHECK(log.end_reason == "max_turns");
  }
  SECTION("templates fill the utterance text") {
    const auto t = parse_templates("INFORM: {type}\nINFORM: {drinks}\nINFORM: {area}\nREQUEST: {name}\n"
                                   "REQUEST: {addr}\nREQUEST: {phone}\nINFORM: {name}\nINFORM: {addr}\nINFORM: {phone}\n");
    DialogueConfig cfg;
    cfg.goal = bar_goal();
    cfg.p_init = 0.0;
    cfg.templates = &t;
    Rng rng(11);
    const auto log = run_dialogue(cfg, sys, 50, rng);
    CHECK(log.utterances[0].text == "bar");
    CHECK(log.utterances.back().text == kClosing);
  }
}

TEST_CASE("uncooperative systems exhaust the replacement budget") {
  DialogueConfig cfg;
  cfg.goal = bar_goal();
  cfg.model = InteractionModel::basic();
  cfg.replacement_budget = 2;
  cfg.p_init = 0.0;
  Rng rng(12);
  const SystemFn greeter = [](const DialogueAct&, Rng&) { return DialogueAct{intent::Greeting, {}}; };
  const auto log = run_dialogue(cfg, greeter, 50, rng);
  CHECK_FALSE(log.success);
  CHECK(log.end_reason == "replacement_budget");
  CHECK(log.user_turns() == 3);
  // The act the system ignored is repeated.
  CHECK(log.utterances[0].act == log.utterances[2].act);
}

TEST_CASE("malformed system acts abort the dialogue") {
  DialogueConfig cfg;
  cfg.goal = bar_goal();
  Rng rng(13);
  const SystemFn bad = [](const DialogueAct&, Rng&) { return DialogueAct{intent::Inform, {}}; };
  const auto log = run_dialogue(cfg, bad, 50, rng);
  CHECK(log.end_reason == "malformed_system_act");
  CHECK_FALSE(log.success);
}

TEST_CASE("corpus statistics") {
  DialogueLog log;
  log.utterances = {{Speaker::User, DialogueAct::request("name"), ""},
                    {Speaker::System, DialogueAct::inform("name", "x"), ""},
                    {Speaker::User, DialogueAct::request("addr"), ""},
                    {Speaker::System, {intent::Greeting, {}}, ""}};
  log.success = true;
  const auto s = corpus_stats({log});
  CHECK(s.avg_length == 4.0);
  CHECK(s.success_rate == 1.0);
  CHECK(s.user_system_ratio == 1.0);
  CHECK(s.cooperativeness == 0.5);
  double total = 0.0;
  for (const auto& [_, p] : s.intent_distribution) total += p;
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  CHECK_THROWS_AS(corpus_stats({}), ContractViolation);
}

TEST_CASE("preference store") {
  PreferenceStore p;
  Rng rng(14);
  const double first = p.get("food", "thai", rng);
  CHECK((first == 1.0 || first == -1.0));
  for (int i = 0; i < 20; ++i) CHECK(p.get("food", "thai", rng) == first);
  CHECK(p.size() == 1);
  CHECK_FALSE(p.peek("food", "sushi"));
  CHECK_THROWS_AS(p.set("food", "sushi", 2.0), ContractViolation);
}

TEST_CASE("subtopic transitions") {
  Eigen::MatrixXd c(4, 4);
  c << 0, 1, 0, 0,
       0, 0.2, 0.5, 0.3,
       0, 0.4, 0, 0.6,
       0, 0, 0, 1;
  const TransitionTable table(c);
  Rng rng(15);
  for (int i = 0; i < 100; ++i) CHECK(subtopic_step(table, 0, std::nullopt, rng) == 1);
  CHECK(subtopic_step(table, table.end(), std::nullopt, rng) == table.end());

  std::array<double, 4> freq{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) freq[subtopic_step(table, 1, true, rng)] += 1.0 / n;
  for (int j = 0; j < 4; ++j) CHECK_THAT(freq[j], WithinAbs(c(1, j), 0.02));

  Eigen::MatrixXd bad = c;
  bad(1, 1) = 0.3;
  CHECK_THROWS_AS(TransitionTable(bad), ConfigError);
  Eigen::MatrixXd leaky = c;
  leaky(3, 3) = 0.5;
  leaky(3, 2) = 0.5;
  CHECK_THROWS_AS(TransitionTable(leaky), ConfigError);

  Eigen::MatrixXd other = c;
  other.row(1) << 0, 0, 0, 1;
  const TransitionTable dependent(c, other);
  CHECK_THROWS_AS(subtopic_step(dependent, 1, std::nullopt, rng), ContractViolation);
  CHECK(subtopic_step(dependent, 1, false, rng) == 3);
  Eigen::MatrixXd moved_start = c;
  moved_start.row(0) << 0, 0, 1, 0;
  CHECK_THROWS_AS(TransitionTable(c, moved_start), ConfigError);
}

TEST_CASE("estimated transitions are row-stochastic") {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    std::vector<std::vector<std::size_t>> paths;
    for (int p = 0; p < 20; ++p) {
      std::vector<std::size_t> path{0};
      while (path.back() != k + 1 && path.size() < 10) path.push_back(1 + rng() % (k + 1));
      paths.push_back(path);
    }
    const auto m = estimate_transitions(paths, k);
    for (Eigen::Index i = 0; i < m.rows(); ++i) CHECK_THAT(m.row(i).sum(), WithinAbs(1.0, 1e-9));
  }
  CHECK_THROWS_AS(estimate_transitions({{0, 9}}, 2), ContractViolation);
}

TEST_CASE("persistence") {
  Rng rng(17);
  const PersistenceParams always_leave{1.0, 1.0};
  CHECK(continue_querying(always_leave, 1, false, rng));
  CHECK_FALSE(continue_querying(PersistenceParams{1.0, 0.0}, 2, true, rng));
  CHECK(continue_querying(PersistenceParams{1.0, 0.0}, 2, false, rng));
  CHECK_THROWS_AS(continue_querying({}, 0, true, rng), ContractViolation);
  CHECK_THROWS_AS(continue_querying({1.5, 0.0}, 2, true, rng), ConfigError);

  const PersistenceParams p{0.3, 0.6};
  const int n = 100000;
  int rel = 0, nonrel = 0;
  for (int i = 0; i < n; ++i) {
    rel += continue_querying(p, 3, true, rng) ? 1 : 0;
    nonrel += continue_querying(p, 3, false, rng) ? 1 : 0;
  }
  CHECK_THAT(rel / double(n), WithinAbs(0.7, 0.01));
  CHECK_THAT(nonrel / double(n), WithinAbs(0.4, 0.01));
}

TEST_CASE("conversations draw queries per subtopic") {
  Eigen::MatrixXd c(4, 4);
  c << 0, 0.5, 0.5, 0,
       0, 0, 0.5, 0.5,
       0, 0.5, 0, 0.5,
       0, 0, 0, 1;
  const TransitionTable table(c, {{"what is a", "define a"}, {"b facts"}});
  Rng rng(18);
  const auto log = run_conversation(table, {}, nullptr, 20, rng);
  CHECK(log.end_reason == "end_state");
  CHECK(log.path.front() == 0);
  CHECK(log.path.back() == table.end());
  for (const auto& t : log.turns) {
    const auto& qs = table.queries(t.state);
    CHECK(std::find(qs.begin(), qs.end(), t.query) != qs.end());
  }
  CHECK(log.turns.size() + 2 == log.path.size());
  const auto leaver = run_conversation(table, {1.0, 1.0}, nullptr, 20, rng);
  CHECK(leaver.turns.size() == 1);
  CHECK(leaver.end_reason == "persistence");
}
