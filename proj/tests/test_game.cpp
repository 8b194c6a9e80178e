#include <gtest/gtest.h>

#include "slkit/game.hpp"
#include "slkit/library.hpp"
#include "slkit/semantics.hpp"
#include "support.hpp"

using namespace slkit;
namespace tk = slkit::testkit;

namespace {

StrategyPtr moore(MooreStrategy m) { return std::make_shared<const Strategy>(std::move(m)); }

// P1, P2 always request; the scheduler grants P1 on odd rounds and P2 on
// even ones, flipping its phase whenever it reads s_i.
Assignment round_robin(const Cgs& ps) {
  MooreStrategy sch;
  sch.memory_size = 2;
  sch.initial = 1;
  sch.update = {{1, 0, 0, 0, 0, 0}, {0, 1, 1, 1, 1, 1}};
  sch.output = {0, 1};
  const int n = ps.num_states();
  return Assignment{}
      .redefine("P1", moore(MooreStrategy::constant(n, 1)))
      .redefine("P2", moore(MooreStrategy::constant(n, 1)))
      .redefine("S", moore(sch));
}

const char* kTiny = R"({
  "ap": ["p"],
  "agents": ["a", "b"],
  "actions": ["0", "1"],
  "states": ["u", "v"],
  "initial": "u",
  "label": {"v": ["p"]},
  "transitions": [
    {"from": "u", "decision": "*", "to": "u"},
    {"from": "u", "decision": {"a": "1", "b": "1"}, "to": "v"},
    {"from": "v", "decision": "*", "to": "v"}
  ]
})";

}  // namespace

TEST(Cgs, LoadAndStep) {
  Cgs g = load_cgs(kTiny);
  EXPECT_EQ(g.num_states(), 2);
  EXPECT_EQ(g.num_decisions(), 4);
  EXPECT_EQ(g.step(0, std::vector<int>{1, 1}), 1);
  EXPECT_EQ(g.step(0, std::vector<int>{0, 1}), 0);
  EXPECT_TRUE(g.holds(1, 0));
  EXPECT_EQ(g.encode({1, 0}), 2);
  EXPECT_EQ(g.decode(2), (std::vector<int>{1, 0}));
}

TEST(Cgs, RoundTrip) {
  for (const Cgs& g : {load_cgs(kTiny), builtin("ps"), builtin("ppd"), gstar(3), builtin("domino", 2)}) {
    Cgs h = load_cgs(save_cgs(g));
    EXPECT_EQ(g, h);
    EXPECT_EQ(save_cgs(h), save_cgs(g));
  }
  tk::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Cgs g = tk::random_cgs(rng, 4, 3, {"a", "b"});
    EXPECT_EQ(load_cgs(save_cgs(g)), g);
  }
}

TEST(Cgs, TotalityError) {
  std::string doc = kTiny;
  doc.replace(doc.find(R"({"from": "u", "decision": "*", "to": "u"},)"), 43, "");
  try {
    load_cgs(doc);
    FAIL();
  } catch (const CgsError& e) {
    EXPECT_NE(std::string(e.what()).find("state 'u'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("{a: 0, b: 0}"), std::string::npos);
  }
}

TEST(Cgs, MalformedDocuments) {
  EXPECT_THROW(load_cgs("{"), CgsError);
  EXPECT_THROW(load_cgs("[]"), CgsError);
  std::string dup = kTiny;
  dup.replace(dup.find("\"initial\": \"u\""), 14, "\"initial\": \"u\", \"initial\": \"v\"");
  EXPECT_THROW(load_cgs(dup), CgsError);
  std::string bad = kTiny;
  bad.replace(bad.find("\"to\": \"v\""), 9, "\"to\": \"w\"");
  EXPECT_THROW(load_cgs(bad), CgsError);
}

TEST(Ps, PinnedTransitions) {
  Cgs ps = builtin("ps");
  ASSERT_EQ(ps.num_states(), 6);
  EXPECT_EQ(ps.step(0, std::vector<int>{1, 1, 0}), 3);
  EXPECT_EQ(ps.step(0, std::vector<int>{1, 1, 1}), 3);
  EXPECT_EQ(ps.step(3, std::vector<int>{1, 1, 0}), 4);
  EXPECT_EQ(ps.step(3, std::vector<int>{1, 1, 1}), 5);
  EXPECT_EQ(ps.step(4, std::vector<int>{1, 1, 0}), 0);
  EXPECT_EQ(ps.step(5, std::vector<int>{1, 1, 1}), 0);
}

TEST(Ps, PlayLasso) {
  Cgs ps = builtin("ps");
  Lasso l = play(ps, round_robin(ps), 0);
  Lasso want{{}, {0, 3, 4, 0, 3, 5}};
  EXPECT_TRUE(l.same_word(want));
  std::vector<std::string> names;
  for (int s : l.prefix(6)) names.push_back(ps.states()[s]);
  EXPECT_EQ(names, (std::vector<std::string>{"s_i", "s_12", "s'_1", "s_i", "s_12", "s'_2"}));
}

TEST(Play, TranslationFollowsSuffix) {
  Cgs ps = builtin("ps");
  Assignment asg = round_robin(ps);
  Lasso whole = play(ps, asg, 0);
  for (std::size_t i = 0; i < 12; ++i) {
    auto [moved, s] = translate(ps, asg, 0, i);
    EXPECT_EQ(s, whole.at(i));
    Lasso rest = play(ps, moved, s);
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(rest.at(j), whole.at(i + j));
  }
}

TEST(Play, RandomTranslations) {
  tk::Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    Cgs g = tk::random_cgs(rng, 4, 2, {"a", "b"});
    Assignment asg;
    for (const auto& a : g.agents()) {
      MooreStrategy m;
      m.memory_size = 2;
      m.update.assign(2, std::vector<int>(g.num_states()));
      for (auto& row : m.update)
        for (auto& c : row) c = tk::uniform(rng, 0, 1);
      m.output = {tk::uniform(rng, 0, g.num_actions() - 1), tk::uniform(rng, 0, g.num_actions() - 1)};
      asg = asg.redefine(a, moore(m));
    }
    Lasso whole = play(g, asg, 0);
    std::size_t i = tk::uniform(rng, 0, 6);
    auto [moved, s] = translate(g, asg, 0, i);
    auto rest = play(g, moved, s).prefix(8);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(rest[j], whole.at(i + j));
  }
}

TEST(Assignment, Redefine) {
  Cgs ps = builtin("ps");
  Assignment a = Assignment{}.redefine("x", moore(MooreStrategy::constant(6, 1)));
  EXPECT_TRUE(a.contains("x"));
  EXPECT_FALSE(a.contains("P1"));
  Assignment b = a.bind("P1", "x");
  EXPECT_EQ(b.domain(), (std::set<std::string>{"P1", "x"}));
  EXPECT_FALSE(b.complete(ps.agents()));
  EXPECT_EQ(b.at("P1").action({0}), 1);
  Assignment c = b.redefine("x", moore(MooreStrategy::constant(6, 0)));
  EXPECT_EQ(c.at("x").action({0}), 0);
  EXPECT_EQ(c.at("P1").action({0}), 1);
  EXPECT_THROW(a.at("y"), Error);
}

TEST(Unwind, DecisionTree) {
  Cgs g = gstar(2);
  DecisionTree t = unwind(g, 2);
  EXPECT_EQ(t.nodes.size(), 1u + 4u + 16u);
  EXPECT_EQ(t.nodes[t.child(0, g.encode({0, 0}))].state, 1);
  EXPECT_EQ(t.nodes[t.child(0, g.encode({0, 1}))].state, 1);
  EXPECT_EQ(t.nodes[t.child(0, g.encode({1, 0}))].state, 2);
  EXPECT_EQ(t.nodes[t.child(0, g.encode({1, 1}))].state, 1);
  for (std::size_t i = 1; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    EXPECT_EQ(n.state, g.step(t.nodes[n.parent].state, n.decision));
    EXPECT_EQ(n.label, g.label(n.state));
  }
  EXPECT_EQ(t.child(5, 0), -1);
  EXPECT_THROW(unwind(g, 30), Error);
}

TEST(Builtins, Gstar) {
  for (int n = 1; n <= 4; ++n) {
    Cgs g = gstar(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        int t = g.step(0, std::vector<int>{a, b});
        EXPECT_EQ(g.holds(t, 0), a <= b);
      }
  }
  EXPECT_THROW(gstar(0), Error);
}

TEST(Builtins, DominoWitness) {
  DominoSystem d = sample_domino();
  Cgs g = domino_witness(d, [](int a, int) { return a % 2 ? "t1" : "t0"; }, 3);
  EXPECT_EQ(g.num_states(), 5);
  int t = g.step(0, std::vector<int>{1, 0});
  EXPECT_FALSE(g.holds(t, g.atom_index("p")));
  EXPECT_TRUE(g.holds(t, g.atom_index("t1")));
  t = g.step(0, std::vector<int>{0, 2});
  EXPECT_TRUE(g.holds(t, g.atom_index("p")));
  EXPECT_TRUE(g.holds(t, g.atom_index("t0")));
  EXPECT_THROW(domino_witness(d, [](int, int) { return "zz"; }, 2), Error);
}

TEST(Builtins, PrisonersDilemma) {
  Cgs ppd = builtin("ppd");
  EXPECT_EQ(ppd.num_states(), 7);
  // only A1 defects: police detains (0) or releases (1)
  EXPECT_EQ(ppd.states()[ppd.step(0, std::vector<int>{1, 0, 0})], "s_A1j");
  EXPECT_EQ(ppd.states()[ppd.step(0, std::vector<int>{1, 0, 1})], "s_A1");
  EXPECT_EQ(ppd.label_names(ppd.state_index("s_A1")), std::vector<std::string>{"fA1"});
  EXPECT_THROW(builtin("nope"), Error);
}
