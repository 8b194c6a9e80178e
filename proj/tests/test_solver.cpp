#include <gtest/gtest.h>

#include "slkit/library.hpp"
#include "slkit/solver.hpp"
#include "support.hpp"

using namespace slkit;
namespace tk = slkit::testkit;

namespace {

Signature one_agent() { return Signature{{"p"}, {"alpha"}, {}}; }

}  // namespace

TEST(Decide, SingleGoalNext) {
  Signature sig = one_agent();
  Verdict v = decide(parse("<<x>>(alpha,x) X p", sig), sig);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat);
  EXPECT_EQ(v.bound, 1);
  EXPECT_EQ(v.k, 1);
  EXPECT_EQ(v.summary(), "SAT (b=1, k=1)");
  ASSERT_TRUE(v.model);
  EXPECT_TRUE(eval_direct(*v.model, {}, v.model->initial(), parse("<<x>>(alpha,x) X p", sig)));
}

TEST(Decide, Contradiction) {
  Signature sig = one_agent();
  Verdict v = decide(parse("<<x>>(alpha,x)(X p & X !p)", sig), sig);
  EXPECT_EQ(v.kind, Verdict::Kind::UnsatUpTo);
  EXPECT_EQ(v.bound, 3);
  EXPECT_EQ(v.k, 6);
  EXPECT_FALSE(v.model);
  EXPECT_EQ(v.to_json().dump(), R"({"verdict":"UNSAT_UP_TO","b":3,"k":6})");
}

TEST(Decide, LibrarySentences) {
  for (const char* fam : {"law1", "law2", "fair"}) {
    auto l = library(fam);
    Verdict v = decide(l.formula, l.signature);
    ASSERT_EQ(v.kind, Verdict::Kind::Sat) << fam;
    EXPECT_TRUE(model_check(*v.model, l.formula).holds()) << fam;
  }
}

TEST(Decide, FragmentErrors) {
  LibraryParams prm;
  prm.domino = sample_domino();
  for (const char* fam : {"ord", "dom"}) {
    auto l = library(fam, prm);
    Verdict v = decide(l.formula, l.signature);
    EXPECT_EQ(v.kind, Verdict::Kind::FragmentError) << fam;
    EXPECT_EQ(v.fragment, Fragment::SLBG);
    EXPECT_EQ(v.to_json().dump(), R"({"verdict":"FRAGMENT_ERROR","fragment":"SLBG"})");
  }
  Signature sig = one_agent();
  EXPECT_THROW(decide(parse("X p", sig), sig), Error);
}

TEST(Decide, ConfigValidation) {
  Signature sig = one_agent();
  Formula f = parse("<<x>>(alpha,x) X p", sig);
  SolverConfig cfg;
  cfg.bound_schedule = {};
  EXPECT_THROW(decide(f, sig, cfg), Error);
  cfg.bound_schedule = {2, 1};
  EXPECT_THROW(decide(f, sig, cfg), Error);
  cfg.bound_schedule = {1};
  cfg.k_max = 0;
  EXPECT_THROW(decide(f, sig, cfg), Error);
}

TEST(Decide, ResourceExhausted) {
  Signature sig{{"p"}, {"a", "b"}, {}};
  SolverConfig cfg;
  cfg.max_steps = 20;
  Verdict v = decide(parse("<<x>>[[y]](a,x)(b,y)(X p & X X !p)", sig), sig, cfg);
  EXPECT_EQ(v.kind, Verdict::Kind::ResourceExhausted);
  EXPECT_NE(v.detail.find("step limit"), std::string::npos);
}

TEST(Decide, NestedSentence) {
  Signature sig{{"p"}, {"a"}, {}};
  Formula f = parse("<<x>>(a,x) X ([[y]](a,y) X p & !p)", sig);
  Verdict v = decide(f, sig);
  ASSERT_EQ(v.kind, Verdict::Kind::Sat);
  EXPECT_TRUE(model_check(*v.model, f).holds());
  EXPECT_TRUE(eval_direct(*v.model, {}, v.model->initial(), f));
}

TEST(Decide, Deterministic) {
  Signature sig{{"p", "q"}, {"a", "b"}, {}};
  std::vector<Formula> set{parse("<<x>>(a,x)(b,x) X p", sig), parse("<<x>>[[y]](a,x)(b,y) X (p | q)", sig),
                           parse("[[y]]<<x>>(a,x)(b,y) (X p & X X !p)", sig), parse("<<x>>(a,x)(b,x)(X p & X !p)", sig)};
  SolverConfig seq;
  seq.bound_schedule = {1, 2};
  seq.k_max = 4;
  SolverConfig par = seq;
  par.parallel = true;
  for (const auto& f : set) {
    Verdict a = decide(f, sig, seq), b = decide(f, sig, seq), c = decide(f, sig, par);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_EQ(a.to_json().dump(), c.to_json().dump());
    EXPECT_EQ(a.witness, c.witness);
    EXPECT_EQ(a.steps, c.steps);
  }
}

TEST(ExtractModel, FoldsWitness) {
  Signature sig = one_agent();
  Formula f = parse("<<x>>(alpha,x) X p", sig);
  Uct u = assemble_full_automaton(f, sig, 2);
  auto r = uct_emptiness_bounded(u, 3);
  ASSERT_EQ(r.status, EmptinessResult::Status::Sat);
  Cgs g = extract_model(r.witness, u, 2, sig.agents);
  EXPECT_EQ(g.num_states(), r.witness.size());
  EXPECT_EQ(g.num_actions(), 2);
  EXPECT_EQ(g.atoms().front(), "p");
  EXPECT_EQ(load_cgs(save_cgs(g)), g);
}

TEST(ModelCheck, ReferenceStructures) {
  auto law1 = library("law1"), law2 = library("law2"), fair = library("fair");
  EXPECT_EQ(model_check(builtin("ppd"), law1.formula).value, McAnswer::Value::True);
  EXPECT_EQ(model_check(builtin("ppd"), law2.formula).value, McAnswer::Value::False);
  EXPECT_EQ(model_check(builtin("ps"), fair.formula).value, McAnswer::Value::True);
}

TEST(ModelCheck, OrderingTruncations) {
  Signature sig{{"p"}, {"alpha", "beta"}, {}};
  Formula reach = parse("<<x>><<y>>(alpha,x)(beta,y) X p", sig);
  Formula avoid = parse("<<x>>[[y]](alpha,x)(beta,y) X !p", sig);
  for (int n = 1; n <= 3; ++n) {
    EXPECT_TRUE(model_check(gstar(n), reach).holds());
    EXPECT_EQ(model_check(gstar(n), avoid).value, McAnswer::Value::False);
  }
}

TEST(ModelCheck, AgreesWithDirectEvaluation) {
  tk::Rng rng(41);
  int unknown = 0, truths = 0;
  for (int i = 0; i < 120; ++i) {
    std::vector<std::string> ag = i % 3 ? std::vector<std::string>{"a", "b"} : std::vector<std::string>{"a"};
    Cgs g = tk::random_cgs(rng, 3, 2, ag);
    Formula f = tk::random_one_goal(rng, ag, 3);
    if (i % 4 == 0) f = Formula::negate(f);
    McAnswer mc = model_check(g, f);
    if (mc.value == McAnswer::Value::Unknown) {
      ++unknown;
      continue;
    }
    EXPECT_EQ(mc.holds(), eval_direct(g, {}, g.initial(), f)) << render(f);
    truths += mc.holds();
  }
  EXPECT_EQ(unknown, 0);
  EXPECT_GT(truths, 10);
  EXPECT_LT(truths, 110);
}

TEST(ModelCheck, FragmentAndScope) {
  EXPECT_THROW(model_check(gstar(2), library("ord").formula), FragmentError);
  Signature sig{{"p"}, {"alpha", "beta"}, {}};
  EXPECT_THROW(model_check(gstar(2), parse("X p", sig)), Error);
}
