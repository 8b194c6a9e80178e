#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  setenv("SLKIT_NO_COLOR", "1", 1);
  std::string cmd = std::string(SLKIT_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  Outcome r;
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string model(const char* name) { return std::string(SLKIT_MODELS) + "/" + name; }

// Compares against tests/golden/<name>; SLKIT_UPDATE_GOLDEN=1 rewrites it.
void golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(SLKIT_GOLDEN) + "/" + name;
  if (std::getenv("SLKIT_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual;
    return;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << "missing golden file " << path;
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(actual, ss.str()) << name;
}

}  // namespace

TEST(Cli, ClassifyOneGoal) {
  Outcome r = run("classify --agents a --formula '<<x>>(a,x) X p'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "SL1G\n");
}

TEST(Cli, SatContradiction) {
  Outcome r = run("sat --agents a --formula '<<x>>(a,x)(X p & X !p)'");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "UNSAT_UP_TO (b=3, k=6)\n");
  Outcome j = run("sat --json --agents a --formula '<<x>>(a,x)(X p & X !p)'");
  EXPECT_EQ(j.code, 1);
  golden("sat_unsat.json", j.out);
}

TEST(Cli, SatWitnessAndDot) {
  const std::string dot = std::string(::testing::TempDir()) + "/witness.dot";
  Outcome r = run("sat --agents alpha --formula '<<x>>(alpha,x) X p' --dot " + dot);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("SAT (b=1, k=1)\n", 0), 0u);
  std::ifstream in(dot);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("digraph", 0), 0u);
}

TEST(Cli, FragmentError) {
  Outcome r = run("sat --json --formula-lib ord");
  EXPECT_EQ(r.code, 3);
  golden("sat_fragment.json", r.out);
  EXPECT_EQ(run("mc --model builtin:gstar:2 --formula-lib ord").code, 3);
}

TEST(Cli, EvalOnModelFiles) {
  Outcome r = run("eval --model " + model("gstar3.cgs") + " --formula-lib unb");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "false\n");
  Outcome t = run("eval --json --model " + model("gstar3.cgs") + " --formula-lib trn");
  EXPECT_EQ(t.code, 0);
  golden("eval_trn.json", t.out);
}

TEST(Cli, ModelCheck) {
  EXPECT_EQ(run("mc --model " + model("ppd.cgs") + " --formula-lib law1").code, 0);
  EXPECT_EQ(run("mc --model " + model("ppd.cgs") + " --formula-lib law2").code, 1);
  Outcome r = run("mc --model " + model("ps.cgs") + " --formula-lib fair");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "true\n");
}

TEST(Cli, FreeAndSub) {
  Outcome r = run("free --json --agents alpha,beta,gamma --formula '<<x>>(alpha,x)(beta,y)(F p)'");
  EXPECT_EQ(r.code, 0);
  golden("free.json", r.out);
  Outcome s = run("sub --agents alpha --formula '<<x>>(alpha,x)(F p)'");
  EXPECT_EQ(s.code, 0);
  golden("sub.txt", s.out);
}

TEST(Cli, Normalize) {
  Outcome r = run("normalize --agents a --target enf --formula '[[x]](a,x) X p'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "!<<x>> !(a,x) X p\n");
  EXPECT_EQ(run("normalize --agents a --target cnf --formula p").code, 2);
}

TEST(Cli, CountSdf) {
  Outcome r = run("count-sdf --prefix AxEyAz --domain 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "4\n");
  Outcome j = run("count-sdf --json --prefix ExAyEz --domain 2 --horizon 2");
  golden("count_sdf.json", j.out);
}

TEST(Cli, Ltl2Ucw) {
  Outcome r = run("ltl2ucw --json --formula 'F G p'");
  EXPECT_EQ(r.code, 0);
  golden("ltl2ucw_fgp.json", r.out);
  EXPECT_EQ(run("ltl2ucw --agents a --formula '<<x>>(a,x) X p'").code, 2);
}

TEST(Cli, ExampleSuites) {
  for (const char* suite : {"counting", "oracle", "paper-all"}) {
    Outcome r = run(std::string("examples ") + suite);
    EXPECT_EQ(r.code, 0) << suite << "\n" << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  }
  Outcome j = run("examples --json paper-all");
  golden("examples_all.json", j.out);
  EXPECT_EQ(run("examples nope").code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("classify").code, 2);
  EXPECT_EQ(run("classify --formula 'p &'").code, 2);
  EXPECT_EQ(run("classify --formula '<<x>>(a,x) X p'").code, 2);
  EXPECT_EQ(run("eval --formula-lib unb --model /nonexistent.cgs").code, 2);
  EXPECT_EQ(run("sat --agents a --bound-schedule 2,1 --formula '<<x>>(a,x) X p'").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, ResourceExhaustedExitCode) {
  Outcome r = run("sat --agents a,b --max-steps 20 --formula '<<x>>[[y]](a,x)(b,y)(X p & X X !p)'");
  EXPECT_EQ(r.code, 4) << r.out;
}
