// Command-line front end: each command parses its inputs, calls one library
// operation and prints the answer as text or JSON.

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "slkit/library.hpp"
#include "slkit/solver.hpp"

using namespace slkit;
using nlohmann::ordered_json;

namespace {

enum Exit { Positive = 0, Negative = 1, Usage = 2, NotOneGoal = 3, Exhausted = 4 };

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string formula;
  std::string formula_lib;
  int players = 2;
  std::string model;
  std::string agents;
  std::string vars;
  std::string bound_schedule = "1,2,3";
  int k_max = 6;
  int horizon = 0;
  bool json = false;
  std::string dot;
  double time_budget = 60;
  long long max_steps = 0;
  bool parallel = false;
  std::string target = "pnf";
  std::string prefix;
  long long domain = 2;
  std::string suite;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool styled() { return std::getenv("SLKIT_NO_COLOR") == nullptr && isatty(STDOUT_FILENO); }

void verdict_line(const std::string& text, bool positive) {
  if (styled()) std::cout << (positive ? "\033[32m" : "\033[31m") << text << "\033[0m\n";
  else std::cout << text << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_dot(const Options& o, const std::string& text) {
  if (o.dot.empty()) return;
  if (o.dot == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(o.dot);
  if (!out) throw UsageError("cannot write '" + o.dot + "'");
  out << text;
}

// "builtin:ps", "builtin:ppd", "builtin:gstar:3", "builtin:domino:2" or a
// path to a structure document.
Cgs load_model(const Options& o) {
  if (o.model.empty()) throw UsageError("this command needs --model");
  const std::string tag = "builtin:";
  if (o.model.rfind(tag, 0) == 0) {
    std::string rest = o.model.substr(tag.size());
    int n = 0;
    if (auto c = rest.find(':'); c != std::string::npos) {
      n = std::stoi(rest.substr(c + 1));
      rest = rest.substr(0, c);
    }
    return builtin(rest, n);
  }
  return load_cgs(read_file(o.model));
}

struct Input {
  Formula formula;
  Signature sig;
};

Input load_formula(const Options& o, const std::vector<std::string>& model_agents = {}) {
  if (!o.formula_lib.empty()) {
    LibraryParams prm;
    prm.n = o.players;
    prm.domino = sample_domino();
    auto l = library(o.formula_lib, prm);
    return {l.formula, l.signature};
  }
  if (o.formula.empty()) throw UsageError("give a formula with --formula or --formula-lib");
  Signature sig;
  sig.agents = o.agents.empty() ? model_agents : split_list(o.agents);
  sig.vars = split_list(o.vars);
  std::string text = o.formula;
  if (std::ifstream probe(text); probe.good()) text = read_file(text);
  return {parse(text, sig), sig};
}

std::vector<std::string> sorted(const std::set<std::string>& s) { return {s.begin(), s.end()}; }

std::string braces(const std::set<std::string>& s) {
  std::string out = "{";
  for (const auto& x : s) out += (out.size() > 1 ? ", " : "") + x;
  return out + "}";
}

void check_agents(const Signature& sig, const Cgs& g) {
  std::set<std::string> a(sig.agents.begin(), sig.agents.end()), b(g.agents().begin(), g.agents().end());
  if (a != b) throw UsageError("formula agents differ from the structure's agents");
}

int emit(const Options& o, const ordered_json& j, const std::string& text) {
  if (o.json) std::cout << j.dump(2) << "\n";
  else std::cout << text << "\n";
  return Positive;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_classify(const Options& o) {
  auto in = load_formula(o);
  auto c = classify(in.formula, in.sig.agents);
  ordered_json j;
  j["fragment"] = fragment_name(c.fragment);
  j["principal"] = ordered_json::array();
  for (const auto& p : c.principal) j["principal"].push_back(render(p));
  return emit(o, j, fragment_name(c.fragment));
}

int cmd_free(const Options& o) {
  auto in = load_formula(o);
  auto fr = free_names(in.formula, in.sig.agents);
  ordered_json j;
  j["agents"] = sorted(fr.agents);
  j["vars"] = sorted(fr.vars);
  j["sentence"] = fr.empty();
  return emit(o, j, "agents: " + braces(fr.agents) + "\nvars: " + braces(fr.vars));
}

int cmd_sub(const Options& o) {
  auto in = load_formula(o);
  std::vector<std::string> items;
  for (const auto& f : subformulas(in.formula)) items.push_back(render(f));
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  ordered_json j;
  j["subformulas"] = items;
  std::string text;
  for (const auto& s : items) text += (text.empty() ? "" : "\n") + s;
  return emit(o, j, text);
}

int cmd_normalize(const Options& o) {
  auto in = load_formula(o);
  NormalForm nf;
  if (o.target == "pnf") nf = NormalForm::Pnf;
  else if (o.target == "enf") nf = NormalForm::Enf;
  else throw UsageError("--target must be pnf or enf");
  std::string r = render(normalize(in.formula, nf));
  ordered_json j;
  j["target"] = o.target;
  j["formula"] = r;
  return emit(o, j, r);
}

SolverConfig solver_config(const Options& o) {
  SolverConfig cfg;
  cfg.bound_schedule.clear();
  for (const auto& b : split_list(o.bound_schedule)) {
    try {
      cfg.bound_schedule.push_back(std::stoi(b));
    } catch (const std::exception&) {
      throw UsageError("malformed --bound-schedule entry '" + b + "'");
    }
  }
  cfg.k_max = o.k_max;
  if (o.time_budget <= 0) throw UsageError("--time-budget must be positive");
  cfg.time_budget = std::chrono::milliseconds(static_cast<long long>(o.time_budget * 1000));
  cfg.parallel = o.parallel;
  if (o.max_steps > 0) cfg.max_steps = o.max_steps;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int cmd_sat(const Options& o) {
  auto in = load_formula(o);
  SolverConfig cfg = solver_config(o);
  if (!is_sentence(in.formula, in.sig.agents)) throw UsageError("input is not a sentence");
  Verdict v = decide(in.formula, in.sig, cfg);
  if (v.kind == Verdict::Kind::Sat && !o.dot.empty()) {
    Uct u = assemble_full_automaton(in.formula, in.sig, v.bound);
    write_dot(o, to_dot(v.witness, &u));
  }
  if (o.json) {
    std::cout << v.to_json().dump(2) << "\n";
  } else {
    verdict_line(v.summary(), v.kind == Verdict::Kind::Sat);
    if (v.model) std::cout << save_cgs(*v.model);
  }
  switch (v.kind) {
    case Verdict::Kind::Sat: return Positive;
    case Verdict::Kind::UnsatUpTo: return Negative;
    case Verdict::Kind::FragmentError: return NotOneGoal;
    case Verdict::Kind::ResourceExhausted: return Exhausted;
  }
  return Usage;
}

int cmd_mc(const Options& o) {
  Cgs g = load_model(o);
  auto in = load_formula(o, g.agents());
  check_agents(in.sig, g);
  SolverConfig cfg;
  McAnswer a = model_check(g, in.formula, cfg);
  if (o.json) {
    ordered_json j;
    j["value"] = a.name();
    j["counter_bound"] = a.counter_bound;
    j["memory"] = a.memory;
    if (!a.detail.empty()) j["detail"] = a.detail;
    std::cout << j.dump(2) << "\n";
  } else {
    verdict_line(a.name() + (a.detail.empty() ? "" : " (" + a.detail + ")"), a.holds());
  }
  return a.value == McAnswer::Value::True ? Positive : a.value == McAnswer::Value::False ? Negative : Exhausted;
}

int cmd_eval(const Options& o) {
  Cgs g = load_model(o);
  auto in = load_formula(o, g.agents());
  check_agents(in.sig, g);
  if (!is_sentence(in.formula, g.agents())) throw UsageError("input is not a sentence");
  if (o.horizon > 0) {
    auto d = temporal_depth(in.formula);
    if (d && *d > o.horizon) throw UsageError("formula needs horizon " + std::to_string(*d));
  }
  bool v = eval_direct(g, {}, g.initial(), in.formula);
  if (o.json) {
    ordered_json j;
    j["value"] = v ? "true" : "false";
    std::cout << j.dump(2) << "\n";
  } else {
    verdict_line(v ? "true" : "false", v);
  }
  return v ? Positive : Negative;
}

int cmd_ltl2ucw(const Options& o) {
  auto in = load_formula(o);
  if (!is_ltl(in.formula)) throw UsageError("ltl2ucw needs an LTL formula");
  Ucw u = ltl_to_ucw(in.formula);
  write_dot(o, to_dot(u));
  ordered_json j;
  j["atoms"] = u.atoms;
  j["states"] = u.num_states();
  j["initial"] = u.initial;
  std::vector<int> rej;
  for (int q = 0; q < u.num_states(); ++q)
    if (u.rejecting[q]) rej.push_back(q);
  j["rejecting"] = rej;
  j["edges"] = ordered_json::array();
  std::string text = "states: " + std::to_string(u.num_states()) + ", edges: " + std::to_string(u.num_edges());
  for (int q = 0; q < u.num_states(); ++q)
    for (const auto& e : u.edges[q]) {
      std::string guard = detail::literal_text(u.atoms, e.pos, e.neg);
      j["edges"].push_back({{"from", q}, {"to", e.target}, {"guard", guard}});
      text += "\n" + std::to_string(q) + (u.rejecting[q] ? "*" : "") + " -[" + guard + "]-> " + std::to_string(e.target);
    }
  return emit(o, j, text);
}

int cmd_count_sdf(const Options& o) {
  if (o.prefix.empty()) throw UsageError("count-sdf needs --prefix, e.g. AxEyAz");
  if (o.domain < 1) throw UsageError("--domain must be positive");
  QuantPrefix p = QuantPrefix::parse(o.prefix);
  ordered_json j;
  j["prefix"] = p.str();
  j["domain"] = o.domain;
  std::string count = count_sdf(p, o.domain).str();
  j["count"] = count;
  std::string text = count;
  if (o.horizon > 0) {
    std::string all = count_strategy_sdf(p, o.domain, o.horizon).str();
    std::string beh = count_behavioral_sdf(p, o.domain, o.horizon).str();
    j["tracks"] = o.horizon;
    j["strategy_level"] = all;
    j["behavioral"] = beh;
    text += "\nstrategy-level over " + std::to_string(o.horizon) + " tracks: " + all + "\nbehavioral: " + beh;
  }
  return emit(o, j, text);
}

int cmd_dot(const Options& o) {
  auto in = load_formula(o);
  std::string text;
  if (is_ltl(in.formula)) {
    text = to_dot(ltl_to_ucw(in.formula));
  } else {
    SolverConfig cfg = solver_config(o);
    text = to_dot(assemble_full_automaton(in.formula, in.sig, cfg.bound_schedule.front()));
  }
  if (o.dot.empty()) std::cout << text;
  else write_dot(o, text);
  return Positive;
}

// ---------------------------------------------------------------------------
// Example suites

struct Item {
  std::string name;
  std::string where;
  std::function<bool()> check;
};

std::vector<Item> suite_counting() {
  return {
      {"count for AxEyAz over {0,1} is 4", "dependence-function counting example",
       [] { return count_sdf(QuantPrefix::parse("AxEyAz"), 2) == 4 && enumerate_sdf(QuantPrefix::parse("AxEyAz"), 2).size() == 4; }},
      {"count for the dual ExAyEz is 8", "dependence-function counting example",
       [] {
         auto d = QuantPrefix::parse("AxEyAz").dual();
         return count_sdf(d, 2) == 8 && enumerate_sdf(d, 2).size() == 8;
       }},
      {"closed form equals enumeration, |prefix| <= 3, d <= 3", "dependence-function counting formula",
       [] {
         for (int len = 0; len <= 3; ++len)
           for (int mask = 0; mask < (1 << len); ++mask) {
             std::vector<QuantPrefix::Entry> e;
             for (int i = 0; i < len; ++i)
               e.push_back({std::string(1, static_cast<char>('a' + i)), (mask >> i) & 1 ? Quant::Forall : Quant::Exists});
             QuantPrefix p(e);
             for (long long d = 1; d <= 3; ++d)
               if (count_sdf(p, d) != BigNat(enumerate_sdf(p, d).size())) return false;
           }
         return true;
       }},
  };
}

std::vector<Item> suite_oracle() {
  std::vector<Item> out;
  for (int n = 1; n <= 4; ++n) {
    out.push_back({"gstar(" + std::to_string(n) + ") satisfies trn", "ordering sentence on truncated witness",
                   [n] { return eval_direct(gstar(n), {}, 0, library("trn").formula); }});
    out.push_back({"gstar(" + std::to_string(n) + ") violates unb", "ordering sentence on truncated witness",
                   [n] { return !eval_direct(gstar(n), {}, 0, library("unb").formula); }});
  }
  return out;
}

std::vector<Item> suite_sat() {
  auto sat = [](const Formula& f, const Signature& s) {
    Verdict v = decide(f, s);
    return v.kind == Verdict::Kind::Sat;
  };
  Signature one{{"p"}, {"alpha"}, {}};
  return {
      {"<<x>>(alpha,x) X p is satisfiable", "single-goal next example",
       [=] { return sat(parse("<<x>>(alpha,x) X p", one), one); }},
      {"law-and-order sentence phi1 is satisfiable", "law and order example",
       [=] { return sat(library("law1").formula, library("law1").signature); }},
      {"fair-scheduler sentence is satisfiable", "preemptive scheduling example",
       [=] { return sat(library("fair").formula, library("fair").signature); }},
      {"ordering sentence is outside SL[1G]", "ordering sentence",
       [] {
         auto l = library("ord");
         return decide(l.formula, l.signature).kind == Verdict::Kind::FragmentError;
       }},
  };
}

std::vector<Item> suite_worked() {
  const std::vector<std::string> abc{"alpha", "beta", "gamma"};
  Signature s3;
  s3.agents = abc;
  std::vector<Item> out{
      {"free set of <<x>>(alpha,x)(beta,y)F p is {gamma, y}", "free agents and variables example",
       [=] {
         auto fr = free_names(parse("<<x>>(alpha,x)(beta,y)(F p)", s3), abc);
         return fr.agents == std::set<std::string>{"gamma"} && fr.vars == std::set<std::string>{"y"};
       }},
      {"adding (gamma,z) leaves {y, z}", "free agents and variables example",
       [=] {
         auto fr = free_names(parse("(gamma,z)<<x>>(alpha,x)(beta,y)(F p)", s3), abc);
         return fr.agents.empty() && fr.vars == std::set<std::string>{"y", "z"};
       }},
      {"subformulas of <<x>>(alpha,x)F p include true", "subformula example",
       [=] {
         auto sub = subformulas(parse("<<x>>(alpha,x)(F p)", s3));
         return sub.size() == 5 && sub.count(Formula::top());
       }},
      {"Dep for AxEyEzAwEv", "quantification prefix example",
       [] {
         auto a = prefix_analysis(QuantPrefix::parse("AxEyEzAwEv"));
         using V = std::vector<std::string>;
         return a.dependencies["y"] == V{"x"} && a.dependencies["z"] == V{"x"} && a.dependencies["v"] == V{"x", "w"};
       }},
      {"PS play is (s_i s_12 s'_1 s_i s_12 s'_2)^w", "play example",
       [] {
         Cgs ps = builtin("ps");
         MooreStrategy sch;
         sch.memory_size = 2;
         sch.initial = 1;
         sch.update = {{1, 0, 0, 0, 0, 0}, {0, 1, 1, 1, 1, 1}};
         sch.output = {0, 1};
         auto mk = [](MooreStrategy m) { return std::make_shared<const Strategy>(std::move(m)); };
         Assignment asg = Assignment{}
                              .redefine("P1", mk(MooreStrategy::constant(6, 1)))
                              .redefine("P2", mk(MooreStrategy::constant(6, 1)))
                              .redefine("S", mk(sch));
         return play(ps, asg, 0).same_word(Lasso{{}, {0, 3, 4, 0, 3, 5}});
       }},
      {"PPD satisfies phi1", "law and order example",
       [] { return model_check(builtin("ppd"), library("law1").formula).value == McAnswer::Value::True; }},
      {"PPD violates phi2", "law and order example",
       [] { return model_check(builtin("ppd"), library("law2").formula).value == McAnswer::Value::False; }},
      {"PS satisfies the fair-scheduler sentence", "preemptive scheduling example",
       [] { return model_check(builtin("ps"), library("fair").formula).value == McAnswer::Value::True; }},
  };
  for (auto& i : suite_counting()) out.push_back(std::move(i));
  return out;
}

int cmd_examples(const Options& o) {
  std::vector<Item> items;
  if (o.suite == "paper-all") items = suite_worked();
  else if (o.suite == "counting") items = suite_counting();
  else if (o.suite == "oracle") items = suite_oracle();
  else if (o.suite == "sat") items = suite_sat();
  else throw UsageError("unknown suite '" + o.suite + "' (paper-all, counting, oracle, sat)");
  ordered_json j;
  j["suite"] = o.suite;
  j["items"] = ordered_json::array();
  bool all = true;
  std::string text;
  for (const auto& it : items) {
    bool ok = false;
    try {
      ok = it.check();
    } catch (const std::exception&) {
      ok = false;
    }
    all = all && ok;
    j["items"].push_back({{"name", it.name}, {"where", it.where}, {"pass", ok}});
    text += std::string(ok ? "PASS" : "FAIL") + "  " + it.name + "  [" + it.where + "]\n";
  }
  j["passed"] = all;
  if (o.json) std::cout << j.dump(2) << "\n";
  else std::cout << text;
  return all ? Positive : Negative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategy Logic toolkit"};
  app.require_subcommand(1, 1);
  Options o;

  auto formula_flags = [&](CLI::App* c) {
    c->add_option("-f,--formula", o.formula, "formula text or a file holding it");
    c->add_option("--formula-lib", o.formula_lib, "library sentence name");
    c->add_option("--n", o.players, "number of players for library families");
    c->add_option("--agents", o.agents, "comma-separated agents");
    c->add_option("--vars", o.vars, "comma-separated variables");
    c->add_flag("--json", o.json, "structured output");
  };
  auto model_flag = [&](CLI::App* c) {
    c->add_option("-m,--model", o.model, "structure document or builtin:ps|ppd|gstar:N|domino:N");
  };
  auto solver_flags = [&](CLI::App* c) {
    c->add_option("--bound-schedule", o.bound_schedule, "action bounds, e.g. 1,2,3");
    c->add_option("--k-max", o.k_max, "largest witness size");
    c->add_option("--time-budget", o.time_budget, "seconds per bound");
    c->add_option("--max-steps", o.max_steps, "search step limit per bound");
    c->add_flag("--parallel", o.parallel, "run the bounds concurrently");
  };

  std::map<CLI::App*, std::function<int(const Options&)>> run;
  auto add = [&](const char* name, const char* help, std::function<int(const Options&)> fn) {
    CLI::App* c = app.add_subcommand(name, help);
    formula_flags(c);
    run[c] = std::move(fn);
    return c;
  };

  add("classify", "fragment of a sentence", cmd_classify);
  add("free", "free agents and variables", cmd_free);
  add("sub", "subformulas", cmd_sub);
  add("normalize", "positive or existential normal form", cmd_normalize)
      ->add_option("--target", o.target, "pnf or enf");
  auto sat = add("sat", "bounded satisfiability of an SL[1G] sentence", cmd_sat);
  solver_flags(sat);
  sat->add_option("--dot", o.dot, "write the witness as DOT ('-' for stdout)");
  auto mc = add("mc", "model checking of an SL[1G] sentence", cmd_mc);
  model_flag(mc);
  auto ev = add("eval", "exhaustive evaluation of a next-only sentence", cmd_eval);
  model_flag(ev);
  ev->add_option("--horizon", o.horizon, "largest X-nesting accepted");
  add("ltl2ucw", "universal co-Buchi automaton of an LTL formula", cmd_ltl2ucw)
      ->add_option("--dot", o.dot, "write the automaton as DOT ('-' for stdout)");
  auto cs = add("count-sdf", "number of dependence functions", cmd_count_sdf);
  cs->add_option("--prefix", o.prefix, "quantification prefix, e.g. AxEyAz");
  cs->add_option("--domain", o.domain, "domain size");
  cs->add_option("--horizon", o.horizon, "track count for strategy-level counts");
  auto ex = app.add_subcommand("examples", "reproduction suites");
  ex->add_option("suite", o.suite, "paper-all, counting, oracle or sat")->required();
  ex->add_flag("--json", o.json, "structured output");
  run[ex] = cmd_examples;
  auto dt = add("dot", "DOT rendering of the automaton for a formula", cmd_dot);
  solver_flags(dt);
  dt->add_option("--dot", o.dot, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Usage;
  }

  try {
    for (auto& [c, fn] : run)
      if (c->parsed()) return fn(o);
  } catch (const FragmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NotOneGoal;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return Usage;
  } catch (const OracleScopeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  }
  return Usage;
}
