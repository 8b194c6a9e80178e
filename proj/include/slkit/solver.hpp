#pragma once

#include <algorithm>
#include <chrono>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slkit/automata.hpp"
#include "slkit/formula.hpp"
#include "slkit/game.hpp"
#include "slkit/semantics.hpp"

namespace slkit {

struct SolverConfig {
  std::vector<int> bound_schedule{1, 2, 3};
  int k_max = 6;
  std::chrono::milliseconds time_budget{60'000};
  long long max_steps = 20'000'000;
  bool verify = true;
  bool parallel = false;
  int mc_counter_cap = 8;  // largest rejecting-visit bound tried by model_check
  std::size_t mc_position_cap = 200'000;

  void validate() const {
    if (bound_schedule.empty()) throw Error("bound schedule must be non-empty");
    for (std::size_t i = 0; i < bound_schedule.size(); ++i) {
      if (bound_schedule[i] < 1) throw Error("action bounds must be positive");
      if (i && bound_schedule[i] <= bound_schedule[i - 1]) throw Error("bound schedule must be increasing");
    }
    if (k_max < 1) throw Error("k_max must be at least 1");
  }
};

struct Verdict {
  enum class Kind { Sat, UnsatUpTo, FragmentError, ResourceExhausted };
  Kind kind = Kind::UnsatUpTo;
  std::optional<Cgs> model;
  MooreWitness witness;
  int bound = 0;
  int k = 0;
  Fragment fragment = Fragment::SL1G;
  long long steps = 0;
  std::string detail;

  std::string name() const {
    switch (kind) {
      case Kind::Sat: return "SAT";
      case Kind::UnsatUpTo: return "UNSAT_UP_TO";
      case Kind::FragmentError: return "FRAGMENT_ERROR";
      case Kind::ResourceExhausted: return "RESOURCE_EXHAUSTED";
    }
    return "?";
  }
  std::string summary() const {
    switch (kind) {
      case Kind::Sat:
      case Kind::UnsatUpTo:
        return name() + " (b=" + std::to_string(bound) + ", k=" + std::to_string(k) + ")";
      case Kind::FragmentError: return name() + " (" + fragment_name(fragment) + ")";
      case Kind::ResourceExhausted: return name() + " (" + detail + ")";
    }
    return name();
  }
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = name();
    if (kind == Kind::Sat || kind == Kind::UnsatUpTo) {
      j["b"] = bound;
      j["k"] = k;
    }
    if (kind == Kind::FragmentError) j["fragment"] = fragment_name(fragment);
    if (kind == Kind::ResourceExhausted) j["detail"] = detail;
    if (model) j["model"] = nlohmann::ordered_json::parse(save_cgs(*model));
    return j;
  }
};

// Folds a witness into a structure over the input atoms.
inline Cgs extract_model(const MooreWitness& w, const Uct& u, int actions, const std::vector<std::string>& agents) {
  std::vector<std::string> acts, states;
  for (int a = 0; a < actions; ++a) acts.push_back(std::to_string(a));
  for (int n = 0; n < w.size(); ++n) states.push_back("n" + std::to_string(n));
  std::vector<Letter> labels(w.size(), 0);
  for (int n = 0; n < w.size(); ++n)
    for (std::size_t i = 0; i < u.ap.size(); ++i)
      if (w.labels[n][u.atom_features.at(u.ap[i])]) labels[n] |= Letter{1} << i;
  std::vector<int> delta;
  for (int n = 0; n < w.size(); ++n)
    for (int d = 0; d < u.num_directions; ++d) delta.push_back(w.succ[n][d]);
  return Cgs(u.ap, agents, acts, states, w.root, labels, delta);
}

// ---------------------------------------------------------------------------
// Model checking

struct McAnswer {
  enum class Value { True, False, Unknown };
  Value value = Value::Unknown;
  int memory = 0;         // largest labeling found, in nodes
  int counter_bound = 0;  // largest rejecting-visit bound used
  std::string detail;
  bool holds() const { return value == Value::True; }
  std::string name() const { return value == Value::True ? "true" : value == Value::False ? "false" : "unknown"; }
};

namespace detail {

// One principal sentence at one state, played as a round-based game: in each
// round the prefix variables are chosen in order, existential choices seeing
// the track and the earlier values of the round. The matrix is tracked by its
// universal word automaton with per-state rejecting-visit counters capped at
// `bound`, which turns the goal into a safety condition.
class SentenceGame {
 public:
  SentenceGame(const Cgs& g, const Decomposition::Sentence& sen, const std::vector<Letter>& state_letters,
               const std::vector<std::string>& ucw_atoms, int bound, std::size_t position_cap)
      : g_(g), prefix_(sen.prefix), bound_(bound), cap_(position_cap) {
    ucw_ = ltl_to_ucw(sen.matrix, ucw_atoms);
    letters_ = state_letters;
    for (const auto& a : g.agents()) agent_var_.push_back(prefix_.index_of(*sen.binding.var_of(a)));
  }

  // Whether the existential side wins from state s. Throws Exhausted when the
  // position cap is hit.
  bool solve(int s) {
    std::vector<signed char> c(ucw_.num_states(), -1);
    for (int q : ucw_.initial) c[q] = 0;
    root_ = position(s, std::move(c));
    for (std::size_t i = 0; i < pos_.size(); ++i) expand(static_cast<int>(i));
    win_.assign(pos_.size(), true);
    for (std::size_t i = 0; i < pos_.size(); ++i) win_[i] = !pos_[i].dead;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < pos_.size(); ++i) {
        if (!win_[i]) continue;
        std::vector<int> val;
        if (!round(static_cast<int>(i), val)) win_[i] = false, changed = true;
      }
    }
    return win_[root_];
  }

  // Labeling of the sentence automaton's input built from the winning
  // strategy: one node per position reached.
  MooreWitness labeling(const Uct& u) const {
    MooreWitness w;
    std::map<int, int> node;
    std::vector<int> order;
    auto node_of = [&](int p) {
      auto [it, fresh] = node.emplace(p, static_cast<int>(order.size()));
      if (fresh) order.push_back(p);
      return it->second;
    };
    node_of(root_);
    const auto& C = u.comps[0];
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int p = order[i];
      const Position& P = pos_[p];
      std::vector<int> label(u.features.size(), 0);
      for (int a = 0; a < static_cast<int>(ucw_.atoms.size()); ++a) {
        auto it = u.atom_features.find(ucw_.atoms[a]);
        if (it != u.atom_features.end()) label[it->second] = (letters_[P.s] >> a) & 1U;
      }
      std::vector<int> row(u.num_directions, -1);
      // Walk every universal valuation; existential values follow the strategy.
      std::vector<int> univ(C.num_universal, 0);
      for (;;) {
        std::vector<int> val;
        for (std::size_t x = 0; x < prefix_.size(); ++x) {
          if (prefix_.entries[x].quant == Quant::Forall) {
            val.push_back(univ[C.univ_pos[x]]);
          } else {
            int k = C.exist_pos[x], wdx = 0;
            for (int d : C.deps[k]) wdx = wdx * u.actions + univ[d];
            int choice = choose(p, val);
            label[C.head_base[k] + wdx] = choice;
            val.push_back(choice);
          }
        }
        const int d = decision(val);
        if (row[d] < 0) row[d] = node_of(P.next[d]);
        int j = C.num_universal - 1;
        while (j >= 0 && ++univ[j] == u.actions) univ[j--] = 0;
        if (j < 0) break;
      }
      for (auto& t : row)
        if (t < 0) t = static_cast<int>(i);  // never taken
      w.labels.push_back(std::move(label));
      w.succ.push_back(std::move(row));
    }
    return w;
  }

  std::size_t positions() const { return pos_.size(); }

 private:
  struct Position {
    int s;
    std::vector<signed char> c;
    bool dead = false;
    std::vector<int> next;  // per decision
  };

  int position(int s, std::vector<signed char> c) {
    auto key = std::make_pair(s, c);
    auto [it, fresh] = index_.emplace(std::move(key), static_cast<int>(pos_.size()));
    if (fresh) {
      if (pos_.size() >= cap_) throw Exhausted{"position cap reached"};
      pos_.push_back({s, std::move(c), false, {}});
    }
    return it->second;
  }

  void expand(int i) {
    const int s = pos_[i].s;
    std::vector<signed char> nc(ucw_.num_states(), -1);
    std::vector<int> succ;
    for (int q = 0; q < ucw_.num_states(); ++q) {
      if (pos_[i].c[q] < 0) continue;
      ucw_.successors(q, letters_[s], succ);
      for (int t : succ) {
        int v = pos_[i].c[q] + (ucw_.rejecting[t] ? 1 : 0);
        if (v > bound_) {
          pos_[i].dead = true;
          return;
        }
        nc[t] = static_cast<signed char>(std::max<int>(nc[t], v));
      }
    }
    std::vector<int> next(g_.num_decisions());
    for (int d = 0; d < g_.num_decisions(); ++d) next[d] = position(g_.step(s, d), nc);
    pos_[i].next = std::move(next);
  }

  int decision(const std::vector<int>& val) const {
    int d = 0;
    for (int x : agent_var_) d = d * g_.num_actions() + val[x];
    return d;
  }

  bool round(int p, std::vector<int>& val) const {
    if (val.size() == prefix_.size()) return win_[pos_[p].next[decision(val)]];
    const bool exists = prefix_.entries[val.size()].quant == Quant::Exists;
    for (int a = 0; a < g_.num_actions(); ++a) {
      val.push_back(a);
      bool r = round(p, val);
      val.pop_back();
      if (r == exists) return exists;
    }
    return !exists;
  }

  int choose(int p, std::vector<int> val) const {
    for (int a = 0; a < g_.num_actions(); ++a) {
      val.push_back(a);
      bool r = round(p, val);
      val.pop_back();
      if (r) return a;
    }
    return 0;  // losing branch, never reached from a winning position
  }

  const Cgs& g_;
  QuantPrefix prefix_;
  int bound_;
  std::size_t cap_;
  Ucw ucw_;
  std::vector<Letter> letters_;
  std::vector<int> agent_var_;
  std::map<std::pair<int, std::vector<signed char>>, int> index_;
  std::vector<Position> pos_;
  std::vector<bool> win_;
  int root_ = 0;
};

inline bool eval_top(const Formula& f, const Cgs& g, int s, const std::vector<std::vector<int>>& truth) {
  switch (f.op()) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Atom:
      if (!f.name().empty() && f.name()[0] == '@') return truth.at(std::stoul(f.name().substr(1)))[s] != 0;
      for (int a = 0; a < static_cast<int>(g.atoms().size()); ++a)
        if (g.atoms()[a] == f.name()) return g.holds(s, a);
      return false;
    case Op::Not: return !eval_top(f.kid(), g, s, truth);
    case Op::And: return eval_top(f.lhs(), g, s, truth) && eval_top(f.rhs(), g, s, truth);
    case Op::Or: return eval_top(f.lhs(), g, s, truth) || eval_top(f.rhs(), g, s, truth);
    default: throw Error("top-level structure must be Boolean");
  }
}

}  // namespace detail

// Bottom-up over principal sentences, innermost first. A winning labeling
// for the sentence proves it true at a state, one for its dual proves it
// false; every labeling is re-checked against the sentence automaton.
inline McAnswer model_check(const Cgs& g, const Formula& phi, const SolverConfig& cfg = {}) {
  Decomposition dec = decompose(phi, g.agents());

  // The initial state for the top level, every reachable state for nested
  // sentences.
  std::vector<bool> reach(g.num_states(), false);
  {
    std::vector<int> todo{g.initial()};
    reach[g.initial()] = true;
    while (!todo.empty()) {
      int s = todo.back();
      todo.pop_back();
      for (int t : g.successors(s))
        if (!reach[t]) todo.push_back(t), reach[t] = true;
    }
  }
  std::vector<std::vector<bool>> needed(dec.sentences.size(), std::vector<bool>(g.num_states(), false));
  for (std::size_t i = 0; i < dec.sentences.size(); ++i) {
    const std::string a = Decomposition::atom_name(i);
    if (atoms_of(dec.top).count(a)) needed[i][g.initial()] = true;
    for (std::size_t j = i + 1; j < dec.sentences.size(); ++j)
      if (atoms_of(dec.sentences[j].matrix).count(a)) needed[i] = reach;
  }

  McAnswer ans;
  std::vector<std::vector<int>> truth;
  for (std::size_t i = 0; i < dec.sentences.size(); ++i) {
    const Decomposition::Sentence sides[2] = {dec.sentences[i], dual_sentence(dec.sentences[i])};
    std::vector<std::string> atoms;
    for (const auto& a : atoms_of(sides[0].matrix)) atoms.push_back(a);
    std::vector<Letter> letters(g.num_states(), 0);
    for (int s = 0; s < g.num_states(); ++s)
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        bool v = false;
        if (atoms[a][0] == '@') {
          v = truth.at(std::stoul(atoms[a].substr(1)))[s] != 0;
        } else {
          for (int k = 0; k < static_cast<int>(g.atoms().size()); ++k)
            if (g.atoms()[k] == atoms[a]) v = g.holds(s, k);
        }
        if (v) letters[s] |= Letter{1} << a;
      }
    Uct automata[2];
    for (int side = 0; side < 2; ++side)
      automata[side] = sentence_automaton(sides[side].prefix, sides[side].binding, sides[side].matrix, atoms,
                                          g.agents(), g.num_actions());

    std::vector<int> row(g.num_states(), 0);
    for (int s = 0; s < g.num_states(); ++s) {
      if (!needed[i][s]) continue;
      std::optional<bool> value;
      try {
        for (int k = 0; k <= cfg.mc_counter_cap && !value; ++k) {
          for (int side = 0; side < 2 && !value; ++side) {
            detail::SentenceGame game(g, sides[side], letters, atoms, k, cfg.mc_position_cap);
            if (!game.solve(s)) continue;
            MooreWitness w = game.labeling(automata[side]);
            if (!uct_membership(w, automata[side])) throw Error("internal: game labeling rejected by automaton");
            ans.memory = std::max(ans.memory, w.size());
            ans.counter_bound = std::max(ans.counter_bound, k);
            value = side == 0;
          }
        }
      } catch (const detail::Exhausted& e) {
        ans.detail = e.why;
      }
      if (!value) {
        ans.value = McAnswer::Value::Unknown;
        ans.detail = "undecided for " + Decomposition::atom_name(i) + " at state '" + g.states()[s] + "'" +
                     (ans.detail.empty() ? "" : " (" + ans.detail + ")");
        return ans;
      }
      row[s] = *value ? 1 : 0;
    }
    truth.push_back(std::move(row));
  }
  ans.value = detail::eval_top(dec.top, g, g.initial(), truth) ? McAnswer::Value::True : McAnswer::Value::False;
  return ans;
}

// ---------------------------------------------------------------------------
// Satisfiability

namespace detail {

inline Verdict decide_at(const Formula& phi, const Signature& sig, int b, const SolverConfig& cfg) {
  Verdict v;
  v.bound = b;
  Uct u = assemble_full_automaton(phi, sig, b);
  SearchLimits lim{cfg.max_steps, cfg.time_budget};
  auto r = uct_emptiness_bounded(u, cfg.k_max, lim);
  v.steps = r.steps;
  v.k = r.k;
  if (r.status == EmptinessResult::Status::ResourceExhausted) {
    v.kind = Verdict::Kind::ResourceExhausted;
    v.detail = r.detail + " at b=" + std::to_string(b);
    return v;
  }
  if (r.status == EmptinessResult::Status::UnsatUpTo) {
    v.kind = Verdict::Kind::UnsatUpTo;
    return v;
  }
  v.kind = Verdict::Kind::Sat;
  v.witness = r.witness;
  v.model = extract_model(r.witness, u, b, sig.agents);
  if (cfg.verify) {
    auto mc = model_check(*v.model, phi, cfg);
    if (mc.value != McAnswer::Value::True)
      throw Error("internal: extracted model failed model checking (" + mc.name() + ")");
    if (temporal_depth(phi)) {
      std::optional<bool> direct;
      try {
        DirectEvaluator ev(*v.model);
        direct = ev.eval(phi, v.model->initial(), Assignment{});
      } catch (const Error&) {
        // beyond the enumeration guard
      }
      if (direct == false) throw Error("internal: extracted model rejected by direct evaluation");
    }
  }
  return v;
}

}  // namespace detail

inline Verdict decide(const Formula& phi, const Signature& sig, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!is_sentence(phi, sig.agents)) throw Error("input is not a sentence");
  FragmentClass fc = classify(phi, sig.agents);
  if (fc.fragment != Fragment::SL1G) {
    Verdict v;
    v.kind = Verdict::Kind::FragmentError;
    v.fragment = fc.fragment;
    return v;
  }
  std::vector<Verdict> results;
  if (cfg.parallel && cfg.bound_schedule.size() > 1) {
    std::vector<std::future<Verdict>> jobs;
    for (int b : cfg.bound_schedule)
      jobs.push_back(std::async(std::launch::async, [&, b] { return detail::decide_at(phi, sig, b, cfg); }));
    for (auto& j : jobs) results.push_back(j.get());
  } else {
    for (int b : cfg.bound_schedule) {
      results.push_back(detail::decide_at(phi, sig, b, cfg));
      if (results.back().kind != Verdict::Kind::UnsatUpTo) break;
    }
  }
  long long steps = 0;
  for (auto& r : results) {
    steps += r.steps;
    if (r.kind != Verdict::Kind::UnsatUpTo) {
      r.steps = steps;
      return r;
    }
  }
  Verdict v = results.back();
  v.steps = steps;
  v.bound = cfg.bound_schedule.back();
  v.k = cfg.k_max;
  return v;
}

}  // namespace slkit
