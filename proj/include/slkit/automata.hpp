#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slkit/formula.hpp"
#include "slkit/game.hpp"
#include "slkit/ltl.hpp"

namespace slkit {

struct Move {
  int direction;
  int state;
  auto operator<=>(const Move&) const = default;
};

// A letter is a vector of feature values; -1 marks a value not chosen yet.
class LabelView {
 public:
  explicit LabelView(const std::vector<int>& values) : values_(values) {}
  int get(int f) {
    int v = values_[f];
    if (v < 0) {
      if (missing_ < 0) missing_ = f;
      return 0;
    }
    return v;
  }
  int missing() const { return missing_; }

 private:
  const std::vector<int>& values_;
  int missing_ = -1;
};

enum class Step { Ok, False, Missing };

// Universal co-Büchi tree automaton over feature-vector letters. Transitions
// are conjunctions of moves or false.
class Uct {
 public:
  enum class Kind { Root, Spine, Launch, Component };
  struct State {
    Kind kind;
    int comp = -1;
    int ucw_state = -1;
    bool rejecting = false;
  };
  struct Feature {
    std::string name;
    int domain;
  };
  // One universal automaton run on the branches selected by a prefix and a
  // binding, or by a free-variable valuation when `valuation_mode` is set.
  struct Component {
    std::string name;
    Ucw ucw;
    std::vector<int> atom_feature;  // ucw atom -> feature
    std::vector<int> agent_var;     // agent -> variable index
    std::vector<Quant> quant;       // per variable
    std::vector<int> univ_pos;      // per variable: index among universals or -1
    std::vector<int> exist_pos;     // per variable: index among existentials or -1
    std::vector<std::vector<int>> deps;  // per existential: universal indices
    bool valuation_mode = false;
    std::vector<int> var_feature;  // valuation mode
    std::vector<int> head_base, body_base;
    int num_universal = 0;
    int state_offset = 0;
  };
  struct Launch {
    int atom_feature;
    int positive;
    int negative;
  };

  int num_agents = 1;
  int actions = 1;
  int num_directions = 1;
  std::vector<Feature> features;
  std::vector<State> states;
  int initial = 0;
  std::vector<Component> comps;
  std::vector<Launch> launches;
  std::optional<Formula> root_check;
  std::map<std::string, int> atom_features;
  std::vector<std::string> ap;  // input atoms (a prefix of the features)

  int num_states() const { return static_cast<int>(states.size()); }
  bool is_rejecting(int q) const { return states[q].rejecting; }

  Step transition(int q, LabelView& L, std::vector<Move>& out) const {
    out.clear();
    const State& st = states[q];
    Step r = Step::Ok;
    switch (st.kind) {
      case Kind::Root: {
        bool ok = eval_check(*root_check, L);
        if (L.missing() >= 0) return Step::Missing;
        if (!ok) return Step::False;
        r = spine(L, out);
        break;
      }
      case Kind::Spine:
        r = spine(L, out);
        break;
      case Kind::Launch:
        for (int q0 : comps[st.comp].ucw.initial) {
          r = component_moves(st.comp, q0, true, L, out);
          if (r != Step::Ok) return r;
        }
        break;
      case Kind::Component:
        r = component_moves(st.comp, st.ucw_state, false, L, out);
        break;
    }
    if (r != Step::Ok) return r;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return Step::Ok;
  }

  // Static successor relation between states, for rendering.
  std::vector<std::pair<int, int>> structure() const {
    std::set<std::pair<int, int>> e;
    auto launch_edges = [&](int from, int c) {
      for (int q0 : comps[c].ucw.initial)
        for (const auto& ed : comps[c].ucw.edges[q0]) e.insert({from, comps[c].state_offset + ed.target});
    };
    for (int q = 0; q < num_states(); ++q) {
      const State& st = states[q];
      if (st.kind == Kind::Root || st.kind == Kind::Spine) {
        e.insert({q, spine_state()});
        for (const auto& l : launches) {
          launch_edges(q, l.positive);
          launch_edges(q, l.negative);
        }
      } else if (st.kind == Kind::Launch) {
        launch_edges(q, st.comp);
      } else {
        for (const auto& ed : comps[st.comp].ucw.edges[st.ucw_state])
          e.insert({q, comps[st.comp].state_offset + ed.target});
      }
    }
    return {e.begin(), e.end()};
  }

  int spine_state() const {
    for (int q = 0; q < num_states(); ++q)
      if (states[q].kind == Kind::Spine) return q;
    return -1;
  }

  std::string state_name(int q) const {
    const State& st = states[q];
    switch (st.kind) {
      case Kind::Root: return "root";
      case Kind::Spine: return "spine";
      case Kind::Launch: return "init";
      case Kind::Component: return comps[st.comp].name + ":" + std::to_string(st.ucw_state);
    }
    return "?";
  }

 private:
  bool eval_check(const Formula& f, LabelView& L) const {
    switch (f.op()) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Atom: return L.get(atom_features.at(f.name())) != 0;
      case Op::Not: return !eval_check(f.kid(), L);
      case Op::And: {
        bool a = eval_check(f.lhs(), L);
        if (L.missing() >= 0) return false;
        return a && eval_check(f.rhs(), L);
      }
      case Op::Or: {
        bool a = eval_check(f.lhs(), L);
        if (L.missing() >= 0) return false;
        return a || eval_check(f.rhs(), L);
      }
      default:
        throw Error("root check must be Boolean");
    }
  }

  Step spine(LabelView& L, std::vector<Move>& out) const {
    const int sp = spine_state();
    for (int d = 0; d < num_directions; ++d) out.push_back({d, sp});
    for (const auto& l : launches) {
      int v = L.get(l.atom_feature);
      if (L.missing() >= 0) return Step::Missing;
      int c = v ? l.positive : l.negative;
      for (int q0 : comps[c].ucw.initial) {
        Step r = component_moves(c, q0, true, L, out);
        if (r != Step::Ok) return r;
      }
    }
    return Step::Ok;
  }

  Step component_moves(int c, int uq, bool head, LabelView& L, std::vector<Move>& out) const {
    const Component& C = comps[c];
    Letter rel = C.ucw.relevant(uq), sigma = 0;
    for (int i = 0; rel; ++i, rel >>= 1)
      if ((rel & 1U) && L.get(C.atom_feature[i])) sigma |= Letter{1} << i;
    if (L.missing() >= 0) return Step::Missing;
    std::vector<int> succ;
    C.ucw.successors(uq, sigma, succ);
    if (succ.empty()) return Step::Ok;

    if (C.valuation_mode) {
      int dir = 0;
      for (int a = 0; a < num_agents; ++a) dir = dir * actions + L.get(C.var_feature[C.agent_var[a]]);
      if (L.missing() >= 0) return Step::Missing;
      for (int t : succ) out.push_back({dir, C.state_offset + t});
      return Step::Ok;
    }

    std::vector<int> v(C.num_universal, 0);
    for (;;) {
      int dir = 0;
      for (int a = 0; a < num_agents; ++a) {
        int x = C.agent_var[a];
        int val;
        if (C.quant[x] == Quant::Forall) {
          val = v[C.univ_pos[x]];
        } else {
          int k = C.exist_pos[x];
          int w = 0;
          for (int u : C.deps[k]) w = w * actions + v[u];
          val = L.get((head ? C.head_base[k] : C.body_base[k]) + w);
        }
        dir = dir * actions + val;
      }
      if (L.missing() >= 0) return Step::Missing;
      for (int t : succ) out.push_back({dir, C.state_offset + t});
      int i = C.num_universal - 1;
      while (i >= 0 && ++v[i] == actions) v[i--] = 0;
      if (i < 0) break;
    }
    return Step::Ok;
  }
};

// ---------------------------------------------------------------------------
// Constructions

namespace detail {

inline int add_feature(Uct& u, std::string name, int domain) {
  u.features.push_back({std::move(name), domain});
  return static_cast<int>(u.features.size()) - 1;
}

inline void add_atoms(Uct& u, const std::vector<std::string>& atoms) {
  for (const auto& a : atoms) {
    if (u.atom_features.count(a)) continue;
    u.atom_features[a] = add_feature(u, a, 2);
  }
}

// Variables of the binding in first-use order.
inline std::vector<std::string> binding_vars(const BindPrefix& b) { return b.vars(); }

inline Uct::Component make_component(Uct& u, const std::string& name, const Formula& ltl, const BindPrefix& bind,
                                     const std::vector<std::string>& agents, const QuantPrefix* prefix,
                                     bool shared_cells) {
  Uct::Component C;
  C.name = name;
  std::vector<std::string> atoms;
  for (const auto& a : atoms_of(ltl)) atoms.push_back(a);
  C.ucw = ltl_to_ucw(ltl, atoms);
  for (const auto& a : atoms) {
    auto it = u.atom_features.find(a);
    if (it == u.atom_features.end()) throw Error("atom '" + a + "' is not part of the alphabet");
    C.atom_feature.push_back(it->second);
  }
  if (!bind.covers(agents)) throw Error("binding prefix must bind every agent exactly once");

  std::vector<std::string> vars;
  if (prefix) {
    vars = prefix->vars();
    std::set<std::string> pv(vars.begin(), vars.end());
    auto bv = bind.vars();
    if (pv != std::set<std::string>(bv.begin(), bv.end()))
      throw Error("quantification prefix must range exactly over the bound variables");
    for (const auto& e : prefix->entries) C.quant.push_back(e.quant);
  } else {
    vars = bind.vars();
    C.quant.assign(vars.size(), Quant::Forall);
  }
  for (const auto& a : agents) {
    auto x = *bind.var_of(a);
    C.agent_var.push_back(static_cast<int>(std::find(vars.begin(), vars.end(), x) - vars.begin()));
  }
  C.univ_pos.assign(vars.size(), -1);
  C.exist_pos.assign(vars.size(), -1);
  if (!prefix) {
    C.valuation_mode = true;
    for (const auto& x : vars) C.var_feature.push_back(add_feature(u, "v." + x, u.actions));
    return C;
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (C.quant[i] == Quant::Forall) {
      C.univ_pos[i] = C.num_universal++;
    } else {
      C.exist_pos[i] = static_cast<int>(C.deps.size());
      std::vector<int> d;
      for (int k = 0; k < C.num_universal; ++k) d.push_back(k);
      C.deps.push_back(std::move(d));
    }
  }
  auto cells = [&](const std::string& tag) {
    std::vector<int> base;
    for (std::size_t k = 0; k < C.deps.size(); ++k) {
      int n = 1;
      for (std::size_t i = 0; i < C.deps[k].size(); ++i) n *= u.actions;
      std::string x;
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (C.exist_pos[i] == static_cast<int>(k)) x = vars[i];
      int first = -1;
      for (int w = 0; w < n; ++w) {
        int f = add_feature(u, name + "." + tag + "." + x + "#" + std::to_string(w), u.actions);
        if (first < 0) first = f;
      }
      base.push_back(first);
    }
    return base;
  };
  C.head_base = cells(shared_cells ? "sdf" : "head");
  C.body_base = shared_cells ? C.head_base : cells("body");
  return C;
}

inline void add_component_states(Uct& u, Uct::Component& C, int comp_index) {
  C.state_offset = u.num_states();
  for (int q = 0; q < C.ucw.num_states(); ++q)
    u.states.push_back({Uct::Kind::Component, comp_index, q, static_cast<bool>(C.ucw.rejecting[q])});
}

inline void set_directions(Uct& u, int num_agents, int actions) {
  u.num_agents = num_agents;
  u.actions = actions;
  u.num_directions = 1;
  for (int i = 0; i < num_agents; ++i) u.num_directions *= actions;
}

}  // namespace detail

// Runs the word automaton of psi along the branch chosen by the bound
// variables' values at each node.
inline Uct goal_automaton(const BindPrefix& bind, const Formula& psi, const std::vector<std::string>& ap,
                          const std::vector<std::string>& agents, int actions) {
  if (!is_ltl(psi)) throw Error("goal matrix must be LTL");
  Uct u;
  detail::set_directions(u, static_cast<int>(agents.size()), actions);
  u.ap = ap;
  detail::add_atoms(u, ap);
  u.comps.push_back(detail::make_component(u, "goal", psi, bind, agents, nullptr, true));
  u.states.push_back({Uct::Kind::Launch, 0, -1, false});
  detail::add_component_states(u, u.comps[0], 0);
  u.initial = 0;
  return u;
}

// As the goal automaton, with every universal valuation of the prefix run
// in parallel and existential values read from a dependence map.
inline Uct sentence_automaton(const QuantPrefix& prefix, const BindPrefix& bind, const Formula& psi,
                              const std::vector<std::string>& ap, const std::vector<std::string>& agents,
                              int actions) {
  if (!is_ltl(psi)) throw Error("sentence matrix must be LTL");
  Uct u;
  detail::set_directions(u, static_cast<int>(agents.size()), actions);
  u.ap = ap;
  detail::add_atoms(u, ap);
  u.comps.push_back(detail::make_component(u, "s", psi, bind, agents, &prefix, true));
  u.states.push_back({Uct::Kind::Launch, 0, -1, false});
  detail::add_component_states(u, u.comps[0], 0);
  u.initial = 0;
  return u;
}

// A one-goal sentence cut into principal sentences. Sentence i is
// abbreviated by the atom "@i" in enclosing matrices and at the top.
struct Decomposition {
  struct Sentence {
    QuantPrefix prefix;
    BindPrefix binding;
    Formula matrix;  // LTL over input atoms and earlier "@j"
    Formula whole() const { return prefix.apply(binding.apply(matrix)); }
  };
  std::vector<Sentence> sentences;
  Formula top;  // Boolean over input atoms and "@i"

  static std::string atom_name(std::size_t i) { return "@" + std::to_string(i); }
};

namespace detail {

class Decomposer {
 public:
  Decomposer(const std::vector<std::string>& agents, std::set<std::string> taken)
      : agents_(agents), taken_(std::move(taken)) {}

  Decomposition run(const Formula& f) {
    Decomposition d;
    d.top = abstract(f);
    d.sentences = std::move(out_);
    return d;
  }

 private:
  Formula abstract(const Formula& f) {
    switch (f.op()) {
      case Op::True:
      case Op::False:
      case Op::Atom:
        return f;
      case Op::Not: return Formula::negate(abstract(f.kid()));
      case Op::Next: return Formula::next(abstract(f.kid()));
      case Op::And: return Formula::conj(abstract(f.lhs()), abstract(f.rhs()));
      case Op::Or: return Formula::disj(abstract(f.lhs()), abstract(f.rhs()));
      case Op::Until: return Formula::until(abstract(f.lhs()), abstract(f.rhs()));
      case Op::Release: return Formula::release(abstract(f.lhs()), abstract(f.rhs()));
      case Op::Exists:
      case Op::Forall:
        return Formula::atom(Decomposition::atom_name(block(f)));
      case Op::Bind:
        throw Error("binding outside a one-goal block");
    }
    return f;
  }

  int block(Formula f) {
    std::vector<QuantPrefix::Entry> q;
    std::set<std::string> seen;
    BindPrefix b;
    for (;;) {
      if (f.is_quantifier()) {
        std::string x = f.name();
        Formula body = f.kid();
        if (seen.count(x)) {
          std::string y = fresh(x);
          body = rename_free_var(body, x, y);
          x = y;
        }
        seen.insert(x);
        q.push_back({x, f.op() == Op::Exists ? Quant::Exists : Quant::Forall});
        f = body;
      } else if (f.op() == Op::Bind) {
        b.entries.push_back({f.name(), f.var()});
        f = f.kid();
      } else {
        break;
      }
    }
    if (!b.covers(agents_)) throw Error("block does not bind every agent exactly once");
    Decomposition::Sentence s{QuantPrefix(std::move(q)), std::move(b), abstract(f)};
    if (!is_ltl(s.matrix)) throw Error("block matrix is not temporal after abstraction");
    for (std::size_t i = 0; i < out_.size(); ++i)
      if (out_[i].prefix == s.prefix && out_[i].binding.entries == s.binding.entries && out_[i].matrix == s.matrix)
        return static_cast<int>(i);
    out_.push_back(std::move(s));
    return static_cast<int>(out_.size()) - 1;
  }

  std::string fresh(const std::string& base) {
    for (int i = 2;; ++i) {
      std::string n = base + "_" + std::to_string(i);
      if (taken_.insert(n).second) return n;
    }
  }

  const std::vector<std::string>& agents_;
  std::set<std::string> taken_;
  std::vector<Decomposition::Sentence> out_;
};

}  // namespace detail

class FragmentError : public Error {
 public:
  explicit FragmentError(Fragment f) : Error(std::string("not a one-goal sentence (") + fragment_name(f) + ")"), f_(f) {}
  Fragment fragment() const { return f_; }

 private:
  Fragment f_;
};

inline Decomposition decompose(const Formula& phi, const std::vector<std::string>& agents) {
  FragmentClass c = classify(phi, agents);
  if (c.fragment != Fragment::SL1G) throw FragmentError(c.fragment);
  Formula g = prepare_for_classification(phi);
  std::set<std::string> taken;
  collect_var_names(g, taken);
  return detail::Decomposer(agents, std::move(taken)).run(g);
}

// The dual of a principal sentence: flipped prefix, negated matrix.
inline Decomposition::Sentence dual_sentence(const Decomposition::Sentence& s) {
  return {s.prefix.dual(), s.binding, normalize(Formula::negate(s.matrix), NormalForm::Pnf)};
}

// Root checks the top-level Boolean structure; a spine state visits every
// node and launches, per principal sentence, either the sentence or its dual
// depending on the node's "@i" bit. Launches read head dependence maps,
// continuing runs read body maps.
inline Uct assemble_full_automaton(const Formula& phi, const Signature& sig, int actions,
                                   std::size_t feature_cap = 1u << 16) {
  Decomposition d = decompose(phi, sig.agents);
  std::vector<std::string> ap = sig.atoms;
  {
    std::set<std::string> have(ap.begin(), ap.end());
    for (const auto& a : atoms_of(phi))
      if (!have.count(a)) ap.push_back(a);
  }
  Uct u;
  detail::set_directions(u, static_cast<int>(sig.agents.size()), actions);
  u.ap = ap;
  detail::add_atoms(u, ap);
  std::vector<std::string> extra;
  for (std::size_t i = 0; i < d.sentences.size(); ++i) extra.push_back(Decomposition::atom_name(i));
  detail::add_atoms(u, extra);

  u.states.push_back({Uct::Kind::Root, -1, -1, false});
  u.states.push_back({Uct::Kind::Spine, -1, -1, false});
  u.initial = 0;
  u.root_check = d.top;
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    const auto& s = d.sentences[i];
    auto dual = dual_sentence(s);
    int pos = static_cast<int>(u.comps.size());
    u.comps.push_back(detail::make_component(u, "s" + std::to_string(i), s.matrix, s.binding, sig.agents, &s.prefix,
                                             false));
    detail::add_component_states(u, u.comps.back(), pos);
    int neg = static_cast<int>(u.comps.size());
    u.comps.push_back(detail::make_component(u, "d" + std::to_string(i), dual.matrix, dual.binding, sig.agents,
                                             &dual.prefix, false));
    detail::add_component_states(u, u.comps.back(), neg);
    u.launches.push_back({u.atom_features.at(Decomposition::atom_name(i)), pos, neg});
    if (u.features.size() > feature_cap) throw Error("alphabet exceeds the feature cap");
  }
  return u;
}

// ---------------------------------------------------------------------------
// Witnesses, membership and bounded emptiness

struct MooreWitness {
  int root = 0;
  std::vector<std::vector<int>> labels;  // node -> feature values
  std::vector<std::vector<int>> succ;    // node -> direction -> node
  int size() const { return static_cast<int>(labels.size()); }
  bool operator==(const MooreWitness&) const = default;
};

namespace detail {

struct Product {
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> adj;
  int get(int n, int q) {
    auto [it, fresh] = id.emplace(std::make_pair(n, q), static_cast<int>(pairs.size()));
    if (fresh) {
      pairs.push_back({n, q});
      adj.emplace_back();
    }
    return it->second;
  }
};

}  // namespace detail

inline bool uct_membership(const MooreWitness& w, const Uct& u) {
  detail::Product p;
  p.get(w.root, u.initial);
  std::vector<Move> moves;
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    auto [n, q] = p.pairs[i];
    std::vector<int> label = w.labels.at(n);
    label.resize(u.features.size(), 0);
    for (auto& v : label)
      if (v < 0) v = 0;
    LabelView L(label);
    Step r = u.transition(q, L, moves);
    if (r == Step::False) return false;
    if (r == Step::Missing) throw Error("witness label is incomplete");
    for (const auto& m : moves) {
      int t = p.get(w.succ.at(n).at(m.direction), m.state);
      p.adj[i].push_back(t);
    }
  }
  std::vector<bool> marked(p.pairs.size());
  for (std::size_t i = 0; i < p.pairs.size(); ++i) marked[i] = u.is_rejecting(p.pairs[i].second);
  return !detail::has_marked_cycle(p.adj, marked);
}

struct SearchLimits {
  long long max_steps = 20'000'000;
  std::chrono::milliseconds time_budget{60'000};
};

struct EmptinessResult {
  enum class Status { Sat, UnsatUpTo, ResourceExhausted };
  Status status = Status::UnsatUpTo;
  MooreWitness witness;
  int k = 0;
  long long steps = 0;
  std::string detail;
};

// How witness nodes may be created and linked. The default shape allows any
// successor among existing nodes plus one fresh node while under the cap.
struct WitnessShape {
  virtual ~WitnessShape() = default;
  virtual int root_tag() const { return 0; }
  // Candidate successors of (node, dir): existing node ids and, optionally, a
  // tag for a fresh node (placed last).
  virtual void candidates(const std::vector<int>& tags, int node, int dir, std::vector<int>& existing,
                          std::optional<int>& fresh) const = 0;
  virtual void fixed(int /*tag*/, std::vector<int>& /*label*/) const {}
  // Initial nodes and successors laid out before the search starts.
  virtual void seed(std::vector<int>& /*tags*/, std::vector<std::vector<int>>& /*succ*/) const {}
  // Successor used for directions no run ever took.
  virtual int fallback(const std::vector<int>& tags, int node, int dir) const {
    std::vector<int> e;
    std::optional<int> f;
    candidates(tags, node, dir, e, f);
    return e.empty() ? node : e.front();
  }
};

struct FreeShape : WitnessShape {
  int cap;
  explicit FreeShape(int k) : cap(k) {}
  void candidates(const std::vector<int>& tags, int, int, std::vector<int>& existing,
                  std::optional<int>& fresh) const override {
    existing.clear();
    for (int i = 0; i < static_cast<int>(tags.size()); ++i) existing.push_back(i);
    fresh.reset();
    if (static_cast<int>(tags.size()) < cap) fresh = 0;
  }
};

namespace detail {

struct Exhausted {
  std::string why;
};

class WitnessSearch {
 public:
  WitnessSearch(const Uct& u, const WitnessShape& shape, const SearchLimits& lim,
                std::chrono::steady_clock::time_point start, long long& steps)
      : u_(u), shape_(shape), lim_(lim), start_(start), steps_(steps) {}

  std::optional<MooreWitness> run() {
    Partial p;
    shape_.seed(p.tags, p.succ);
    if (p.tags.empty()) {
      p.tags.push_back(shape_.root_tag());
      p.succ.emplace_back(u_.num_directions, -1);
    }
    for (int t : p.tags) {
      p.labels.emplace_back(u_.features.size(), -1);
      shape_.fixed(t, p.labels.back());
    }
    add_pair(p, 0, u_.initial);
    if (solve(p)) return found_;
    return std::nullopt;
  }

 private:
  struct Partial {
    std::vector<int> tags;
    std::vector<std::vector<int>> labels;
    std::vector<std::vector<int>> succ;
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<int>> adj;
    std::vector<int> pending_runs;   // stack
    std::vector<int> pending_spine;  // queue
    std::size_t spine_head = 0;
  };

  int add_pair(Partial& p, int n, int q) {
    auto [it, fresh] = p.id.emplace(std::make_pair(n, q), static_cast<int>(p.pairs.size()));
    if (fresh) {
      p.pairs.push_back({n, q});
      p.adj.emplace_back();
      auto kind = u_.states[q].kind;
      if (kind == Uct::Kind::Spine || kind == Uct::Kind::Root) p.pending_spine.push_back(it->second);
      else p.pending_runs.push_back(it->second);
    }
    return it->second;
  }

  void tick() {
    if (++steps_ > lim_.max_steps) throw Exhausted{"step limit reached"};
    if ((steps_ & 1023) == 0 && std::chrono::steady_clock::now() - start_ > lim_.time_budget)
      throw Exhausted{"time budget exhausted"};
  }

  int new_node(Partial& p, int tag) {
    p.tags.push_back(tag);
    p.labels.emplace_back(u_.features.size(), -1);
    shape_.fixed(tag, p.labels.back());
    p.succ.emplace_back(u_.num_directions, -1);
    return static_cast<int>(p.tags.size()) - 1;
  }

  bool solve(Partial& p) {
    std::vector<Move> moves;
    for (;;) {
      tick();
      int pid;
      if (!p.pending_runs.empty()) pid = p.pending_runs.back();
      else if (p.spine_head < p.pending_spine.size()) pid = p.pending_spine[p.spine_head];
      else return finish(p);

      auto [n, q] = p.pairs[pid];
      LabelView L(p.labels[n]);
      Step r = u_.transition(q, L, moves);
      if (r == Step::False) return false;
      if (r == Step::Missing) {
        const int f = L.missing();
        for (int v = 0; v < u_.features[f].domain; ++v) {
          Partial c = p;
          c.labels[n][f] = v;
          if (solve(c)) return true;
        }
        return false;
      }
      for (const auto& m : moves) {
        if (p.succ[n][m.direction] >= 0) continue;
        std::vector<int> existing;
        std::optional<int> fresh;
        shape_.candidates(p.tags, n, m.direction, existing, fresh);
        for (int t : existing) {
          Partial c = p;
          c.succ[n][m.direction] = t;
          if (solve(c)) return true;
        }
        if (fresh) {
          Partial c = p;
          int t = new_node(c, *fresh);
          c.succ[n][m.direction] = t;
          if (solve(c)) return true;
        }
        return false;
      }
      // All targets known: expand.
      if (!p.pending_runs.empty() && p.pending_runs.back() == pid) p.pending_runs.pop_back();
      else ++p.spine_head;
      for (const auto& m : moves) {
        int t = add_pair(p, p.succ[n][m.direction], m.state);
        p.adj[pid].push_back(t);
      }
      if (rejecting_cycle(p)) return false;
    }
  }

  bool rejecting_cycle(const Partial& p) const {
    std::vector<bool> marked(p.pairs.size());
    bool any = false;
    for (std::size_t i = 0; i < p.pairs.size(); ++i) any |= (marked[i] = u_.is_rejecting(p.pairs[i].second));
    return any && has_marked_cycle(p.adj, marked);
  }

  bool finish(Partial& p) {
    MooreWitness w;
    w.root = 0;
    w.labels = p.labels;
    for (auto& l : w.labels)
      for (auto& v : l)
        if (v < 0) v = 0;
    w.succ = p.succ;
    for (int n = 0; n < static_cast<int>(w.succ.size()); ++n)
      for (int d = 0; d < u_.num_directions; ++d)
        if (w.succ[n][d] < 0) w.succ[n][d] = shape_.fallback(p.tags, n, d);
    if (!uct_membership(w, u_)) throw Error("internal: witness failed membership re-check");
    found_ = std::move(w);
    return true;
  }

  const Uct& u_;
  const WitnessShape& shape_;
  const SearchLimits& lim_;
  std::chrono::steady_clock::time_point start_;
  long long& steps_;
  MooreWitness found_;
};

}  // namespace detail

// Searches witnesses of a given shape.
inline EmptinessResult uct_search(const Uct& u, const WitnessShape& shape, const SearchLimits& lim = {}) {
  EmptinessResult res;
  auto start = std::chrono::steady_clock::now();
  try {
    detail::WitnessSearch s(u, shape, lim, start, res.steps);
    if (auto w = s.run()) {
      res.status = EmptinessResult::Status::Sat;
      res.witness = std::move(*w);
      res.k = res.witness.size();
    }
  } catch (const detail::Exhausted& e) {
    res.status = EmptinessResult::Status::ResourceExhausted;
    res.detail = e.why;
  }
  return res;
}

// Smallest witness first: sizes 1..k_max are tried in turn.
inline EmptinessResult uct_emptiness_bounded(const Uct& u, int k_max, const SearchLimits& lim = {}) {
  if (k_max < 1) throw Error("k_max must be at least 1");
  EmptinessResult res;
  auto start = std::chrono::steady_clock::now();
  for (int k = 1; k <= k_max; ++k) {
    FreeShape shape(k);
    try {
      detail::WitnessSearch s(u, shape, lim, start, res.steps);
      if (auto w = s.run()) {
        res.status = EmptinessResult::Status::Sat;
        res.witness = std::move(*w);
        res.k = k;
        return res;
      }
    } catch (const detail::Exhausted& e) {
      res.status = EmptinessResult::Status::ResourceExhausted;
      res.detail = e.why + " at k=" + std::to_string(k);
      res.k = k;
      return res;
    }
  }
  res.status = EmptinessResult::Status::UnsatUpTo;
  res.k = k_max;
  return res;
}

// ---------------------------------------------------------------------------
// Graph output

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '"' || c == '\\') o += '\\';
    o += c;
  }
  return o;
}

inline std::string literal_text(const std::vector<std::string>& atoms, Letter pos, Letter neg) {
  std::string s;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if ((pos >> i) & 1U) s += (s.empty() ? "" : " & ") + atoms[i];
    if ((neg >> i) & 1U) s += (s.empty() ? "!" : " & !") + atoms[i];
  }
  return s.empty() ? "true" : s;
}

}  // namespace detail

inline std::string to_dot(const Ucw& u) {
  std::ostringstream o;
  o << "digraph ucw {\n  rankdir=LR;\n";
  for (int q = 0; q < u.num_states(); ++q)
    o << "  q" << q << " [shape=" << (u.rejecting[q] ? "doublecircle" : "circle") << "];\n";
  for (int q : u.initial) o << "  init" << q << " [shape=point];\n  init" << q << " -> q" << q << ";\n";
  for (int q = 0; q < u.num_states(); ++q)
    for (const auto& e : u.edges[q])
      o << "  q" << q << " -> q" << e.target << " [label=\"" << detail::dot_escape(detail::literal_text(u.atoms, e.pos, e.neg))
        << "\"];\n";
  o << "}\n";
  return o.str();
}

inline std::string to_dot(const Uct& u) {
  std::ostringstream o;
  o << "digraph uct {\n  rankdir=LR;\n";
  for (int q = 0; q < u.num_states(); ++q)
    o << "  q" << q << " [label=\"" << detail::dot_escape(u.state_name(q))
      << "\", shape=" << (u.is_rejecting(q) ? "doublecircle" : "circle") << "];\n";
  o << "  init [shape=point];\n  init -> q" << u.initial << ";\n";
  for (const auto& [a, b] : u.structure()) o << "  q" << a << " -> q" << b << ";\n";
  o << "}\n";
  return o.str();
}

inline std::string to_dot(const MooreWitness& w, const Uct* u = nullptr) {
  std::ostringstream o;
  o << "digraph witness {\n";
  for (int n = 0; n < w.size(); ++n) {
    std::string lab = "n" + std::to_string(n);
    if (u) {
      std::string atoms;
      for (const auto& a : u->ap)
        if (w.labels[n][u->atom_features.at(a)]) atoms += (atoms.empty() ? "" : ",") + a;
      lab += " {" + atoms + "}";
    }
    o << "  n" << n << " [label=\"" << detail::dot_escape(lab) << "\"];\n";
  }
  for (int n = 0; n < w.size(); ++n)
    for (std::size_t d = 0; d < w.succ[n].size(); ++d)
      o << "  n" << n << " -> n" << w.succ[n][d] << " [label=\"" << d << "\"];\n";
  o << "}\n";
  return o.str();
}

}  // namespace slkit
