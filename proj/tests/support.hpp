#pragma once

// Shared generators and independent oracles for the test suites and the
// acceptance runner.

#include <random>
#include <string>
#include <vector>

#include "slkit/formula.hpp"
#include "slkit/game.hpp"

namespace slkit::testkit {

using Rng = std::mt19937;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Structure with `agents` agents, atoms {p, q}, state 0 initial.
inline Cgs random_cgs(Rng& rng, int max_states, int max_actions, const std::vector<std::string>& agents) {
  const int n = uniform(rng, 1, max_states);
  const int d = uniform(rng, 1, max_actions);
  std::vector<std::string> states, actions;
  for (int i = 0; i < n; ++i) states.push_back("s" + std::to_string(i));
  for (int i = 0; i < d; ++i) actions.push_back(std::to_string(i));
  std::vector<Letter> labels;
  for (int i = 0; i < n; ++i) labels.push_back(static_cast<Letter>(uniform(rng, 0, 3)));
  int decisions = 1;
  for (std::size_t i = 0; i < agents.size(); ++i) decisions *= d;
  std::vector<int> delta;
  for (int i = 0; i < n * decisions; ++i) delta.push_back(uniform(rng, 0, n - 1));
  return Cgs({"p", "q"}, agents, actions, states, 0, labels, delta);
}

// LTL over {p, q}; `next_only` restricts temporal operators to X, at most
// `max_next` deep.
inline Formula random_ltl(Rng& rng, int size, bool next_only, int max_next = 2) {
  if (size <= 1) {
    int k = uniform(rng, 0, 9);
    if (k == 0) return Formula::top();
    if (k == 1) return Formula::bottom();
    return Formula::atom(k % 2 ? "p" : "q");
  }
  const int ops = next_only ? 4 : 6;
  switch (uniform(rng, 0, ops - 1)) {
    case 0: return Formula::negate(random_ltl(rng, size - 1, next_only, max_next));
    case 1:
      if (max_next > 0) return Formula::next(random_ltl(rng, size - 1, next_only, max_next - 1));
      return Formula::negate(random_ltl(rng, size - 1, next_only, max_next));
    case 2:
    case 3: {
      int l = uniform(rng, 1, size - 2 > 0 ? size - 2 : 1);
      auto a = random_ltl(rng, l, next_only, max_next), b = random_ltl(rng, std::max(1, size - 1 - l), next_only, max_next);
      return uniform(rng, 0, 1) ? Formula::conj(a, b) : Formula::disj(a, b);
    }
    default: {
      int l = uniform(rng, 1, size - 2 > 0 ? size - 2 : 1);
      auto a = random_ltl(rng, l, false), b = random_ltl(rng, std::max(1, size - 1 - l), false);
      return uniform(rng, 0, 1) ? Formula::until(a, b) : Formula::release(a, b);
    }
  }
}

// Binding of every agent to one of `nv` variables, then a prefix over
// exactly the bound variables in random order.
inline std::pair<QuantPrefix, BindPrefix> random_prefixes(Rng& rng, const std::vector<std::string>& agents, int nv) {
  BindPrefix b;
  for (const auto& a : agents) b.entries.push_back({a, "x" + std::to_string(uniform(rng, 1, nv))});
  auto vars = b.vars();
  std::shuffle(vars.begin(), vars.end(), rng);
  std::vector<QuantPrefix::Entry> e;
  for (const auto& x : vars) e.push_back({x, uniform(rng, 0, 1) ? Quant::Exists : Quant::Forall});
  return {QuantPrefix(std::move(e)), b};
}

inline bool mentions_next(const Formula& f) {
  if (f.op() == Op::Next) return true;
  for (const auto& k : f.kids())
    if (mentions_next(k)) return true;
  return false;
}

// Next-only goal matrix. A matrix without X is agent-free, which would make
// its bindings vacuous, so one X is added on top.
inline Formula random_goal_matrix(Rng& rng, int size, int max_next) {
  Formula m = random_ltl(rng, size, true, max_next);
  return mentions_next(m) ? m : Formula::next(m);
}

// One-goal principal sentence with a next-only matrix.
inline Formula random_one_goal(Rng& rng, const std::vector<std::string>& agents, int nv, int max_next = 1) {
  auto [q, b] = random_prefixes(rng, agents, nv);
  return q.apply(b.apply(random_goal_matrix(rng, uniform(rng, 1, 5), max_next)));
}

// Boolean combination of two goals under one prefix.
inline Formula random_boolean_goal(Rng& rng, const std::vector<std::string>& agents, int nv, int max_next = 1) {
  auto [q, b1] = random_prefixes(rng, agents, nv);
  BindPrefix b2;
  auto vars = q.vars();
  for (const auto& a : agents) b2.entries.push_back({a, vars[uniform(rng, 0, static_cast<int>(vars.size()) - 1)]});
  Formula g1 = b1.apply(random_goal_matrix(rng, uniform(rng, 1, 4), max_next));
  Formula g2 = b2.apply(random_goal_matrix(rng, uniform(rng, 1, 4), max_next));
  if (uniform(rng, 0, 1)) g2 = Formula::negate(g2);
  return q.apply(uniform(rng, 0, 1) ? Formula::conj(g1, g2) : Formula::disj(g1, g2));
}

// Recursive LTL evaluation on an ultimately periodic word, by fixpoints over
// its finitely many positions.
class LassoLtl {
 public:
  LassoLtl(std::vector<Letter> stem, std::vector<Letter> loop, std::vector<std::string> atoms)
      : word_(std::move(stem)), loop_start_(word_.size()), atoms_(std::move(atoms)) {
    word_.insert(word_.end(), loop.begin(), loop.end());
  }

  bool holds(const Formula& f) { return sat(f)[0]; }

 private:
  std::size_t next(std::size_t i) const { return i + 1 < word_.size() ? i + 1 : loop_start_; }

  std::vector<bool> sat(const Formula& f) {
    const std::size_t n = word_.size();
    std::vector<bool> out(n, false);
    switch (f.op()) {
      case Op::True: out.assign(n, true); break;
      case Op::False: break;
      case Op::Atom: {
        std::size_t bit = 0;
        while (bit < atoms_.size() && atoms_[bit] != f.name()) ++bit;
        for (std::size_t i = 0; i < n; ++i) out[i] = bit < atoms_.size() && ((word_[i] >> bit) & 1U);
        break;
      }
      case Op::Not: {
        auto a = sat(f.kid());
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
        break;
      }
      case Op::And:
      case Op::Or: {
        auto a = sat(f.lhs()), b = sat(f.rhs());
        for (std::size_t i = 0; i < n; ++i) out[i] = f.op() == Op::And ? (a[i] && b[i]) : (a[i] || b[i]);
        break;
      }
      case Op::Next: {
        auto a = sat(f.kid());
        for (std::size_t i = 0; i < n; ++i) out[i] = a[next(i)];
        break;
      }
      case Op::Until: {
        auto a = sat(f.lhs()), b = sat(f.rhs());
        out = b;
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t i = 0; i < n; ++i)
            if (!out[i] && a[i] && out[next(i)]) out[i] = changed = true;
        }
        break;
      }
      case Op::Release: {
        auto a = sat(f.lhs()), b = sat(f.rhs());
        out.assign(n, true);
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t i = 0; i < n; ++i) {
            bool v = b[i] && (a[i] || out[next(i)]);
            if (out[i] && !v) out[i] = false, changed = true;
          }
        }
        break;
      }
      default:
        throw Error("lasso evaluator handles LTL only");
    }
    return out;
  }

  std::vector<Letter> word_;
  std::size_t loop_start_;
  std::vector<std::string> atoms_;
};

inline std::vector<Letter> random_word(Rng& rng, int len, int atoms) {
  std::vector<Letter> w;
  for (int i = 0; i < len; ++i) w.push_back(static_cast<Letter>(uniform(rng, 0, (1 << atoms) - 1)));
  return w;
}

}  // namespace slkit::testkit
