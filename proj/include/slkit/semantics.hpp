#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slkit/formula.hpp"
#include "slkit/game.hpp"

namespace slkit {

class OracleScopeError : public Error {
 public:
  using Error::Error;
};

class NotBehavioral : public Error {
 public:
  using Error::Error;
};

// Maximal X-nesting; nullopt when U or R occurs.
inline std::optional<int> temporal_depth(const Formula& f) {
  if (f.op() == Op::Until || f.op() == Op::Release) return std::nullopt;
  int best = 0;
  for (const auto& k : f.kids()) {
    auto d = temporal_depth(k);
    if (!d) return std::nullopt;
    best = std::max(best, *d);
  }
  return f.op() == Op::Next ? best + 1 : best;
}

// Legal tracks from s with at most max_len states, shortest first and
// lexicographic within a length.
inline std::vector<Track> tracks_from(const Cgs& g, int s, int max_len) {
  std::vector<Track> out;
  if (max_len < 1) return out;
  out.push_back({s});
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (static_cast<int>(out[i].size()) == max_len) continue;
    for (int t : g.successors(out[i].back())) {
      Track n = out[i];
      n.push_back(t);
      out.push_back(std::move(n));
    }
  }
  return out;
}

// Strategies over a fixed track list are numbers in base |Act| with one digit
// per track, the first track most significant.
inline int strategy_digit(long long index, int track, int num_tracks, int actions) {
  for (int j = num_tracks - 1; j > track; --j) index /= actions;
  return static_cast<int>(index % actions);
}

inline long long checked_pow(long long base, long long exp, long long cap) {
  long long r = 1;
  for (long long i = 0; i < exp; ++i) {
    r *= base;
    if (r > cap) throw OracleScopeError("enumeration exceeds the size guard");
  }
  return r;
}

inline StrategyPtr table_strategy(int root, const std::vector<Track>& tracks, const std::vector<int>& actions) {
  ExplicitStrategy e;
  e.root = root;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    e.table.emplace(tracks[j], actions[j]);
    e.horizon = std::max(e.horizon, static_cast<int>(tracks[j].size()));
  }
  return std::make_shared<const Strategy>(std::move(e));
}

// Exhaustive evaluation of next-only formulas. Quantifiers range over every
// table on the tracks that can still matter for their body.
class DirectEvaluator {
 public:
  explicit DirectEvaluator(const Cgs& g, long long strategy_cap = 1 << 16) : g_(g), cap_(strategy_cap) {}

  bool eval(const Formula& f, int s, const Assignment& asg) {
    switch (f.op()) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Atom: return g_.holds(s, atom(f.name()));
      case Op::Not: return !eval(f.kid(), s, asg);
      case Op::And: return eval(f.lhs(), s, asg) && eval(f.rhs(), s, asg);
      case Op::Or: return eval(f.lhs(), s, asg) || eval(f.rhs(), s, asg);
      case Op::Exists:
      case Op::Forall: {
        const bool want = f.op() == Op::Exists;
        for (const auto& st : strategies(s, depth(f.kid())))
          if (eval(f.kid(), s, asg.redefine(f.name(), st)) == want) return want;
        return !want;
      }
      case Op::Bind: return eval(f.kid(), s, asg.bind(f.name(), f.var()));
      case Op::Next: {
        std::vector<int> acts(g_.num_agents());
        const Track here{s};
        for (int i = 0; i < g_.num_agents(); ++i) acts[i] = asg.at(g_.agents()[i]).action(here);
        return eval(f.kid(), g_.step(s, acts), asg.shifted(here));
      }
      case Op::Until:
      case Op::Release:
        throw OracleScopeError("the direct evaluator handles next-only formulas");
    }
    return false;
  }

  // All tables over tracks from s of length <= h, in index order.
  const std::vector<StrategyPtr>& strategies(int s, int h) {
    auto key = std::make_pair(s, h);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<Track> tracks = tracks_from(g_, s, h);
    const int m = static_cast<int>(tracks.size());
    const int d = g_.num_actions();
    long long count = checked_pow(d, m, cap_);
    std::vector<StrategyPtr> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> acts(m);
    for (long long i = 0; i < count; ++i) {
      for (int j = 0; j < m; ++j) acts[j] = strategy_digit(i, j, m, d);
      out.push_back(table_strategy(s, tracks, acts));
    }
    return cache_.emplace(key, std::move(out)).first->second;
  }

  int depth(const Formula& f) {
    auto it = depth_.find(f.id());
    if (it != depth_.end()) return it->second;
    auto d = temporal_depth(f);
    if (!d) throw OracleScopeError("the direct evaluator handles next-only formulas");
    keep_.push_back(f);
    return depth_[f.id()] = *d;
  }

  const Cgs& game() const { return g_; }

 private:
  int atom(const std::string& p) {
    auto it = atoms_.find(p);
    if (it != atoms_.end()) return it->second;
    return atoms_[p] = g_.atom_index(p);
  }

  const Cgs& g_;
  long long cap_;
  std::map<std::pair<int, int>, std::vector<StrategyPtr>> cache_;
  std::unordered_map<const void*, int> depth_;
  std::vector<Formula> keep_;  // keeps memo keys alive
  std::map<std::string, int> atoms_;
};

inline bool eval_direct(const Cgs& g, const Assignment& asg, int s, const Formula& f) {
  DirectEvaluator ev(g);
  return ev.eval(f, s, asg);
}

// ---------------------------------------------------------------------------
// Skolem dependence functions

struct Valuation {
  std::map<std::string, int> values;
  int at(const std::string& x) const { return values.at(x); }
  bool operator==(const Valuation&) const = default;
};

// Dependence map stored as one table per existential variable, indexed by the
// values of its dependencies (earlier dependencies more significant).
class SkolemDepFn {
 public:
  SkolemDepFn(QuantPrefix prefix, long long domain, std::vector<std::vector<long long>> tables)
      : prefix_(std::move(prefix)), domain_(domain), tables_(std::move(tables)) {
    layout();
    if (tables_.size() != exist_pos_.size()) throw Error("one table per existential variable expected");
    for (std::size_t k = 0; k < tables_.size(); ++k) {
      if (static_cast<long long>(tables_[k].size()) != table_size(k)) throw Error("table has the wrong size");
      for (long long v : tables_[k])
        if (v < 0 || v >= domain_) throw Error("table value outside the domain");
    }
  }

  // Identity-like function of an all-universal prefix, or constant 0 tables.
  static SkolemDepFn zero(const QuantPrefix& p, long long domain) {
    SkolemDepFn f(p, domain, {}, 0);
    for (std::size_t k = 0; k < f.exist_pos_.size(); ++k) f.tables_.emplace_back(f.table_size(k), 0);
    return f;
  }

  const QuantPrefix& prefix() const { return prefix_; }
  long long domain() const { return domain_; }
  const std::vector<std::vector<long long>>& tables() const { return tables_; }
  std::vector<std::vector<long long>>& mutable_tables() { return tables_; }
  std::size_t num_universal() const { return univ_pos_.size(); }
  std::size_t num_existential() const { return exist_pos_.size(); }
  // Prefix positions of universal / existential variables.
  const std::vector<int>& universal_positions() const { return univ_pos_; }
  const std::vector<int>& existential_positions() const { return exist_pos_; }
  // For existential k: indices into the universal list of its dependencies.
  const std::vector<int>& dependencies(std::size_t k) const { return deps_[k]; }
  long long table_size(std::size_t k) const {
    long long n = 1;
    for (std::size_t i = 0; i < deps_[k].size(); ++i) n *= domain_;
    return n;
  }
  long long dependence_index(std::size_t k, const std::vector<long long>& universal) const {
    long long w = 0;
    for (int u : deps_[k]) w = w * domain_ + universal[u];
    return w;
  }

  // Values of every prefix variable, in prefix order.
  std::vector<long long> apply(const std::vector<long long>& universal) const {
    if (universal.size() != univ_pos_.size()) throw Error("valuation does not match the universal variables");
    std::vector<long long> out(prefix_.size());
    for (std::size_t i = 0; i < univ_pos_.size(); ++i) out[univ_pos_[i]] = universal[i];
    for (std::size_t k = 0; k < exist_pos_.size(); ++k)
      out[exist_pos_[k]] = tables_[k][dependence_index(k, universal)];
    return out;
  }
  Valuation apply(const Valuation& v) const {
    std::vector<long long> u;
    for (int p : univ_pos_) u.push_back(v.at(prefix_.entries[p].var));
    auto full = apply(u);
    Valuation out;
    for (std::size_t i = 0; i < full.size(); ++i) out.values[prefix_.entries[i].var] = static_cast<int>(full[i]);
    return out;
  }

  // Rows in lexicographic order of universal valuations.
  std::vector<std::vector<long long>> full_table() const {
    std::vector<std::vector<long long>> rows;
    std::vector<long long> u(univ_pos_.size(), 0);
    for (;;) {
      rows.push_back(apply(u));
      int i = static_cast<int>(u.size()) - 1;
      while (i >= 0 && ++u[i] == domain_) u[i--] = 0;
      if (i < 0) break;
    }
    return rows;
  }

  bool operator==(const SkolemDepFn& o) const {
    return prefix_ == o.prefix_ && domain_ == o.domain_ && tables_ == o.tables_;
  }

 private:
  SkolemDepFn(QuantPrefix prefix, long long domain, std::vector<std::vector<long long>> tables, int)
      : prefix_(std::move(prefix)), domain_(domain), tables_(std::move(tables)) {
    layout();
  }
  void layout() {
    if (domain_ < 1) throw Error("domain must be non-empty");
    for (std::size_t i = 0; i < prefix_.size(); ++i) {
      if (prefix_.entries[i].quant == Quant::Forall) {
        univ_pos_.push_back(static_cast<int>(i));
      } else {
        exist_pos_.push_back(static_cast<int>(i));
        std::vector<int> d;
        for (std::size_t u = 0; u < univ_pos_.size(); ++u) d.push_back(static_cast<int>(u));
        deps_.push_back(std::move(d));
      }
    }
  }

  QuantPrefix prefix_;
  long long domain_;
  std::vector<std::vector<long long>> tables_;
  std::vector<int> univ_pos_, exist_pos_;
  std::vector<std::vector<int>> deps_;
};

inline Valuation apply_sdf(const SkolemDepFn& f, const Valuation& v) { return f.apply(v); }

// Checks both defining properties on an explicit table whose rows list all
// prefix variables, one row per universal valuation in lexicographic order.
inline bool satisfies_sdf_invariants(const QuantPrefix& p, long long d,
                                     const std::vector<std::vector<long long>>& rows) {
  std::vector<int> univ;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.entries[i].quant == Quant::Forall) univ.push_back(static_cast<int>(i));
  std::vector<std::vector<long long>> vals;
  std::vector<long long> u(univ.size(), 0);
  for (;;) {
    vals.push_back(u);
    int i = static_cast<int>(u.size()) - 1;
    while (i >= 0 && ++u[i] == d) u[i--] = 0;
    if (i < 0) break;
  }
  if (rows.size() != vals.size()) return false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != p.size()) return false;
    for (std::size_t i = 0; i < univ.size(); ++i)
      if (rows[r][univ[i]] != vals[r][i]) return false;
  }
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p.entries[x].quant != Quant::Exists) continue;
    std::size_t ndeps = 0;
    for (int ui : univ)
      if (ui < static_cast<int>(x)) ++ndeps;
    for (std::size_t r1 = 0; r1 < rows.size(); ++r1)
      for (std::size_t r2 = r1 + 1; r2 < rows.size(); ++r2) {
        bool agree = true;
        for (std::size_t i = 0; i < ndeps; ++i) agree = agree && vals[r1][i] == vals[r2][i];
        if (agree && rows[r1][x] != rows[r2][x]) return false;
      }
  }
  return true;
}

// Visits every dependence function once, first existential variable most
// significant; stops early when the callback returns false.
inline void for_each_sdf(const QuantPrefix& p, long long d, const std::function<bool(const SkolemDepFn&)>& visit) {
  SkolemDepFn f = SkolemDepFn::zero(p, d);
  auto& t = f.mutable_tables();
  for (;;) {
    if (!visit(f)) return;
    int k = static_cast<int>(t.size()) - 1;
    int i = k >= 0 ? static_cast<int>(t[k].size()) - 1 : -1;
    for (;;) {
      if (k < 0) return;
      if (i < 0) {
        if (--k < 0) return;
        i = static_cast<int>(t[k].size()) - 1;
        continue;
      }
      if (++t[k][i] < d) break;
      t[k][i--] = 0;
    }
  }
}

inline std::vector<SkolemDepFn> enumerate_sdf(const QuantPrefix& p, long long d) {
  std::vector<SkolemDepFn> out;
  for_each_sdf(p, d, [&](const SkolemDepFn& f) {
    out.push_back(f);
    return true;
  });
  return out;
}

using BigNat = boost::multiprecision::cpp_int;

inline BigNat count_sdf(const QuantPrefix& p, long long d) {
  BigNat total = 1;
  for (const auto& x : p.existential()) {
    BigNat cells = boost::multiprecision::pow(BigNat(d), static_cast<unsigned>(p.dependencies(x).size()));
    BigNat choices = 1;
    for (BigNat i = 0; i < cells; ++i) choices *= d;
    total *= choices;
  }
  return total;
}

// Closed forms over m tracks: all strategy-level functions, and those that
// admit an adjoint.
inline BigNat count_strategy_sdf(const QuantPrefix& p, long long d, long long m) {
  BigNat strategies = boost::multiprecision::pow(BigNat(d), static_cast<unsigned>(m));
  return count_sdf(p, static_cast<long long>(strategies));
}

inline BigNat count_behavioral_sdf(const QuantPrefix& p, long long d, long long m) {
  BigNat total = 1;
  for (const auto& x : p.existential()) {
    BigNat cells = boost::multiprecision::pow(BigNat(d), static_cast<unsigned>(p.dependencies(x).size())) * m;
    BigNat choices = 1;
    for (BigNat i = 0; i < cells; ++i) choices *= d;
    total *= choices;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Adjoints

// One action-level dependence function per track.
struct AdjointMap {
  std::vector<Track> tracks;
  std::vector<SkolemDepFn> per_track;
};

namespace detail {

inline long long ipow(long long b, long long e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Splits a dependence index over strategies into per-track action indices.
inline std::vector<long long> track_slices(long long w, std::size_t ndeps, int m, int d) {
  const long long D = ipow(d, m);
  std::vector<long long> strategies(ndeps);
  for (int i = static_cast<int>(ndeps) - 1; i >= 0; --i) {
    strategies[i] = w % D;
    w /= D;
  }
  std::vector<long long> out(m, 0);
  for (int j = 0; j < m; ++j)
    for (std::size_t i = 0; i < ndeps; ++i) out[j] = out[j] * d + strategy_digit(strategies[i], j, m, d);
  return out;
}

}  // namespace detail

inline SkolemDepFn sdf_from_adjoint(const AdjointMap& adj, int actions) {
  if (adj.per_track.empty()) throw Error("adjoint without tracks");
  const int m = static_cast<int>(adj.per_track.size());
  const QuantPrefix& p = adj.per_track[0].prefix();
  for (const auto& f : adj.per_track)
    if (f.prefix() != p || f.domain() != actions) throw Error("adjoint images disagree on prefix or domain");
  const long long D = detail::ipow(actions, m);
  SkolemDepFn out = SkolemDepFn::zero(p, D);
  auto& tables = out.mutable_tables();
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const std::size_t ndeps = out.dependencies(k).size();
    for (long long w = 0; w < static_cast<long long>(tables[k].size()); ++w) {
      auto slices = detail::track_slices(w, ndeps, m, actions);
      long long strat = 0;
      for (int j = 0; j < m; ++j) strat = strat * actions + adj.per_track[j].tables()[k][slices[j]];
      tables[k][w] = strat;
    }
  }
  return out;
}

inline AdjointMap adjoint_of(const SkolemDepFn& f, int actions, const std::vector<Track>& tracks) {
  const int m = static_cast<int>(tracks.size());
  if (f.domain() != detail::ipow(actions, m)) throw Error("domain is not the strategy space of the tracks");
  AdjointMap adj;
  adj.tracks = tracks;
  for (int j = 0; j < m; ++j) adj.per_track.push_back(SkolemDepFn::zero(f.prefix(), actions));
  for (std::size_t k = 0; k < f.tables().size(); ++k) {
    const std::size_t ndeps = f.dependencies(k).size();
    std::vector<std::vector<int>> seen(m, std::vector<int>(detail::ipow(actions, static_cast<long long>(ndeps)), -1));
    for (long long w = 0; w < static_cast<long long>(f.tables()[k].size()); ++w) {
      auto slices = detail::track_slices(w, ndeps, m, actions);
      for (int j = 0; j < m; ++j) {
        int a = strategy_digit(f.tables()[k][w], j, m, actions);
        int& slot = seen[j][slices[j]];
        if (slot != -1 && slot != a)
          throw NotBehavioral("existential output on a track depends on universal choices elsewhere");
        slot = a;
        adj.per_track[j].mutable_tables()[k][slices[j]] = a;
      }
    }
  }
  return adj;
}

inline bool is_behavioral(const SkolemDepFn& f, int actions, const std::vector<Track>& tracks) {
  try {
    adjoint_of(f, actions, tracks);
    return true;
  } catch (const NotBehavioral&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Quantification through dependence functions

struct PrincipalParts {
  QuantPrefix prefix;
  Formula matrix;
};

inline PrincipalParts split_principal(const Formula& f) {
  PrincipalParts out;
  Formula g = f;
  std::vector<QuantPrefix::Entry> e;
  while (g.is_quantifier()) {
    e.push_back({g.name(), g.op() == Op::Exists ? Quant::Exists : Quant::Forall});
    g = g.kid();
  }
  out.prefix = QuantPrefix(std::move(e));
  out.matrix = g;
  return out;
}

namespace detail {

// Backtracking over cells shared by a sequence of constraints. Each
// constraint names its cells; cells are fixed lazily in value order.
class CellSearch {
 public:
  CellSearch(int num_cells, int domain, std::size_t num_constraints,
             std::function<void(std::size_t, std::vector<int>&)> cells_of,
             std::function<bool(std::size_t, const std::vector<int>&)> holds)
      : values_(num_cells, -1),
        domain_(domain),
        n_(num_constraints),
        cells_of_(std::move(cells_of)),
        holds_(std::move(holds)) {}

  bool solve() { return step(0); }
  const std::vector<int>& values() const { return values_; }

 private:
  bool step(std::size_t c) {
    if (c == n_) return true;
    std::vector<int> cells;
    cells_of_(c, cells);
    for (int cell : cells) {
      if (values_[cell] != -1) continue;
      for (int v = 0; v < domain_; ++v) {
        values_[cell] = v;
        if (step(c)) return true;
      }
      values_[cell] = -1;
      return false;
    }
    return holds_(c, values_) && step(c + 1);
  }

  std::vector<int> values_;
  int domain_;
  std::size_t n_;
  std::function<void(std::size_t, std::vector<int>&)> cells_of_;
  std::function<bool(std::size_t, const std::vector<int>&)> holds_;
};

struct PrincipalSetup {
  PrincipalParts parts;
  std::vector<Track> tracks;
  int m = 0;
  int d = 0;
  long long D = 0;
  std::vector<std::string> univ, exist;
  std::vector<std::vector<int>> deps;  // per existential: indices into univ
  long long constraints = 0;
};

inline PrincipalSetup setup_principal(const Cgs& g, int s, const Formula& phi, long long guard) {
  PrincipalSetup st;
  st.parts = split_principal(phi);
  auto depth = temporal_depth(st.parts.matrix);
  if (!depth) throw OracleScopeError("dependence-function evaluation handles next-only matrices");
  st.tracks = tracks_from(g, s, *depth);
  st.m = static_cast<int>(st.tracks.size());
  st.d = g.num_actions();
  st.D = checked_pow(st.d, st.m, guard);
  for (const auto& e : st.parts.prefix.entries) {
    if (e.quant == Quant::Forall) {
      st.univ.push_back(e.var);
    } else {
      st.exist.push_back(e.var);
      std::vector<int> dep;
      for (std::size_t u = 0; u < st.univ.size(); ++u) dep.push_back(static_cast<int>(u));
      st.deps.push_back(std::move(dep));
    }
  }
  st.constraints = checked_pow(st.D, static_cast<long long>(st.univ.size()), guard);
  return st;
}

inline std::vector<long long> digits(long long index, std::size_t n, long long base) {
  std::vector<long long> out(n);
  for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
    out[i] = index % base;
    index /= base;
  }
  return out;
}

}  // namespace detail

// Exists a dependence function over horizon strategies such that the matrix
// holds for every universal choice.
inline bool eval_skolem(const Cgs& g, int s, const Formula& phi, long long guard = 1 << 16) {
  auto st = detail::setup_principal(g, s, phi, guard);
  DirectEvaluator ev(g);
  const auto& strategies = ev.strategies(s, static_cast<int>(st.tracks.empty() ? 0 : st.tracks.back().size()));
  // cell id = offset[x] + dependence index
  std::vector<int> offset;
  int cells = 0;
  for (const auto& dep : st.deps) {
    offset.push_back(cells);
    cells += static_cast<int>(checked_pow(st.D, static_cast<long long>(dep.size()), guard));
  }
  auto cells_of = [&](std::size_t c, std::vector<int>& out) {
    auto v = detail::digits(static_cast<long long>(c), st.univ.size(), st.D);
    out.clear();
    for (std::size_t k = 0; k < st.exist.size(); ++k) {
      long long w = 0;
      for (int u : st.deps[k]) w = w * st.D + v[u];
      out.push_back(offset[k] + static_cast<int>(w));
    }
  };
  auto holds = [&](std::size_t c, const std::vector<int>& val) {
    auto v = detail::digits(static_cast<long long>(c), st.univ.size(), st.D);
    Assignment asg;
    for (std::size_t u = 0; u < st.univ.size(); ++u) asg = asg.redefine(st.univ[u], strategies[v[u]]);
    std::vector<int> cs;
    cells_of(c, cs);
    for (std::size_t k = 0; k < st.exist.size(); ++k) asg = asg.redefine(st.exist[k], strategies[val[cs[k]]]);
    return ev.eval(st.parts.matrix, s, asg);
  };
  detail::CellSearch search(cells, static_cast<int>(st.D), static_cast<std::size_t>(st.constraints), cells_of, holds);
  return search.solve();
}

struct SkolemCheck {
  bool via_skolem = false;
  bool via_direct = false;
  bool agree() const { return via_skolem == via_direct; }
};

inline SkolemCheck skolemization_check(const Cgs& g, const Formula& phi) {
  SkolemCheck r;
  r.via_skolem = eval_skolem(g, g.initial(), phi);
  DirectEvaluator ev(g);
  r.via_direct = ev.eval(phi, g.initial(), Assignment{});
  return r;
}

// Exists a per-track family of action-level dependence functions whose
// induced strategy-level function witnesses the matrix.
inline bool eval_behavioral(const Cgs& g, int s, const Formula& phi, long long guard = 1 << 16) {
  auto st = detail::setup_principal(g, s, phi, guard);
  DirectEvaluator ev(g);
  const auto& strategies = ev.strategies(s, static_cast<int>(st.tracks.empty() ? 0 : st.tracks.back().size()));
  // cell id = offset[x] + track * cells_per_track[x] + action-level dependence index
  std::vector<int> offset, per_track;
  int cells = 0;
  for (const auto& dep : st.deps) {
    offset.push_back(cells);
    per_track.push_back(static_cast<int>(checked_pow(st.d, static_cast<long long>(dep.size()), guard)));
    cells += per_track.back() * std::max(st.m, 1);
  }
  const int m = std::max(st.m, 1);
  auto action_at = [&](long long strategy, int j) { return st.m == 0 ? 0 : strategy_digit(strategy, j, st.m, st.d); };
  auto cells_of = [&](std::size_t c, std::vector<int>& out) {
    auto v = detail::digits(static_cast<long long>(c), st.univ.size(), st.D);
    out.clear();
    for (std::size_t k = 0; k < st.exist.size(); ++k)
      for (int j = 0; j < m; ++j) {
        long long w = 0;
        for (int u : st.deps[k]) w = w * st.d + action_at(v[u], j);
        out.push_back(offset[k] + j * per_track[k] + static_cast<int>(w));
      }
  };
  auto holds = [&](std::size_t c, const std::vector<int>& val) {
    auto v = detail::digits(static_cast<long long>(c), st.univ.size(), st.D);
    Assignment asg;
    for (std::size_t u = 0; u < st.univ.size(); ++u) asg = asg.redefine(st.univ[u], strategies[v[u]]);
    std::vector<int> cs;
    cells_of(c, cs);
    for (std::size_t k = 0; k < st.exist.size(); ++k) {
      long long strat = 0;
      for (int j = 0; j < st.m; ++j) strat = strat * st.d + val[cs[k * m + j]];
      asg = asg.redefine(st.exist[k], strategies[strat]);
    }
    return ev.eval(st.parts.matrix, s, asg);
  };
  detail::CellSearch search(cells, st.d, static_cast<std::size_t>(st.constraints), cells_of, holds);
  return search.solve();
}

}  // namespace slkit
