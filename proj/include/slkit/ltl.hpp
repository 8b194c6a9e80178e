#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "slkit/formula.hpp"
#include "slkit/game.hpp"

namespace slkit {

// Universal co-Büchi word automaton. Edges carry a conjunction of literals
// (atoms that must hold / must not hold); every enabled edge spawns a run.
class Ucw {
 public:
  struct Edge {
    int target;
    Letter pos;
    Letter neg;
    bool enabled(Letter s) const { return (s & pos) == pos && (s & neg) == 0; }
  };

  std::vector<std::string> atoms;
  std::vector<std::vector<Edge>> edges;
  std::vector<int> initial;
  std::vector<bool> rejecting;

  int num_states() const { return static_cast<int>(edges.size()); }
  std::size_t num_edges() const {
    std::size_t n = 0;
    for (const auto& e : edges) n += e.size();
    return n;
  }
  void successors(int q, Letter s, std::vector<int>& out) const {
    out.clear();
    for (const auto& e : edges[q])
      if (e.enabled(s) && std::find(out.begin(), out.end(), e.target) == out.end()) out.push_back(e.target);
  }
  // Atoms any outgoing edge of q looks at.
  Letter relevant(int q) const {
    Letter r = 0;
    for (const auto& e : edges[q]) r |= e.pos | e.neg;
    return r;
  }
};

namespace detail {

// Tarjan's algorithm, iterative. Returns component ids; components are
// numbered in reverse topological order.
inline std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int* count = nullptr) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on(n, false);
  int next = 0, ncomp = 0;
  std::vector<std::pair<int, std::size_t>> work;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    work.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on[root] = true;
    while (!work.empty()) {
      auto& [v, i] = work.back();
      if (i < adj[v].size()) {
        int w = adj[v][i++];
        if (index[w] == -1) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on[w] = true;
          work.push_back({w, 0});
        } else if (on[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on[w] = false;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      int done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }
  if (count) *count = ncomp;
  return comp;
}

// Marks vertices lying on a cycle through some marked vertex reachable in adj.
inline bool has_marked_cycle(const std::vector<std::vector<int>>& adj, const std::vector<bool>& marked) {
  int nc = 0;
  auto comp = strongly_connected(adj, &nc);
  std::vector<int> size(nc, 0);
  for (int c : comp) ++size[c];
  for (std::size_t v = 0; v < adj.size(); ++v) {
    if (!marked[v]) continue;
    if (size[comp[v]] > 1) return true;
    for (int w : adj[v])
      if (w == static_cast<int>(v)) return true;
  }
  return false;
}

class LtlPool {
 public:
  struct N {
    Op op;
    int atom;
    int l, r;
  };

  int intern(Op op, int atom, int l, int r) {
    auto key = std::make_tuple(op, atom, l, r);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    nodes.push_back({op, atom, l, r});
    return ids_[key] = static_cast<int>(nodes.size()) - 1;
  }

  // f must be in negation normal form.
  int add(const Formula& f, const std::map<std::string, int>& atom_ids) {
    switch (f.op()) {
      case Op::True: return intern(Op::True, -1, -1, -1);
      case Op::False: return intern(Op::False, -1, -1, -1);
      case Op::Atom: return intern(Op::Atom, atom_ids.at(f.name()), -1, -1);
      case Op::Not:
        if (f.kid().op() != Op::Atom) throw Error("expected negation normal form");
        return intern(Op::Not, atom_ids.at(f.kid().name()), -1, -1);
      case Op::Next: return intern(Op::Next, -1, add(f.kid(), atom_ids), -1);
      case Op::And:
      case Op::Or:
      case Op::Until:
      case Op::Release:
        return intern(f.op(), -1, add(f.lhs(), atom_ids), add(f.rhs(), atom_ids));
      default:
        throw Error("ltl_to_ucw: input must be an LTL formula");
    }
  }
  int complement(int lit) {
    const N& n = nodes[lit];
    return intern(n.op == Op::Atom ? Op::Not : Op::Atom, n.atom, -1, -1);
  }

  std::vector<N> nodes;

 private:
  std::map<std::tuple<Op, int, int, int>, int> ids_;
};

// Tableau graph nodes; node 0 is the initial pseudo-node.
class Tableau {
 public:
  struct GNode {
    std::set<int> incoming;
    std::set<int> old;
    std::set<int> next;
  };

  Tableau(LtlPool& pool, int root) : pool_(pool) {
    nodes.push_back({});
    expand({{0}, {}, {}}, {root});
  }

  std::vector<GNode> nodes;

 private:
  void expand(GNode n, std::vector<int> todo) {
    for (;;) {
      if (todo.empty()) {
        for (std::size_t m = 1; m < nodes.size(); ++m) {
          if (nodes[m].old == n.old && nodes[m].next == n.next) {
            nodes[m].incoming.insert(n.incoming.begin(), n.incoming.end());
            return;
          }
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back(n);
        std::vector<int> nxt(n.next.begin(), n.next.end());
        n = GNode{{id}, {}, {}};
        todo = std::move(nxt);
        continue;
      }
      const int f = todo.back();
      todo.pop_back();
      if (n.old.count(f)) continue;
      const auto nd = pool_.nodes[f];
      switch (nd.op) {
        case Op::False:
          return;
        case Op::True:
          n.old.insert(f);
          break;
        case Op::Atom:
        case Op::Not:
          if (n.old.count(pool_.complement(f))) return;
          n.old.insert(f);
          break;
        case Op::And:
          n.old.insert(f);
          todo.push_back(nd.l);
          todo.push_back(nd.r);
          break;
        case Op::Next:
          n.old.insert(f);
          n.next.insert(nd.l);
          break;
        case Op::Or: {
          n.old.insert(f);
          GNode other = n;
          auto todo2 = todo;
          todo2.push_back(nd.r);
          expand(other, todo2);
          todo.push_back(nd.l);
          break;
        }
        case Op::Until: {
          n.old.insert(f);
          GNode other = n;
          auto todo2 = todo;
          todo2.push_back(nd.r);
          expand(other, todo2);
          todo.push_back(nd.l);
          n.next.insert(f);
          break;
        }
        case Op::Release: {
          n.old.insert(f);
          GNode other = n;
          auto todo2 = todo;
          todo2.push_back(nd.l);
          todo2.push_back(nd.r);
          expand(other, todo2);
          todo.push_back(nd.r);
          n.next.insert(f);
          break;
        }
        default:
          throw Error("unexpected operator in tableau");
      }
    }
  }

  LtlPool& pool_;
};

}  // namespace detail

// Universal co-Büchi automaton accepting exactly the models of psi: the
// Büchi tableau of !psi, degeneralized, trimmed to states with a nonempty
// language, and read dually.
inline Ucw ltl_to_ucw(const Formula& psi, std::vector<std::string> atoms = {}) {
  if (!is_ltl(psi)) throw Error("ltl_to_ucw: input must be an LTL formula");
  if (atoms.empty()) {
    auto s = atoms_of(psi);
    atoms.assign(s.begin(), s.end());
  }
  if (atoms.size() > 64) throw Error("ltl_to_ucw: at most 64 atoms");
  std::map<std::string, int> atom_ids;
  for (std::size_t i = 0; i < atoms.size(); ++i) atom_ids[atoms[i]] = static_cast<int>(i);
  for (const auto& a : atoms_of(psi))
    if (!atom_ids.count(a)) throw Error("ltl_to_ucw: atom '" + a + "' missing from the alphabet");

  detail::LtlPool pool;
  const int root = pool.add(normalize(Formula::negate(psi), NormalForm::Pnf), atom_ids);
  detail::Tableau tab(pool, root);
  const int nn = static_cast<int>(tab.nodes.size());

  std::vector<int> untils;
  for (int i = 0; i < static_cast<int>(pool.nodes.size()); ++i)
    if (pool.nodes[i].op == Op::Until) untils.push_back(i);
  const int k = static_cast<int>(untils.size());
  auto in_f = [&](int node, int i) {
    if (node == 0) return true;
    const auto& old = tab.nodes[node].old;
    return !old.count(untils[i]) || old.count(pool.nodes[untils[i]].r);
  };
  std::vector<Letter> pos(nn, 0), neg(nn, 0);
  std::vector<std::vector<int>> out(nn);
  for (int n = 1; n < nn; ++n) {
    for (int f : tab.nodes[n].old) {
      const auto& p = pool.nodes[f];
      if (p.op == Op::Atom) pos[n] |= Letter{1} << p.atom;
      if (p.op == Op::Not) neg[n] |= Letter{1} << p.atom;
    }
    for (int q : tab.nodes[n].incoming) out[q].push_back(n);
  }
  for (auto& o : out) std::sort(o.begin(), o.end());

  // Degeneralized states (node, counter), discovered breadth-first.
  const int layers = std::max(k, 1);
  std::map<std::pair<int, int>, int> sid;
  std::vector<std::pair<int, int>> states;
  std::vector<std::vector<int>> succ;
  auto get = [&](int n, int i) {
    auto [it, fresh] = sid.emplace(std::make_pair(n, i), static_cast<int>(states.size()));
    if (fresh) {
      states.push_back({n, i});
      succ.emplace_back();
    }
    return it->second;
  };
  get(0, 0);
  for (std::size_t s = 0; s < states.size(); ++s) {
    auto [q, i] = states[s];
    int j = k == 0 ? 0 : (in_f(q, i) ? (i + 1) % layers : i);
    for (int n : out[q]) {
      int t = get(n, j);
      succ[s].push_back(t);
    }
  }
  const int ns = static_cast<int>(states.size());
  std::vector<bool> accepting(ns);
  for (int s = 0; s < ns; ++s)
    accepting[s] = states[s].first != 0 && (k == 0 || (states[s].second == 0 && in_f(states[s].first, 0)));

  // Keep states from which an accepting cycle is reachable.
  int nc = 0;
  auto comp = detail::strongly_connected(succ, &nc);
  std::vector<int> csize(nc, 0);
  for (int c : comp) ++csize[c];
  std::vector<bool> good_comp(nc, false);
  for (int s = 0; s < ns; ++s) {
    if (!accepting[s]) continue;
    bool cyc = csize[comp[s]] > 1 || std::find(succ[s].begin(), succ[s].end(), s) != succ[s].end();
    if (cyc) good_comp[comp[s]] = true;
  }
  std::vector<bool> live(ns, false);
  // Components come in reverse topological order, so successors are done first.
  std::vector<std::vector<int>> members(nc);
  for (int s = 0; s < ns; ++s) members[comp[s]].push_back(s);
  for (int c = 0; c < nc; ++c) {
    bool l = good_comp[c];
    for (int s : members[c])
      for (int t : succ[s])
        if (comp[t] != c && live[t]) l = true;
    for (int s : members[c]) live[s] = l;
  }

  Ucw u;
  u.atoms = atoms;
  std::vector<int> renum(ns, -1);
  std::vector<int> order{0};
  renum[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    int s = order[i];
    if (!live[s]) continue;
    for (int t : succ[s])
      if (live[t] && renum[t] == -1) {
        renum[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
  }
  u.edges.resize(order.size());
  u.rejecting.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    int s = order[i];
    u.rejecting[i] = accepting[s];
    if (!live[s]) continue;
    for (int t : succ[s]) {
      if (!live[t]) continue;
      int node = states[t].first;
      u.edges[i].push_back({renum[t], pos[node], neg[node]});
    }
  }
  u.initial = {0};
  return u;
}

inline bool ucw_accepts_lasso(const Ucw& u, const std::vector<Letter>& stem, const std::vector<Letter>& loop) {
  if (loop.empty()) throw Error("lasso loop must be non-empty");
  const int n = static_cast<int>(stem.size() + loop.size());
  auto letter = [&](int i) { return i < static_cast<int>(stem.size()) ? stem[i] : loop[i - stem.size()]; };
  auto nxt = [&](int i) { return i + 1 < n ? i + 1 : static_cast<int>(stem.size()); };
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> nodes;
  std::vector<std::vector<int>> adj;
  auto get = [&](int q, int i) {
    auto [it, fresh] = id.emplace(std::make_pair(q, i), static_cast<int>(nodes.size()));
    if (fresh) {
      nodes.push_back({q, i});
      adj.emplace_back();
    }
    return it->second;
  };
  for (int q : u.initial) get(q, 0);
  std::vector<int> succ;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    auto [q, i] = nodes[v];
    u.successors(q, letter(i), succ);
    for (int t : succ) {
      int w = get(t, nxt(i));
      adj[v].push_back(w);
    }
  }
  std::vector<bool> marked(nodes.size());
  for (std::size_t v = 0; v < nodes.size(); ++v) marked[v] = u.rejecting[nodes[v].first];
  return !detail::has_marked_cycle(adj, marked);
}

}  // namespace slkit
