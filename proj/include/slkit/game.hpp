#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "slkit/formula.hpp"

namespace slkit {

using Track = std::vector<int>;
using Letter = std::uint64_t;  // set of atoms as a bit mask

class CgsError : public Error {
 public:
  using Error::Error;
};

// Finite concurrent game structure. Decisions are encoded as mixed-radix
// indices with the first agent most significant.
class Cgs {
 public:
  Cgs() = default;
  Cgs(std::vector<std::string> atoms, std::vector<std::string> agents, std::vector<std::string> actions,
      std::vector<std::string> states, int initial, std::vector<Letter> labels, std::vector<int> transitions)
      : atoms_(std::move(atoms)),
        agents_(std::move(agents)),
        actions_(std::move(actions)),
        states_(std::move(states)),
        initial_(initial),
        labels_(std::move(labels)),
        delta_(std::move(transitions)) {
    validate();
  }

  const std::vector<std::string>& atoms() const { return atoms_; }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::string>& states() const { return states_; }
  int initial() const { return initial_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  int num_actions() const { return static_cast<int>(actions_.size()); }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  int num_decisions() const { return num_decisions_; }
  Letter label(int s) const { return labels_.at(s); }
  bool holds(int s, int atom) const { return (labels_.at(s) >> atom) & 1U; }

  int step(int s, int decision) const { return delta_.at(static_cast<std::size_t>(s) * num_decisions_ + decision); }
  int step(int s, const std::vector<int>& actions) const { return step(s, encode(actions)); }

  int encode(const std::vector<int>& actions) const {
    if (static_cast<int>(actions.size()) != num_agents()) throw CgsError("decision arity mismatch");
    int d = 0;
    for (int a : actions) {
      if (a < 0 || a >= num_actions()) throw CgsError("action out of range");
      d = d * num_actions() + a;
    }
    return d;
  }
  std::vector<int> decode(int d) const {
    std::vector<int> out(num_agents());
    for (int i = num_agents() - 1; i >= 0; --i) {
      out[i] = d % num_actions();
      d /= num_actions();
    }
    return out;
  }
  std::vector<int> successors(int s) const {
    std::set<int> out;
    for (int d = 0; d < num_decisions_; ++d) out.insert(step(s, d));
    return {out.begin(), out.end()};
  }

  int state_index(const std::string& n) const { return index_in(states_, n, "state"); }
  int agent_index(const std::string& n) const { return index_in(agents_, n, "agent"); }
  int atom_index(const std::string& n) const { return index_in(atoms_, n, "atom"); }
  int action_index(const std::string& n) const { return index_in(actions_, n, "action"); }

  std::vector<std::string> label_names(int s) const {
    std::vector<std::string> out;
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i)
      if (holds(s, i)) out.push_back(atoms_[i]);
    return out;
  }

  // Free-form remarks kept with the document (e.g. reconstructed entries).
  std::vector<std::string> notes;

  bool operator==(const Cgs& o) const {
    return atoms_ == o.atoms_ && agents_ == o.agents_ && actions_ == o.actions_ && states_ == o.states_ &&
           initial_ == o.initial_ && labels_ == o.labels_ && delta_ == o.delta_;
  }

 private:
  static int index_in(const std::vector<std::string>& v, const std::string& n, const char* what) {
    auto it = std::find(v.begin(), v.end(), n);
    if (it == v.end()) throw CgsError(std::string("unknown ") + what + " '" + n + "'");
    return static_cast<int>(it - v.begin());
  }
  static void unique(const std::vector<std::string>& v, const char* what) {
    std::set<std::string> s(v.begin(), v.end());
    if (s.size() != v.size()) throw CgsError(std::string("duplicate ") + what + " name");
  }

  void validate() {
    if (atoms_.size() > 64) throw CgsError("at most 64 atoms are supported");
    if (agents_.empty()) throw CgsError("a game needs at least one agent");
    if (actions_.empty()) throw CgsError("a game needs at least one action");
    if (states_.empty()) throw CgsError("a game needs at least one state");
    unique(atoms_, "atom");
    unique(agents_, "agent");
    unique(actions_, "action");
    unique(states_, "state");
    if (initial_ < 0 || initial_ >= num_states()) throw CgsError("initial state out of range");
    if (static_cast<int>(labels_.size()) != num_states()) throw CgsError("labeling must cover every state");
    Letter valid = atoms_.size() == 64 ? ~Letter{0} : ((Letter{1} << atoms_.size()) - 1);
    for (Letter l : labels_)
      if (l & ~valid) throw CgsError("label mentions an undeclared atom");
    long long dec = 1;
    for (int i = 0; i < num_agents(); ++i) {
      dec *= num_actions();
      if (dec > (1 << 22)) throw CgsError("too many decisions");
    }
    num_decisions_ = static_cast<int>(dec);
    if (static_cast<long long>(delta_.size()) != dec * num_states()) throw CgsError("transition table has wrong size");
    for (int t : delta_)
      if (t < 0 || t >= num_states()) throw CgsError("transition target out of range");
  }

  std::vector<std::string> atoms_, agents_, actions_, states_;
  int initial_ = 0;
  std::vector<Letter> labels_;
  std::vector<int> delta_;
  int num_decisions_ = 1;
};

// ---------------------------------------------------------------------------
// Documents

namespace detail {

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw CgsError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array()) throw CgsError(std::string("key '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (e.is_string()) out.push_back(e.get<std::string>());
    else if (e.is_number_integer()) out.push_back(std::to_string(e.get<long long>()));
    else throw CgsError(std::string("entries of '") + key + "' must be names");
  }
  return out;
}

inline std::string action_name(const nlohmann::json& e) {
  if (e.is_string()) return e.get<std::string>();
  if (e.is_number_integer()) return std::to_string(e.get<long long>());
  throw CgsError("action must be a name");
}

}  // namespace detail

// Parses a game document; rejects duplicate object keys.
inline Cgs load_cgs(const std::string& text) {
  nlohmann::json j;
  try {
    bool dup = false;
    std::string dup_key;
    // nlohmann keeps the last duplicate silently; scan keys ourselves.
    std::vector<std::set<std::string>> stack;
    nlohmann::json::parser_callback_t check = [&](int, nlohmann::json::parse_event_t ev, nlohmann::json& parsed) {
      using E = nlohmann::json::parse_event_t;
      if (ev == E::object_start) stack.emplace_back();
      else if (ev == E::object_end) stack.pop_back();
      else if (ev == E::key && !stack.empty()) {
        std::string k = parsed.get<std::string>();
        if (!stack.back().insert(k).second) {
          dup = true;
          dup_key = k;
        }
      }
      return true;
    };
    j = nlohmann::json::parse(text, check);
    if (dup) throw CgsError("duplicate key '" + dup_key + "'");
  } catch (const nlohmann::json::exception& e) {
    throw CgsError(std::string("malformed document: ") + e.what());
  }
  if (!j.is_object()) throw CgsError("document must be an object");

  auto atoms = detail::string_list(j, "ap");
  auto agents = detail::string_list(j, "agents");
  auto actions = detail::string_list(j, "actions");
  auto states = detail::string_list(j, "states");
  if (!j.contains("initial") || !j["initial"].is_string()) throw CgsError("missing or malformed key 'initial'");

  auto find = [](const std::vector<std::string>& v, const std::string& n, const char* what) {
    auto it = std::find(v.begin(), v.end(), n);
    if (it == v.end()) throw CgsError(std::string("unknown ") + what + " '" + n + "'");
    return static_cast<int>(it - v.begin());
  };
  int initial = find(states, j["initial"].get<std::string>(), "state");

  std::vector<Letter> labels(states.size(), 0);
  if (j.contains("label")) {
    if (!j["label"].is_object()) throw CgsError("'label' must map states to atom lists");
    for (const auto& [s, l] : j["label"].items()) {
      int si = find(states, s, "state");
      if (!l.is_array()) throw CgsError("label of '" + s + "' must be a list");
      for (const auto& a : l) {
        if (!a.is_string()) throw CgsError("label entries must be atom names");
        labels[si] |= Letter{1} << find(atoms, a.get<std::string>(), "atom");
      }
    }
  }

  long long dec = 1;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    dec *= static_cast<long long>(actions.size());
    if (dec > (1 << 22)) throw CgsError("too many decisions");
  }
  if (agents.empty() || actions.empty() || states.empty()) throw CgsError("agents, actions and states must be non-empty");
  const int nd = static_cast<int>(dec);
  std::vector<int> explicit_to(states.size() * nd, -1);
  std::vector<int> fallback(states.size(), -1);

  if (!j.contains("transitions") || !j["transitions"].is_array()) throw CgsError("missing key 'transitions'");
  for (const auto& row : j["transitions"]) {
    if (!row.is_object() || !row.contains("from") || !row.contains("to") || !row.contains("decision"))
      throw CgsError("transition rows need 'from', 'decision' and 'to'");
    int from = find(states, row["from"].get<std::string>(), "state");
    int to = find(states, row["to"].get<std::string>(), "state");
    const auto& d = row["decision"];
    if (d.is_string() && d.get<std::string>() == "*") {
      if (fallback[from] != -1 && fallback[from] != to)
        throw CgsError("conflicting default rows for state '" + states[from] + "'");
      if (fallback[from] != -1) throw CgsError("duplicate default row for state '" + states[from] + "'");
      fallback[from] = to;
      continue;
    }
    if (!d.is_object()) throw CgsError("decision must map agents to actions or be \"*\"");
    std::vector<int> acts(agents.size(), -1);
    for (const auto& [a, act] : d.items()) acts[find(agents, a, "agent")] = find(actions, detail::action_name(act), "action");
    int code = 0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (acts[i] < 0) throw CgsError("decision in a row from '" + states[from] + "' omits agent '" + agents[i] + "'");
      code = code * static_cast<int>(actions.size()) + acts[i];
    }
    int& slot = explicit_to[static_cast<std::size_t>(from) * nd + code];
    if (slot != -1) {
      if (slot != to) throw CgsError("conflicting transitions from '" + states[from] + "'");
      throw CgsError("duplicate transition from '" + states[from] + "'");
    }
    slot = to;
  }

  std::vector<int> delta(explicit_to.size());
  for (std::size_t s = 0; s < states.size(); ++s)
    for (int d = 0; d < nd; ++d) {
      int t = explicit_to[s * nd + d];
      if (t < 0) t = fallback[s];
      if (t < 0) {
        std::string desc = "{";
        int code = d;
        std::vector<int> acts(agents.size());
        for (int i = static_cast<int>(agents.size()) - 1; i >= 0; --i) {
          acts[i] = code % static_cast<int>(actions.size());
          code /= static_cast<int>(actions.size());
        }
        for (std::size_t i = 0; i < agents.size(); ++i)
          desc += (i ? ", " : "") + agents[i] + ": " + actions[acts[i]];
        desc += "}";
        throw CgsError("transition function not total: no target for state '" + states[s] + "' under decision " + desc);
      }
      delta[s * nd + d] = t;
    }

  Cgs g(atoms, agents, actions, states, initial, labels, delta);
  if (j.contains("notes")) g.notes = detail::string_list(j, "notes");
  return g;
}

// Canonical document: per state a default row to the most frequent target
// (ties to the lowest index) followed by the remaining rows in decision order.
inline std::string save_cgs(const Cgs& g) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["ap"] = g.atoms();
  j["agents"] = g.agents();
  j["actions"] = g.actions();
  j["states"] = g.states();
  j["initial"] = g.states()[g.initial()];
  ordered_json lab = ordered_json::object();
  for (int s = 0; s < g.num_states(); ++s) lab[g.states()[s]] = g.label_names(s);
  j["label"] = lab;
  ordered_json rows = ordered_json::array();
  for (int s = 0; s < g.num_states(); ++s) {
    std::vector<int> count(g.num_states(), 0);
    for (int d = 0; d < g.num_decisions(); ++d) ++count[g.step(s, d)];
    int common = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    rows.push_back({{"from", g.states()[s]}, {"decision", "*"}, {"to", g.states()[common]}});
    for (int d = 0; d < g.num_decisions(); ++d) {
      int t = g.step(s, d);
      if (t == common) continue;
      ordered_json dec = ordered_json::object();
      auto acts = g.decode(d);
      for (int i = 0; i < g.num_agents(); ++i) dec[g.agents()[i]] = g.actions()[acts[i]];
      rows.push_back({{"from", g.states()[s]}, {"decision", dec}, {"to", g.states()[t]}});
    }
  }
  j["transitions"] = rows;
  if (!g.notes.empty()) j["notes"] = g.notes;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Strategies and assignments

// Table from tracks (of length <= horizon, starting at root) to actions.
struct ExplicitStrategy {
  int root = 0;
  int horizon = 0;
  std::map<Track, int> table;
  int fallback = 0;

  int action(const Track& t) const {
    auto it = table.find(t);
    return it == table.end() ? fallback : it->second;
  }
};

// Finite-memory strategy: the memory reads every state of the track; the
// action is the output of the memory reached after the last state.
struct MooreStrategy {
  int memory_size = 1;
  int initial = 0;
  std::vector<std::vector<int>> update;  // [memory][state] -> memory
  std::vector<int> output;               // [memory] -> action

  int run(const Track& t, int from) const {
    int m = from;
    for (int s : t) m = update.at(m).at(s);
    return m;
  }
  int action(const Track& t) const { return output.at(run(t, initial)); }

  static MooreStrategy constant(int num_states, int action) {
    MooreStrategy m;
    m.update.assign(1, std::vector<int>(num_states, 0));
    m.output = {action};
    return m;
  }
};

class Strategy {
 public:
  Strategy(ExplicitStrategy e) : impl_(std::move(e)) {}  // NOLINT
  Strategy(MooreStrategy m) : impl_(std::move(m)) {}     // NOLINT

  int action(const Track& t) const {
    return std::visit([&](const auto& s) { return s.action(t); }, impl_);
  }
  bool is_moore() const { return std::holds_alternative<MooreStrategy>(impl_); }
  const MooreStrategy& moore() const { return std::get<MooreStrategy>(impl_); }
  const ExplicitStrategy& table() const { return std::get<ExplicitStrategy>(impl_); }

 private:
  std::variant<ExplicitStrategy, MooreStrategy> impl_;
};

using StrategyPtr = std::shared_ptr<const Strategy>;

// Converts a table to a machine that remembers the track up to the horizon
// and repeats the table's fallback action afterwards.
inline MooreStrategy to_moore(const ExplicitStrategy& e, int num_states) {
  std::map<Track, int> ids;
  std::vector<Track> tracks;
  auto id_of = [&](const Track& t) {
    auto [it, fresh] = ids.emplace(t, static_cast<int>(tracks.size()));
    if (fresh) tracks.push_back(t);
    return it->second;
  };
  id_of({});
  for (const auto& [t, a] : e.table)
    for (std::size_t k = 1; k <= t.size(); ++k) id_of(Track(t.begin(), t.begin() + static_cast<long>(k)));
  const int sink = static_cast<int>(tracks.size());
  MooreStrategy m;
  m.memory_size = sink + 1;
  m.update.assign(m.memory_size, std::vector<int>(num_states, sink));
  m.output.assign(m.memory_size, e.fallback);
  for (int i = 0; i < sink; ++i) {
    m.output[i] = e.action(tracks[i]);
    for (int s = 0; s < num_states; ++s) {
      Track t = tracks[i];
      t.push_back(s);
      auto it = ids.find(t);
      if (it != ids.end()) m.update[i][s] = it->second;
    }
  }
  return m;
}

// A strategy together with the history it has been translated by.
struct Bound {
  StrategyPtr strategy;
  Track history;

  int action(const Track& t) const {
    if (history.empty()) return strategy->action(t);
    Track full = history;
    full.insert(full.end(), t.begin(), t.end());
    return strategy->action(full);
  }
};

class Assignment {
 public:
  Assignment() = default;

  bool contains(const std::string& key) const { return map_.count(key) > 0; }
  const Bound& at(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw Error("assignment has no entry for '" + key + "'");
    return it->second;
  }
  std::set<std::string> domain() const {
    std::set<std::string> d;
    for (const auto& [k, v] : map_) d.insert(k);
    return d;
  }
  bool complete(const std::vector<std::string>& agents) const {
    return std::all_of(agents.begin(), agents.end(), [&](const auto& a) { return contains(a); });
  }

  Assignment redefine(const std::string& key, StrategyPtr f) const {
    Assignment out = *this;
    out.map_[key] = Bound{std::move(f), {}};
    return out;
  }
  Assignment redefine(const std::string& key, Bound b) const {
    Assignment out = *this;
    out.map_[key] = std::move(b);
    return out;
  }
  // (a,x): agent a takes whatever x holds.
  Assignment bind(const std::string& agent, const std::string& var) const {
    return redefine(agent, at(var));
  }
  // Every entry now reads its strategy after the given prefix.
  Assignment shifted(const Track& prefix) const {
    Assignment out = *this;
    for (auto& [k, b] : out.map_) b.history.insert(b.history.end(), prefix.begin(), prefix.end());
    return out;
  }
  const std::map<std::string, Bound>& entries() const { return map_; }

 private:
  std::map<std::string, Bound> map_;
};

// ---------------------------------------------------------------------------
// Plays

struct Lasso {
  Track stem;
  Track loop;

  int at(std::size_t i) const {
    if (i < stem.size()) return stem[i];
    return loop[(i - stem.size()) % loop.size()];
  }
  // Same infinite sequence, compared element-wise over a full period.
  bool same_word(const Lasso& o) const {
    std::size_t n = std::max(stem.size(), o.stem.size()) + loop.size() * o.loop.size();
    for (std::size_t i = 0; i < n; ++i)
      if (at(i) != o.at(i)) return false;
    return true;
  }
  std::vector<int> prefix(std::size_t n) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(at(i));
    return out;
  }
};

inline Lasso play(const Cgs& g, const Assignment& asg, int s) {
  const int n = g.num_agents();
  std::vector<const MooreStrategy*> machines(n);
  std::vector<int> memory(n);
  for (int i = 0; i < n; ++i) {
    const Bound& b = asg.at(g.agents()[i]);
    if (!b.strategy->is_moore()) throw Error("play needs finite-memory strategies for every agent");
    machines[i] = &b.strategy->moore();
    memory[i] = machines[i]->run(b.history, machines[i]->initial);
  }
  std::map<std::pair<int, std::vector<int>>, std::size_t> seen;
  Track path;
  int cur = s;
  for (;;) {
    auto key = std::make_pair(cur, memory);
    auto it = seen.find(key);
    if (it != seen.end()) {
      Lasso l;
      l.stem.assign(path.begin(), path.begin() + static_cast<long>(it->second));
      l.loop.assign(path.begin() + static_cast<long>(it->second), path.end());
      return l;
    }
    seen.emplace(key, path.size());
    path.push_back(cur);
    std::vector<int> acts(n);
    for (int i = 0; i < n; ++i) {
      memory[i] = machines[i]->update.at(memory[i]).at(cur);
      acts[i] = machines[i]->output.at(memory[i]);
    }
    cur = g.step(cur, acts);
  }
}

// The i-th global translation: every entry is shifted by the first i states
// of the play, and evaluation continues from the i-th state.
inline std::pair<Assignment, int> translate(const Cgs& g, const Assignment& asg, int s, std::size_t i) {
  Lasso p = play(g, asg, s);
  Track prefix = p.prefix(i);
  return {asg.shifted(prefix), p.at(i)};
}

// ---------------------------------------------------------------------------
// Decision unwinding

struct DecisionTree {
  struct Node {
    int parent = -1;
    int decision = -1;
    int state = 0;
    Letter label = 0;
    int depth = 0;
  };
  std::vector<Node> nodes;
  int num_decisions = 1;
  // Children of node i are contiguous, in decision order.
  int child(int i, int d) const {
    int first = first_child.at(i);
    return first < 0 ? -1 : first + d;
  }
  std::vector<int> first_child;
};

inline DecisionTree unwind(const Cgs& g, int depth, std::size_t cap = 1u << 20) {
  if (depth < 0) throw Error("unwind depth must be non-negative");
  std::size_t total = 1, layer = 1;
  for (int i = 0; i < depth; ++i) {
    layer *= static_cast<std::size_t>(g.num_decisions());
    total += layer;
    if (total > cap) throw Error("unwinding exceeds the node cap");
  }
  DecisionTree t;
  t.num_decisions = g.num_decisions();
  t.nodes.push_back({-1, -1, g.initial(), g.label(g.initial()), 0});
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    t.first_child.push_back(-1);
    if (t.nodes[i].depth == depth) continue;
    t.first_child[i] = static_cast<int>(t.nodes.size());
    for (int d = 0; d < g.num_decisions(); ++d) {
      int s = g.step(t.nodes[i].state, d);
      t.nodes.push_back({static_cast<int>(i), d, s, g.label(s), t.nodes[i].depth + 1});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Built-in structures

// G* truncated to actions {0..n-1}: from s0, s1 iff alpha's action <= beta's.
inline Cgs gstar(int n) {
  if (n < 1) throw Error("gstar needs n >= 1");
  std::vector<std::string> acts;
  for (int i = 0; i < n; ++i) acts.push_back(std::to_string(i));
  std::vector<int> delta(3 * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      delta[a * n + b] = a <= b ? 1 : 2;
      delta[n * n + a * n + b] = 1;
      delta[2 * n * n + a * n + b] = 2;
    }
  return Cgs({"p"}, {"alpha", "beta"}, acts, {"s0", "s1", "s2"}, 0, {0, 1, 0}, delta);
}

// Witness of the domino construction: s0 branches to (p,t) or (!p,t) where
// t is read from the table and p records alpha's action <= beta's.
inline Cgs domino_witness(const DominoSystem& d, const std::function<std::string(int, int)>& tiling, int n) {
  d.validate();
  if (n < 1) throw Error("domino_witness needs n >= 1");
  std::vector<std::string> atoms{"p"};
  for (const auto& t : d.tiles) atoms.push_back(t);
  std::vector<std::string> states{"s0"};
  std::vector<Letter> labels{0};
  for (std::size_t t = 0; t < d.tiles.size(); ++t) {
    states.push_back("p_" + d.tiles[t]);
    labels.push_back(1 | (Letter{1} << (t + 1)));
    states.push_back("np_" + d.tiles[t]);
    labels.push_back(Letter{1} << (t + 1));
  }
  std::vector<std::string> acts;
  for (int i = 0; i < n; ++i) acts.push_back(std::to_string(i));
  const int nd = n * n;
  std::vector<int> delta(states.size() * nd);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::string tile = tiling(a, b);
      auto it = std::find(d.tiles.begin(), d.tiles.end(), tile);
      if (it == d.tiles.end()) throw Error("tiling table yields unknown tile '" + tile + "'");
      int t = static_cast<int>(it - d.tiles.begin());
      delta[a * n + b] = 1 + 2 * t + (a <= b ? 0 : 1);
    }
  for (std::size_t s = 1; s < states.size(); ++s)
    for (int x = 0; x < nd; ++x) delta[s * nd + x] = static_cast<int>(s);
  return Cgs(atoms, {"alpha", "beta"}, acts, states, 0, labels, delta);
}

// Preemptive scheduling, decisions ordered (P1, P2, S).
inline Cgs preemptive_scheduling() {
  // states: si s1 s2 s12 g1 g2
  const std::vector<std::string> states{"s_i", "s_1", "s_2", "s_12", "s'_1", "s'_2"};
  std::vector<Letter> labels{0, 1, 2, 3, 4, 8};  // r1 r2 g1 g2
  std::vector<int> delta(6 * 8);
  auto put = [&](int s, int p1, int p2, int sch, int t) { delta[s * 8 + p1 * 4 + p2 * 2 + sch] = t; };
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2)
      for (int sch = 0; sch < 2; ++sch) {
        put(0, p1, p2, sch, p1 && p2 ? 3 : p1 ? 1 : p2 ? 2 : 0);
        put(1, p1, p2, sch, 4);
        put(2, p1, p2, sch, 5);
        put(3, p1, p2, sch, sch == 0 ? 4 : 5);
        put(4, p1, p2, sch, sch ? 5 : 0);  // 1 preempts in favour of P2
        put(5, p1, p2, sch, sch ? 0 : 4);  // 0 preempts in favour of P1
      }
  Cgs g({"r1", "r2", "g1", "g2"}, {"P1", "P2", "S"}, {"0", "1"}, states, 0, labels, delta);
  g.notes = {
      "pinned by the play example: s_i -(1,1,*)-> s_12, s_12 -(1,1,0)-> s'_1, s_12 -(1,1,1)-> s'_2, "
      "s'_1 -(1,1,0)-> s_i, s'_2 -(1,1,1)-> s_i",
      "reconstructed: all other rows (requests from s_i, grants from s_1/s_2, preemption from s'_1/s'_2)",
      "preemption hands the resource over whether or not the other process asks again, so that the "
      "fair-scheduler sentence holds at s_i"};
  return g;
}

// Prisoners and police, decisions ordered (A1, A2, P). Action 1 of a
// prisoner is defecting; the police's action 1 releases.
inline Cgs prisoners_dilemma() {
  const std::vector<std::string> states{"s_i", "s_A1", "s_A2", "s_j", "s_A1j", "s_A2j", "s_A1A2"};
  std::vector<Letter> labels{0, 1, 2, 0, 1, 2, 3};  // fA1 fA2
  std::vector<int> delta(7 * 8);
  auto put = [&](int s, int a1, int a2, int p, int t) { delta[s * 8 + a1 * 4 + a2 * 2 + p] = t; };
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int p = 0; p < 2; ++p) {
        int from_i = 0;
        if (a1 && a2) from_i = 3;
        else if (a1) from_i = p ? 1 : 4;
        else if (a2) from_i = p ? 2 : 5;
        put(0, a1, a2, p, from_i);
        put(1, a1, a2, p, 1);
        put(2, a1, a2, p, 2);
        put(3, a1, a2, p, 3);
        put(4, a1, a2, p, p ? 6 : 4);
        put(5, a1, a2, p, p ? 6 : 5);
        put(6, a1, a2, p, 6);
      }
  Cgs g({"fA1", "fA2"}, {"A1", "A2", "P"}, {"0", "1"}, states, 0, labels, delta);
  g.notes = {"reconstructed: every row; police action 0 keeps s_A1j/s_A2j, action 1 frees both prisoners",
             "s_j (both defect) is absorbing"};
  return g;
}

inline Cgs builtin(const std::string& name, int n = 0) {
  if (name == "ps") return preemptive_scheduling();
  if (name == "ppd") return prisoners_dilemma();
  if (name == "gstar") return gstar(n);
  if (name == "domino") {
    DominoSystem d{{"t0", "t1"}, {{"t0", "t1"}, {"t1", "t0"}}, {{"t0", "t0"}, {"t1", "t1"}}, "t0"};
    return domino_witness(d, [](int a, int) { return a % 2 ? "t1" : "t0"; }, n);
  }
  throw Error("unknown built-in structure '" + name + "'");
}

}  // namespace slkit
