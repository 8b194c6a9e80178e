#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Next,
  Until,
  Release,
  Exists,
  Forall,
  Bind,
};

class Formula;

namespace detail {
struct Node {
  Op op = Op::True;
  std::string name;  // atom, quantified variable, or bound agent
  std::string var;   // variable of a binding
  std::vector<Formula> kids;
};
}  // namespace detail

// Immutable, structurally shared syntax tree.
class Formula {
 public:
  Formula() : Formula(make(Op::True, {}, {}, {})) {}

  static Formula top() { return make(Op::True, {}, {}, {}); }
  static Formula bottom() { return make(Op::False, {}, {}, {}); }
  static Formula atom(std::string p) { return make(Op::Atom, std::move(p), {}, {}); }
  static Formula negate(Formula f) { return make(Op::Not, {}, {}, {std::move(f)}); }
  static Formula conj(Formula a, Formula b) { return make(Op::And, {}, {}, {std::move(a), std::move(b)}); }
  static Formula disj(Formula a, Formula b) { return make(Op::Or, {}, {}, {std::move(a), std::move(b)}); }
  static Formula next(Formula f) { return make(Op::Next, {}, {}, {std::move(f)}); }
  static Formula until(Formula a, Formula b) { return make(Op::Until, {}, {}, {std::move(a), std::move(b)}); }
  static Formula release(Formula a, Formula b) { return make(Op::Release, {}, {}, {std::move(a), std::move(b)}); }
  static Formula exists(std::string x, Formula f) { return make(Op::Exists, std::move(x), {}, {std::move(f)}); }
  static Formula forall(std::string x, Formula f) { return make(Op::Forall, std::move(x), {}, {std::move(f)}); }
  static Formula bind(std::string a, std::string x, Formula f) {
    return make(Op::Bind, std::move(a), std::move(x), {std::move(f)});
  }
  static Formula eventually(Formula f) { return until(top(), std::move(f)); }
  static Formula always(Formula f) { return release(bottom(), std::move(f)); }
  static Formula implies(Formula a, Formula b) { return disj(negate(std::move(a)), std::move(b)); }
  static Formula iff(Formula a, Formula b) {
    return conj(implies(a, b), implies(b, a));
  }
  // Left-folded conjunction/disjunction; the empty fold is true/false.
  static Formula all_of(const std::vector<Formula>& fs) {
    if (fs.empty()) return top();
    Formula acc = fs[0];
    for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
    return acc;
  }
  static Formula any_of(const std::vector<Formula>& fs) {
    if (fs.empty()) return bottom();
    Formula acc = fs[0];
    for (std::size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
    return acc;
  }

  Op op() const { return node_->op; }
  const std::string& name() const { return node_->name; }
  const std::string& var() const { return node_->var; }
  const std::vector<Formula>& kids() const { return node_->kids; }
  const Formula& kid(std::size_t i = 0) const { return node_->kids.at(i); }
  const Formula& lhs() const { return node_->kids.at(0); }
  const Formula& rhs() const { return node_->kids.at(1); }

  // Stable identity of the shared node (for memo tables).
  const void* id() const { return node_.get(); }

  bool is_quantifier() const { return op() == Op::Exists || op() == Op::Forall; }
  bool is_literal() const {
    return op() == Op::Atom || (op() == Op::Not && kid().op() == Op::Atom);
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& k : kids()) n += k.size();
    return n;
  }

  friend int compare(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return 0;
    if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
    if (int c = a.name().compare(b.name())) return c < 0 ? -1 : 1;
    if (int c = a.var().compare(b.var())) return c < 0 ? -1 : 1;
    for (std::size_t i = 0; i < a.kids().size(); ++i) {
      if (int c = compare(a.kids()[i], b.kids()[i])) return c;
    }
    return 0;
  }
  friend bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Formula& a, const Formula& b) { return compare(a, b) != 0; }
  friend bool operator<(const Formula& a, const Formula& b) { return compare(a, b) < 0; }

 private:
  explicit Formula(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  static Formula make(Op op, std::string name, std::string var, std::vector<Formula> kids) {
    auto n = std::make_shared<detail::Node>();
    n->op = op;
    n->name = std::move(name);
    n->var = std::move(var);
    n->kids = std::move(kids);
    return Formula(std::move(n));
  }

  std::shared_ptr<const detail::Node> node_;
};

// ---------------------------------------------------------------------------
// Declarations

// Name sets for atoms, agents and variables. Empty atom/variable lists mean
// "infer from use"; agents must always be declared.
struct Signature {
  std::vector<std::string> atoms;
  std::vector<std::string> agents;
  std::vector<std::string> vars;

  bool has_agent(std::string_view a) const { return contains(agents, a); }
  bool has_var(std::string_view x) const { return contains(vars, x); }
  bool has_atom(std::string_view p) const { return contains(atoms, p); }
  int agent_index(std::string_view a) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (agents[i] == a) return static_cast<int>(i);
    return -1;
  }

 private:
  static bool contains(const std::vector<std::string>& v, std::string_view s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  }
};

class ParseError : public Error {
 public:
  enum class Kind { Syntax, Undeclared, Confusion };
  ParseError(Kind kind, std::size_t pos, const std::string& msg)
      : Error(msg + " at position " + std::to_string(pos)), kind_(kind), pos_(pos) {}
  Kind kind() const { return kind_; }
  std::size_t position() const { return pos_; }

 private:
  Kind kind_;
  std::size_t pos_;
};

namespace detail {

enum class Tok {
  Ident, True, False, Not, And, Or, Implies, Iff, LParen, RParen, Comma,
  LAngle, RAngle, LBrack, RBrack, X, U, R, F, G, End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '@';
}
inline bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
}

inline std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto sym = [&](Tok k, std::size_t len) {
    out.push_back({k, std::string(s.substr(i, len)), i});
    i += len;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
    if (starts("<->")) sym(Tok::Iff, 3);
    else if (starts("->")) sym(Tok::Implies, 2);
    else if (starts("<<")) sym(Tok::LAngle, 2);
    else if (starts(">>")) sym(Tok::RAngle, 2);
    else if (starts("[[")) sym(Tok::LBrack, 2);
    else if (starts("]]")) sym(Tok::RBrack, 2);
    else if (starts("&&")) sym(Tok::And, 2);
    else if (starts("||")) sym(Tok::Or, 2);
    else if (c == '!' || c == '~') sym(Tok::Not, 1);
    else if (c == '&') sym(Tok::And, 1);
    else if (c == '|') sym(Tok::Or, 1);
    else if (c == '(') sym(Tok::LParen, 1);
    else if (c == ')') sym(Tok::RParen, 1);
    else if (c == ',') sym(Tok::Comma, 1);
    else if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string w(s.substr(i, j - i));
      Tok k = Tok::Ident;
      if (w == "true") k = Tok::True;
      else if (w == "false") k = Tok::False;
      else if (w == "X") k = Tok::X;
      else if (w == "U") k = Tok::U;
      else if (w == "R") k = Tok::R;
      else if (w == "F") k = Tok::F;
      else if (w == "G") k = Tok::G;
      out.push_back({k, w, i});
      i = j;
    } else {
      throw ParseError(ParseError::Kind::Syntax, i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig) : toks_(lex(text)), sig_(sig) {}

  Formula run() {
    Formula f = implication();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, peek().pos, msg);
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    take();
  }

  Formula implication() {
    Formula l = disjunction();
    if (peek().kind == Tok::Implies) {
      take();
      return Formula::implies(l, implication());
    }
    if (peek().kind == Tok::Iff) {
      take();
      return Formula::iff(l, implication());
    }
    return l;
  }
  Formula disjunction() {
    Formula l = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      l = Formula::disj(l, conjunction());
    }
    return l;
  }
  Formula conjunction() {
    Formula l = temporal();
    while (peek().kind == Tok::And) {
      take();
      l = Formula::conj(l, temporal());
    }
    return l;
  }
  Formula temporal() {
    Formula l = unary();
    if (peek().kind == Tok::U) {
      take();
      return Formula::until(l, temporal());
    }
    if (peek().kind == Tok::R) {
      take();
      return Formula::release(l, temporal());
    }
    return l;
  }
  Formula unary() {
    switch (peek().kind) {
      case Tok::Not: take(); return Formula::negate(unary());
      case Tok::X: take(); return Formula::next(unary());
      case Tok::F: take(); return Formula::eventually(unary());
      case Tok::G: take(); return Formula::always(unary());
      case Tok::LAngle: {
        take();
        std::string x = variable();
        expect(Tok::RAngle, "'>>'");
        return Formula::exists(x, unary());
      }
      case Tok::LBrack: {
        take();
        std::string x = variable();
        expect(Tok::RBrack, "']]'");
        return Formula::forall(x, unary());
      }
      case Tok::LParen:
        if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::Comma) {
          take();
          std::string a = agent();
          take();
          std::string x = variable();
          expect(Tok::RParen, "')'");
          return Formula::bind(a, x, unary());
        }
        return primary();
      default:
        return primary();
    }
  }
  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::True: take(); return Formula::top();
      case Tok::False: take(); return Formula::bottom();
      case Tok::Ident: return Formula::atom(atom());
      case Tok::LParen: {
        take();
        Formula f = implication();
        expect(Tok::RParen, "')'");
        return f;
      }
      default:
        fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
    }
  }

  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return take().text;
  }
  std::string agent() {
    std::size_t at = peek().pos;
    std::string a = ident("agent name");
    if (!sig_.has_agent(a)) {
      if (sig_.has_var(a) || sig_.has_atom(a))
        throw ParseError(ParseError::Kind::Confusion, at, "'" + a + "' is not an agent");
      throw ParseError(ParseError::Kind::Undeclared, at, "undeclared agent '" + a + "'");
    }
    return a;
  }
  std::string variable() {
    std::size_t at = peek().pos;
    std::string x = ident("variable name");
    if (sig_.has_agent(x) || sig_.has_atom(x))
      throw ParseError(ParseError::Kind::Confusion, at, "'" + x + "' is not a variable");
    if (!sig_.vars.empty() && !sig_.has_var(x))
      throw ParseError(ParseError::Kind::Undeclared, at, "undeclared variable '" + x + "'");
    return x;
  }
  std::string atom() {
    std::size_t at = peek().pos;
    std::string p = take().text;
    if (sig_.has_agent(p) || sig_.has_var(p))
      throw ParseError(ParseError::Kind::Confusion, at, "'" + p + "' is not an atomic proposition");
    if (!sig_.atoms.empty() && !sig_.has_atom(p))
      throw ParseError(ParseError::Kind::Undeclared, at, "undeclared atom '" + p + "'");
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Signature& sig_;
};

}  // namespace detail

inline Formula parse(std::string_view text, const Signature& sig) {
  return detail::Parser(text, sig).run();
}

inline std::string render(const Formula& f) {
  switch (f.op()) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return f.name();
    case Op::Not: return "!" + render(f.kid());
    case Op::And: return "(" + render(f.lhs()) + " & " + render(f.rhs()) + ")";
    case Op::Or: return "(" + render(f.lhs()) + " | " + render(f.rhs()) + ")";
    case Op::Until: return "(" + render(f.lhs()) + " U " + render(f.rhs()) + ")";
    case Op::Release: return "(" + render(f.lhs()) + " R " + render(f.rhs()) + ")";
    case Op::Next: return "X " + render(f.kid());
    case Op::Exists: return "<<" + f.name() + ">> " + render(f.kid());
    case Op::Forall: return "[[" + f.name() + "]] " + render(f.kid());
    case Op::Bind: return "(" + f.name() + "," + f.var() + ") " + render(f.kid());
  }
  return {};
}

// ---------------------------------------------------------------------------
// Structural queries

inline std::set<Formula> subformulas(const Formula& f) {
  std::set<Formula> out;
  std::vector<Formula> todo{f};
  while (!todo.empty()) {
    Formula g = todo.back();
    todo.pop_back();
    if (!out.insert(g).second) continue;
    for (const auto& k : g.kids()) todo.push_back(k);
  }
  return out;
}

inline void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Atom) out.insert(f.name());
  for (const auto& k : f.kids()) collect_atoms(k, out);
}

inline std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

struct FreeSet {
  std::set<std::string> agents;
  std::set<std::string> vars;
  bool empty() const { return agents.empty() && vars.empty(); }
  bool operator==(const FreeSet&) const = default;
};

inline FreeSet free_names(const Formula& f, const std::vector<std::string>& agents) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return {};
    case Op::Not:
      return free_names(f.kid(), agents);
    case Op::And:
    case Op::Or: {
      FreeSet a = free_names(f.lhs(), agents);
      FreeSet b = free_names(f.rhs(), agents);
      a.agents.insert(b.agents.begin(), b.agents.end());
      a.vars.insert(b.vars.begin(), b.vars.end());
      return a;
    }
    case Op::Next:
    case Op::Until:
    case Op::Release: {
      FreeSet a;
      for (const auto& k : f.kids()) {
        FreeSet b = free_names(k, agents);
        a.agents.insert(b.agents.begin(), b.agents.end());
        a.vars.insert(b.vars.begin(), b.vars.end());
      }
      a.agents.insert(agents.begin(), agents.end());
      return a;
    }
    case Op::Exists:
    case Op::Forall: {
      FreeSet a = free_names(f.kid(), agents);
      a.vars.erase(f.name());
      return a;
    }
    case Op::Bind: {
      FreeSet a = free_names(f.kid(), agents);
      if (a.agents.erase(f.name())) a.vars.insert(f.var());
      return a;
    }
  }
  return {};
}

struct SentenceStatus {
  bool agent_closed = false;
  bool variable_closed = false;
  bool sentence() const { return agent_closed && variable_closed; }
};

inline SentenceStatus sentence_status(const Formula& f, const std::vector<std::string>& agents) {
  FreeSet fr = free_names(f, agents);
  return {fr.agents.empty(), fr.vars.empty()};
}

inline bool is_sentence(const Formula& f, const std::vector<std::string>& agents) {
  return sentence_status(f, agents).sentence();
}

// Replaces free occurrences of variable `from` (only bindings mention
// variables) by `to`.
inline Formula rename_free_var(const Formula& f, const std::string& from, const std::string& to) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return f;
    case Op::Exists:
    case Op::Forall:
      if (f.name() == from) return f;
      return f.op() == Op::Exists ? Formula::exists(f.name(), rename_free_var(f.kid(), from, to))
                                  : Formula::forall(f.name(), rename_free_var(f.kid(), from, to));
    case Op::Bind:
      return Formula::bind(f.name(), f.var() == from ? to : f.var(), rename_free_var(f.kid(), from, to));
    case Op::Not: return Formula::negate(rename_free_var(f.kid(), from, to));
    case Op::Next: return Formula::next(rename_free_var(f.kid(), from, to));
    case Op::And: return Formula::conj(rename_free_var(f.lhs(), from, to), rename_free_var(f.rhs(), from, to));
    case Op::Or: return Formula::disj(rename_free_var(f.lhs(), from, to), rename_free_var(f.rhs(), from, to));
    case Op::Until: return Formula::until(rename_free_var(f.lhs(), from, to), rename_free_var(f.rhs(), from, to));
    case Op::Release:
      return Formula::release(rename_free_var(f.lhs(), from, to), rename_free_var(f.rhs(), from, to));
  }
  return f;
}

inline void collect_var_names(const Formula& f, std::set<std::string>& out) {
  if (f.is_quantifier()) out.insert(f.name());
  if (f.op() == Op::Bind) out.insert(f.var());
  for (const auto& k : f.kids()) collect_var_names(k, out);
}

inline void collect_agent_names(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Bind) out.insert(f.name());
  for (const auto& k : f.kids()) collect_agent_names(k, out);
}

inline bool is_ltl(const Formula& f) {
  if (f.is_quantifier() || f.op() == Op::Bind) return false;
  for (const auto& k : f.kids())
    if (!is_ltl(k)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Normal forms

enum class NormalForm { Pnf, Enf };

namespace detail {

inline Formula push_negations(const Formula& f, bool neg) {
  switch (f.op()) {
    case Op::True: return neg ? Formula::bottom() : f;
    case Op::False: return neg ? Formula::top() : f;
    case Op::Atom: return neg ? Formula::negate(f) : f;
    case Op::Not: return push_negations(f.kid(), !neg);
    case Op::And: {
      Formula a = push_negations(f.lhs(), neg), b = push_negations(f.rhs(), neg);
      return neg ? Formula::disj(a, b) : Formula::conj(a, b);
    }
    case Op::Or: {
      Formula a = push_negations(f.lhs(), neg), b = push_negations(f.rhs(), neg);
      return neg ? Formula::conj(a, b) : Formula::disj(a, b);
    }
    case Op::Next: return Formula::next(push_negations(f.kid(), neg));
    case Op::Until: {
      Formula a = push_negations(f.lhs(), neg), b = push_negations(f.rhs(), neg);
      return neg ? Formula::release(a, b) : Formula::until(a, b);
    }
    case Op::Release: {
      Formula a = push_negations(f.lhs(), neg), b = push_negations(f.rhs(), neg);
      return neg ? Formula::until(a, b) : Formula::release(a, b);
    }
    case Op::Exists: {
      Formula b = push_negations(f.kid(), neg);
      return neg ? Formula::forall(f.name(), b) : Formula::exists(f.name(), b);
    }
    case Op::Forall: {
      Formula b = push_negations(f.kid(), neg);
      return neg ? Formula::exists(f.name(), b) : Formula::forall(f.name(), b);
    }
    case Op::Bind: return Formula::bind(f.name(), f.var(), push_negations(f.kid(), neg));
  }
  return f;
}

inline Formula negate_simplified(const Formula& f) {
  return f.op() == Op::Not ? f.kid() : Formula::negate(f);
}

inline Formula only_exists(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return f;
    case Op::Forall:
      return negate_simplified(Formula::exists(f.name(), negate_simplified(only_exists(f.kid()))));
    case Op::Exists: return Formula::exists(f.name(), only_exists(f.kid()));
    case Op::Bind: return Formula::bind(f.name(), f.var(), only_exists(f.kid()));
    case Op::Not: return negate_simplified(only_exists(f.kid()));
    case Op::Next: return Formula::next(only_exists(f.kid()));
    case Op::And: return Formula::conj(only_exists(f.lhs()), only_exists(f.rhs()));
    case Op::Or: return Formula::disj(only_exists(f.lhs()), only_exists(f.rhs()));
    case Op::Until: return Formula::until(only_exists(f.lhs()), only_exists(f.rhs()));
    case Op::Release: return Formula::release(only_exists(f.lhs()), only_exists(f.rhs()));
  }
  return f;
}

}  // namespace detail

inline Formula normalize(const Formula& f, NormalForm target) {
  if (target == NormalForm::Pnf) return detail::push_negations(f, false);
  return detail::only_exists(f);
}

// ---------------------------------------------------------------------------
// Prefixes

enum class Quant : std::uint8_t { Exists, Forall };

struct QuantPrefix {
  struct Entry {
    std::string var;
    Quant quant;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  QuantPrefix() = default;
  explicit QuantPrefix(std::vector<Entry> e) : entries(std::move(e)) {
    std::set<std::string> seen;
    for (const auto& x : entries)
      if (!seen.insert(x.var).second) throw Error("variable '" + x.var + "' quantified twice in prefix");
  }

  // Compact notation: "AxEyAz" or "[[x]]<<y>>" are both accepted.
  static QuantPrefix parse(std::string_view s) {
    std::vector<Entry> e;
    std::size_t i = 0;
    while (i < s.size()) {
      if (s[i] == ' ') {
        ++i;
        continue;
      }
      Quant q;
      std::size_t close = std::string_view::npos;
      if (s.substr(i, 2) == "<<") {
        q = Quant::Exists;
        close = s.find(">>", i);
        if (close == std::string_view::npos) throw Error("unterminated '<<' in prefix");
        e.push_back({std::string(s.substr(i + 2, close - i - 2)), q});
        i = close + 2;
      } else if (s.substr(i, 2) == "[[") {
        q = Quant::Forall;
        close = s.find("]]", i);
        if (close == std::string_view::npos) throw Error("unterminated '[[' in prefix");
        e.push_back({std::string(s.substr(i + 2, close - i - 2)), q});
        i = close + 2;
      } else if (s[i] == 'E' || s[i] == 'A') {
        q = s[i] == 'E' ? Quant::Exists : Quant::Forall;
        std::size_t j = i + 1;
        while (j < s.size() && detail::ident_char(s[j])) {
          if ((s[j] == 'E' || s[j] == 'A') && j > i + 1) break;
          ++j;
        }
        if (j == i + 1) throw Error("missing variable after quantifier in prefix");
        e.push_back({std::string(s.substr(i + 1, j - i - 1)), q});
        i = j;
      } else {
        throw Error(std::string("bad prefix character '") + s[i] + "'");
      }
    }
    return QuantPrefix(std::move(e));
  }

  std::size_t size() const { return entries.size(); }
  int index_of(std::string_view x) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].var == x) return static_cast<int>(i);
    return -1;
  }
  std::vector<std::string> vars() const {
    std::vector<std::string> v;
    for (const auto& e : entries) v.push_back(e.var);
    return v;
  }
  std::vector<std::string> existential() const { return select(Quant::Exists); }
  std::vector<std::string> universal() const { return select(Quant::Forall); }
  // Universal variables preceding x; empty for universal x.
  std::vector<std::string> dependencies(std::string_view x) const {
    std::vector<std::string> d;
    for (const auto& e : entries) {
      if (e.var == x) return e.quant == Quant::Exists ? d : std::vector<std::string>{};
      if (e.quant == Quant::Forall) d.push_back(e.var);
    }
    throw Error("variable '" + std::string(x) + "' not in prefix");
  }
  QuantPrefix dual() const {
    QuantPrefix d = *this;
    for (auto& e : d.entries) e.quant = e.quant == Quant::Exists ? Quant::Forall : Quant::Exists;
    return d;
  }
  Formula apply(Formula body) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      body = it->quant == Quant::Exists ? Formula::exists(it->var, body) : Formula::forall(it->var, body);
    return body;
  }
  std::string str() const {
    std::string s;
    for (const auto& e : entries) s += (e.quant == Quant::Exists ? "<<" + e.var + ">>" : "[[" + e.var + "]]");
    return s;
  }
  bool operator==(const QuantPrefix&) const = default;

 private:
  std::vector<std::string> select(Quant q) const {
    std::vector<std::string> v;
    for (const auto& e : entries)
      if (e.quant == q) v.push_back(e.var);
    return v;
  }
};

struct BindPrefix {
  std::vector<std::pair<std::string, std::string>> entries;  // (agent, variable)

  std::vector<std::string> vars() const {
    std::vector<std::string> v;
    for (const auto& [a, x] : entries)
      if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    return v;
  }
  std::optional<std::string> var_of(std::string_view agent) const {
    for (const auto& [a, x] : entries)
      if (a == agent) return x;
    return std::nullopt;
  }
  // Every agent exactly once.
  bool covers(const std::vector<std::string>& agents) const {
    if (entries.size() != agents.size()) return false;
    for (const auto& a : agents)
      if (std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == a; }) != 1)
        return false;
    return true;
  }
  Formula apply(Formula body) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) body = Formula::bind(it->first, it->second, body);
    return body;
  }
};

struct PrefixAnalysis {
  std::vector<std::string> existential;
  std::vector<std::string> universal;
  std::map<std::string, std::vector<std::string>> dependencies;
  QuantPrefix dual;
};

inline PrefixAnalysis prefix_analysis(const QuantPrefix& p) {
  PrefixAnalysis a{p.existential(), p.universal(), {}, p.dual()};
  for (const auto& x : a.existential) a.dependencies[x] = p.dependencies(x);
  return a;
}

// ---------------------------------------------------------------------------
// Fragments

enum class Fragment { SL1G, SLBG, SLFull };

inline const char* fragment_name(Fragment f) {
  switch (f) {
    case Fragment::SL1G: return "SL1G";
    case Fragment::SLBG: return "SLBG";
    case Fragment::SLFull: return "SLFull";
  }
  return "?";
}

struct FragmentClass {
  Fragment fragment = Fragment::SL1G;
  std::vector<Formula> principal;  // prenexed principal subsentences, innermost first
};

namespace detail {

// Pushes a binding through Boolean connectives, through quantifiers over
// other variables and past bindings of other agents; drops it over
// agent-free leaves.
inline Formula bind_down(const std::string& a, const std::string& x, const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return f;
    case Op::Not:
      if (f.kid().op() == Op::Atom) return f;
      return Formula::bind(a, x, f);
    case Op::And: return Formula::conj(bind_down(a, x, f.lhs()), bind_down(a, x, f.rhs()));
    case Op::Or: return Formula::disj(bind_down(a, x, f.lhs()), bind_down(a, x, f.rhs()));
    case Op::Exists:
    case Op::Forall:
      if (f.name() == x) return Formula::bind(a, x, f);
      return f.op() == Op::Exists ? Formula::exists(f.name(), bind_down(a, x, f.kid()))
                                  : Formula::forall(f.name(), bind_down(a, x, f.kid()));
    case Op::Bind:
      if (f.name() == a) return f;
      return Formula::bind(f.name(), f.var(), bind_down(a, x, f.kid()));
    default:
      return Formula::bind(a, x, f);
  }
}

inline Fragment worst(Fragment a, Fragment b) { return a > b ? a : b; }

class Classifier {
 public:
  Classifier(const std::vector<std::string>& agents, std::set<std::string> taken)
      : agents_(agents), taken_(std::move(taken)) {}

  FragmentClass run(const Formula& f) {
    FragmentClass c;
    c.fragment = formula(f);
    std::set<Formula> seen;
    for (const auto& p : principal_)
      if (seen.insert(p).second) c.principal.push_back(p);
    return c;
  }

 private:
  // Outside any quantifier block.
  Fragment formula(const Formula& f) {
    switch (f.op()) {
      case Op::True:
      case Op::False:
      case Op::Atom:
        return Fragment::SL1G;
      case Op::Not:
        return f.kid().op() == Op::Atom ? Fragment::SL1G : Fragment::SLFull;
      case Op::And:
      case Op::Or:
      case Op::Next:
      case Op::Until:
      case Op::Release: {
        Fragment w = Fragment::SL1G;
        for (const auto& k : f.kids()) w = worst(w, formula(k));
        return w;
      }
      case Op::Exists:
      case Op::Forall:
        return block(f);
      case Op::Bind:
        return Fragment::SLFull;
    }
    return Fragment::SLFull;
  }

  std::string fresh(const std::string& base) {
    for (int i = 2;; ++i) {
      std::string n = base + "_" + std::to_string(i);
      if (!taken_.count(n)) {
        taken_.insert(n);
        return n;
      }
    }
  }

  // A maximal quantifier block: quantifiers prenexed through ∧/∨ down to
  // binding-prefixed goals.
  Fragment block(const Formula& f) {
    QuantPrefix prefix;
    std::vector<Formula> goals;
    Fragment w = Fragment::SL1G;
    bool ok = true;
    int connectives = 0;
    std::set<std::string> in_prefix;

    std::function<Formula(const Formula&)> walk = [&](const Formula& g) -> Formula {
      if (!ok) return g;
      switch (g.op()) {
        case Op::Exists:
        case Op::Forall: {
          std::string x = g.name();
          Formula body = g.kid();
          if (in_prefix.count(x)) {
            std::string y = fresh(x);
            body = rename_free_var(body, x, y);
            x = y;
          }
          in_prefix.insert(x);
          taken_.insert(x);
          prefix.entries.push_back({x, g.op() == Op::Exists ? Quant::Exists : Quant::Forall});
          Formula inner = walk(body);
          return g.op() == Op::Exists ? Formula::exists(x, inner) : Formula::forall(x, inner);
        }
        case Op::And:
        case Op::Or: {
          ++connectives;
          Formula a = walk(g.lhs()), b = walk(g.rhs());
          return g.op() == Op::And ? Formula::conj(a, b) : Formula::disj(a, b);
        }
        case Op::Bind: {
          BindPrefix bp;
          Formula m = g;
          while (m.op() == Op::Bind) {
            bp.entries.push_back({m.name(), m.var()});
            m = m.kid();
          }
          if (!bp.covers(agents_)) {
            // An incomplete chain over a connective or quantifier is pushed
            // inside it; anything else is a stray binding.
            if (m.op() == Op::And || m.op() == Op::Or || m.is_quantifier() || m.is_literal() ||
                m.op() == Op::True || m.op() == Op::False) {
              Formula pushed = m;
              for (auto it = bp.entries.rbegin(); it != bp.entries.rend(); ++it)
                pushed = bind_down(it->first, it->second, pushed);
              if (pushed.op() != Op::Bind) return walk(pushed);
            }
            ok = false;
            return g;
          }
          FreeSet fm = free_names(m, agents_);
          if (fm.agents.size() != agents_.size() || !fm.vars.empty()) {
            ok = false;
            return g;
          }
          w = worst(w, formula(m));
          goals.push_back(g);
          return g;
        }
        default:
          // Boolean leaves inside a block are agent-free; they are allowed
          // only in the Boolean-goal fragment.
          if (free_names(g, agents_).empty()) {
            w = worst(w, formula(g));
            w = worst(w, Fragment::SLBG);
            return g;
          }
          ok = false;
          return g;
      }
    };

    // Quantifiers are only pulled through ∧/∨, so rebuild the prenex form.
    Formula matrix = strip(f, walk);
    if (!ok || goals.empty()) return Fragment::SLFull;

    std::set<std::string> used;
    for (const auto& g : goals) {
      FreeSet fr = free_names(g, agents_);
      used.insert(fr.vars.begin(), fr.vars.end());
    }
    std::set<std::string> pv(in_prefix.begin(), in_prefix.end());
    if (used != pv) return Fragment::SLFull;

    principal_.push_back(prefix.apply(matrix));
    if (goals.size() == 1 && connectives == 0) return w;
    return worst(w, Fragment::SLBG);
  }

  // Runs walk and removes quantifiers from the result, leaving the Boolean
  // skeleton of renamed goals.
  static Formula strip(const Formula& f, const std::function<Formula(const Formula&)>& walk) {
    return drop_quantifiers(walk(f));
  }
  static Formula drop_quantifiers(const Formula& f) {
    switch (f.op()) {
      case Op::Exists:
      case Op::Forall:
        return drop_quantifiers(f.kid());
      case Op::And: return Formula::conj(drop_quantifiers(f.lhs()), drop_quantifiers(f.rhs()));
      case Op::Or: return Formula::disj(drop_quantifiers(f.lhs()), drop_quantifiers(f.rhs()));
      default: return f;
    }
  }

  const std::vector<std::string>& agents_;
  std::set<std::string> taken_;
  std::vector<Formula> principal_;
};

}  // namespace detail

// The form classify and the solver work on.
inline Formula prepare_for_classification(const Formula& f) {
  return normalize(f, NormalForm::Pnf);
}

inline FragmentClass classify(const Formula& f, const std::vector<std::string>& agents) {
  if (!is_sentence(f, agents)) throw Error("classify: formula is not a sentence");
  Formula g = prepare_for_classification(f);
  std::set<std::string> taken;
  collect_var_names(g, taken);
  return detail::Classifier(agents, std::move(taken)).run(g);
}

// ---------------------------------------------------------------------------
// Domino systems

struct DominoSystem {
  std::vector<std::string> tiles;
  std::vector<std::pair<std::string, std::string>> horizontal;
  std::vector<std::pair<std::string, std::string>> vertical;
  std::string initial;

  void validate() const {
    if (tiles.empty()) throw Error("domino system without tiles");
    std::set<std::string> t(tiles.begin(), tiles.end());
    if (t.size() != tiles.size()) throw Error("duplicate tile in domino system");
    if (!t.count(initial)) throw Error("distinguished tile '" + initial + "' is not a tile");
    for (const auto* rel : {&horizontal, &vertical})
      for (const auto& [a, b] : *rel)
        if (!t.count(a) || !t.count(b)) throw Error("domino relation mentions unknown tile");
    if (t.count("p")) throw Error("tile name 'p' clashes with the ordering atom");
  }
  bool horizontal_ok(const std::string& a, const std::string& b) const {
    return std::find(horizontal.begin(), horizontal.end(), std::make_pair(a, b)) != horizontal.end();
  }
  bool vertical_ok(const std::string& a, const std::string& b) const {
    return std::find(vertical.begin(), vertical.end(), std::make_pair(a, b)) != vertical.end();
  }
};

}  // namespace slkit
