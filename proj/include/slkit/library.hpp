#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "slkit/formula.hpp"

namespace slkit {

struct LibraryParams {
  int n = 2;                       // number of players for nash/eg/ag/rs
  std::vector<std::string> goals;  // LTL goals psi_1..psi_n (default F p_i)
  std::string designer_goal;       // rs only (default G q)
  std::optional<DominoSystem> domino;
};

struct LibrarySentence {
  Formula formula;
  Signature signature;
};

inline std::vector<std::string> library_families() {
  return {"ord", "unb", "trn", "grd", "til", "rec", "dom", "nash", "nash-bg",
          "eg",  "ag",  "rs",  "law1", "law2", "fair"};
}

namespace detail {

using F = Formula;

inline F binds(std::initializer_list<std::pair<const char*, std::string>> bs, F body) {
  BindPrefix b;
  for (const auto& [a, x] : bs) b.entries.push_back({a, x});
  return b.apply(std::move(body));
}

class OrderingBuilder {
 public:
  // x1 < x2 := <<y>> ((alpha,x1)(beta,y) X p & (alpha,x2)(beta,y) X !p)
  F less(const std::string& x1, const std::string& x2) {
    std::string y = "y";
    return F::exists(y, F::conj(binds({{"alpha", x1}, {"beta", y}}, F::next(F::atom("p"))),
                                binds({{"alpha", x2}, {"beta", y}}, F::next(F::negate(F::atom("p"))))));
  }
  F unb() { return F::forall("x1", F::exists("x2", less("x1", "x2"))); }
  F trn() {
    return F::forall("x1", F::forall("x2", F::forall("x3", F::implies(F::conj(less("x1", "x2"), less("x2", "x3")),
                                                                      less("x1", "x3")))));
  }
};

// Grid, tiling and recurrence sentences over agents alpha, beta. Inner
// witnesses get generated names so nested macros never shadow each other.
class GridBuilder {
 public:
  explicit GridBuilder(const DominoSystem& d) : d_(d) {}

  // x1 <_alpha x2 := <<w>> (beta,w)((alpha,x1) X p & (alpha,x2) X !p)
  // y1 <_beta  y2 := <<w>> (alpha,w)((beta,y1) X !p & (beta,y2) X p)
  F less(char axis, const std::string& a, const std::string& b) {
    std::string w = fresh("w");
    F p = F::atom("p"), np = F::negate(F::atom("p"));
    if (axis == 'a')
      return F::exists(w, F::bind("beta", w, F::conj(F::bind("alpha", a, F::next(p)), F::bind("alpha", b, F::next(np)))));
    return F::exists(w, F::bind("alpha", w, F::conj(F::bind("beta", a, F::next(np)), F::bind("beta", b, F::next(p)))));
  }
  F unb(char axis) {
    std::string z1 = fresh("z"), z2 = fresh("z");
    return F::forall(z1, F::exists(z2, less(axis, z1, z2)));
  }
  F trn(char axis) {
    std::string z1 = fresh("z"), z2 = fresh("z"), z3 = fresh("z");
    return F::forall(z1, F::forall(z2, F::forall(z3, F::implies(F::conj(less(axis, z1, z2), less(axis, z2, z3)),
                                                               less(axis, z1, z3)))));
  }
  F grd() { return F::conj(F::conj(unb('a'), trn('a')), F::conj(unb('b'), trn('b'))); }

  // z1 is the immediate successor of z2 along the axis.
  F succ(char axis, const std::string& z1, const std::string& z2) {
    std::string z3 = fresh("z");
    return F::conj(less(axis, z1, z2), F::negate(F::exists(z3, F::conj(less(axis, z1, z3), less(axis, z3, z2)))));
  }
  F cell(const std::string& x, const std::string& y, F body) {
    return F::bind("alpha", x, F::bind("beta", y, F::next(std::move(body))));
  }
  F loc(const std::string& t, const std::string& x, const std::string& y) {
    std::vector<F> parts{F::atom(t)};
    for (const auto& u : d_.tiles)
      if (u != t) parts.push_back(F::negate(F::atom(u)));
    return cell(x, y, F::all_of(parts));
  }
  F hor(const std::string& t, const std::string& x, const std::string& y) {
    std::vector<F> opts;
    for (const auto& [a, b] : d_.horizontal) {
      if (a != t) continue;
      std::string x2 = fresh("x");
      opts.push_back(F::forall(x2, F::implies(succ('a', x, x2), cell(x2, y, F::atom(b)))));
    }
    return F::any_of(opts);
  }
  F ver(const std::string& t, const std::string& x, const std::string& y) {
    std::vector<F> opts;
    for (const auto& [a, b] : d_.vertical) {
      if (a != t) continue;
      std::string y2 = fresh("y");
      opts.push_back(F::forall(y2, F::implies(succ('b', y, y2), cell(x, y2, F::atom(b)))));
    }
    return F::any_of(opts);
  }
  F til() {
    std::string x = fresh("x"), y = fresh("y");
    std::vector<F> opts;
    for (const auto& t : d_.tiles) opts.push_back(F::conj(F::conj(loc(t, x, y), hor(t, x, y)), ver(t, x, y)));
    return F::forall(x, F::forall(y, F::any_of(opts)));
  }
  F zero(char axis, const std::string& z) {
    std::string z2 = fresh("z");
    return F::negate(F::exists(z2, less(axis, z2, z)));
  }
  F rec() {
    std::string x = fresh("x"), y = fresh("y"), x2 = fresh("x");
    F t0 = F::atom(d_.initial);
    F guard = F::conj(zero('b', y), F::disj(zero('a', x), cell(x, y, t0)));
    F again = F::exists(x2, F::conj(less('a', x, x2), cell(x2, y, t0)));
    return F::forall(x, F::forall(y, F::implies(guard, again)));
  }
  F dom() { return F::conj(F::conj(grd(), til()), rec()); }

 private:
  std::string fresh(const std::string& base) { return base + std::to_string(++counter_); }
  const DominoSystem& d_;
  int counter_ = 0;
};

inline std::vector<F> player_goals(const LibraryParams& prm, const Signature& sig) {
  std::vector<F> gs;
  for (int i = 0; i < prm.n; ++i) {
    std::string text;
    if (i < static_cast<int>(prm.goals.size())) text = prm.goals[i];
    else text = prm.n == 1 ? "F p" : "F p" + std::to_string(i + 1);
    gs.push_back(parse(text, sig));
    if (!is_ltl(gs.back())) throw Error("player goal must be an LTL formula: " + text);
  }
  return gs;
}

inline std::string idx(const char* base, int i) { return base + std::to_string(i + 1); }

}  // namespace detail

inline LibrarySentence library(std::string_view name, const LibraryParams& prm = {}) {
  using detail::F;
  const std::string fam(name);

  if (fam == "ord" || fam == "unb" || fam == "trn") {
    detail::OrderingBuilder b;
    Signature sig{{"p"}, {"alpha", "beta"}, {}};
    F f = fam == "unb" ? b.unb() : fam == "trn" ? b.trn() : F::conj(b.unb(), b.trn());
    return {f, sig};
  }

  if (fam == "grd" || fam == "til" || fam == "rec" || fam == "dom") {
    if (!prm.domino) throw Error("family '" + fam + "' needs a domino system");
    prm.domino->validate();
    detail::GridBuilder b(*prm.domino);
    Signature sig{{"p"}, {"alpha", "beta"}, {}};
    for (const auto& t : prm.domino->tiles) sig.atoms.push_back(t);
    F f = fam == "grd" ? b.grd() : fam == "til" ? b.til() : fam == "rec" ? b.rec() : b.dom();
    return {f, sig};
  }

  if (fam == "nash" || fam == "nash-bg" || fam == "eg" || fam == "ag" || fam == "rs") {
    if (prm.n < 1) throw Error("family '" + fam + "' needs n >= 1");
    Signature sig;
    for (int i = 0; i < prm.n; ++i) sig.agents.push_back(detail::idx("a", i));
    if (fam == "eg" || fam == "ag" || fam == "rs") sig.agents.push_back("b");
    std::vector<F> psi = detail::player_goals(prm, sig);
    auto profile = [&](F body) {
      BindPrefix bp;
      for (int i = 0; i < prm.n; ++i) bp.entries.push_back({detail::idx("a", i), detail::idx("x", i)});
      return bp.apply(std::move(body));
    };
    auto quantify = [&](Quant q, F body) {
      QuantPrefix qp;
      for (int i = 0; i < prm.n; ++i) qp.entries.push_back({detail::idx("x", i), q});
      return qp.apply(std::move(body));
    };
    // psi_NE: no player can improve by deviating alone.
    auto no_deviation = [&](const std::string& dev) {
      std::vector<F> parts;
      for (int i = 0; i < prm.n; ++i)
        parts.push_back(F::implies(F::exists(dev, F::bind(detail::idx("a", i), dev, psi[i])), psi[i]));
      return F::all_of(parts);
    };

    if (fam == "nash") return {quantify(Quant::Exists, profile(no_deviation("y"))), sig};

    if (fam == "nash-bg") {
      // <<x_i>>... [[y_i]]... /\_i ((a_i,y_i) profile psi_i -> profile psi_i)
      QuantPrefix qp;
      for (int i = 0; i < prm.n; ++i) qp.entries.push_back({detail::idx("x", i), Quant::Exists});
      for (int i = 0; i < prm.n; ++i) qp.entries.push_back({detail::idx("y", i), Quant::Forall});
      std::vector<F> parts;
      for (int i = 0; i < prm.n; ++i) {
        BindPrefix dev, prof;
        for (int j = 0; j < prm.n; ++j) {
          prof.entries.push_back({detail::idx("a", j), detail::idx("x", j)});
          dev.entries.push_back({detail::idx("a", j), j == i ? detail::idx("y", j) : detail::idx("x", j)});
        }
        parts.push_back(F::implies(dev.apply(psi[i]), prof.apply(psi[i])));
      }
      return {qp.apply(F::all_of(parts)), sig};
    }

    if (fam == "eg" || fam == "ag") {
      std::vector<F> parts;
      if (fam == "eg") {
        for (int i = 0; i < prm.n; ++i)
          for (int j = i + 1; j < prm.n; ++j) {
            F ci = F::exists("z1", F::bind("b", "z1", psi[i]));
            F cj = F::exists("z2", F::bind("b", "z2", psi[j]));
            parts.push_back(F::implies(F::conj(ci, cj), F::iff(psi[i], psi[j])));
          }
      } else {
        for (int i = 0; i < prm.n; ++i)
          parts.push_back(F::implies(F::exists("z", F::bind("b", "z", psi[i])), psi[i]));
      }
      F body = F::exists("y", F::bind("b", "y", F::all_of(parts)));
      return {quantify(Quant::Forall, profile(body)), sig};
    }

    // rs
    std::string g0 = prm.designer_goal.empty() ? "G q" : prm.designer_goal;
    F psi0 = parse(g0, sig);
    F body = F::bind("b", "y", profile(F::conj(psi0, no_deviation("y'"))));
    return {F::exists("y", quantify(Quant::Exists, body)), sig};
  }

  if (fam == "law1" || fam == "law2") {
    Signature sig{{"fA1", "fA2"}, {"P", "A1", "A2"}, {}};
    F bound = detail::binds({{"P", "y"}, {"A1", "x1"}, {"A2", "x2"}},
                            fam == "law1" ? parse("F G !fA1 | F G !fA2", sig) : parse("F G (!fA1 & !fA2)", sig));
    if (fam == "law1") return {F::exists("y", F::forall("x1", F::forall("x2", bound))), sig};
    return {F::forall("x1", F::forall("x2", F::exists("y", bound))), sig};
  }

  if (fam == "fair") {
    Signature sig{{"r1", "r2", "g1", "g2"}, {"P1", "P2", "S"}, {}};
    F bound = detail::binds({{"S", "y"}, {"P1", "x1"}, {"P2", "x2"}}, parse("G ((r1 -> F g1) & (r2 -> F g2))", sig));
    return {F::exists("y", F::forall("x1", F::forall("x2", bound))), sig};
  }

  throw Error("unknown sentence family '" + fam + "'");
}

// A two-tile system whose tiles alternate horizontally and repeat vertically.
inline DominoSystem sample_domino() {
  return {{"t0", "t1"}, {{"t0", "t1"}, {"t1", "t0"}}, {{"t0", "t0"}, {"t1", "t1"}}, "t0"};
}

}  // namespace slkit
