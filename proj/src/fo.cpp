#include "tracelet/fo.hpp"

#include <algorithm>

namespace tracelet {

namespace {

constexpr std::size_t kMaxDisjuncts = 4096;
constexpr std::size_t kMaxConstraints = 20000;

struct Unknown {
  std::string reason;
};

Int floor_div(const Int &a, const Int &b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Int ceil_div(const Int &a, const Int &b) { return -floor_div(-a, b); }

Int gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// sum c[x] * x + k
struct Lin {
  std::map<std::string, Int> c;
  Int k;

  void add(const Lin &o, const Int &f) {
    for (const auto &[x, v] : o.c) {
      Int &slot = c[x];
      slot += v * f;
      if (slot == 0) c.erase(x);
    }
    k += o.k * f;
  }
  void scale(const Int &f) {
    if (f == 0) {
      c.clear();
      k = 0;
      return;
    }
    for (auto &[x, v] : c) v *= f;
    k *= f;
  }
  Int coef(const std::string &x) const {
    auto it = c.find(x);
    return it == c.end() ? Int(0) : it->second;
  }
  std::string key() const {
    std::string s;
    for (const auto &[x, v] : c) s += x + "*" + v.str() + "+";
    return s + k.str();
  }
};

/// l <= 0, or l == 0 when `eq`.
struct Cons {
  Lin l;
  bool eq = false;
};

using Conj = std::vector<Cons>;
using Dnf = std::vector<Conj>;

class Translator {
public:
  std::set<std::string> abstracted;

  Lin term(const ExprPtr &e) {
    Lin out;
    switch (e->kind) {
    case ExprKind::Int: out.k = e->value; return out;
    case ExprKind::Var: out.c[e->name] = 1; return out;
    case ExprKind::Res: out.c[to_string(e)] = 1; return out;
    case ExprKind::Fresh: return atom(e);
    case ExprKind::Bool: throw Unknown{"boolean used as integer"};
    case ExprKind::Unary:
      if (e->op != Op::Neg) throw Unknown{"boolean used as integer"};
      out = term(e->a);
      out.scale(-1);
      return out;
    case ExprKind::Binary: break;
    }
    switch (e->op) {
    case Op::Add:
    case Op::Sub:
      out = term(e->a);
      out.add(term(e->b), e->op == Op::Add ? 1 : -1);
      return out;
    case Op::Mul: {
      Lin a = term(e->a), b = term(e->b);
      if (a.c.empty()) {
        b.scale(a.k);
        return b;
      }
      if (b.c.empty()) {
        a.scale(b.k);
        return a;
      }
      return atom(e);
    }
    default: throw Unknown{"boolean used as integer"};
    }
  }

  Dnf formula(const ExprPtr &e, bool pos) {
    switch (e->kind) {
    case ExprKind::Bool: return e->bval == pos ? Dnf{Conj{}} : Dnf{};
    case ExprKind::Unary:
      if (e->op == Op::Not) return formula(e->a, !pos);
      throw Unknown{"integer used as formula"};
    case ExprKind::Binary: break;
    default: throw Unknown{"non-boolean atom " + to_string(e) + " used as formula"};
    }
    if (e->op == Op::And || e->op == Op::Or) {
      Dnf a = formula(e->a, pos), b = formula(e->b, pos);
      if ((e->op == Op::And) == pos) return product(a, b);
      a.insert(a.end(), b.begin(), b.end());
      check_size(a);
      return a;
    }
    if ((e->op == Op::Eq || e->op == Op::Ne) && is_bool_expr(e->a)) {
      bool same = (e->op == Op::Eq) == pos;
      Dnf both = product(formula(e->a, true), formula(e->b, same));
      Dnf neither = product(formula(e->a, false), formula(e->b, !same));
      both.insert(both.end(), neither.begin(), neither.end());
      check_size(both);
      return both;
    }
    Op op = e->op;
    if (!pos) {
      switch (op) {
      case Op::Eq: op = Op::Ne; break;
      case Op::Ne: op = Op::Eq; break;
      case Op::Lt: op = Op::Ge; break;
      case Op::Le: op = Op::Gt; break;
      case Op::Gt: op = Op::Le; break;
      case Op::Ge: op = Op::Lt; break;
      default: throw Unknown{"integer used as formula"};
      }
    }
    Lin d = term(e->a);
    d.add(term(e->b), -1);
    Lin nd = d;
    nd.scale(-1);
    auto le = [](Lin l, int shift) {
      l.k += shift;
      return Cons{std::move(l), false};
    };
    switch (op) {
    case Op::Eq: return {Conj{Cons{d, true}}};
    case Op::Ne: return {Conj{le(d, 1)}, Conj{le(nd, 1)}};
    case Op::Lt: return {Conj{le(d, 1)}};
    case Op::Le: return {Conj{le(d, 0)}};
    case Op::Gt: return {Conj{le(nd, 1)}};
    case Op::Ge: return {Conj{le(nd, 0)}};
    default: throw Unknown{"integer used as formula"};
    }
  }

  static Dnf product(const Dnf &a, const Dnf &b) {
    Dnf out;
    if (a.size() * b.size() > kMaxDisjuncts) throw Unknown{"formula too large"};
    for (const auto &x : a)
      for (const auto &y : b) {
        Conj c = x;
        c.insert(c.end(), y.begin(), y.end());
        out.push_back(std::move(c));
      }
    return out;
  }

private:
  Lin atom(const ExprPtr &e) {
    Lin out;
    std::string key = to_string(e);
    abstracted.insert(key);
    out.c[key] = 1;
    return out;
  }

  static void check_size(const Dnf &d) {
    if (d.size() > kMaxDisjuncts) throw Unknown{"formula too large"};
  }
};

enum class Sat { Sat, Unsat, Unknown };

/// Integer satisfiability of one conjunction. On Sat fills `model`.
Sat solve(Conj conj, std::map<std::string, Int> &model) {
  const Conj original = conj;
  // Eliminate equalities with a unit coefficient by substitution.
  std::vector<std::pair<std::string, Lin>> defs;
  std::vector<Lin> ineqs;
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t i = 0; i < conj.size(); ++i) {
      if (!conj[i].eq) continue;
      Lin l = conj[i].l;
      if (l.c.empty()) {
        if (l.k != 0) return Sat::Unsat;
        conj.erase(conj.begin() + i);
        progress = true;
        break;
      }
      Int g = 0;
      for (const auto &[x, v] : l.c) g = gcd(g, v);
      if (l.k % g != 0) return Sat::Unsat;
      auto unit = std::find_if(l.c.begin(), l.c.end(),
                               [](const auto &p) { return p.second == 1 || p.second == -1; });
      if (unit == l.c.end()) continue;
      std::string x = unit->first;
      Int a = unit->second;
      // x = -(l - a x) / a
      Lin def = l;
      def.c.erase(x);
      def.scale(-a);
      conj.erase(conj.begin() + i);
      for (auto &c : conj) {
        Int f = c.l.coef(x);
        if (f == 0) continue;
        c.l.c.erase(x);
        c.l.add(def, f);
      }
      for (auto &[y, d] : defs) {
        Int f = d.coef(x);
        if (f == 0) continue;
        d.c.erase(x);
        d.add(def, f);
      }
      defs.push_back({x, def});
      progress = true;
      break;
    }
  }
  for (auto &c : conj) {
    ineqs.push_back(c.l);
    if (c.eq) {
      Lin n = c.l;
      n.scale(-1);
      ineqs.push_back(n);
    }
  }

  auto normalize = [](std::vector<Lin> &cs) -> bool {
    std::map<std::string, Lin> uniq;
    for (auto &l : cs) {
      if (l.c.empty()) {
        if (l.k > 0) return false;
        continue;
      }
      Int g = 0;
      for (const auto &[x, v] : l.c) g = gcd(g, v);
      if (g > 1) {
        for (auto &[x, v] : l.c) v /= g;
        l.k = ceil_div(l.k, g);
      }
      uniq.emplace(l.key(), l);
    }
    cs.clear();
    for (auto &[k, l] : uniq) cs.push_back(std::move(l));
    return true;
  };

  std::vector<std::pair<std::string, std::vector<Lin>>> stages;
  if (!normalize(ineqs)) return Sat::Unsat;
  while (!ineqs.empty()) {
    std::set<std::string> vars;
    for (const auto &l : ineqs)
      for (const auto &[x, v] : l.c) vars.insert(x);
    std::string best;
    std::size_t best_cost = 0;
    for (const auto &x : vars) {
      std::size_t p = 0, n = 0;
      for (const auto &l : ineqs) {
        Int v = l.coef(x);
        if (v > 0) ++p;
        if (v < 0) ++n;
      }
      std::size_t cost = p * n;
      if (best.empty() || cost < best_cost) {
        best = x;
        best_cost = cost;
      }
    }
    std::vector<Lin> pos, neg, rest;
    for (const auto &l : ineqs) {
      Int v = l.coef(best);
      (v > 0 ? pos : v < 0 ? neg : rest).push_back(l);
    }
    stages.push_back({best, ineqs});
    for (const auto &p : pos)
      for (const auto &n : neg) {
        Lin comb = p;
        comb.scale(-n.coef(best));
        comb.add(n, p.coef(best));
        rest.push_back(comb);
      }
    if (rest.size() > kMaxConstraints) return Sat::Unknown;
    ineqs = std::move(rest);
    if (!normalize(ineqs)) return Sat::Unsat;
  }

  model.clear();
  auto value = [&](const Lin &l, const std::string &skip) {
    Int r = l.k;
    for (const auto &[x, v] : l.c)
      if (x != skip) r += v * model.at(x);
    return r;
  };
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    const std::string &x = it->first;
    for (const auto &l : it->second)
      for (const auto &[y, v] : l.c)
        if (y != x) model.emplace(y, 0);
    std::optional<Int> lo, hi;
    for (const auto &l : it->second) {
      Int a = l.coef(x);
      if (a == 0) continue;
      Int r = value(l, x);
      if (a > 0) {
        Int b = floor_div(-r, a);
        if (!hi || b < *hi) hi = b;
      } else {
        Int b = ceil_div(r, -a);
        if (!lo || b > *lo) lo = b;
      }
    }
    if (lo && hi && *lo > *hi) return Sat::Unknown;
    Int v = 0;
    if (lo && v < *lo) v = *lo;
    if (hi && v > *hi) v = *hi;
    model[x] = v;
  }
  for (auto &[x, d] : defs)
    for (const auto &[y, v] : d.c) model.emplace(y, 0);
  for (auto it = defs.rbegin(); it != defs.rend(); ++it) model[it->first] = value(it->second, "");
  for (const auto &c : original) {
    Int r = c.l.k;
    for (const auto &[x, v] : c.l.c) {
      auto m = model.find(x);
      r += v * (m == model.end() ? Int(0) : m->second);
    }
    if (c.eq ? r != 0 : r > 0) return Sat::Unknown;
  }
  return Sat::Sat;
}

}  // namespace

std::string to_string(FoVerdict v) {
  switch (v) {
  case FoVerdict::Valid: return "valid";
  case FoVerdict::Invalid: return "invalid";
  default: return "unknown";
  }
}

FoResult fo_check(const std::vector<ExprPtr> &gamma, const ExprPtr &goal) {
  FoResult out;
  try {
    Translator tr;
    Dnf d{Conj{}};
    for (const auto &g : gamma) d = Translator::product(d, tr.formula(g, true));
    d = Translator::product(d, tr.formula(goal, false));
    bool unknown = false;
    for (const auto &conj : d) {
      std::map<std::string, Int> model;
      Sat s = solve(conj, model);
      if (s == Sat::Unsat) continue;
      if (s == Sat::Unknown) {
        unknown = true;
        out.reason = "integer reasoning incomplete";
        continue;
      }
      bool uses_abstraction = false;
      for (const auto &c : conj)
        for (const auto &[x, v] : c.l.c) uses_abstraction |= tr.abstracted.count(x) > 0;
      if (uses_abstraction) {
        unknown = true;
        out.reason = "counterexample depends on nonlinear or fresh terms";
        continue;
      }
      out.verdict = FoVerdict::Invalid;
      out.model = std::move(model);
      out.reason = "counterexample found";
      return out;
    }
    out.verdict = unknown ? FoVerdict::Unknown : FoVerdict::Valid;
    if (!unknown) out.reason.clear();
  } catch (const Unknown &u) {
    out.verdict = FoVerdict::Unknown;
    out.reason = u.reason;
  }
  return out;
}

bool fo_valid(const std::vector<ExprPtr> &gamma, const ExprPtr &goal) {
  return fo_check(gamma, goal).verdict == FoVerdict::Valid;
}

bool fo_equivalent(const std::vector<ExprPtr> &gamma, const ExprPtr &a, const ExprPtr &b) {
  if (equal(a, b)) return true;
  if (is_bool_expr(a) || is_bool_expr(b))
    return fo_valid(gamma, binary(Op::And, binary(Op::Or, unary(Op::Not, a), b),
                                  binary(Op::Or, unary(Op::Not, b), a)));
  return fo_valid(gamma, binary(Op::Eq, a, b));
}

bool fo_inconsistent(const std::vector<ExprPtr> &gamma) { return fo_valid(gamma, boolean(false)); }

}  // namespace tracelet
