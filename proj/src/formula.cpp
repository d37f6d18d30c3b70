#include "tracelet/formula.hpp"

namespace tracelet {

namespace {

FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

FormulaPtr binary_f(FKind k, FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = k;
  f.a = std::move(a);
  f.b = std::move(b);
  return make(std::move(f));
}

int precedence(const FormulaPtr &f) {
  switch (f->kind) {
  case FKind::Or: return 1;
  case FKind::And: return 2;
  case FKind::Chop:
  case FKind::Concat: return 3;
  default: return 4;
  }
}

std::string args_text(const std::vector<ExprPtr> &args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += to_string(args[i]);
  }
  return out;
}

}  // namespace

FormulaPtr pred(ExprPtr p) {
  Formula f;
  f.kind = FKind::Pred;
  f.pred = std::move(p);
  return make(std::move(f));
}

FormulaPtr rec_app(std::string x, std::vector<ExprPtr> args) {
  Formula f;
  f.kind = FKind::RecApp;
  f.name = std::move(x);
  f.args = std::move(args);
  return make(std::move(f));
}

FormulaPtr mu_app(MuDefPtr def, std::vector<ExprPtr> args) {
  Formula f;
  f.kind = FKind::MuApp;
  f.mu = std::move(def);
  f.args = std::move(args);
  return make(std::move(f));
}

FormulaPtr start_ev(std::string m, ExprPtr e, ExprPtr id) {
  Formula f;
  f.kind = FKind::Start;
  f.name = std::move(m);
  f.e = std::move(e);
  f.id = std::move(id);
  return make(std::move(f));
}

FormulaPtr finish_ev(std::string m, ExprPtr e, ExprPtr id) {
  Formula f;
  f.kind = FKind::Finish;
  f.name = std::move(m);
  f.e = std::move(e);
  f.id = std::move(id);
  return make(std::move(f));
}

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return binary_f(FKind::And, a, b); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return binary_f(FKind::Or, a, b); }
FormulaPtr f_concat(FormulaPtr a, FormulaPtr b) { return binary_f(FKind::Concat, a, b); }
FormulaPtr f_chop(FormulaPtr a, FormulaPtr b) { return binary_f(FKind::Chop, a, b); }

FormulaPtr no_ev(std::string m) {
  Formula f;
  f.kind = FKind::NoEv;
  f.name = std::move(m);
  return make(std::move(f));
}

MuDefPtr mu_def(std::string name, std::vector<std::string> params, FormulaPtr body) {
  auto d = std::make_shared<MuDef>();
  d->name = std::move(name);
  d->params = std::move(params);
  d->body = std::move(body);
  return d;
}

FormulaPtr psi(const std::string &m) {
  auto d = std::make_shared<MuDef>();
  d->name = "Psi";
  d->body = f_or(no_ev(m), f_concat(no_ev(m), rec_app("Psi", {})));
  d->psi = m;
  return mu_app(d, {});
}

FormulaPtr no_event_chop(FormulaPtr a, const std::string &m, FormulaPtr b) {
  return f_chop(f_chop(std::move(a), psi(m)), std::move(b));
}

bool is_psi(const FormulaPtr &f) { return f->kind == FKind::MuApp && f->mu->psi.has_value(); }

std::string to_string(const FormulaPtr &f) {
  switch (f->kind) {
  case FKind::Pred: return "[" + to_string(f->pred) + "]";
  case FKind::RecApp: return f->name + "(" + args_text(f->args) + ")";
  case FKind::MuApp: {
    if (f->mu->psi) return "psi(" + *f->mu->psi + ")";
    std::string params;
    for (std::size_t i = 0; i < f->mu->params.size(); ++i)
      params += (i ? ", " : "") + f->mu->params[i];
    return "(mu " + f->mu->name + "(" + params + "). " + to_string(f->mu->body) + ")(" +
           args_text(f->args) + ")";
  }
  case FKind::Start:
    return "startEv(" + f->name + ", " + to_string(f->e) + ", " + to_string(f->id) + ")";
  case FKind::Finish:
    return "finishEv(" + f->name + ", " + to_string(f->e) + ", " + to_string(f->id) + ")";
  case FKind::NoEv: return "noev(" + f->name + ")";
  default: break;
  }
  const char *op = f->kind == FKind::Or    ? " \\/ "
                   : f->kind == FKind::And ? " /\\ "
                   : f->kind == FKind::Chop ? " ** "
                                            : " .. ";
  int p = precedence(f);
  std::string l = to_string(f->a);
  std::string r = to_string(f->b);
  if (precedence(f->a) < p) l = "(" + l + ")";
  if (precedence(f->b) <= p) r = "(" + r + ")";
  return l + op + r;
}

bool equal(const FormulaPtr &a, const FormulaPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return to_string(a) == to_string(b);
}

std::string to_string(const ContractDef &c) {
  std::string params;
  for (std::size_t i = 0; i < c.params.size(); ++i) params += (i ? ", " : "") + c.params[i];
  return "contract " + c.name + "(" + params + ") := " + to_string(c.body);
}

void free_vars(const FormulaPtr &f, std::set<std::string> &out) {
  switch (f->kind) {
  case FKind::Pred: free_vars(f->pred, out); break;
  case FKind::RecApp:
    for (const auto &a : f->args) free_vars(a, out);
    break;
  case FKind::MuApp: {
    for (const auto &a : f->args) free_vars(a, out);
    std::set<std::string> inner;
    free_vars(f->mu->body, inner);
    for (const auto &p : f->mu->params) inner.erase(p);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case FKind::Start:
  case FKind::Finish:
    free_vars(f->e, out);
    free_vars(f->id, out);
    break;
  case FKind::NoEv: break;
  default:
    free_vars(f->a, out);
    free_vars(f->b, out);
  }
}

namespace {

std::string fresh_param(const std::string &base, const std::set<std::string> &avoid) {
  std::string name = base;
  while (avoid.count(name)) name += "'";
  return name;
}

/// Substitution; `reroll` maps recursion variables to the definition they
/// re-roll into during unfolding.
FormulaPtr subst_impl(const FormulaPtr &f, const Subst &s,
                      const std::map<std::string, MuDefPtr> &reroll) {
  switch (f->kind) {
  case FKind::Pred: return s.empty() ? f : pred(substitute(f->pred, s));
  case FKind::RecApp: {
    std::vector<ExprPtr> args;
    for (const auto &a : f->args) args.push_back(substitute(a, s));
    auto it = reroll.find(f->name);
    if (it != reroll.end()) return mu_app(it->second, args);
    return rec_app(f->name, args);
  }
  case FKind::MuApp: {
    std::vector<ExprPtr> args;
    for (const auto &a : f->args) args.push_back(substitute(a, s));
    if (f->mu->psi) return mu_app(f->mu, args);
    Subst inner = s;
    for (const auto &p : f->mu->params) inner.erase(p);
    auto inner_reroll = reroll;
    inner_reroll.erase(f->mu->name);
    std::set<std::string> body_free;
    free_vars(f->mu->body, body_free);
    for (auto it = inner.begin(); it != inner.end();)
      it = body_free.count(it->first) ? std::next(it) : inner.erase(it);
    if (inner.empty() && inner_reroll.empty()) return mu_app(f->mu, args);
    std::set<std::string> incoming;
    for (const auto &[k, v] : inner) free_vars(v, incoming);
    std::vector<std::string> params = f->mu->params;
    for (auto &p : params) {
      if (!incoming.count(p)) continue;
      std::set<std::string> avoid = incoming;
      avoid.insert(body_free.begin(), body_free.end());
      avoid.insert(params.begin(), params.end());
      std::string renamed = fresh_param(p, avoid);
      inner[p] = var(renamed);
      p = renamed;
    }
    FormulaPtr body = subst_impl(f->mu->body, inner, inner_reroll);
    return mu_app(mu_def(f->mu->name, params, body), args);
  }
  case FKind::Start: return start_ev(f->name, substitute(f->e, s), substitute(f->id, s));
  case FKind::Finish: return finish_ev(f->name, substitute(f->e, s), substitute(f->id, s));
  case FKind::NoEv: return f;
  default:
    return binary_f(f->kind, subst_impl(f->a, s, reroll), subst_impl(f->b, s, reroll));
  }
}

}  // namespace

FormulaPtr substitute(const FormulaPtr &f, const Subst &s) { return subst_impl(f, s, {}); }

FormulaPtr unfold(const FormulaPtr &node) {
  if (node->kind != FKind::MuApp) throw Error("no-match", "unfold expects a fixed-point application");
  const MuDef &def = *node->mu;
  if (def.params.size() != node->args.size()) throw Error("arity", "arity mismatch in unfold");
  Subst s;
  for (std::size_t i = 0; i < def.params.size(); ++i) s[def.params[i]] = node->args[i];
  return subst_impl(def.body, s, {{def.name, node->mu}});
}

std::vector<FormulaPtr> chop_factors(const FormulaPtr &f) {
  if (f->kind != FKind::Chop) return {f};
  auto l = chop_factors(f->a);
  auto r = chop_factors(f->b);
  l.insert(l.end(), r.begin(), r.end());
  return l;
}

FormulaPtr chop_all(const std::vector<FormulaPtr> &factors) {
  FormulaPtr out;
  for (const auto &f : factors) out = out ? f_chop(out, f) : f;
  return out;
}

std::vector<FormulaPtr> disjuncts(const FormulaPtr &f) {
  if (f->kind != FKind::Or) return {f};
  auto l = disjuncts(f->a);
  auto r = disjuncts(f->b);
  l.insert(l.end(), r.begin(), r.end());
  return l;
}

FormulaPtr or_all(const std::vector<FormulaPtr> &ds) {
  FormulaPtr out;
  for (const auto &d : ds) out = out ? f_or(out, d) : d;
  return out;
}

std::optional<bool> try_eval_pred(const State &s, const LogicalEnv &beta, const ExprPtr &p) {
  Lookup lk = [&](const std::string &name) -> std::optional<Int> {
    if (auto it = beta.find(name); it != beta.end()) return it->second;
    if (auto it = s.find(name); it != s.end()) return it->second;
    return std::nullopt;
  };
  auto v = try_eval(p, lk);
  if (!v) return std::nullopt;
  return *v != 0;
}

bool eval_pred(const State &s, const LogicalEnv &beta, const ExprPtr &p) {
  auto v = try_eval_pred(s, beta, p);
  if (!v) throw Error("unbound-symbol", "unbound symbol in predicate " + to_string(p));
  return *v;
}

}  // namespace tracelet
