#include "tracelet/rules.hpp"

#include "tracelet/fo.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace tracelet {

const ContractAssumption *ProofContext::contract(const std::string &proc) const {
  for (const auto &c : contracts)
    if (c.proc == proc) return &c;
  return nullptr;
}

namespace {

const std::vector<std::string> kCoreRules = {
    "ProcedureContract", "Assign",      "Skip",          "Scope",           "VarDecl",
    "Cond",              "Return",      "Unfold",        "selectDisjunct",  "simplifyGamma",
    "Prestate",          "TrAbs",       "elimUpdate1",   "elimUpdate2",     "subsumeUpdates1",
    "applyUpdate",       "dropUpdate",  "applyEqRigid",  "stateFormula",    "closeFO",
    "closeEvent",        "closePsi"};

const std::vector<std::string> kExtensionRules = {"PrefixEv", "FiniteTraceEmptyPrefix",
                                                  "FiniteTraceEmptyPostfix", "Composition"};

const std::map<std::string, std::set<std::string>> kArgKeys = {
    {"ProcedureContract", {"n", "i", "param"}},
    {"VarDecl", {"fresh"}},
    {"selectDisjunct", {"index"}},
    {"simplifyGamma", {"to"}},
    {"TrAbs", {"at", "id"}},
    {"subsumeUpdates1", {"at"}},
    {"applyUpdate", {"at"}},
    {"dropUpdate", {"at"}},
    {"applyEqRigid", {"fact"}},
    {"Composition", {"at", "factor"}},
};

[[noreturn]] void no_match(const std::string &msg) { throw Error("no-match", msg); }
[[noreturn]] void side_fail(const std::string &msg) { throw Error("side-condition-failed", msg); }

const Judgment &judgment_of(const Sequent &s) {
  if (s.goal.kind != GoalKind::Judgment) no_match("goal is not a judgment");
  return s.goal.judgment;
}

Sequent with_judgment(const Sequent &s, Update u, StmtPtr stmt, FormulaPtr phi) {
  Sequent out;
  out.facts = s.facts;
  out.contracts = s.contracts;
  out.goal = judgment_goal(Judgment{std::move(u), std::move(stmt), std::move(phi)});
  return out;
}

Sequent fo_sequent(const std::vector<ExprPtr> &facts, ExprPtr goal) {
  Sequent out;
  out.facts = facts;
  out.goal = pred_goal(std::move(goal));
  return out;
}

std::pair<StmtPtr, StmtPtr> head_rest(const StmtPtr &s) {
  if (!s) no_match("no statement left to execute");
  if (s->kind == StmtKind::Seq) return {s->a, s->b};
  return {s, nullptr};
}

std::size_t index_arg(const RuleArgs &args, const std::string &key) {
  auto it = args.find(key);
  if (it == args.end()) throw Error("bad-argument", "missing argument '" + key + "'");
  try {
    std::size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size() || v < 0) throw std::invalid_argument("index");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error &) {
    throw Error("bad-argument", "argument '" + key + "' must be a non-negative integer");
  }
}

std::string name_arg(RuleArgs &args, const std::string &key, const std::string &fallback) {
  auto it = args.find(key);
  if (it == args.end()) {
    args[key] = fallback;
    return fallback;
  }
  const std::string &v = it->second;
  bool ok = !v.empty() && (std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_');
  for (char c : v) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'');
  if (!ok) throw Error("bad-argument", "argument '" + key + "' must be an identifier");
  return v;
}

bool is_event_atom(const UpdateAtom &a) {
  return a.kind == AtomKind::Start || a.kind == AtomKind::Finish;
}

bool is_res_elem(const UpdateAtom &a) {
  return a.kind == AtomKind::Elem && a.lhs->kind == ExprKind::Res;
}

/// Program variable written by the atom, if any.
std::optional<std::string> written_var(const UpdateAtom &a) {
  if ((a.kind == AtomKind::Elem || a.kind == AtomKind::Call) && a.lhs->kind == ExprKind::Var)
    return a.lhs->name;
  return std::nullopt;
}

std::set<std::string> read_vars(const UpdateAtom &a) {
  std::set<std::string> out;
  if (a.e) free_vars(a.e, out);
  if (a.id) free_vars(a.id, out);
  if (a.lhs && a.lhs->kind == ExprKind::Res) free_vars(a.lhs->a, out);
  return out;
}

void res_terms(const ExprPtr &e, std::vector<ExprPtr> &out) {
  if (!e) return;
  if (e->kind == ExprKind::Res) out.push_back(e);
  res_terms(e->a, out);
  res_terms(e->b, out);
}

/// Value of `e` in the last state of the trace of `u`: finishEv(m, v, i)
/// binds res(i) to v, res-target elements leave the state unchanged.
ExprPtr state_apply(const std::vector<ExprPtr> &facts, const Update &u, const ExprPtr &e) {
  ExprPtr out = e;
  for (std::size_t k = u.size(); k-- > 0;) {
    const UpdateAtom &a = u[k];
    switch (a.kind) {
    case AtomKind::Elem:
      if (a.lhs->kind == ExprKind::Var) out = substitute(out, Subst{{a.lhs->name, a.e}});
      break;
    case AtomKind::Call: {
      if (mentions_var(out, a.lhs->name))
        side_fail("value of '" + a.lhs->name + "' depends on the result of a call");
      std::vector<ExprPtr> rs;
      res_terms(out, rs);
      if (!rs.empty()) side_fail("res term " + to_string(rs.front()) + " read across a call");
      break;
    }
    case AtomKind::Finish: {
      std::vector<ExprPtr> rs;
      res_terms(out, rs);
      for (const auto &r : rs) {
        if (equal(r->a, a.id)) continue;
        if (!fo_valid(facts, binary(Op::Ne, r->a, a.id)))
          side_fail("cannot separate " + to_string(r) + " from res(" + to_string(a.id) + ")");
      }
      out = substitute_res(out, a.id, a.e);
      break;
    }
    case AtomKind::Start: break;
    }
  }
  return out;
}

bool event_factor(const FormulaPtr &f) {
  return f->kind == FKind::Start || f->kind == FKind::Finish ||
         (f->kind == FKind::MuApp && !is_psi(f));
}

bool same_def(const MuDefPtr &a, const MuDefPtr &b) {
  if (a == b) return true;
  return a->name == b->name && a->params == b->params && equal(a->body, b->body);
}

bool involves(const UpdateAtom &a, const std::string &m) {
  if (a.kind == AtomKind::Call) return true;
  return is_event_atom(a) && (m.empty() || a.proc == m);
}

ExprPtr args_equal(const ExprPtr &e1, const ExprPtr &i1, const ExprPtr &e2, const ExprPtr &i2) {
  return binary(Op::And, binary(Op::Eq, e1, e2), binary(Op::Eq, i1, i2));
}

void check_event_pair(const UpdateAtom &a, const FormulaPtr &f) {
  bool kinds = (a.kind == AtomKind::Start && f->kind == FKind::Start) ||
               (a.kind == AtomKind::Finish && f->kind == FKind::Finish);
  if (!kinds) no_match("update event and formula event differ in kind");
  if (a.proc != f->name) side_fail("procedure names differ: " + a.proc + " vs " + f->name);
}

// Rules ---------------------------------------------------------------------

std::vector<Sequent> procedure_contract(const Sequent &s, RuleArgs &args,
                                        const ProofContext &ctx) {
  if (s.goal.kind != GoalKind::Contract) no_match("goal is not a contract");
  const std::string &m = s.goal.contract;
  const ContractAssumption *c = ctx.contract(m);
  if (!c) side_fail("no contract for '" + m + "'");
  const ProcDecl &proc = lookup(m, ctx.procs);
  std::set<std::string> used = symbols(s);
  std::string n = name_arg(args, "n", fresh_name(c->n, used));
  if (used.count(n)) side_fail("'" + n + "' is not fresh");
  used.insert(n);
  std::string i = name_arg(args, "i", fresh_name(c->i, used));
  if (used.count(i)) side_fail("'" + i + "' is not fresh");
  used.insert(i);
  std::string p = name_arg(args, "param", fresh_name(proc.param, used));
  if (used.count(p)) side_fail("'" + p + "' is not fresh");
  std::set<std::string> body_names;
  free_vars(proc.body, body_names);
  for (const std::string &x : {n, i, p})
    if (body_names.count(x) || x == proc.param) side_fail("'" + x + "' clashes with the body");
  Sequent out;
  out.facts = s.facts;
  out.facts.push_back(pre_at(*c, var(n)));
  out.contracts = s.contracts;
  for (const auto &ca : ctx.contracts)
    if (std::find(out.contracts.begin(), out.contracts.end(), ca.proc) == out.contracts.end())
      out.contracts.push_back(ca.proc);
  out.goal = judgment_goal(
      inline_call(proc, var(n), var(i), p, instantiate(*c, var(n), var(i))));
  return {out};
}

std::vector<Sequent> assign(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  Update u = j.update;
  if (head->kind == StmtKind::Assign)
    u.push_back(elem_atom(head->lhs, head->e));
  else if (head->kind == StmtKind::CallAssign)
    u.push_back(call_atom(head->lhs, head->proc, head->e));
  else if (head->kind == StmtKind::Update)
    u.push_back(head->atom);
  else
    no_match("first statement is not an assignment");
  return {with_judgment(s, u, rest, j.phi)};
}

std::vector<Sequent> skip_rule(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  if (head->kind != StmtKind::Skip) no_match("first statement is not skip");
  return {with_judgment(s, j.update, rest, j.phi)};
}

std::vector<Sequent> scope_rule(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  if (head->kind != StmtKind::Scope || !head->decls.empty())
    no_match("first statement is not a block without declarations");
  return {with_judgment(s, j.update, seq(head->a, rest), j.phi)};
}

std::vector<Sequent> var_decl(const Sequent &s, RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  if (head->kind != StmtKind::Scope || head->decls.empty())
    no_match("first statement is not a block with declarations");
  const std::string &v = head->decls.front();
  std::set<std::string> used = symbols(s);
  std::string fresh = name_arg(args, "fresh", fresh_name(v, used));
  if (used.count(fresh)) side_fail("'" + fresh + "' is not fresh");
  Update u = j.update;
  u.push_back(elem_atom(var(fresh), lit(0)));
  std::vector<std::string> decls(head->decls.begin() + 1, head->decls.end());
  StmtPtr body = substitute(head->a, Subst{{v, var(fresh)}});
  return {with_judgment(s, u, seq(scope_stmt(decls, body), rest), j.phi)};
}

std::vector<Sequent> cond(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  if (head->kind != StmtKind::If) no_match("first statement is not a conditional");
  ExprPtr c = state_apply(s.facts, j.update, head->e);
  Sequent yes = with_judgment(s, j.update, seq(head->a, rest), j.phi);
  yes.facts.push_back(c);
  Sequent no = with_judgment(s, j.update, rest, j.phi);
  no.facts.push_back(unary(Op::Not, c));
  return {yes, no};
}

std::vector<Sequent> return_rule(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto [head, rest] = head_rest(j.stmt);
  if (head->kind != StmtKind::Return || rest) no_match("statement is not a final return");
  SymContext ctx = curr_ctx_symbolic(j.update);
  if (ctx.is_main()) side_fail("currCtx of the update is (main, nul)");
  Update u = j.update;
  u.push_back(finish_atom(ctx.proc, head->e, ctx.id));
  return {with_judgment(s, u, assign_stmt(res(ctx.id), head->e), j.phi)};
}

std::vector<Sequent> unfold_rule(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.phi->kind != FKind::MuApp || is_psi(j.phi)) no_match("formula is not a fixed point");
  return {with_judgment(s, j.update, j.stmt, unfold(j.phi))};
}

std::vector<Sequent> select_disjunct(const Sequent &s, const RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  if (j.phi->kind != FKind::Or) no_match("formula is not a disjunction");
  auto ds = disjuncts(j.phi);
  std::size_t k = index_arg(args, "index");
  if (k >= ds.size()) throw Error("bad-argument", "disjunct index out of range");
  return {with_judgment(s, j.update, j.stmt, ds[k])};
}

std::vector<Sequent> simplify_gamma(const Sequent &s, const RuleArgs &args) {
  auto it = args.find("to");
  if (it == args.end()) throw Error("bad-argument", "missing argument 'to'");
  ExprPtr q;
  try {
    q = parse_expr(it->second);
  } catch (const Error &e) {
    throw Error("bad-argument", "argument 'to': " + std::string(e.what()));
  }
  if (s.facts.empty()) no_match("no first-order facts to simplify");
  if (!fo_valid(s.facts, q)) side_fail("facts do not imply " + to_string(q));
  for (const auto &f : s.facts)
    if (!fo_valid({q}, f)) side_fail(to_string(q) + " does not imply " + to_string(f));
  Sequent out = s;
  out.facts = {q};
  return {out};
}

std::vector<Sequent> prestate(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2 || fs.front()->kind != FKind::Pred)
    no_match("formula does not start with a state predicate");
  std::vector<FormulaPtr> rest(fs.begin() + 1, fs.end());
  return {fo_sequent(s.facts, fs.front()->pred),
          with_judgment(s, j.update, j.stmt, chop_all(rest))};
}

std::vector<Sequent> state_formula(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt) no_match("statement not fully executed");
  if (j.phi->kind != FKind::Pred) no_match("formula is not a state predicate");
  for (const auto &a : j.update)
    if (!is_res_elem(a)) no_match("update produces trace steps");
  return {fo_sequent(s.facts, j.phi->pred)};
}

std::vector<Sequent> tr_abs(const Sequent &s, RuleArgs &args, const ProofContext &ctx) {
  const Judgment &j = judgment_of(s);
  if (j.stmt) no_match("statement not fully executed");
  std::size_t at;
  if (args.count("at")) {
    at = index_arg(args, "at");
  } else {
    auto it = std::find_if(j.update.begin(), j.update.end(),
                           [](const UpdateAtom &a) { return a.kind == AtomKind::Call; });
    if (it == j.update.end()) no_match("update contains no call");
    at = static_cast<std::size_t>(it - j.update.begin());
    args["at"] = std::to_string(at);
  }
  if (at >= j.update.size() || j.update[at].kind != AtomKind::Call)
    no_match("update atom " + std::to_string(at) + " is not a call");
  const UpdateAtom &call = j.update[at];
  if (call.lhs->kind != ExprKind::Var) no_match("call result is not assigned to a variable");
  if (std::find(s.contracts.begin(), s.contracts.end(), call.proc) == s.contracts.end())
    side_fail("C(" + call.proc + ") is not assumed");
  const ContractAssumption *c = ctx.contract(call.proc);
  if (!c) side_fail("no contract for '" + call.proc + "'");
  if (c->phi->kind != FKind::MuApp) side_fail("contract is not a fixed point");
  Update u1(j.update.begin(), j.update.begin() + static_cast<std::ptrdiff_t>(at));
  Update u2(j.update.begin() + static_cast<std::ptrdiff_t>(at) + 1, j.update.end());
  auto fs = chop_factors(j.phi);
  std::size_t p = fs.size();
  for (std::size_t k = 0; k < fs.size(); ++k)
    if (fs[k]->kind == FKind::MuApp && !is_psi(fs[k]) && same_def(fs[k]->mu, c->phi->mu)) {
      p = k;
      break;
    }
  if (p == fs.size()) no_match("formula has no factor " + call.proc + "(e, k)");
  if (p == 0 || p + 1 == fs.size()) no_match("contract factor needs a prefix and a suffix");
  ExprPtr e = state_apply(s.facts, u1, call.e);
  if (!fo_equivalent(s.facts, fs[p]->args.at(0), e))
    side_fail("contract argument " + to_string(fs[p]->args.at(0)) + " differs from " +
              to_string(e));
  std::set<std::string> used = symbols(s);
  std::string id = name_arg(args, "id", fresh_name("k", used));
  if (used.count(id)) side_fail("'" + id + "' is not fresh");

  Sequent prefix;
  prefix.facts = s.facts;
  prefix.goal = judgment_goal(Judgment{u1, nullptr, chop_all({fs.begin(), fs.begin() + p})});
  Sequent pre = fo_sequent(s.facts, state_apply(s.facts, u1, pre_at(*c, call.e)));
  Sequent suffix;
  ExprPtr rk = res(var(id));
  suffix.facts = {binary(Op::Eq, rk, f_at(*c, e))};
  suffix.contracts = s.contracts;
  Update u3{elem_atom(call.lhs, rk)};
  u3.insert(u3.end(), u2.begin(), u2.end());
  suffix.goal =
      judgment_goal(Judgment{u3, nullptr, chop_all({fs.begin() + p + 1, fs.end()})});
  return {prefix, pre, suffix};
}

std::vector<Sequent> elim_update1(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt || j.update.empty()) no_match("judgment is not a non-empty update");
  const UpdateAtom &last = j.update.back();
  Update u(j.update.begin(), j.update.end() - 1);
  if (last.kind != AtomKind::Elem) no_match("last update atom is not elementary");
  if (j.phi->b == nullptr || j.phi->b->kind != FKind::Pred)
    no_match("formula does not end with a state predicate");
  if (last.lhs->kind == ExprKind::Var) {
    if (j.phi->kind != FKind::Concat) no_match("state step needs Phi .. [phi]");
    return {with_judgment(s, u, nullptr, j.phi->a),
            fo_sequent(s.facts, state_apply(s.facts, j.update, j.phi->b->pred))};
  }
  if (j.phi->kind != FKind::Chop) no_match("res binding needs Phi ** [phi]");
  return {with_judgment(s, u, nullptr, j.phi->a),
          fo_sequent(s.facts, state_apply(s.facts, u, j.phi->b->pred))};
}

std::vector<Sequent> elim_update2(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt || j.update.empty()) no_match("judgment is not a non-empty update");
  const UpdateAtom &last = j.update.back();
  if (!is_event_atom(last)) no_match("last update atom is not an event");
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2) no_match("formula is a single event");
  check_event_pair(last, fs.back());
  Update u(j.update.begin(), j.update.end() - 1);
  ExprPtr eq = args_equal(state_apply(s.facts, u, last.e), state_apply(s.facts, u, last.id),
                          fs.back()->e, fs.back()->id);
  fs.pop_back();
  return {with_judgment(s, u, nullptr, chop_all(fs)), fo_sequent(s.facts, eq)};
}

std::vector<Sequent> subsume_updates1(const Sequent &s, RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  if (j.stmt) no_match("statement not fully executed");
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2 || !is_psi(fs.back())) no_match("formula does not end with psi(m)");
  const std::string m = *fs.back()->mu->psi;
  std::size_t at;
  if (args.count("at")) {
    at = index_arg(args, "at");
  } else {
    at = 0;
    for (std::size_t k = 0; k < j.update.size(); ++k)
      if (involves(j.update[k], m)) at = k + 1;
    args["at"] = std::to_string(at);
  }
  if (at > j.update.size()) throw Error("bad-argument", "split index out of range");
  for (std::size_t k = at; k < j.update.size(); ++k)
    if (involves(j.update[k], m))
      side_fail("suffix update " + to_string(j.update[k]) + " involves " +
                (m.empty() ? std::string("events") : m));
  fs.pop_back();
  Update u(j.update.begin(), j.update.begin() + static_cast<std::ptrdiff_t>(at));
  return {with_judgment(s, u, nullptr, chop_all(fs))};
}

UpdateAtom subst_atom(const UpdateAtom &a, const std::function<ExprPtr(const ExprPtr &)> &f) {
  UpdateAtom out = a;
  if (out.e) out.e = f(out.e);
  if (out.id) out.id = f(out.id);
  if (out.lhs && out.lhs->kind == ExprKind::Res) out.lhs = res(f(out.lhs->a));
  return out;
}

std::vector<Sequent> apply_update(const Sequent &s, const RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  std::size_t at = index_arg(args, "at");
  if (at >= j.update.size()) throw Error("bad-argument", "atom index out of range");
  const UpdateAtom &a = j.update[at];
  if (a.kind != AtomKind::Elem || a.lhs->kind != ExprKind::Var)
    no_match("atom " + std::to_string(at) + " is not a variable assignment");
  std::set<std::string> deps;
  free_vars(a.e, deps);
  deps.insert(a.lhs->name);
  std::vector<ExprPtr> rs;
  res_terms(a.e, rs);
  Update u = j.update;
  bool changed = false;
  for (std::size_t k = at + 1; k < u.size(); ++k) {
    UpdateAtom next = subst_atom(u[k], [&](const ExprPtr &e) {
      return substitute(e, Subst{{a.lhs->name, a.e}});
    });
    if (to_string(next) != to_string(u[k])) changed = true;
    u[k] = next;
    auto w = written_var(u[k]);
    if (w && deps.count(*w)) break;
    if (!rs.empty() && (u[k].kind == AtomKind::Finish || u[k].kind == AtomKind::Call)) break;
  }
  if (!changed) no_match("no later atom reads '" + a.lhs->name + "'");
  return {with_judgment(s, u, j.stmt, j.phi)};
}

std::vector<Sequent> drop_update(const Sequent &s, const RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  std::size_t at = index_arg(args, "at");
  if (at >= j.update.size()) throw Error("bad-argument", "atom index out of range");
  const UpdateAtom &a = j.update[at];
  Update u = j.update;
  u.erase(u.begin() + static_cast<std::ptrdiff_t>(at));
  if (is_res_elem(a)) return {with_judgment(s, u, j.stmt, j.phi)};
  if (a.kind != AtomKind::Elem) no_match("atom " + std::to_string(at) + " is not elementary");
  if (j.stmt) side_fail("statement not fully executed");
  const std::string &x = a.lhs->name;
  for (std::size_t k = at + 1; k < j.update.size(); ++k) {
    if (read_vars(j.update[k]).count(x)) side_fail("'" + x + "' is read later");
    if (written_var(j.update[k]) == x) break;
  }
  std::set<std::string> phi_vars;
  free_vars(j.phi, phi_vars);
  if (phi_vars.count(x)) side_fail("formula mentions '" + x + "'");
  // The dropped step must fall into a psi gap between the same pair of events.
  auto fs = chop_factors(j.phi);
  std::vector<std::size_t> ev_factors;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (event_factor(fs[k])) {
      ev_factors.push_back(k);
    } else if (fs[k]->kind != FKind::Pred && !is_psi(fs[k])) {
      side_fail("formula factor " + to_string(fs[k]) + " is not a chop of events, psi and states");
    }
  }
  std::size_t ev_atoms = 0, gap = 0;
  for (std::size_t k = 0; k < j.update.size(); ++k) {
    bool ev = is_event_atom(j.update[k]) || j.update[k].kind == AtomKind::Call;
    if (ev && k < at) ++gap;
    if (ev) ++ev_atoms;
  }
  if (ev_atoms != ev_factors.size()) side_fail("events of update and formula do not align");
  std::size_t lo = gap == 0 ? 0 : ev_factors[gap - 1] + 1;
  std::size_t hi = gap == ev_factors.size() ? fs.size() : ev_factors[gap];
  bool absorbed = false;
  for (std::size_t k = lo; k < hi; ++k) absorbed = absorbed || is_psi(fs[k]);
  if (!absorbed) side_fail("no psi factor absorbs the dropped step");
  return {with_judgment(s, u, j.stmt, j.phi)};
}

std::vector<Sequent> apply_eq_rigid(const Sequent &s, const RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  std::size_t k = index_arg(args, "fact");
  if (k >= s.facts.size()) throw Error("bad-argument", "fact index out of range");
  const ExprPtr &f = s.facts[k];
  if (f->kind != ExprKind::Binary || f->op != Op::Eq) no_match("fact is not an equation");
  ExprPtr sym = f->a, term = f->b;
  if (sym->kind != ExprKind::Var || mentions_var(term, sym->name)) std::swap(sym, term);
  if (sym->kind != ExprKind::Var || mentions_var(term, sym->name))
    no_match("equation does not define a symbol");
  const std::string &x = sym->name;
  for (const auto &a : j.update)
    if (written_var(a) == x) side_fail("'" + x + "' is assigned by the update");
  if (j.stmt) {
    std::set<std::string> vs;
    free_vars(j.stmt, vs);
    if (vs.count(x)) side_fail("'" + x + "' occurs in the statement");
  }
  Subst sub{{x, term}};
  Update u;
  for (const auto &a : j.update)
    u.push_back(subst_atom(a, [&](const ExprPtr &e) { return substitute(e, sub); }));
  return {with_judgment(s, u, j.stmt, substitute(j.phi, sub))};
}

std::vector<Sequent> close_fo(const Sequent &s) {
  if (s.goal.kind == GoalKind::Pred) {
    FoResult r = fo_check(s.facts, s.goal.pred);
    if (r.verdict == FoVerdict::Valid) return {};
    if (fo_inconsistent(s.facts)) return {};
    std::string msg = to_string(s.goal.pred) + " is " + to_string(r.verdict);
    if (r.verdict == FoVerdict::Invalid) {
      msg += ", counterexample:";
      for (const auto &[x, v] : r.model) msg += " " + x + "=" + v.str();
    }
    side_fail(msg);
  }
  if (fo_inconsistent(s.facts)) return {};
  side_fail("facts are not inconsistent");
}

std::vector<Sequent> close_event(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt || j.update.size() != 1 || !is_event_atom(j.update[0]))
    no_match("update is not a single event");
  check_event_pair(j.update[0], j.phi);
  ExprPtr eq = args_equal(j.update[0].e, j.update[0].id, j.phi->e, j.phi->id);
  if (!fo_valid(s.facts, eq)) side_fail("event arguments differ: " + to_string(eq));
  return {};
}

std::vector<Sequent> close_psi(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt) no_match("statement not fully executed");
  if (!is_psi(j.phi)) no_match("formula is not psi(m)");
  const std::string &m = *j.phi->mu->psi;
  for (const auto &a : j.update)
    if (involves(a, m)) side_fail("update " + to_string(a) + " involves " + m);
  return {};
}

// Gated rules.

std::vector<Sequent> prefix_ev(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.update.empty() || !is_event_atom(j.update[0])) no_match("update does not start with an event");
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2) no_match("formula is a single event");
  check_event_pair(j.update[0], fs[0]);
  ExprPtr eq = args_equal(j.update[0].e, j.update[0].id, fs[0]->e, fs[0]->id);
  if (!fo_valid(s.facts, eq)) side_fail("event arguments differ: " + to_string(eq));
  return {with_judgment(s, Update(j.update.begin() + 1, j.update.end()), j.stmt,
                        chop_all({fs.begin() + 1, fs.end()}))};
}

std::vector<Sequent> empty_prefix(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.update.empty() || !is_event_atom(j.update[0])) no_match("update does not start with an event");
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2 || !is_psi(fs[0])) no_match("formula does not start with psi(m)");
  return {with_judgment(s, j.update, j.stmt, chop_all({fs.begin() + 1, fs.end()}))};
}

std::vector<Sequent> empty_postfix(const Sequent &s) {
  const Judgment &j = judgment_of(s);
  if (j.stmt || j.update.empty() || !is_event_atom(j.update.back()))
    no_match("update does not end with an event");
  auto fs = chop_factors(j.phi);
  if (fs.size() < 2 || !is_psi(fs.back())) no_match("formula does not end with psi(m)");
  fs.pop_back();
  return {with_judgment(s, j.update, nullptr, chop_all(fs))};
}

std::vector<Sequent> composition(const Sequent &s, const RuleArgs &args) {
  const Judgment &j = judgment_of(s);
  std::size_t at = index_arg(args, "at");
  std::size_t factor = index_arg(args, "factor");
  auto fs = chop_factors(j.phi);
  if (at > j.update.size()) throw Error("bad-argument", "split index out of range");
  if (factor == 0 || factor >= fs.size()) throw Error("bad-argument", "factor index out of range");
  Sequent first = with_judgment(s, Update(j.update.begin(), j.update.begin() + static_cast<std::ptrdiff_t>(at)),
                                nullptr, chop_all({fs.begin(), fs.begin() + static_cast<std::ptrdiff_t>(factor)}));
  Sequent second = with_judgment(s, Update(j.update.begin() + static_cast<std::ptrdiff_t>(at), j.update.end()),
                                 j.stmt, chop_all({fs.begin() + static_cast<std::ptrdiff_t>(factor), fs.end()}));
  return {first, second};
}

}  // namespace

std::vector<std::string> rule_names(bool extensions) {
  std::vector<std::string> out = kCoreRules;
  if (extensions) out.insert(out.end(), kExtensionRules.begin(), kExtensionRules.end());
  return out;
}

bool is_closure_rule(const std::string &rule) {
  return rule == "closeFO" || rule == "closeEvent" || rule == "closePsi";
}

Judgment inline_call(const ProcDecl &proc, const ExprPtr &e, const ExprPtr &id,
                     const std::string &param, FormulaPtr phi) {
  Judgment j;
  j.update.push_back(start_atom(proc.name, e, id));
  j.stmt = seq(assign_stmt(var(param), e), substitute(proc.body, Subst{{proc.param, var(param)}}));
  j.phi = std::move(phi);
  return j;
}

std::vector<Sequent> apply_rule(const std::string &rule, const Sequent &s, RuleArgs &args,
                                const ProofContext &ctx) {
  auto core = std::find(kCoreRules.begin(), kCoreRules.end(), rule) != kCoreRules.end();
  auto ext = std::find(kExtensionRules.begin(), kExtensionRules.end(), rule) !=
             kExtensionRules.end();
  if (!core && !(ext && ctx.extensions)) {
    if (ext) throw Error("unknown-rule", "rule '" + rule + "' requires --extensions");
    throw Error("unknown-rule", "unknown rule '" + rule + "'");
  }
  auto keys = kArgKeys.find(rule);
  for (const auto &[k, v] : args)
    if (keys == kArgKeys.end() || !keys->second.count(k))
      throw Error("bad-argument", "rule '" + rule + "' takes no argument '" + k + "'");
  if (s.goal.kind == GoalKind::Judgment && s.goal.judgment.stmt &&
      head_rest(s.goal.judgment.stmt).first->kind == StmtKind::While &&
      (rule == "Assign" || rule == "Skip" || rule == "Scope" || rule == "VarDecl" ||
       rule == "Cond" || rule == "Return"))
    throw Error("unsupported-construct", "loops are not supported by the calculus");

  if (rule == "ProcedureContract") return procedure_contract(s, args, ctx);
  if (rule == "Assign") return assign(s);
  if (rule == "Skip") return skip_rule(s);
  if (rule == "Scope") return scope_rule(s);
  if (rule == "VarDecl") return var_decl(s, args);
  if (rule == "Cond") return cond(s);
  if (rule == "Return") return return_rule(s);
  if (rule == "Unfold") return unfold_rule(s);
  if (rule == "selectDisjunct") return select_disjunct(s, args);
  if (rule == "simplifyGamma") return simplify_gamma(s, args);
  if (rule == "Prestate") return prestate(s);
  if (rule == "TrAbs") return tr_abs(s, args, ctx);
  if (rule == "elimUpdate1") return elim_update1(s);
  if (rule == "elimUpdate2") return elim_update2(s);
  if (rule == "subsumeUpdates1") return subsume_updates1(s, args);
  if (rule == "applyUpdate") return apply_update(s, args);
  if (rule == "dropUpdate") return drop_update(s, args);
  if (rule == "applyEqRigid") return apply_eq_rigid(s, args);
  if (rule == "stateFormula") return state_formula(s);
  if (rule == "closeFO") return close_fo(s);
  if (rule == "closeEvent") return close_event(s);
  if (rule == "closePsi") return close_psi(s);
  if (rule == "PrefixEv") return prefix_ev(s);
  if (rule == "FiniteTraceEmptyPrefix") return empty_prefix(s);
  if (rule == "FiniteTraceEmptyPostfix") return empty_postfix(s);
  return composition(s, args);
}

std::vector<Sequent> apply_rule(const std::string &rule, const Sequent &s, const RuleArgs &args,
                                const ProofContext &ctx) {
  RuleArgs copy = args;
  return apply_rule(rule, s, copy, ctx);
}

}  // namespace tracelet
