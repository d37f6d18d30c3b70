#include "tracelet/interp.hpp"

#include <cstdlib>

namespace tracelet {

std::uint64_t default_fuel() {
  if (const char *env = std::getenv("TRACELET_FUEL")) {
    char *end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 1000000;
}

void Fuel::take() {
  if (left == 0) throw Error("fuel-exhausted", "step budget exhausted");
  --left;
}

Allocator allocator_for(const Trace &t) {
  Allocator a;
  for (const auto &e : t)
    if (!is_state(e) && event_of(e).kind == EvKind::Call && event_of(e).id >= a.next_id)
      a.next_id = event_of(e).id + 1;
  if (!t.empty() && is_state(t.back())) {
    for (const auto &[name, v] : state_of(t.back())) {
      if (name.size() > 3 && name.compare(0, 3, "res") == 0 &&
          name.find_first_not_of("0123456789", 3) == std::string::npos) {
        Int k(name.substr(3));
        if (k >= a.next_id) a.next_id = k + 1;
        continue;
      }
      auto hash = name.rfind('#');
      if (hash == std::string::npos || hash + 1 == name.size()) continue;
      std::string digits = name.substr(hash + 1);
      if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
      Int k(digits);
      if (k >= a.next_fresh) a.next_fresh = k + 1;
    }
  }
  return a;
}

namespace {

LocalResult finished(const State &s) { return LocalResult{singleton(s), nullptr}; }

LocalResult eval_atom(const State &s, const UpdateAtom &atom, Allocator &alloc,
                      const LookupTable &g, Fuel &fuel) {
  switch (atom.kind) {
  case AtomKind::Elem:
    if (atom.lhs->kind == ExprKind::Res) return finished(s);
    return LocalResult{Trace{s, update_state(s, atom.lhs->name, eval_expr(s, atom.e))}, nullptr};
  case AtomKind::Call: {
    Trace t = run_stmt(call_stmt(atom.lhs, atom.proc, atom.e), singleton(s), g, alloc, fuel);
    return LocalResult{std::move(t), nullptr};
  }
  case AtomKind::Start: {
    Int v = eval_expr(s, atom.e);
    Int id = eval_expr(s, atom.id);
    if (id >= alloc.next_id) alloc.next_id = id + 1;
    Trace t = chop(event_trace(s, call_ev(atom.proc, v, id)),
                   event_trace(s, push_ev(Context{atom.proc, id})));
    return LocalResult{std::move(t), nullptr};
  }
  case AtomKind::Finish: {
    Int v = eval_expr(s, atom.e);
    Int id = eval_expr(s, atom.id);
    State bound = update_state(s, res_name(id), v);
    Trace t = concat(event_trace(s, ret_ev(v)), event_trace(bound, pop_ev(Context{atom.proc, id})));
    return LocalResult{std::move(t), nullptr};
  }
  }
  return finished(s);
}

}  // namespace

LocalResult local_eval(const State &s, const StmtPtr &stmt, Allocator &alloc,
                       const LookupTable &g, Fuel &fuel) {
  switch (stmt->kind) {
  case StmtKind::Skip: return finished(s);
  case StmtKind::Assign:
    if (stmt->lhs->kind == ExprKind::Res) return finished(s);
    return LocalResult{Trace{s, update_state(s, stmt->lhs->name, eval_expr(s, stmt->e))}, nullptr};
  case StmtKind::CallAssign: {
    lookup(stmt->proc, g);
    Int v = eval_expr(s, stmt->e);
    Int id = alloc.next_id;
    alloc.next_id += 1;
    return LocalResult{event_trace(s, call_ev(stmt->proc, v, id)),
                       with_pos(assign_stmt(stmt->lhs, res(lit(id))), stmt->pos)};
  }
  case StmtKind::If:
    if (eval_expr(s, stmt->e) != 0) return LocalResult{singleton(s), stmt->a};
    return finished(s);
  case StmtKind::While:
    return LocalResult{singleton(s), if_stmt(stmt->e, seq(stmt->a, stmt))};
  case StmtKind::Seq: {
    LocalResult r = local_eval(s, stmt->a, alloc, g, fuel);
    r.cont = r.cont ? seq(r.cont, stmt->b) : stmt->b;
    return r;
  }
  case StmtKind::Scope: {
    if (stmt->decls.empty()) return LocalResult{singleton(s), stmt->a};
    const std::string &x = stmt->decls.front();
    std::string fresh_name = x + "#" + alloc.next_fresh.str();
    alloc.next_fresh += 1;
    std::vector<std::string> rest(stmt->decls.begin() + 1, stmt->decls.end());
    StmtPtr body = substitute(stmt->a, Subst{{x, var(fresh_name)}});
    StmtPtr cont = rest.empty() ? body : scope_stmt(std::move(rest), body);
    return LocalResult{Trace{s, update_state(s, fresh_name, 0)}, cont};
  }
  case StmtKind::Return:
    return LocalResult{event_trace(s, ret_ev(eval_expr(s, stmt->e))), nullptr};
  case StmtKind::Update: return eval_atom(s, stmt->atom, alloc, g, fuel);
  }
  return finished(s);
}

Configuration make_config(const Trace &t, StmtPtr cont) {
  Configuration c;
  c.trace = t;
  c.cont = std::move(cont);
  c.alloc = allocator_for(t);
  for (const auto &e : t) {
    if (is_state(e)) continue;
    const EventMarker &ev = event_of(e);
    if (ev.kind == EvKind::Push) c.stack.push_back(ev.ctx());
    if (ev.kind == EvKind::Pop && !c.stack.empty()) c.stack.pop_back();
  }
  return c;
}

bool is_final(const Configuration &c) {
  return !c.cont && !ends_in(c.trace, EvKind::Call) && !ends_in(c.trace, EvKind::Ret);
}

StepRule step(Configuration &c, const LookupTable &g, Fuel &fuel) {
  fuel.take();
  if (auto at = ends_in(c.trace, EvKind::Call)) {
    const EventMarker ev = event_of(c.trace[*at]);
    const ProcDecl &decl = lookup(ev.proc, g);
    StmtPtr body = substitute(decl.body, Subst{{decl.param, lit(ev.arg)}});
    Context ctx{ev.proc, ev.id};
    chop_append(c.trace, event_trace(last_state(c.trace), push_ev(ctx)));
    c.stack.push_back(ctx);
    c.cont = seq(body, c.cont);
    return StepRule::Call;
  }
  if (auto at = ends_in(c.trace, EvKind::Ret)) {
    if (c.stack.empty()) throw Error("stuck", "retEv in the main context");
    Context ctx = c.stack.back();
    State bound = update_state(last_state(c.trace), res_name(*ctx.id), event_of(c.trace[*at]).val);
    c.trace.push_back(bound);
    chop_append(c.trace, event_trace(bound, pop_ev(ctx)));
    c.stack.pop_back();
    return StepRule::Return;
  }
  if (!c.cont) throw Error("stuck", "no composition rule applies");
  LocalResult r = local_eval(last_state(c.trace), c.cont, c.alloc, g, fuel);
  for (const auto &e : r.trace) {
    if (is_state(e)) continue;
    const EventMarker &ev = event_of(e);
    if (ev.kind == EvKind::Push) c.stack.push_back(ev.ctx());
    if (ev.kind == EvKind::Pop && !c.stack.empty()) c.stack.pop_back();
  }
  chop_append(c.trace, r.trace);
  c.cont = r.cont;
  return StepRule::Progress;
}

Trace run_stmt(const StmtPtr &s, const Trace &t, const LookupTable &g, Allocator &alloc,
               Fuel &fuel) {
  Configuration c = make_config(t, s);
  if (alloc.next_id > c.alloc.next_id) c.alloc.next_id = alloc.next_id;
  if (alloc.next_fresh > c.alloc.next_fresh) c.alloc.next_fresh = alloc.next_fresh;
  while (!is_final(c)) step(c, g, fuel);
  alloc = c.alloc;
  return Trace(c.trace.begin() + static_cast<std::ptrdiff_t>(t.size() - 1), c.trace.end());
}

Trace run_stmt(const StmtPtr &s, const Trace &t, const LookupTable &g, Fuel &fuel) {
  Allocator alloc = allocator_for(t);
  return run_stmt(s, t, g, alloc, fuel);
}

RunResult run(const Program &p, const State &initial, std::uint64_t fuel_budget) {
  State s0 = initial;
  for (const auto &d : p.main_decls) s0.emplace(d, 0);
  LookupTable g = lookup_table(p);
  Fuel fuel(fuel_budget);
  Configuration c = make_config(singleton(s0), p.main_body);
  RunResult out;
  try {
    while (!is_final(c)) step(c, g, fuel);
  } catch (const Error &e) {
    if (e.kind() != "fuel-exhausted") throw;
    out.exhausted = true;
    out.message = e.what();
  }
  out.trace = std::move(c.trace);
  return out;
}

}  // namespace tracelet
