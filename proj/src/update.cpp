#include "tracelet/update.hpp"

#include "tracelet/interp.hpp"

namespace tracelet {

std::string to_string(const Update &u) {
  if (u.empty()) return "eps";
  std::string out;
  for (const auto &a : u) out += to_string(a);
  return out;
}

namespace {

ExprPtr apply_atom(const UpdateAtom &a, const ExprPtr &e) {
  if (a.kind != AtomKind::Elem) return e;
  if (a.lhs->kind == ExprKind::Res) return substitute_res(e, a.lhs->a, a.e);
  return substitute(e, Subst{{a.lhs->name, a.e}});
}

}  // namespace

ExprPtr apply_update_prefix(const Update &u, std::size_t count, const ExprPtr &e) {
  ExprPtr out = e;
  count = std::min(count, u.size());
  for (std::size_t k = count; k-- > 0;) out = apply_atom(u[k], out);
  return out;
}

ExprPtr apply_update_expr(const Update &u, const ExprPtr &e) {
  return apply_update_prefix(u, u.size(), e);
}

Context curr_ctx_update(const Update &u, const LogicalEnv &beta) {
  Lookup lk = [&](const std::string &name) -> std::optional<Int> {
    auto it = beta.find(name);
    if (it == beta.end()) return std::nullopt;
    return it->second;
  };
  std::vector<Context> open;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const UpdateAtom &a = u[k];
    if (a.kind != AtomKind::Start && a.kind != AtomKind::Finish) continue;
    auto id = try_eval(apply_update_prefix(u, k, a.id), lk);
    if (!id) throw Error("unbound-symbol", "cannot evaluate call id " + to_string(a.id));
    Context c{a.proc, *id};
    if (a.kind == AtomKind::Start) {
      open.push_back(c);
    } else {
      if (open.empty() || open.back() != c)
        throw Error("malformed-nesting", "finishEv without matching startEv in " + to_string(u));
      open.pop_back();
    }
  }
  return open.empty() ? main_context() : open.back();
}

SymContext curr_ctx_symbolic(const Update &u) {
  std::vector<SymContext> open;
  for (const auto &a : u) {
    if (a.kind == AtomKind::Start) {
      open.push_back({a.proc, a.id});
    } else if (a.kind == AtomKind::Finish) {
      if (open.empty() || open.back().proc != a.proc || !equal(open.back().id, a.id))
        throw Error("malformed-nesting", "finishEv without matching startEv in " + to_string(u));
      open.pop_back();
    }
  }
  return open.empty() ? SymContext{} : open.back();
}

std::string to_string(const Judgment &j) {
  std::string out;
  for (const auto &a : j.update) out += to_string(a);
  if (j.stmt) out += (out.empty() ? "" : " ") + to_string(j.stmt);
  if (out.empty()) out = "eps";
  return out + " : " + to_string(j.phi);
}

Trace run_judgment_program(const Update &u, const StmtPtr &s, const State &s0,
                           const LookupTable &g, std::uint64_t fuel) {
  StmtPtr prog = prefix_updates(u, s ? s : skip_stmt());
  Trace t = singleton(s0);
  Allocator alloc = allocator_for(t);
  for (const auto &[k, v] : s0)
    if (v >= alloc.next_id) alloc.next_id = v + 1;
  Fuel f(fuel);
  return run_stmt(prog, t, g, alloc, f);
}

}  // namespace tracelet
