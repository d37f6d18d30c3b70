#include "tracelet/contract.hpp"

namespace tracelet {

namespace {

std::optional<ExprPtr> equation_constant(const ExprPtr &pre, const std::string &n) {
  if (pre->kind != ExprKind::Binary || pre->op != Op::Eq) return std::nullopt;
  if (pre->a->kind == ExprKind::Var && pre->a->name == n && pre->b->kind == ExprKind::Int)
    return pre->b;
  if (pre->b->kind == ExprKind::Var && pre->b->name == n && pre->a->kind == ExprKind::Int)
    return pre->a;
  return std::nullopt;
}

}  // namespace

FormulaPtr make_contract(const ContractSpec &spec) {
  const std::string &m = spec.proc;
  ExprPtr n = var("n");
  ExprPtr i = var("i");
  ExprPtr base_n = n;
  ExprPtr base_f = spec.f;
  if (auto c = equation_constant(spec.pre_base, "n")) {
    base_n = *c;
    base_f = substitute(spec.f, Subst{{"n", *c}});
  }
  auto result = [&](const ExprPtr &f) { return pred(binary(Op::Eq, res(i), f)); };
  FormulaPtr base = chop_all({pred(spec.pre_base), start_ev(m, base_n, i), psi(m),
                              finish_ev(m, base_f, i), result(base_f)});
  FormulaPtr step = chop_all({pred(spec.pre_step), start_ev(m, n, i), psi(m),
                              rec_app("X", {spec.step_inv, fresh(i)}), psi(m),
                              finish_ev(m, spec.f, i), result(spec.f)});
  return mu_app(mu_def("X", {"n", "i"}, f_or(base, step)), {n, i});
}

ContractDef contract_def(const ContractSpec &spec) {
  return ContractDef{spec.proc, {"n", "i"}, make_contract(spec)};
}

FormulaPtr big_step_of(const ContractSpec &spec) {
  return chop_all({pred(binary(Op::Or, spec.pre_base, spec.pre_step)), psi(""),
                   pred(binary(Op::Eq, res(var("i")), spec.f))});
}

ContractAssumption assumption_of(const ContractDef &def) {
  if (def.params.size() != 2)
    throw Error("contract-shape", "contract '" + def.name + "' must have parameters (n, i)");
  ContractAssumption c;
  c.proc = def.name;
  c.n = def.params[0];
  c.i = def.params[1];
  c.phi = def.body;
  FormulaPtr body = def.body;
  if (body->kind == FKind::MuApp && !body->mu->psi) body = unfold(body);
  ExprPtr pre;
  for (const auto &d : disjuncts(body)) {
    auto fs = chop_factors(d);
    if (fs.front()->kind != FKind::Pred || fs.back()->kind != FKind::Pred)
      throw Error("contract-shape", "disjunct must start and end with a state predicate");
    pre = pre ? binary(Op::Or, pre, fs.front()->pred) : fs.front()->pred;
    const ExprPtr &tail = fs.back()->pred;
    bool ok = tail->kind == ExprKind::Binary && tail->op == Op::Eq &&
              tail->a->kind == ExprKind::Res && tail->a->a->kind == ExprKind::Var &&
              tail->a->a->name == c.i;
    if (!ok) throw Error("contract-shape", "disjunct must end with [res(" + c.i + ") == f]");
    if (!c.f || mentions_var(tail->b, c.n)) c.f = tail->b;
  }
  c.pre = pre;
  return c;
}

FormulaPtr instantiate(const ContractAssumption &c, const ExprPtr &n, const ExprPtr &i) {
  return substitute(c.phi, Subst{{c.n, n}, {c.i, i}});
}

ExprPtr pre_at(const ContractAssumption &c, const ExprPtr &n) {
  return substitute(c.pre, Subst{{c.n, n}});
}

ExprPtr f_at(const ContractAssumption &c, const ExprPtr &n) {
  return substitute(c.f, Subst{{c.n, n}});
}

std::vector<ContractAssumption> read_contracts(const std::string &text) {
  std::vector<ContractAssumption> out;
  for (const auto &d : parse_contract_file(text)) out.push_back(assumption_of(d));
  return out;
}

}  // namespace tracelet
