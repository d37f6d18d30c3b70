#pragma once

#include "tracelet/expr.hpp"
#include "tracelet/trace.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tracelet {

enum class FKind { Pred, RecApp, MuApp, Start, Finish, And, Or, Concat, Chop, NoEv };

struct Formula;
struct MuDef;
using FormulaPtr = std::shared_ptr<const Formula>;
using MuDefPtr = std::shared_ptr<const MuDef>;

/// mu X(params). body. `psi` is set for the built-in psi(m) definition.
struct MuDef {
  std::string name;
  std::vector<std::string> params;
  FormulaPtr body;
  std::optional<std::string> psi;
};

/// Trace formula AST. `name` is the recursion variable (RecApp), the procedure
/// (Start, Finish, NoEv; empty NoEv name means any procedure).
struct Formula {
  FKind kind = FKind::Pred;
  ExprPtr pred;
  std::string name;
  std::vector<ExprPtr> args;
  MuDefPtr mu;
  FormulaPtr a;
  FormulaPtr b;
  ExprPtr e;
  ExprPtr id;
};

FormulaPtr pred(ExprPtr p);
FormulaPtr rec_app(std::string x, std::vector<ExprPtr> args);
FormulaPtr mu_app(MuDefPtr def, std::vector<ExprPtr> args);
FormulaPtr start_ev(std::string m, ExprPtr e, ExprPtr id);
FormulaPtr finish_ev(std::string m, ExprPtr e, ExprPtr id);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_concat(FormulaPtr a, FormulaPtr b);
FormulaPtr f_chop(FormulaPtr a, FormulaPtr b);
FormulaPtr no_ev(std::string m);
MuDefPtr mu_def(std::string name, std::vector<std::string> params, FormulaPtr body);

/// mu X(). (noev(m) \/ noev(m) .. X()), printed as psi(m).
FormulaPtr psi(const std::string &m);
/// Phi1 ** psi(m) ** Phi2; an empty `m` excludes nothing.
FormulaPtr no_event_chop(FormulaPtr a, const std::string &m, FormulaPtr b);
bool is_psi(const FormulaPtr &f);

std::string to_string(const FormulaPtr &f);
bool equal(const FormulaPtr &a, const FormulaPtr &b);

/// Errors: "syntax", "unbound-recursion-variable", "arity".
FormulaPtr parse_formula(const std::string &text);

struct ContractDef {
  std::string name;
  std::vector<std::string> params;
  FormulaPtr body;
};

/// Parses `contract name(params) := Phi` bindings.
std::vector<ContractDef> parse_contract_file(const std::string &text);
std::string to_string(const ContractDef &c);

/// Capture-avoiding substitution of logical variables.
FormulaPtr substitute(const FormulaPtr &f, const Subst &s);
/// One-step unfolding of a MuApp node: body[args/params] with recursion
/// variable applications re-rolled into the definition.
FormulaPtr unfold(const FormulaPtr &mu_app_node);
/// Free logical variables (excluding mu parameters in scope).
void free_vars(const FormulaPtr &f, std::set<std::string> &out);
/// Flattens a left- or right-nested ** chain.
std::vector<FormulaPtr> chop_factors(const FormulaPtr &f);
FormulaPtr chop_all(const std::vector<FormulaPtr> &factors);
/// Disjuncts of a top-level \/ chain.
std::vector<FormulaPtr> disjuncts(const FormulaPtr &f);
FormulaPtr or_all(const std::vector<FormulaPtr> &ds);

using LogicalEnv = std::map<std::string, Int>;

/// Looks up beta first, then the state; res(e) reads res<k>. Throws
/// Error("unbound-symbol").
bool eval_pred(const State &s, const LogicalEnv &beta, const ExprPtr &p);
std::optional<bool> try_eval_pred(const State &s, const LogicalEnv &beta, const ExprPtr &p);

struct MemberStats {
  std::size_t memo_entries = 0;
  std::size_t calls = 0;
};

/// Finite-trace membership with least-fixed-point semantics for mu.
bool member(const Trace &t, const FormulaPtr &f, const LogicalEnv &beta,
            MemberStats *stats = nullptr);

/// For a failed membership: the path of top-level connectives that fail.
std::string explain_failure(const Trace &t, const FormulaPtr &f, const LogicalEnv &beta);

}  // namespace tracelet
