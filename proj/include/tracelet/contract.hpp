#pragma once

#include "tracelet/formula.hpp"

namespace tracelet {

/// Instantiation data for the recursive contract template over parameter `n`
/// and call id `i`.
struct ContractSpec {
  std::string proc;
  ExprPtr pre_base;
  ExprPtr pre_step;
  ExprPtr f;
  ExprPtr step_inv;
};

/// The template as a self-applied fixed point X(n, i). When pre_base is an
/// equation n == c the base disjunct is instantiated with c.
FormulaPtr make_contract(const ContractSpec &spec);
ContractDef contract_def(const ContractSpec &spec);
/// [pre_base || pre_step] ** psi() ** [res(i) == f].
FormulaPtr big_step_of(const ContractSpec &spec);

/// A contract in assumption form: forall n, i. pre(n) -> proc(n) : phi(n, i).
struct ContractAssumption {
  std::string proc;
  std::string n = "n";
  std::string i = "i";
  ExprPtr pre;
  FormulaPtr phi;
  ExprPtr f;
};

/// Extracts pre (disjunction of the disjunct head predicates) and f (from the
/// trailing [res(i) == f]). Throws Error("contract-shape").
ContractAssumption assumption_of(const ContractDef &def);
/// phi with n, i replaced by the given terms.
FormulaPtr instantiate(const ContractAssumption &c, const ExprPtr &n, const ExprPtr &i);
ExprPtr pre_at(const ContractAssumption &c, const ExprPtr &n);
ExprPtr f_at(const ContractAssumption &c, const ExprPtr &n);

std::vector<ContractAssumption> read_contracts(const std::string &text);

}  // namespace tracelet
