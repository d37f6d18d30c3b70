#pragma once

#include "tracelet/contract.hpp"
#include "tracelet/lang.hpp"
#include "tracelet/sequent.hpp"

#include <map>
#include <string>
#include <vector>

namespace tracelet {

/// Fixed data every rule application may consult.
struct ProofContext {
  LookupTable procs;
  std::vector<ContractAssumption> contracts;
  bool extensions = false;

  const ContractAssumption *contract(const std::string &proc) const;
};

using RuleArgs = std::map<std::string, std::string>;

/// All rule names; `extensions` adds the gated ones.
std::vector<std::string> rule_names(bool extensions);
/// Rules with no premises (axiom closures).
bool is_closure_rule(const std::string &rule);

/// Premises of `rule` applied to `s`. Errors: "unknown-rule", "no-match",
/// "side-condition-failed", "bad-argument", "unsupported-construct".
/// Arguments a rule would otherwise choose are filled into `args`.
std::vector<Sequent> apply_rule(const std::string &rule, const Sequent &s, RuleArgs &args,
                                const ProofContext &ctx);
std::vector<Sequent> apply_rule(const std::string &rule, const Sequent &s, const RuleArgs &args,
                                const ProofContext &ctx);

/// {startEv(m, e, i)} p' = e; body[p'/p], with p' named `param`.
Judgment inline_call(const ProcDecl &proc, const ExprPtr &e, const ExprPtr &id,
                     const std::string &param, FormulaPtr phi);

}  // namespace tracelet
