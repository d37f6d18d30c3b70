#pragma once

#include "tracelet/expr.hpp"

#include <map>
#include <string>
#include <vector>

namespace tracelet {

enum class FoVerdict { Valid, Invalid, Unknown };

std::string to_string(FoVerdict v);

/// Outcome of a first-order validity check. For `Invalid`, `model` assigns
/// integers to the symbols (variables and res(...) terms, keyed by their
/// printed form) of a counterexample.
struct FoResult {
  FoVerdict verdict = FoVerdict::Unknown;
  std::map<std::string, Int> model;
  std::string reason;
};

/// Decides validity of /\gamma -> goal over linear integer arithmetic.
/// res(...) terms are uninterpreted integer symbols. Products of two
/// non-constant terms and fresh(...) are abstracted; a counterexample that
/// depends on such an abstraction yields `Unknown`.
FoResult fo_check(const std::vector<ExprPtr> &gamma, const ExprPtr &goal);
bool fo_valid(const std::vector<ExprPtr> &gamma, const ExprPtr &goal);
/// Under gamma: boolean expressions are equivalent, integer terms equal.
bool fo_equivalent(const std::vector<ExprPtr> &gamma, const ExprPtr &a, const ExprPtr &b);
/// True when gamma is unsatisfiable.
bool fo_inconsistent(const std::vector<ExprPtr> &gamma);

}  // namespace tracelet
