#pragma once

#include "tracelet/contract.hpp"
#include "tracelet/update.hpp"

#include <set>
#include <string>
#include <vector>

namespace tracelet {

enum class GoalKind { Judgment, Pred, Contract };

struct Goal {
  GoalKind kind = GoalKind::Pred;
  Judgment judgment;
  ExprPtr pred;
  std::string contract;
};

Goal judgment_goal(Judgment j);
Goal pred_goal(ExprPtr p);
Goal contract_goal(std::string proc);

/// Gamma |- goal. Gamma holds first-order facts and contract assumptions,
/// the latter referenced by procedure name and printed as C(m).
struct Sequent {
  std::vector<ExprPtr> facts;
  std::vector<std::string> contracts;
  Goal goal;
};

std::string to_string(const Goal &g);
std::string to_string(const Sequent &s);
/// Inverse of to_string(Sequent). Throws Error("syntax").
Sequent parse_sequent(const std::string &text);

/// Every symbol occurring in the sequent (facts, update, statement, formula).
std::set<std::string> symbols(const Sequent &s);
/// base', base'', ... the first not in `used`; `base` is stripped of primes first.
std::string fresh_name(const std::string &base, const std::set<std::string> &used);

}  // namespace tracelet
