#include "tracelet/sequent.hpp"

namespace tracelet {

Goal judgment_goal(Judgment j) {
  Goal g;
  g.kind = GoalKind::Judgment;
  g.judgment = std::move(j);
  return g;
}

Goal pred_goal(ExprPtr p) {
  Goal g;
  g.kind = GoalKind::Pred;
  g.pred = std::move(p);
  return g;
}

Goal contract_goal(std::string proc) {
  Goal g;
  g.kind = GoalKind::Contract;
  g.contract = std::move(proc);
  return g;
}

std::string to_string(const Goal &g) {
  switch (g.kind) {
  case GoalKind::Judgment: return to_string(g.judgment);
  case GoalKind::Pred: return to_string(g.pred);
  default: return "C(" + g.contract + ")";
  }
}

std::string to_string(const Sequent &s) {
  std::string out;
  for (const auto &f : s.facts) out += (out.empty() ? "" : ", ") + to_string(f);
  for (const auto &c : s.contracts) out += std::string(out.empty() ? "" : ", ") + "C(" + c + ")";
  return out + (out.empty() ? "|- " : " |- ") + to_string(s.goal);
}

namespace {

void stmt_names(const StmtPtr &s, std::set<std::string> &out) {
  if (!s) return;
  free_vars(s, out);
  out.insert(s->decls.begin(), s->decls.end());
  stmt_names(s->a, out);
  stmt_names(s->b, out);
}

void atom_names(const UpdateAtom &a, std::set<std::string> &out) {
  for (const ExprPtr &e : {a.lhs, a.e, a.id})
    if (e) free_vars(e, out);
}

}  // namespace

std::set<std::string> symbols(const Sequent &s) {
  std::set<std::string> out;
  for (const auto &f : s.facts) free_vars(f, out);
  switch (s.goal.kind) {
  case GoalKind::Pred: free_vars(s.goal.pred, out); break;
  case GoalKind::Judgment:
    for (const auto &a : s.goal.judgment.update) atom_names(a, out);
    stmt_names(s.goal.judgment.stmt, out);
    free_vars(s.goal.judgment.phi, out);
    break;
  default: break;
  }
  return out;
}

std::string fresh_name(const std::string &base, const std::set<std::string> &used) {
  std::string root = base;
  while (!root.empty() && root.back() == '\'') root.pop_back();
  std::string name = root + "'";
  while (used.count(name)) name += "'";
  return name;
}

}  // namespace tracelet
