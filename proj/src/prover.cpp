#include "tracelet/prover.hpp"

#include "tracelet/fo.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <sstream>

namespace tracelet {

bool is_closed(const ProofNode &n) {
  if (n.rule.empty()) return false;
  if (n.children.empty()) return is_closure_rule(n.rule);
  for (const auto &c : n.children)
    if (!is_closed(c)) return false;
  return true;
}

namespace {

template <typename Node, typename Out>
void collect_open(Node &n, Out &out) {
  if (n.rule.empty()) {
    out.push_back(&n);
    return;
  }
  for (auto &c : n.children) collect_open(c, out);
}

void count_rules(const ProofNode &n, std::map<std::string, int> &out) {
  if (!n.rule.empty()) ++out[n.rule];
  for (const auto &c : n.children) count_rules(c, out);
}

}  // namespace

std::vector<ProofNode *> open_goals(ProofNode &root) {
  std::vector<ProofNode *> out;
  collect_open(root, out);
  return out;
}

std::vector<const ProofNode *> open_goals(const ProofNode &root) {
  std::vector<const ProofNode *> out;
  collect_open(root, out);
  return out;
}

void expand(ProofNode &node, const std::string &rule, RuleArgs args, const ProofContext &ctx) {
  if (!node.rule.empty()) throw Error("bad-argument", "goal is already expanded");
  auto premises = apply_rule(rule, node.sequent, args, ctx);
  node.rule = rule;
  node.args = std::move(args);
  node.note.clear();
  node.children.clear();
  for (auto &p : premises) node.children.push_back(ProofNode{std::move(p), "", {}, {}, ""});
}

std::map<std::string, int> rule_multiset(const ProofNode &root) {
  std::map<std::string, int> out;
  count_rules(root, out);
  return out;
}

const ProofNode *find_rule(const ProofNode &root, const std::string &rule) {
  if (root.rule == rule) return &root;
  for (const auto &c : root.children)
    if (const ProofNode *r = find_rule(c, rule)) return r;
  return nullptr;
}

namespace {

using Candidate = std::pair<std::string, RuleArgs>;

void comparison_atoms(const ExprPtr &e, std::vector<ExprPtr> &out) {
  if (!e) return;
  if (e->kind == ExprKind::Binary && is_comparison(e->op)) {
    out.push_back(e);
    return;
  }
  if (e->kind == ExprKind::Binary || e->kind == ExprKind::Unary) {
    comparison_atoms(e->a, out);
    comparison_atoms(e->b, out);
  }
}

/// A single comparison equivalent to all facts, if one occurs among them.
std::optional<ExprPtr> simpler_gamma(const std::vector<ExprPtr> &facts) {
  if (facts.size() < 2) return std::nullopt;
  std::vector<ExprPtr> atoms;
  for (const auto &f : facts) comparison_atoms(f, atoms);
  ExprPtr all = facts.front();
  for (std::size_t k = 1; k < facts.size(); ++k) all = binary(Op::And, all, facts[k]);
  for (const auto &a : atoms)
    if (fo_equivalent({}, a, all)) return a;
  return std::nullopt;
}

std::vector<Candidate> judgment_candidates(const Sequent &s) {
  const Judgment &j = s.goal.judgment;
  std::vector<Candidate> out;
  if (!s.facts.empty() && fo_inconsistent(s.facts)) return {{"closeFO", {}}};
  if (j.stmt) {
    if (auto g = simpler_gamma(s.facts)) out.push_back({"simplifyGamma", {{"to", to_string(*g)}}});
    StmtPtr head = j.stmt->kind == StmtKind::Seq ? j.stmt->a : j.stmt;
    switch (head->kind) {
    case StmtKind::Skip: out.push_back({"Skip", {}}); break;
    case StmtKind::Assign:
    case StmtKind::CallAssign:
    case StmtKind::Update: out.push_back({"Assign", {}}); break;
    case StmtKind::Scope:
      out.push_back({head->decls.empty() ? "Scope" : "VarDecl", {}});
      break;
    case StmtKind::If: out.push_back({"Cond", {}}); break;
    case StmtKind::Return: out.push_back({"Return", {}}); break;
    case StmtKind::While:
      throw Error("unsupported-construct", "loops are not supported by the calculus");
    default: break;
    }
    return out;
  }
  const FormulaPtr &phi = j.phi;
  if (phi->kind == FKind::MuApp && !is_psi(phi)) out.push_back({"Unfold", {}});
  if (phi->kind == FKind::Or) {
    auto ds = disjuncts(phi);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      auto fs = chop_factors(ds[k]);
      if (fs.front()->kind == FKind::Pred && fo_valid(s.facts, fs.front()->pred)) {
        out.push_back({"selectDisjunct", {{"index", std::to_string(k)}}});
        break;
      }
    }
  }
  out.push_back({"closePsi", {}});
  out.push_back({"closeEvent", {}});
  out.push_back({"stateFormula", {}});
  std::optional<std::size_t> call;
  for (std::size_t k = 0; k < j.update.size() && !call; ++k)
    if (j.update[k].kind == AtomKind::Call) call = k;
  if (call) {
    for (std::size_t k = 0; k < *call; ++k)
      if (j.update[k].kind == AtomKind::Elem)
        out.push_back({"applyUpdate", {{"at", std::to_string(k)}}});
    for (std::size_t k = 0; k < *call; ++k)
      if (j.update[k].kind == AtomKind::Elem)
        out.push_back({"dropUpdate", {{"at", std::to_string(k)}}});
    out.push_back({"TrAbs", {{"at", std::to_string(*call)}}});
  }
  for (const char *r : {"Prestate", "elimUpdate1", "elimUpdate2", "subsumeUpdates1"})
    out.push_back({r, {}});
  return out;
}

std::vector<Candidate> candidates(const Sequent &s) {
  switch (s.goal.kind) {
  case GoalKind::Contract: return {{"ProcedureContract", {}}};
  case GoalKind::Pred: return {{"closeFO", {}}};
  default: return judgment_candidates(s);
  }
}

bool try_expand(ProofNode &node, const ProofContext &ctx) {
  std::string last;
  for (auto &[rule, args] : candidates(node.sequent)) {
    try {
      expand(node, rule, args, ctx);
      return true;
    } catch (const Error &e) {
      if (e.kind() == "unsupported-construct") throw;
      last = rule + ": " + e.what();
    }
  }
  node.note = last.empty() ? "no applicable rule" : "no applicable rule (last tried " + last + ")";
  return false;
}

}  // namespace

void auto_expand(ProofNode &node, const ProofContext &ctx, const AutoLimits &limits) {
  std::size_t steps = 0;
  std::vector<ProofNode *> work = open_goals(node);
  std::reverse(work.begin(), work.end());
  while (!work.empty()) {
    ProofNode *n = work.back();
    work.pop_back();
    if (steps++ >= limits.max_steps) {
      n->note = "step limit reached";
      continue;
    }
    if (!try_expand(*n, ctx)) continue;
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) work.push_back(&*it);
  }
}

ProofNode prove_auto(const Sequent &goal, const ProofContext &ctx, const AutoLimits &limits) {
  ProofNode root{goal, "", {}, {}, ""};
  auto_expand(root, ctx, limits);
  return root;
}

ScriptStep parse_script_line(const std::string &line, int line_no) {
  ScriptStep step;
  step.line = line_no;
  std::size_t p = 0;
  auto fail = [&](const std::string &msg) -> void {
    throw Error("syntax", "script line " + std::to_string(line_no) + ": " + msg);
  };
  auto skip_ws = [&] {
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
  };
  auto word = [&] {
    std::size_t b = p;
    while (p < line.size() && !std::isspace(static_cast<unsigned char>(line[p])) && line[p] != '@' &&
           line[p] != '=')
      ++p;
    return line.substr(b, p - b);
  };
  skip_ws();
  step.rule = word();
  if (step.rule.empty()) fail("expected a rule name");
  skip_ws();
  if (p < line.size() && line[p] == '@') {
    ++p;
    skip_ws();
    std::string idx = word();
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos)
      fail("expected a goal index after '@'");
    step.goal = std::stoul(idx);
  }
  for (skip_ws(); p < line.size(); skip_ws()) {
    std::string key = word();
    if (key.empty() || p >= line.size() || line[p] != '=') fail("expected key=value");
    ++p;
    std::string value;
    if (p < line.size() && line[p] == '"') {
      std::size_t close = line.find('"', p + 1);
      if (close == std::string::npos) fail("unterminated quote");
      value = line.substr(p + 1, close - p - 1);
      p = close + 1;
    } else {
      std::size_t b = p;
      while (p < line.size() && !std::isspace(static_cast<unsigned char>(line[p]))) ++p;
      value = line.substr(b, p - b);
    }
    step.args[key] = value;
  }
  return step;
}

std::vector<ScriptStep> parse_script(const std::string &text) {
  std::vector<ScriptStep> out;
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_script_line(line, n));
  }
  return out;
}

void apply_step(ProofNode &root, const ScriptStep &step, const ProofContext &ctx,
                const AutoLimits &limits) {
  auto goals = open_goals(root);
  if (step.goal >= goals.size())
    throw Error("bad-argument", "no open goal " + std::to_string(step.goal) + " (" +
                                    std::to_string(goals.size()) + " open)");
  if (step.rule == "auto") {
    auto_expand(*goals[step.goal], ctx, limits);
    return;
  }
  expand(*goals[step.goal], step.rule, step.args, ctx);
}

}  // namespace tracelet
