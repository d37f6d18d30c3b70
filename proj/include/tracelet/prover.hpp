#pragma once

#include "tracelet/rules.hpp"

#include <map>
#include <string>
#include <vector>

namespace tracelet {

/// A proof tree node. An empty `rule` marks an open goal; `note` says why
/// the automatic strategy stopped there.
struct ProofNode {
  Sequent sequent;
  std::string rule;
  RuleArgs args;
  std::vector<ProofNode> children;
  std::string note;
};

/// Closed iff every leaf is an axiom closure.
bool is_closed(const ProofNode &n);
/// Open leaves in depth-first, left-to-right order.
std::vector<ProofNode *> open_goals(ProofNode &root);
std::vector<const ProofNode *> open_goals(const ProofNode &root);
/// Applies `rule` to an open node and attaches the premises as children.
void expand(ProofNode &node, const std::string &rule, RuleArgs args, const ProofContext &ctx);

std::map<std::string, int> rule_multiset(const ProofNode &root);
/// Depth-first search for the first node with the given rule.
const ProofNode *find_rule(const ProofNode &root, const std::string &rule);

struct AutoLimits {
  std::size_t max_steps = 20000;
};

/// Runs the strategy on every open goal below `node`. Throws
/// Error("unsupported-construct") on loops.
void auto_expand(ProofNode &node, const ProofContext &ctx, const AutoLimits &limits = {});
ProofNode prove_auto(const Sequent &goal, const ProofContext &ctx, const AutoLimits &limits = {});

struct ScriptStep {
  std::string rule;
  std::size_t goal = 0;
  RuleArgs args;
  int line = 0;
};

/// `rule @ goal-index key=value ...` lines; `#` starts a comment; values may
/// be double-quoted. The pseudo rule `auto` runs the strategy on the goal.
std::vector<ScriptStep> parse_script(const std::string &text);
ScriptStep parse_script_line(const std::string &line, int line_no = 0);
/// Applies one step to the indexed open goal.
void apply_step(ProofNode &root, const ScriptStep &step, const ProofContext &ctx,
                const AutoLimits &limits = {});

}  // namespace tracelet
