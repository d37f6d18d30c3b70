#pragma once

#include "tracelet/formula.hpp"
#include "tracelet/lang.hpp"
#include "tracelet/trace.hpp"

#include <vector>

namespace tracelet {

/// Sequence of update atoms, outermost (leftmost) first; empty is the identity.
using Update = std::vector<UpdateAtom>;

std::string to_string(const Update &u);
/// Parses `eps` or a sequence of `{...}` atoms.
Update parse_update(const std::string &text);

/// Applies the atoms from inner- to outermost; elementary atoms substitute
/// (res targets replace matching res(...) terms), others are the identity.
ExprPtr apply_update_expr(const Update &u, const ExprPtr &e);
/// Applies only the first `count` atoms.
ExprPtr apply_update_prefix(const Update &u, std::size_t count, const ExprPtr &e);

/// Innermost startEv not closed by its finishEv. Throws Error("malformed-nesting").
Context curr_ctx_update(const Update &u, const LogicalEnv &beta = {});

/// Symbolic context: procedure and id term of the innermost open startEv.
struct SymContext {
  std::string proc = "main";
  ExprPtr id;
  bool is_main() const { return !id; }
};
SymContext curr_ctx_symbolic(const Update &u);

/// U s : Phi, with `stmt` null for the empty program.
struct Judgment {
  Update update;
  StmtPtr stmt;
  FormulaPtr phi;
};

std::string to_string(const Judgment &j);
/// `{atoms} stmt : Phi`; leading update atoms of the statement join the update.
Judgment parse_judgment(const std::string &text);

/// Runs U s from <s0>; new call ids exceed every value in s0. Throws
/// Error("fuel-exhausted").
Trace run_judgment_program(const Update &u, const StmtPtr &s, const State &s0,
                           const LookupTable &g, std::uint64_t fuel);

}  // namespace tracelet
