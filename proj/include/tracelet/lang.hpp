#pragma once

#include "tracelet/expr.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tracelet {

enum class AtomKind { Elem, Call, Start, Finish };

/// One update atom: {lhs := e}, {lhs := proc(e)}, {startEv(proc, e, id)} or
/// {finishEv(proc, e, id)}. `lhs` is a Var or a Res expression.
struct UpdateAtom {
  AtomKind kind = AtomKind::Elem;
  ExprPtr lhs;
  std::string proc;
  ExprPtr e;
  ExprPtr id;
};

UpdateAtom elem_atom(ExprPtr lhs, ExprPtr e);
UpdateAtom call_atom(ExprPtr lhs, std::string proc, ExprPtr e);
UpdateAtom start_atom(std::string proc, ExprPtr e, ExprPtr id);
UpdateAtom finish_atom(std::string proc, ExprPtr e, ExprPtr id);
std::string to_string(const UpdateAtom &a);
bool targets_res(const UpdateAtom &a);

enum class StmtKind { Skip, Assign, CallAssign, If, Seq, While, Scope, Return, Update };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// Statement AST. Sequences are right-associated: Seq(a, b) never has a Seq as `a`.
/// `Update` wraps a single update atom so that an update-prefixed statement is
/// an ordinary sequence.
struct Stmt {
  StmtKind kind = StmtKind::Skip;
  ExprPtr lhs;
  std::string proc;
  ExprPtr e;
  StmtPtr a;
  StmtPtr b;
  std::vector<std::string> decls;
  UpdateAtom atom;
  SourcePos pos;
};

StmtPtr skip_stmt();
StmtPtr assign_stmt(ExprPtr lhs, ExprPtr e);
StmtPtr call_stmt(ExprPtr lhs, std::string proc, ExprPtr arg);
StmtPtr if_stmt(ExprPtr cond, StmtPtr body);
StmtPtr while_stmt(ExprPtr cond, StmtPtr body);
StmtPtr scope_stmt(std::vector<std::string> decls, StmtPtr body);
StmtPtr return_stmt(ExprPtr e);
StmtPtr update_stmt(UpdateAtom atom);
/// Right-associating sequence; a null side yields the other side.
StmtPtr seq(StmtPtr a, StmtPtr b);
/// Prefixes `s` with the given atoms, outermost first.
StmtPtr prefix_updates(const std::vector<UpdateAtom> &atoms, StmtPtr s);
StmtPtr with_pos(StmtPtr s, SourcePos pos);

std::string to_string(const StmtPtr &s);

/// Substitutes free program variables in expressions and assignment targets.
/// Declarations shadow: a scope declaring x stops substitution of x.
StmtPtr substitute(const StmtPtr &s, const Subst &sub);
/// Variables read or written in s, excluding those bound by inner scopes.
void free_vars(const StmtPtr &s, std::set<std::string> &out);
bool contains_kind(const StmtPtr &s, StmtKind kind);

struct ProcDecl {
  std::string name;
  std::string param;
  StmtPtr body;
  SourcePos pos;
};

struct Program {
  std::vector<ProcDecl> procs;
  std::vector<std::string> main_decls;
  StmtPtr main_body;
};

using LookupTable = std::map<std::string, ProcDecl>;

struct ParseOptions {
  bool check = true;
};

/// Errors: "syntax" (message carries line:col), "duplicate-procedure",
/// "return-position".
Program parse_program(const std::string &text, const ParseOptions &opts = {});
/// Statement with optional leading update atoms, as used inside judgments.
StmtPtr parse_stmt(const std::string &text);
ExprPtr parse_expr(const std::string &text);
std::string to_string(const Program &p);

struct Diagnostic {
  std::string kind;
  std::string message;
  SourcePos pos;
};

std::vector<Diagnostic> well_formed(const Program &p);

LookupTable lookup_table(const Program &p);
/// Throws Error("unknown-procedure").
const ProcDecl &lookup(const std::string &m, const LookupTable &g);

}  // namespace tracelet
