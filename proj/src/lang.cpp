#include "tracelet/lang.hpp"

#include <algorithm>
#include <functional>

namespace tracelet {

namespace {

StmtPtr make(Stmt s) { return std::make_shared<const Stmt>(std::move(s)); }

std::string indent_block(const StmtPtr &body) {
  if (body->kind == StmtKind::Scope && !body->decls.empty()) return to_string(body);
  return "{ " + to_string(body) + " }";
}

}  // namespace

UpdateAtom elem_atom(ExprPtr lhs, ExprPtr e) {
  UpdateAtom a;
  a.kind = AtomKind::Elem;
  a.lhs = std::move(lhs);
  a.e = std::move(e);
  return a;
}

UpdateAtom call_atom(ExprPtr lhs, std::string proc, ExprPtr e) {
  UpdateAtom a;
  a.kind = AtomKind::Call;
  a.lhs = std::move(lhs);
  a.proc = std::move(proc);
  a.e = std::move(e);
  return a;
}

UpdateAtom start_atom(std::string proc, ExprPtr e, ExprPtr id) {
  UpdateAtom a;
  a.kind = AtomKind::Start;
  a.proc = std::move(proc);
  a.e = std::move(e);
  a.id = std::move(id);
  return a;
}

UpdateAtom finish_atom(std::string proc, ExprPtr e, ExprPtr id) {
  UpdateAtom a;
  a.kind = AtomKind::Finish;
  a.proc = std::move(proc);
  a.e = std::move(e);
  a.id = std::move(id);
  return a;
}

std::string to_string(const UpdateAtom &a) {
  switch (a.kind) {
  case AtomKind::Elem: return "{" + to_string(a.lhs) + " := " + to_string(a.e) + "}";
  case AtomKind::Call:
    return "{" + to_string(a.lhs) + " := " + a.proc + "(" + to_string(a.e) + ")}";
  case AtomKind::Start:
    return "{startEv(" + a.proc + ", " + to_string(a.e) + ", " + to_string(a.id) + ")}";
  case AtomKind::Finish:
    return "{finishEv(" + a.proc + ", " + to_string(a.e) + ", " + to_string(a.id) + ")}";
  }
  return "{?}";
}

bool targets_res(const UpdateAtom &a) {
  return (a.kind == AtomKind::Elem || a.kind == AtomKind::Call) && a.lhs->kind == ExprKind::Res;
}

StmtPtr skip_stmt() { return make(Stmt{}); }

StmtPtr assign_stmt(ExprPtr lhs, ExprPtr e) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.lhs = std::move(lhs);
  s.e = std::move(e);
  return make(std::move(s));
}

StmtPtr call_stmt(ExprPtr lhs, std::string proc, ExprPtr arg) {
  Stmt s;
  s.kind = StmtKind::CallAssign;
  s.lhs = std::move(lhs);
  s.proc = std::move(proc);
  s.e = std::move(arg);
  return make(std::move(s));
}

StmtPtr if_stmt(ExprPtr cond, StmtPtr body) {
  Stmt s;
  s.kind = StmtKind::If;
  s.e = std::move(cond);
  s.a = std::move(body);
  return make(std::move(s));
}

StmtPtr while_stmt(ExprPtr cond, StmtPtr body) {
  Stmt s;
  s.kind = StmtKind::While;
  s.e = std::move(cond);
  s.a = std::move(body);
  return make(std::move(s));
}

StmtPtr scope_stmt(std::vector<std::string> decls, StmtPtr body) {
  Stmt s;
  s.kind = StmtKind::Scope;
  s.decls = std::move(decls);
  s.a = std::move(body);
  return make(std::move(s));
}

StmtPtr return_stmt(ExprPtr e) {
  Stmt s;
  s.kind = StmtKind::Return;
  s.e = std::move(e);
  return make(std::move(s));
}

StmtPtr update_stmt(UpdateAtom atom) {
  Stmt s;
  s.kind = StmtKind::Update;
  s.atom = std::move(atom);
  return make(std::move(s));
}

StmtPtr seq(StmtPtr a, StmtPtr b) {
  if (!a) return b;
  if (!b) return a;
  if (a->kind == StmtKind::Seq) return seq(a->a, seq(a->b, b));
  Stmt s;
  s.kind = StmtKind::Seq;
  s.pos = a->pos;
  s.a = std::move(a);
  s.b = std::move(b);
  return make(std::move(s));
}

StmtPtr prefix_updates(const std::vector<UpdateAtom> &atoms, StmtPtr s) {
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) s = seq(update_stmt(*it), s);
  return s;
}

StmtPtr with_pos(StmtPtr s, SourcePos pos) {
  Stmt copy = *s;
  copy.pos = pos;
  return make(std::move(copy));
}

std::string to_string(const StmtPtr &s) {
  switch (s->kind) {
  case StmtKind::Skip: return "skip";
  case StmtKind::Assign: return to_string(s->lhs) + " = " + to_string(s->e);
  case StmtKind::CallAssign:
    return to_string(s->lhs) + " = " + s->proc + "(" + to_string(s->e) + ")";
  case StmtKind::If: return "if (" + to_string(s->e) + ") " + indent_block(s->a);
  case StmtKind::While: return "while (" + to_string(s->e) + ") " + indent_block(s->a);
  case StmtKind::Seq:
    if (s->a->kind == StmtKind::Update) return to_string(s->a) + " " + to_string(s->b);
    return to_string(s->a) + "; " + to_string(s->b);
  case StmtKind::Scope: {
    std::string out = "{ ";
    for (const auto &d : s->decls) out += d + "; ";
    return out + to_string(s->a) + " }";
  }
  case StmtKind::Return: return "return " + to_string(s->e);
  case StmtKind::Update: return to_string(s->atom);
  }
  return "?";
}

namespace {

ExprPtr subst_lhs(const ExprPtr &lhs, const Subst &sub) {
  if (lhs->kind == ExprKind::Var) {
    auto it = sub.find(lhs->name);
    if (it != sub.end() && it->second->kind == ExprKind::Var) return it->second;
    return lhs;
  }
  return substitute(lhs, sub);
}

UpdateAtom subst_atom(const UpdateAtom &a, const Subst &sub) {
  UpdateAtom out = a;
  if (out.lhs) out.lhs = subst_lhs(out.lhs, sub);
  if (out.e) out.e = substitute(out.e, sub);
  if (out.id) out.id = substitute(out.id, sub);
  return out;
}

}  // namespace

StmtPtr substitute(const StmtPtr &s, const Subst &sub) {
  if (sub.empty()) return s;
  Stmt out = *s;
  switch (s->kind) {
  case StmtKind::Skip: return s;
  case StmtKind::Assign:
  case StmtKind::CallAssign:
    out.lhs = subst_lhs(s->lhs, sub);
    out.e = substitute(s->e, sub);
    break;
  case StmtKind::If:
  case StmtKind::While:
    out.e = substitute(s->e, sub);
    out.a = substitute(s->a, sub);
    break;
  case StmtKind::Seq:
    out.a = substitute(s->a, sub);
    out.b = substitute(s->b, sub);
    break;
  case StmtKind::Scope: {
    Subst inner = sub;
    for (const auto &d : s->decls) inner.erase(d);
    out.a = substitute(s->a, inner);
    break;
  }
  case StmtKind::Return: out.e = substitute(s->e, sub); break;
  case StmtKind::Update: out.atom = subst_atom(s->atom, sub); break;
  }
  return make(std::move(out));
}

void free_vars(const StmtPtr &s, std::set<std::string> &out) {
  switch (s->kind) {
  case StmtKind::Skip: break;
  case StmtKind::Assign:
  case StmtKind::CallAssign:
    free_vars(s->lhs, out);
    free_vars(s->e, out);
    break;
  case StmtKind::If:
  case StmtKind::While:
    free_vars(s->e, out);
    free_vars(s->a, out);
    break;
  case StmtKind::Seq:
    free_vars(s->a, out);
    free_vars(s->b, out);
    break;
  case StmtKind::Scope: {
    std::set<std::string> inner;
    free_vars(s->a, inner);
    for (const auto &d : s->decls) inner.erase(d);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case StmtKind::Return: free_vars(s->e, out); break;
  case StmtKind::Update:
    if (s->atom.lhs) free_vars(s->atom.lhs, out);
    if (s->atom.e) free_vars(s->atom.e, out);
    if (s->atom.id) free_vars(s->atom.id, out);
    break;
  }
}

bool contains_kind(const StmtPtr &s, StmtKind kind) {
  if (!s) return false;
  if (s->kind == kind) return true;
  return contains_kind(s->a, kind) || contains_kind(s->b, kind);
}

std::string to_string(const Program &p) {
  std::string out;
  for (const auto &proc : p.procs)
    out += proc.name + "(" + proc.param + ") " + to_string(proc.body) + "\n";
  out += "main { ";
  for (const auto &d : p.main_decls) out += d + "; ";
  out += to_string(p.main_body) + " }\n";
  return out;
}

LookupTable lookup_table(const Program &p) {
  LookupTable g;
  for (const auto &proc : p.procs) g.emplace(proc.name, proc);
  return g;
}

const ProcDecl &lookup(const std::string &m, const LookupTable &g) {
  auto it = g.find(m);
  if (it == g.end()) throw Error("unknown-procedure", "unknown procedure '" + m + "'");
  return it->second;
}

namespace {

enum class Ty { Int, Bool, Bad };

class Checker {
public:
  Checker(const Program &p, std::vector<Diagnostic> &out) : prog_(p), out_(out) {
    for (const auto &proc : p.procs) procs_.insert(proc.name);
  }

  void run() {
    std::set<std::string> seen;
    for (const auto &proc : prog_.procs) {
      if (!seen.insert(proc.name).second)
        report("duplicate-procedure", "procedure '" + proc.name + "' declared twice", proc.pos);
      check_proc(proc);
    }
    std::set<std::string> env(prog_.main_decls.begin(), prog_.main_decls.end());
    in_proc_ = false;
    stmt(prog_.main_body, env, false);
  }

private:
  void report(const std::string &kind, const std::string &msg, SourcePos pos) {
    out_.push_back({kind, msg, pos});
  }

  void check_proc(const ProcDecl &proc) {
    in_proc_ = true;
    param_ = proc.param;
    if (proc.body->kind != StmtKind::Scope) {
      report("return-position", "body of '" + proc.name + "' is not a block", proc.pos);
      return;
    }
    StmtPtr tail = proc.body->a;
    while (tail->kind == StmtKind::Seq) tail = tail->b;
    if (tail->kind != StmtKind::Return)
      report("return-position", "procedure '" + proc.name + "' must end with return", proc.pos);
    std::set<std::string> env{proc.param};
    env.insert(proc.body->decls.begin(), proc.body->decls.end());
    stmt(proc.body->a, env, true);
  }

  Ty expr(const ExprPtr &e, const std::set<std::string> &env, SourcePos pos) {
    switch (e->kind) {
    case ExprKind::Int: return Ty::Int;
    case ExprKind::Bool: return Ty::Bool;
    case ExprKind::Var:
      if (!env.count(e->name)) undeclared(e->name, pos);
      return Ty::Int;
    case ExprKind::Res:
      expect(expr(e->a, env, pos), Ty::Int, e, pos);
      return Ty::Int;
    case ExprKind::Fresh:
      report("type", "fresh() is not a program expression", pos);
      return Ty::Bad;
    case ExprKind::Unary: {
      Ty want = e->op == Op::Not ? Ty::Bool : Ty::Int;
      expect(expr(e->a, env, pos), want, e, pos);
      return want;
    }
    case ExprKind::Binary: {
      Ty operand = (e->op == Op::And || e->op == Op::Or) ? Ty::Bool : Ty::Int;
      expect(expr(e->a, env, pos), operand, e, pos);
      expect(expr(e->b, env, pos), operand, e, pos);
      return (is_comparison(e->op) || is_logical(e->op)) ? Ty::Bool : Ty::Int;
    }
    }
    return Ty::Bad;
  }

  void expect(Ty got, Ty want, const ExprPtr &e, SourcePos pos) {
    if (got != Ty::Bad && got != want)
      report("type", "ill-typed operand in '" + to_string(e) + "'", pos);
  }

  void undeclared(const std::string &name, SourcePos pos) {
    bool main_var = in_proc_ && std::find(prog_.main_decls.begin(), prog_.main_decls.end(),
                                          name) != prog_.main_decls.end();
    if (main_var)
      report("side-effect", "procedure accesses main variable '" + name + "'", pos);
    else
      report("undeclared-variable", "variable '" + name + "' is not declared", pos);
  }

  void target(const ExprPtr &lhs, const std::set<std::string> &env, SourcePos pos) {
    if (lhs->kind == ExprKind::Res) {
      report("res-write", "programs may not assign res(" + to_string(lhs->a) + ")", pos);
      return;
    }
    if (in_proc_ && lhs->name == param_) {
      report("param-assignment", "assignment to parameter '" + param_ + "'", pos);
      return;
    }
    if (!env.count(lhs->name)) undeclared(lhs->name, pos);
  }

  void stmt(const StmtPtr &s, const std::set<std::string> &env, bool tail_ok) {
    switch (s->kind) {
    case StmtKind::Skip: break;
    case StmtKind::Assign:
      target(s->lhs, env, s->pos);
      expect(expr(s->e, env, s->pos), Ty::Int, s->e, s->pos);
      break;
    case StmtKind::CallAssign:
      target(s->lhs, env, s->pos);
      if (!procs_.count(s->proc))
        report("unknown-procedure", "call to unknown procedure '" + s->proc + "'", s->pos);
      expect(expr(s->e, env, s->pos), Ty::Int, s->e, s->pos);
      break;
    case StmtKind::If:
    case StmtKind::While:
      expect(expr(s->e, env, s->pos), Ty::Bool, s->e, s->pos);
      stmt(s->a, env, false);
      break;
    case StmtKind::Seq:
      stmt(s->a, env, false);
      stmt(s->b, env, tail_ok);
      break;
    case StmtKind::Scope: {
      auto inner = env;
      inner.insert(s->decls.begin(), s->decls.end());
      stmt(s->a, inner, false);
      break;
    }
    case StmtKind::Return:
      if (!tail_ok) report("return-position", "return not in tail position", s->pos);
      expect(expr(s->e, env, s->pos), Ty::Int, s->e, s->pos);
      break;
    case StmtKind::Update:
      report("internal-construct", "update atoms are not program statements", s->pos);
      break;
    }
  }

  const Program &prog_;
  std::vector<Diagnostic> &out_;
  std::set<std::string> procs_;
  bool in_proc_ = false;
  std::string param_;
};

}  // namespace

std::vector<Diagnostic> well_formed(const Program &p) {
  std::vector<Diagnostic> out;
  Checker(p, out).run();
  return out;
}

}  // namespace tracelet
