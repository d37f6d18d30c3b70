#include "tracelet/expr.hpp"

namespace tracelet {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

int precedence(const ExprPtr &e) {
  if (e->kind == ExprKind::Unary) return 6;
  if (e->kind != ExprKind::Binary) return 7;
  switch (e->op) {
  case Op::Or: return 1;
  case Op::And: return 2;
  case Op::Add:
  case Op::Sub: return 4;
  case Op::Mul: return 5;
  default: return 3;
  }
}

const char *op_text(Op op) {
  switch (op) {
  case Op::Add: return "+";
  case Op::Sub: return "-";
  case Op::Mul: return "*";
  case Op::Eq: return "==";
  case Op::Ne: return "!=";
  case Op::Lt: return "<";
  case Op::Le: return "<=";
  case Op::Gt: return ">";
  case Op::Ge: return ">=";
  case Op::And: return "&&";
  case Op::Or: return "||";
  case Op::Not: return "!";
  case Op::Neg: return "-";
  }
  return "?";
}

std::string wrap(const std::string &s, bool paren) { return paren ? "(" + s + ")" : s; }

}  // namespace

ExprPtr lit(const Int &v) {
  Expr e;
  e.kind = ExprKind::Int;
  e.value = v;
  return make(std::move(e));
}

ExprPtr boolean(bool v) {
  Expr e;
  e.kind = ExprKind::Bool;
  e.bval = v;
  return make(std::move(e));
}

ExprPtr var(const std::string &name) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = name;
  return make(std::move(e));
}

ExprPtr res(ExprPtr index) {
  Expr e;
  e.kind = ExprKind::Res;
  e.a = std::move(index);
  return make(std::move(e));
}

ExprPtr fresh(ExprPtr base) {
  Expr e;
  e.kind = ExprKind::Fresh;
  e.a = std::move(base);
  return make(std::move(e));
}

ExprPtr unary(Op op, ExprPtr x) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.op = op;
  e.a = std::move(x);
  return make(std::move(e));
}

ExprPtr binary(Op op, ExprPtr l, ExprPtr r) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = op;
  e.a = std::move(l);
  e.b = std::move(r);
  return make(std::move(e));
}

bool is_comparison(Op op) {
  return op == Op::Eq || op == Op::Ne || op == Op::Lt || op == Op::Le || op == Op::Gt ||
         op == Op::Ge;
}

bool is_logical(Op op) { return op == Op::And || op == Op::Or || op == Op::Not; }

bool is_bool_expr(const ExprPtr &e) {
  switch (e->kind) {
  case ExprKind::Bool: return true;
  case ExprKind::Unary: return e->op == Op::Not;
  case ExprKind::Binary: return is_comparison(e->op) || is_logical(e->op);
  default: return false;
  }
}

std::string int_to_string(const Int &v) { return v.str(); }

std::string res_name(const Int &id) { return "res" + id.str(); }

std::string to_string(const ExprPtr &e) {
  switch (e->kind) {
  case ExprKind::Int: return e->value.str();
  case ExprKind::Bool: return e->bval ? "true" : "false";
  case ExprKind::Var: return e->name;
  case ExprKind::Res: return "res(" + to_string(e->a) + ")";
  case ExprKind::Fresh: return "fresh(" + to_string(e->a) + ")";
  case ExprKind::Unary:
    if (e->op == Op::Neg) return "-(" + to_string(e->a) + ")";
    return std::string("!") + wrap(to_string(e->a), precedence(e->a) < 6);
  case ExprKind::Binary: {
    int p = precedence(e);
    bool cmp = p == 3;
    bool lp = cmp ? precedence(e->a) <= p : precedence(e->a) < p;
    bool rp = precedence(e->b) <= p;
    return wrap(to_string(e->a), lp) + " " + op_text(e->op) + " " + wrap(to_string(e->b), rp);
  }
  }
  return "?";
}

bool equal(const ExprPtr &a, const ExprPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return to_string(a) == to_string(b);
}

ExprPtr substitute(const ExprPtr &e, const Subst &s) {
  switch (e->kind) {
  case ExprKind::Var: {
    auto it = s.find(e->name);
    return it == s.end() ? e : it->second;
  }
  case ExprKind::Res: {
    auto a = substitute(e->a, s);
    return a == e->a ? e : res(a);
  }
  case ExprKind::Fresh: {
    auto a = substitute(e->a, s);
    return a == e->a ? e : fresh(a);
  }
  case ExprKind::Unary: {
    auto a = substitute(e->a, s);
    return a == e->a ? e : unary(e->op, a);
  }
  case ExprKind::Binary: {
    auto a = substitute(e->a, s);
    auto b = substitute(e->b, s);
    return (a == e->a && b == e->b) ? e : binary(e->op, a, b);
  }
  default: return e;
  }
}

ExprPtr substitute_res(const ExprPtr &e, const ExprPtr &index, const ExprPtr &with) {
  switch (e->kind) {
  case ExprKind::Res:
    if (equal(e->a, index)) return with;
    return e;
  case ExprKind::Fresh: return fresh(substitute_res(e->a, index, with));
  case ExprKind::Unary: return unary(e->op, substitute_res(e->a, index, with));
  case ExprKind::Binary:
    return binary(e->op, substitute_res(e->a, index, with), substitute_res(e->b, index, with));
  default: return e;
  }
}

void free_vars(const ExprPtr &e, std::set<std::string> &out) {
  switch (e->kind) {
  case ExprKind::Var: out.insert(e->name); break;
  case ExprKind::Res:
  case ExprKind::Fresh:
  case ExprKind::Unary: free_vars(e->a, out); break;
  case ExprKind::Binary:
    free_vars(e->a, out);
    free_vars(e->b, out);
    break;
  default: break;
  }
}

bool mentions_var(const ExprPtr &e, const std::string &name) {
  std::set<std::string> vs;
  free_vars(e, vs);
  return vs.count(name) > 0;
}

std::optional<Int> try_eval(const ExprPtr &e, const Lookup &lookup) {
  switch (e->kind) {
  case ExprKind::Int: return e->value;
  case ExprKind::Bool: return Int(e->bval ? 1 : 0);
  case ExprKind::Var: return lookup(e->name);
  case ExprKind::Res: {
    auto i = try_eval(e->a, lookup);
    if (!i) return std::nullopt;
    return lookup(res_name(*i));
  }
  case ExprKind::Fresh: return std::nullopt;
  case ExprKind::Unary: {
    auto a = try_eval(e->a, lookup);
    if (!a) return std::nullopt;
    if (e->op == Op::Neg) return Int(-*a);
    return Int(*a == 0 ? 1 : 0);
  }
  case ExprKind::Binary: {
    if (e->op == Op::And || e->op == Op::Or) {
      auto a = try_eval(e->a, lookup);
      if (!a) return std::nullopt;
      if (e->op == Op::And && *a == 0) return Int(0);
      if (e->op == Op::Or && *a != 0) return Int(1);
      auto b = try_eval(e->b, lookup);
      if (!b) return std::nullopt;
      return Int(*b != 0 ? 1 : 0);
    }
    auto a = try_eval(e->a, lookup);
    auto b = try_eval(e->b, lookup);
    if (!a || !b) return std::nullopt;
    switch (e->op) {
    case Op::Add: return Int(*a + *b);
    case Op::Sub: return Int(*a - *b);
    case Op::Mul: return Int(*a * *b);
    case Op::Eq: return Int(*a == *b ? 1 : 0);
    case Op::Ne: return Int(*a != *b ? 1 : 0);
    case Op::Lt: return Int(*a < *b ? 1 : 0);
    case Op::Le: return Int(*a <= *b ? 1 : 0);
    case Op::Gt: return Int(*a > *b ? 1 : 0);
    case Op::Ge: return Int(*a >= *b ? 1 : 0);
    default: return std::nullopt;
    }
  }
  }
  return std::nullopt;
}

namespace {

void first_undefined(const ExprPtr &e, const Lookup &lookup, std::string &out) {
  if (!out.empty()) return;
  switch (e->kind) {
  case ExprKind::Var:
    if (!lookup(e->name)) out = e->name;
    break;
  case ExprKind::Res: {
    first_undefined(e->a, lookup, out);
    if (out.empty()) {
      auto i = try_eval(e->a, lookup);
      if (i && !lookup(res_name(*i))) out = res_name(*i);
    }
    break;
  }
  case ExprKind::Fresh: out = to_string(e); break;
  case ExprKind::Unary: first_undefined(e->a, lookup, out); break;
  case ExprKind::Binary:
    first_undefined(e->a, lookup, out);
    first_undefined(e->b, lookup, out);
    break;
  default: break;
  }
}

}  // namespace

Int eval(const ExprPtr &e, const Lookup &lookup) {
  auto v = try_eval(e, lookup);
  if (v) return *v;
  std::string name;
  first_undefined(e, lookup, name);
  throw Error("undefined-variable", "undefined variable '" + name + "' in " + to_string(e));
}

}  // namespace tracelet
