#include "tracelet/contract.hpp"
#include "tracelet/lang.hpp"
#include "tracelet/sequent.hpp"
#include "tracelet/update.hpp"

#include <cctype>

namespace tracelet {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

const char *kPuncts[] = {"/\\", "\\/", "**", "..", ":=", "==", "!=", "<=", ">=", "&&", "||",
                         "~~", "|-", "(",  ")",  "{",  "}",  "[",  "]",  ",",  ";",  ".",
                         "*",  "+",  "-",  "<",  ">",  "!",  "=",  ":",  "~",  "@"};

std::vector<Token> lex(const std::string &src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '#'))
        ++j;
      while (j < src.size() && src[j] == '\'') ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    bool found = false;
    for (const char *p : kPuncts) {
      std::size_t n = std::char_traits<char>::length(p);
      if (src.compare(i, n, p) == 0) {
        t.kind = Tok::Punct;
        t.text = p;
        advance(n);
        out.push_back(t);
        found = true;
        break;
      }
    }
    if (!found)
      throw Error("syntax", std::to_string(line) + ":" + std::to_string(col) +
                                ": unexpected character '" + std::string(1, c) + "'");
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

class Parser {
public:
  explicit Parser(const std::string &src) : toks_(lex(src)) {}

  bool allow_updates = true;

  [[noreturn]] void fail(const std::string &msg, const Token &t) {
    throw Error("syntax", std::to_string(t.pos.line) + ":" + std::to_string(t.pos.col) + ": " +
                              msg + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"));
  }

  const Token &peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(const std::string &text, std::size_t k = 0) const {
    const Token &t = peek(k);
    return t.kind != Tok::End && t.kind != Tok::Int && t.text == text;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  void expect(const std::string &text) {
    if (!at(text)) fail("expected '" + text + "'", peek());
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier", peek());
    return next().text;
  }
  bool ahead(const std::string &text) const {
    for (std::size_t k = pos_; k < toks_.size(); ++k)
      if (toks_[k].kind == Tok::Punct && toks_[k].text == text) return true;
    return false;
  }
  bool at_contract_ref() const {
    return at("C") && at("(", 1) && peek(2).kind == Tok::Ident && at(")", 3);
  }
  std::string contract_ref() {
    next();
    next();
    std::string m = next().text;
    next();
    return m;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input", peek());
  }

  // Expressions.
  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (at("||")) {
      next();
      e = binary(Op::Or, e, and_expr());
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = cmp_expr();
    while (at("&&")) {
      next();
      e = binary(Op::And, e, cmp_expr());
    }
    return e;
  }

  ExprPtr cmp_expr() {
    ExprPtr e = add_expr();
    static const std::pair<const char *, Op> ops[] = {{"==", Op::Eq}, {"!=", Op::Ne},
                                                      {"<=", Op::Le}, {">=", Op::Ge},
                                                      {"<", Op::Lt},  {">", Op::Gt}};
    for (const auto &[text, op] : ops) {
      if (at(text)) {
        next();
        e = binary(op, e, add_expr());
        for (const auto &[t2, op2] : ops)
          if (at(t2)) fail("comparisons are not associative", peek());
        return e;
      }
    }
    return e;
  }

  ExprPtr add_expr() {
    ExprPtr e = mul_expr();
    while (at("+") || at("-")) {
      Op op = next().text == "+" ? Op::Add : Op::Sub;
      e = binary(op, e, mul_expr());
    }
    return e;
  }

  ExprPtr mul_expr() {
    ExprPtr e = unary_expr();
    while (at("*")) {
      next();
      e = binary(Op::Mul, e, unary_expr());
    }
    return e;
  }

  ExprPtr unary_expr() {
    if (at("!")) {
      next();
      return unary(Op::Not, unary_expr());
    }
    if (at("-")) {
      next();
      if (peek().kind == Tok::Int) return lit(-Int(next().text));
      return unary(Op::Neg, unary_expr());
    }
    return primary_expr();
  }

  ExprPtr primary_expr() {
    const Token &t = peek();
    if (t.kind == Tok::Int) return lit(Int(next().text));
    if (at("(")) {
      next();
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail("expected expression", t);
    if (t.text == "true" || t.text == "false") return boolean(next().text == "true");
    if ((t.text == "res" || t.text == "fresh") && at("(", 1)) {
      bool is_res = next().text == "res";
      expect("(");
      ExprPtr e = expr();
      expect(")");
      return is_res ? res(e) : fresh(e);
    }
    if (is_keyword(t.text)) fail("unexpected keyword", t);
    return var(next().text);
  }

  static bool is_keyword(const std::string &s) {
    static const std::set<std::string> kw{"skip",   "if",   "while", "return",   "main",
                                          "mu",     "contract", "startEv", "finishEv",
                                          "noev",   "psi",  "eps",   "true",     "false"};
    return kw.count(s) > 0;
  }

  // Statements.
  bool at_update_atom() const {
    if (!at("{")) return false;
    if ((at("startEv", 1) || at("finishEv", 1)) && at("(", 2)) return true;
    if (peek(1).kind == Tok::Ident && at(":=", 2)) return true;
    if (at("res", 1) && at("(", 2)) {
      int depth = 0;
      for (std::size_t k = 2;; ++k) {
        const Token &t = peek(k);
        if (t.kind == Tok::End) return false;
        if (t.text == "(") ++depth;
        if (t.text == ")" && --depth == 0) return at(":=", k + 1);
      }
    }
    return false;
  }

  UpdateAtom update_atom() {
    const Token &start = peek();
    if (!allow_updates) fail("update atoms are not allowed in programs", start);
    expect("{");
    UpdateAtom a;
    if (at("startEv") || at("finishEv")) {
      bool is_start = next().text == "startEv";
      expect("(");
      std::string m = ident();
      expect(",");
      ExprPtr e = expr();
      expect(",");
      ExprPtr id = expr();
      expect(")");
      a = is_start ? start_atom(m, e, id) : finish_atom(m, e, id);
    } else {
      ExprPtr lhs = target();
      expect(":=");
      if (peek().kind == Tok::Ident && at("(", 1) && !is_keyword(peek().text) &&
          peek().text != "res" && peek().text != "fresh") {
        std::string m = next().text;
        expect("(");
        ExprPtr e = expr();
        expect(")");
        a = call_atom(lhs, m, e);
      } else {
        a = elem_atom(lhs, expr());
      }
    }
    expect("}");
    return a;
  }

  ExprPtr target() {
    if (at("res") && at("(", 1)) {
      next();
      expect("(");
      ExprPtr e = expr();
      expect(")");
      return res(e);
    }
    std::string name = ident();
    if (is_keyword(name)) fail("unexpected keyword", toks_[pos_ - 1]);
    return var(name);
  }

  static bool at_stmt_end(const Parser &p) { return p.at_end() || p.at("}") || p.at(":"); }

  StmtPtr stmt_list() {
    std::vector<StmtPtr> items;
    while (!at_stmt_end(*this)) {
      StmtPtr s = stmt();
      items.push_back(s);
      if (at(";")) {
        next();
        continue;
      }
      if (s->kind == StmtKind::Update) continue;
      break;
    }
    if (items.empty()) return skip_stmt();
    StmtPtr out;
    for (auto it = items.rbegin(); it != items.rend(); ++it) out = out ? seq(*it, out) : *it;
    return out;
  }

  /// Declarations followed by statements; the caller consumes the braces.
  std::pair<std::vector<std::string>, StmtPtr> block() {
    std::vector<std::string> decls;
    while (peek().kind == Tok::Ident && at(";", 1) && !is_keyword(peek().text)) {
      decls.push_back(next().text);
      next();
    }
    return {decls, stmt_list()};
  }

  StmtPtr braced_body() {
    expect("{");
    auto [decls, body] = block();
    expect("}");
    return decls.empty() ? body : scope_stmt(decls, body);
  }

  StmtPtr stmt() {
    Token t = peek();
    StmtPtr s;
    if (at_update_atom()) {
      s = update_stmt(update_atom());
    } else if (at("skip")) {
      next();
      s = skip_stmt();
    } else if (at("if") || at("while")) {
      bool is_if = next().text == "if";
      expect("(");
      ExprPtr c = expr();
      expect(")");
      StmtPtr body = braced_body();
      s = is_if ? if_stmt(c, body) : while_stmt(c, body);
    } else if (at("return")) {
      next();
      s = return_stmt(expr());
    } else if (at("{")) {
      next();
      auto [decls, body] = block();
      expect("}");
      s = scope_stmt(decls, body);
    } else if (peek().kind == Tok::Ident) {
      ExprPtr lhs = target();
      expect("=");
      if (peek().kind == Tok::Ident && at("(", 1) && !is_keyword(peek().text) &&
          peek().text != "res" && peek().text != "fresh") {
        std::string m = next().text;
        expect("(");
        ExprPtr e = expr();
        expect(")");
        s = call_stmt(lhs, m, e);
      } else {
        s = assign_stmt(lhs, expr());
      }
    } else {
      fail("expected statement", t);
    }
    return with_pos(s, t.pos);
  }

  // Formulas.
  FormulaPtr formula() { return or_formula(); }

  FormulaPtr or_formula() {
    FormulaPtr f = and_formula();
    while (at("\\/")) {
      next();
      f = f_or(f, and_formula());
    }
    return f;
  }

  FormulaPtr and_formula() {
    FormulaPtr f = seq_formula();
    while (at("/\\")) {
      next();
      f = f_and(f, seq_formula());
    }
    return f;
  }

  FormulaPtr seq_formula() {
    FormulaPtr f = atom_formula();
    while (true) {
      if (at("**")) {
        next();
        f = f_chop(f, atom_formula());
      } else if (at("..")) {
        next();
        f = f_concat(f, atom_formula());
      } else if (at("~~")) {
        next();
        f = f_chop(f_chop(f, psi("")), atom_formula());
      } else if (at("~")) {
        next();
        std::string m;
        if (!at("~")) m = ident();
        expect("~");
        f = f_chop(f_chop(f, psi(m)), atom_formula());
      } else {
        return f;
      }
    }
  }

  std::vector<ExprPtr> arg_list() {
    std::vector<ExprPtr> args;
    expect("(");
    if (!at(")")) {
      args.push_back(expr());
      while (at(",")) {
        next();
        args.push_back(expr());
      }
    }
    expect(")");
    return args;
  }

  FormulaPtr atom_formula() {
    const Token &t = peek();
    if (at("[")) {
      next();
      ExprPtr p = expr();
      expect("]");
      return pred(p);
    }
    if (at("(")) {
      next();
      FormulaPtr f = formula();
      expect(")");
      if (at("(") && f->kind == FKind::MuApp && !f->mu->psi) {
        auto args = arg_list();
        if (args.size() != f->mu->params.size()) fail("arity mismatch", t);
        return mu_app(f->mu, args);
      }
      return f;
    }
    if (t.kind != Tok::Ident) fail("expected formula", t);
    if (t.text == "true" || t.text == "false") return pred(boolean(next().text == "true"));
    if (t.text == "startEv" || t.text == "finishEv") {
      bool is_start = next().text == "startEv";
      expect("(");
      std::string m = ident();
      expect(",");
      ExprPtr e = expr();
      expect(",");
      ExprPtr id = expr();
      expect(")");
      return is_start ? start_ev(m, e, id) : finish_ev(m, e, id);
    }
    if (t.text == "noev" || t.text == "psi") {
      bool is_noev = next().text == "noev";
      expect("(");
      std::string m;
      if (!at(")")) m = ident();
      expect(")");
      return is_noev ? no_ev(m) : psi(m);
    }
    if (t.text == "mu") {
      next();
      std::string x = ident();
      std::vector<std::string> params;
      expect("(");
      if (!at(")")) {
        params.push_back(ident());
        while (at(",")) {
          next();
          params.push_back(ident());
        }
      }
      expect(")");
      expect(".");
      rec_scope_.push_back({x, params.size()});
      FormulaPtr body = formula();
      rec_scope_.pop_back();
      std::vector<ExprPtr> args;
      for (const auto &p : params) args.push_back(var(p));
      return mu_app(mu_def(x, params, body), args);
    }
    if (is_keyword(t.text)) fail("unexpected keyword", t);
    Token name = next();
    if (!at("(")) fail("expected '(' after recursion variable", peek());
    auto args = arg_list();
    for (auto it = rec_scope_.rbegin(); it != rec_scope_.rend(); ++it) {
      if (it->first != name.text) continue;
      if (it->second != args.size())
        throw Error("arity", "recursion variable '" + name.text + "' applied to " +
                                 std::to_string(args.size()) + " arguments, expected " +
                                 std::to_string(it->second));
      return rec_app(name.text, args);
    }
    throw Error("unbound-recursion-variable", "unbound recursion variable '" + name.text + "'");
  }

  // Programs.
  Program program(const ParseOptions &opts) {
    Program p;
    std::set<std::string> names;
    while (!at("main")) {
      ProcDecl d;
      Token t = peek();
      d.pos = t.pos;
      d.name = ident();
      if (is_keyword(d.name)) fail("unexpected keyword", t);
      expect("(");
      d.param = ident();
      expect(")");
      expect("{");
      auto [decls, body] = block();
      expect("}");
      d.body = with_pos(scope_stmt(decls, body), t.pos);
      if (opts.check) {
        if (!names.insert(d.name).second)
          throw Error("duplicate-procedure", std::to_string(t.pos.line) + ":" +
                                                 std::to_string(t.pos.col) + ": procedure '" +
                                                 d.name + "' declared twice");
        check_returns(d.body->a, true);
        StmtPtr tail = d.body->a;
        while (tail->kind == StmtKind::Seq) tail = tail->b;
        if (tail->kind != StmtKind::Return)
          throw Error("return-position", std::to_string(t.pos.line) + ":" +
                                             std::to_string(t.pos.col) + ": procedure '" +
                                             d.name + "' must end with return");
      }
      p.procs.push_back(std::move(d));
    }
    expect("main");
    expect("{");
    auto [decls, body] = block();
    expect("}");
    expect_end();
    p.main_decls = decls;
    p.main_body = body;
    if (opts.check) check_returns(body, false);
    return p;
  }

  void check_returns(const StmtPtr &s, bool tail_ok) {
    switch (s->kind) {
    case StmtKind::Return:
      if (!tail_ok)
        throw Error("return-position", std::to_string(s->pos.line) + ":" +
                                           std::to_string(s->pos.col) +
                                           ": return not in tail position");
      break;
    case StmtKind::Seq:
      check_returns(s->a, false);
      check_returns(s->b, tail_ok);
      break;
    case StmtKind::If:
    case StmtKind::While:
    case StmtKind::Scope: check_returns(s->a, false); break;
    default: break;
    }
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, std::size_t>> rec_scope_;
};

}  // namespace

Program parse_program(const std::string &text, const ParseOptions &opts) {
  Parser p(text);
  p.allow_updates = false;
  return p.program(opts);
}

StmtPtr parse_stmt(const std::string &text) {
  Parser p(text);
  StmtPtr s = p.stmt_list();
  p.expect_end();
  return s;
}

ExprPtr parse_expr(const std::string &text) {
  Parser p(text);
  ExprPtr e = p.expr();
  p.expect_end();
  return e;
}

FormulaPtr parse_formula(const std::string &text) {
  Parser p(text);
  FormulaPtr f = p.formula();
  p.expect_end();
  return f;
}

std::vector<ContractDef> parse_contract_file(const std::string &text) {
  Parser p(text);
  std::vector<ContractDef> out;
  while (!p.at_end()) {
    p.expect("contract");
    ContractDef d;
    d.name = p.ident();
    p.expect("(");
    if (!p.at(")")) {
      d.params.push_back(p.ident());
      while (p.at(",")) {
        p.next();
        d.params.push_back(p.ident());
      }
    }
    p.expect(")");
    p.expect(":=");
    d.body = p.formula();
    if (p.at(";")) p.next();
    out.push_back(std::move(d));
  }
  return out;
}

Update parse_update(const std::string &text) {
  Parser p(text);
  Update u;
  if (p.at("eps")) {
    p.next();
  } else {
    while (p.at_update_atom()) u.push_back(p.update_atom());
  }
  p.expect_end();
  return u;
}

namespace {

Judgment judgment_of(Parser &p) {
  Judgment j;
  if (p.at("eps")) {
    p.next();
  } else {
    while (p.at_update_atom()) j.update.push_back(p.update_atom());
  }
  if (!p.at(":")) j.stmt = p.stmt_list();
  p.expect(":");
  j.phi = p.formula();
  return j;
}

}  // namespace

Sequent parse_sequent(const std::string &text) {
  Parser p(text);
  Sequent s;
  while (!p.at("|-")) {
    if (p.at_contract_ref())
      s.contracts.push_back(p.contract_ref());
    else
      s.facts.push_back(p.expr());
    if (!p.at(",")) break;
    p.next();
  }
  p.expect("|-");
  if (p.at_contract_ref()) {
    s.goal = contract_goal(p.contract_ref());
  } else if (p.ahead(":")) {
    s.goal = judgment_goal(judgment_of(p));
  } else {
    s.goal = pred_goal(p.expr());
  }
  p.expect_end();
  return s;
}

Judgment parse_judgment(const std::string &text) {
  Parser p(text);
  Judgment j = judgment_of(p);
  p.expect_end();
  return j;
}

}  // namespace tracelet
