#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace tracelet {

using Int = boost::multiprecision::cpp_int;

/// Base error type; `kind` is a short machine-readable tag.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string &msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string &kind() const { return kind_; }

private:
  std::string kind_;
};

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class ExprKind { Int, Bool, Var, Res, Fresh, Unary, Binary };

enum class Op { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not, Neg };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Integer and boolean expressions shared by programs, predicates and updates.
/// `Res` is the result variable res(index); `Fresh` is the #(i) id constructor.
struct Expr {
  ExprKind kind = ExprKind::Int;
  Int value;
  bool bval = false;
  std::string name;
  Op op = Op::Add;
  ExprPtr a;
  ExprPtr b;
};

ExprPtr lit(const Int &v);
ExprPtr boolean(bool v);
ExprPtr var(const std::string &name);
ExprPtr res(ExprPtr index);
ExprPtr fresh(ExprPtr base);
ExprPtr unary(Op op, ExprPtr e);
ExprPtr binary(Op op, ExprPtr l, ExprPtr r);

bool is_comparison(Op op);
bool is_logical(Op op);
/// True when the expression denotes a boolean (comparison, logic, literal).
bool is_bool_expr(const ExprPtr &e);

std::string to_string(const ExprPtr &e);
std::string int_to_string(const Int &v);
bool equal(const ExprPtr &a, const ExprPtr &b);

/// Name of the state variable holding the result of call `id`.
std::string res_name(const Int &id);

using Subst = std::map<std::string, ExprPtr>;
ExprPtr substitute(const ExprPtr &e, const Subst &s);
void free_vars(const ExprPtr &e, std::set<std::string> &out);
bool mentions_var(const ExprPtr &e, const std::string &name);
/// Replaces every res(index) whose printed index equals `index` by `with`.
ExprPtr substitute_res(const ExprPtr &e, const ExprPtr &index, const ExprPtr &with);

using Lookup = std::function<std::optional<Int>(const std::string &)>;

/// Evaluation without exceptions; nullopt on undefined symbols or fresh().
std::optional<Int> try_eval(const ExprPtr &e, const Lookup &lookup);
/// Throws Error("undefined-variable") on undefined symbols.
Int eval(const ExprPtr &e, const Lookup &lookup);

}  // namespace tracelet
