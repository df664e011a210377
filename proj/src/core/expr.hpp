#pragma once

// Tiny expression language for user-supplied functions (potentials, metric
// entries, Staeckel rows).  Grammar, with '^' right-associative and binding
// tighter than unary minus:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' factor)?
//   base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' factor
//   number := digit+ ('.' digit+)? (('e'|'E') ('+'|'-')? digit+)?
//   ident  := (letter | '_') (letter | digit | '_')*
//
// Known functions: sin cos tan exp log sqrt abs.  The identifier `pi` is a
// constant unless explicitly bound.  Evaluation is generic over the scalar
// type, so the same AST yields values (double) or derivatives (hyper-dual).

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hyperdual.hpp"

namespace omh {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

  Kind kind;
  double number = 0.0;  // Kind::Number
  std::string name;     // Kind::Var
  Fn fn = Fn::Sin;      // Kind::Call
  ExprPtr a, b;
};

// AST builders (models compose charts/potentials programmatically with these)
ExprPtr enum_number(double v);
ExprPtr evar(const std::string& name);
ExprPtr eadd(ExprPtr a, ExprPtr b);
ExprPtr esub(ExprPtr a, ExprPtr b);
ExprPtr emul(ExprPtr a, ExprPtr b);
ExprPtr ediv(ExprPtr a, ExprPtr b);
ExprPtr epow(ExprPtr a, ExprPtr b);
ExprPtr eneg(ExprPtr a);
ExprPtr ecall(Expr::Fn fn, ExprPtr a);

ExprPtr parse(const std::string& text);
std::string print(const Expr& e);  // canonical fully parenthesized form

// replace each variable occurrence by the mapped expression (capture-free:
// the language has no binders); variables without a mapping stay untouched
ExprPtr substitute(const ExprPtr& e,
                   const std::vector<std::pair<std::string, ExprPtr>>& repl);
// common case: rename a single variable
ExprPtr subst_var(const ExprPtr& e, const std::string& from,
                  const std::string& to);

// every free variable of e must appear in vars (or be `pi`)
void check_variables(const Expr& e, std::span<const std::string> vars);
std::vector<std::string> free_variables(const Expr& e);

struct FunctionDef {
  std::string name;
  std::vector<std::string> vars;  // ordered formal parameters
  ExprPtr body;
  std::string source;
};

FunctionDef parse_function(const std::string& name,
                           std::vector<std::string> vars,
                           const std::string& text);

template <class S>
S eval(const Expr& e, std::span<const std::string> names,
       std::span<const S> values) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return S(e.number);
    case Expr::Kind::Var: {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == e.name) return values[i];
      if (e.name == "pi") return S(3.14159265358979323846);
      throw UnknownVariable("unbound variable '" + e.name + "'");
    }
    case Expr::Kind::Add:
      return eval(*e.a, names, values) + eval(*e.b, names, values);
    case Expr::Kind::Sub:
      return eval(*e.a, names, values) - eval(*e.b, names, values);
    case Expr::Kind::Mul:
      return eval(*e.a, names, values) * eval(*e.b, names, values);
    case Expr::Kind::Div:
      return eval(*e.a, names, values) / eval(*e.b, names, values);
    case Expr::Kind::Pow: {
      // literal integral exponents (also written with a leading minus) run as
      // repeated multiplication, which is well defined (and dual-safe) at
      // nonpositive bases
      const Expr* ex = e.b.get();
      double sign = 1.0;
      if (ex->kind == Expr::Kind::Neg && ex->a->kind == Expr::Kind::Number) {
        sign = -1.0;
        ex = ex->a.get();
      }
      if (ex->kind == Expr::Kind::Number) {
        double n = sign * ex->number;
        if (n == static_cast<long>(n) && std::fabs(n) <= 64.0)
          return pow_int(eval(*e.a, names, values), static_cast<long>(n));
      }
      return pow_real(eval(*e.a, names, values), eval(*e.b, names, values));
    }
    case Expr::Kind::Neg:
      return -eval(*e.a, names, values);
    case Expr::Kind::Call: {
      S x = eval(*e.a, names, values);
      switch (e.fn) {
        case Expr::Fn::Sin:
          return sin(x);
        case Expr::Fn::Cos:
          return cos(x);
        case Expr::Fn::Tan:
          return tan(x);
        case Expr::Fn::Exp:
          return exp(x);
        case Expr::Fn::Log:
          return log(x);
        case Expr::Fn::Sqrt:
          return sqrt(x);
        case Expr::Fn::Abs:
          return abs(x);
      }
      throw Error("unreachable function tag");
    }
  }
  throw Error("unreachable expression tag");
}

template <class S>
S eval_function(const FunctionDef& f, std::span<const S> args) {
  if (args.size() != f.vars.size())
    throw Error("function '" + f.name + "' arity mismatch");
  return eval(*f.body, std::span<const std::string>(f.vars), args);
}

}  // namespace omh
