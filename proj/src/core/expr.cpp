#include "expr.hpp"

#include <cctype>
#include <cstdio>
#include <set>

namespace omh {

ExprPtr enum_number(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Number;
  e->number = v;
  return e;
}
ExprPtr evar(const std::string& name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = name;
  return e;
}
static ExprPtr binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}
ExprPtr eadd(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Add, a, b); }
ExprPtr esub(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Sub, a, b); }
ExprPtr emul(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Mul, a, b); }
ExprPtr ediv(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Div, a, b); }
ExprPtr epow(ExprPtr a, ExprPtr b) { return binary(Expr::Kind::Pow, a, b); }
ExprPtr eneg(ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Neg;
  e->a = std::move(a);
  return e;
}
ExprPtr ecall(Expr::Fn fn, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Call;
  e->fn = fn;
  e->a = std::move(a);
  return e;
}

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c))
      throw SyntaxError(std::string("expected '") + c + "'", pos);
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = eadd(e, parse_term());
      else if (accept('-'))
        e = esub(e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (accept('*'))
        e = emul(e, parse_factor());
      else if (accept('/'))
        e = ediv(e, parse_factor());
      else
        return e;
    }
  }

  ExprPtr parse_factor() {
    ExprPtr e = parse_base();
    if (accept('^')) return epow(e, parse_factor());  // right-assoc
    return e;
  }

  ExprPtr parse_base() {
    char c = peek();
    if (c == '-') {
      ++pos;
      return eneg(parse_factor());
    }
    if (c == '(') {
      ++pos;
      ExprPtr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    throw SyntaxError(pos >= text.size() ? "unexpected end of input"
                                         : "unexpected character",
                      pos);
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
        throw SyntaxError("expected digits after decimal point", pos);
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos])))
        ++pos;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
          ++pos;
      } else {
        pos = mark;  // 'e' belongs to a following identifier, not this number
      }
    }
    return enum_number(std::stod(text.substr(start, pos - start)));
  }

  ExprPtr parse_ident() {
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    std::string name = text.substr(start, pos - start);
    if (peek() == '(') {
      ++pos;
      ExprPtr arg = parse_expr();
      expect(')');
      Expr::Fn fn;
      if (name == "sin")
        fn = Expr::Fn::Sin;
      else if (name == "cos")
        fn = Expr::Fn::Cos;
      else if (name == "tan")
        fn = Expr::Fn::Tan;
      else if (name == "exp")
        fn = Expr::Fn::Exp;
      else if (name == "log")
        fn = Expr::Fn::Log;
      else if (name == "sqrt")
        fn = Expr::Fn::Sqrt;
      else if (name == "abs")
        fn = Expr::Fn::Abs;
      else
        throw UnknownFunction("unknown function '" + name + "'");
      return ecall(fn, arg);
    }
    return evar(name);
  }
};

void collect_vars(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Var:
      out.insert(e.name);
      return;
    case Expr::Kind::Number:
      return;
    default:
      if (e.a) collect_vars(*e.a, out);
      if (e.b) collect_vars(*e.b, out);
  }
}

const char* fn_name(Expr::Fn f) {
  switch (f) {
    case Expr::Fn::Sin:
      return "sin";
    case Expr::Fn::Cos:
      return "cos";
    case Expr::Fn::Tan:
      return "tan";
    case Expr::Fn::Exp:
      return "exp";
    case Expr::Fn::Log:
      return "log";
    case Expr::Fn::Sqrt:
      return "sqrt";
    case Expr::Fn::Abs:
      return "abs";
  }
  return "?";
}

}  // namespace

ExprPtr parse(const std::string& text) {
  Parser p(text);
  ExprPtr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw SyntaxError("trailing input after expression", p.pos);
  return e;
}

std::string print(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", e.number);
      return buf;
    }
    case Expr::Kind::Var:
      return e.name;
    case Expr::Kind::Add:
      return "(" + print(*e.a) + "+" + print(*e.b) + ")";
    case Expr::Kind::Sub:
      return "(" + print(*e.a) + "-" + print(*e.b) + ")";
    case Expr::Kind::Mul:
      return "(" + print(*e.a) + "*" + print(*e.b) + ")";
    case Expr::Kind::Div:
      return "(" + print(*e.a) + "/" + print(*e.b) + ")";
    case Expr::Kind::Pow:
      return "(" + print(*e.a) + "^" + print(*e.b) + ")";
    case Expr::Kind::Neg:
      return "(-" + print(*e.a) + ")";
    case Expr::Kind::Call:
      return std::string(fn_name(e.fn)) + "(" + print(*e.a) + ")";
  }
  return "?";
}

ExprPtr substitute(const ExprPtr& e,
                   const std::vector<std::pair<std::string, ExprPtr>>& repl) {
  switch (e->kind) {
    case Expr::Kind::Number:
      return e;
    case Expr::Kind::Var:
      for (const auto& [from, to] : repl)
        if (e->name == from) return to;
      return e;
    case Expr::Kind::Add:
      return eadd(substitute(e->a, repl), substitute(e->b, repl));
    case Expr::Kind::Sub:
      return esub(substitute(e->a, repl), substitute(e->b, repl));
    case Expr::Kind::Mul:
      return emul(substitute(e->a, repl), substitute(e->b, repl));
    case Expr::Kind::Div:
      return ediv(substitute(e->a, repl), substitute(e->b, repl));
    case Expr::Kind::Pow:
      return epow(substitute(e->a, repl), substitute(e->b, repl));
    case Expr::Kind::Neg:
      return eneg(substitute(e->a, repl));
    case Expr::Kind::Call:
      return ecall(e->fn, substitute(e->a, repl));
  }
  return e;
}

ExprPtr subst_var(const ExprPtr& e, const std::string& from,
                  const std::string& to) {
  return substitute(e, {{from, evar(to)}});
}

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> s;
  collect_vars(e, s);
  s.erase("pi");
  return {s.begin(), s.end()};
}

void check_variables(const Expr& e, std::span<const std::string> vars) {
  for (const auto& v : free_variables(e)) {
    bool found = false;
    for (const auto& w : vars)
      if (w == v) {
        found = true;
        break;
      }
    if (!found) throw UnknownVariable("undeclared variable '" + v + "'");
  }
}

FunctionDef parse_function(const std::string& name,
                           std::vector<std::string> vars,
                           const std::string& text) {
  FunctionDef f;
  f.name = name;
  f.vars = std::move(vars);
  f.body = parse(text);
  f.source = text;
  check_variables(*f.body, f.vars);
  return f;
}

}  // namespace omh
