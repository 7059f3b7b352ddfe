#include "tresca/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace tresca {

struct Expression::Node {
  enum class Op { Const, X, T, Neg, Add, Sub, Mul, Div, Sin, Cos, Exp, Min, Max } op = Op::Const;
  double value = 0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double x, double t) const {
    switch (op) {
    case Op::Const: return value;
    case Op::X: return x;
    case Op::T: return t;
    case Op::Neg: return -args[0]->eval(x, t);
    case Op::Add: return args[0]->eval(x, t) + args[1]->eval(x, t);
    case Op::Sub: return args[0]->eval(x, t) - args[1]->eval(x, t);
    case Op::Mul: return args[0]->eval(x, t) * args[1]->eval(x, t);
    case Op::Div: return args[0]->eval(x, t) / args[1]->eval(x, t);
    case Op::Sin: return std::sin(args[0]->eval(x, t));
    case Op::Cos: return std::cos(args[0]->eval(x, t));
    case Op::Exp: return std::exp(args[0]->eval(x, t));
    case Op::Min: return std::min(args[0]->eval(x, t), args[1]->eval(x, t));
    case Op::Max: return std::max(args[0]->eval(x, t), args[1]->eval(x, t));
    }
    return 0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  n->value = value;
  return n;
}

// expr := term (('+'|'-') term)*
// term := unary (('*'|'/') unary)*
// unary := '-' unary | '+' unary | primary
// primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
class Parser {
public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size())
      fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ExpressionError(what, pos_ + 1); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (eat('+'))
        n = make(Op::Add, {n, term()});
      else if (eat('-'))
        n = make(Op::Sub, {n, term()});
      else
        return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*'))
        n = make(Op::Mul, {n, unary()});
      else if (eat('/'))
        n = make(Op::Div, {n, unary()});
      else
        return n;
    }
  }

  NodePtr unary() {
    if (eat('-'))
      return make(Op::Neg, {unary()});
    if (eat('+'))
      return unary();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size())
      fail("unexpected end of expression");
    if (eat('(')) {
      NodePtr n = expr();
      if (!eat(')'))
        fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return number();
    if (std::isalpha(static_cast<unsigned char>(c)))
      return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0;
    const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc())
      fail("malformed number");
    pos_ = std::size_t(end - s_.data());
    return make(Op::Const, {}, v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    if (id == "x")
      return make(Op::X);
    if (id == "t")
      return make(Op::T);
    if (id == "pi")
      return make(Op::Const, {}, std::numbers::pi);

    struct Fn {
      const char* name;
      Op op;
      std::size_t arity;
    };
    static constexpr Fn fns[] = {{"sin", Op::Sin, 1}, {"cos", Op::Cos, 1}, {"exp", Op::Exp, 1},
                                 {"min", Op::Min, 2}, {"max", Op::Max, 2}};
    const auto it = std::find_if(std::begin(fns), std::end(fns), [&](const Fn& f) { return id == f.name; });
    if (it == std::end(fns)) {
      pos_ = start;
      fail("unknown name '" + id + "'");
    }
    if (!eat('('))
      fail("expected '(' after " + id);
    std::vector<NodePtr> args{expr()};
    while (eat(','))
      args.push_back(expr());
    if (!eat(')'))
      fail("expected ')'");
    if (args.size() != it->arity)
      fail(id + " takes " + std::to_string(it->arity) + " argument" + (it->arity > 1 ? "s" : ""));
    return make(it->op, std::move(args));
  }
};

} // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).run();
  return e;
}

double Expression::operator()(double x, double t) const { return root_->eval(x, t); }

} // namespace tresca
