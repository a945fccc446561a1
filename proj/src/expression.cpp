#include "rearr/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "rearr/error.hpp"
#include "rearr/numeric.hpp"

namespace rearr {

struct Expression::Node {
  enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::size_t variable = 0;
  std::string function;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(std::span<const double> vars) const {
    switch (kind) {
      case Kind::Constant:
        return value;
      case Kind::Variable:
        return vars[variable];
      case Kind::Negate:
        return -args[0]->eval(vars);
      case Kind::Add:
        return args[0]->eval(vars) + args[1]->eval(vars);
      case Kind::Sub:
        return args[0]->eval(vars) - args[1]->eval(vars);
      case Kind::Mul:
        return args[0]->eval(vars) * args[1]->eval(vars);
      case Kind::Div:
        return args[0]->eval(vars) / args[1]->eval(vars);
      case Kind::Pow:
        return std::pow(args[0]->eval(vars), args[1]->eval(vars));
      case Kind::Call:
        return call(vars);
    }
    return 0.0;
  }

  double call(std::span<const double> vars) const {
    if (function == "min" || function == "max") {
      double r = args[0]->eval(vars);
      for (std::size_t i = 1; i < args.size(); ++i) {
        double v = args[i]->eval(vars);
        r = function == "min" ? std::min(r, v) : std::max(r, v);
      }
      return r;
    }
    double a = args[0]->eval(vars);
    if (function == "abs") return std::abs(a);
    if (function == "sqrt") return std::sqrt(a);
    if (function == "exp") return std::exp(a);
    if (function == "log") return std::log(a);
    if (function == "sin") return std::sin(a);
    if (function == "cos") return std::cos(a);
    if (function == "tan") return std::tan(a);
    if (function == "pow") return std::pow(a, args[1]->eval(vars));
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Kind::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Kind::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Negate, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Constant;
    n->value = parse_double(s_.substr(start, pos_ - start));
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    if (accept('(')) {
      static const std::vector<std::string> known = {"min", "max", "abs",  "sqrt", "exp",
                                                     "log", "sin", "cos", "tan", "pow"};
      if (std::find(known.begin(), known.end(), name) == known.end()) fail("unknown function '" + name + "'");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Call;
      n->function = name;
      if (!accept(')')) {
        do {
          n->args.push_back(expr());
        } while (accept(','));
        if (!accept(')')) fail("missing ')' after arguments");
      }
      std::size_t arity = n->args.size();
      bool variadic = name == "min" || name == "max";
      if ((variadic && arity < 2) || (name == "pow" && arity != 2) || (!variadic && name != "pow" && arity != 1)) {
        fail("wrong number of arguments to '" + name + "'");
      }
      return n;
    }
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it != vars_.end()) {
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Variable;
      n->variable = static_cast<std::size_t>(it - vars_.begin());
      return n;
    }
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Constant;
    if (name == "pi") {
      n->value = std::numbers::pi;
    } else if (name == "e") {
      n->value = std::numbers::e;
    } else {
      fail("unknown identifier '" + name + "'");
    }
    return n;
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string_view text, std::vector<std::string> variables)
    : text_(text), variables_(std::move(variables)) {
  root_ = Parser(text_, variables_).parse();
}

double Expression::operator()(std::span<const double> values) const {
  if (values.size() != variables_.size()) {
    throw InvalidInput("expression '" + text_ + "' expects " + std::to_string(variables_.size()) + " variables");
  }
  return root_->eval(values);
}

double Expression::operator()(double value) const { return (*this)(std::span<const double>(&value, 1)); }

std::vector<std::string> cylinder_variables(int dimension) {
  std::vector<std::string> names;
  for (int i = 1; i < dimension; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("y");
  return names;
}

}  // namespace rearr
