#pragma once

// Expression language for chart-coordinate fields.
//
// Grammar (EBNF, see docs/grammar.md):
//   expr    = term , { ("+" | "-") , term } ;
//   term    = unary , { ("*" | "/") , unary } ;
//   unary   = ("-" | "+") , unary | power ;
//   power   = primary , [ "^" , unary ] ;
//   primary = number | constant | coord | func , "(" , expr , ")" | "(" , expr , ")" ;
//
// `^` binds tighter than unary minus and is right-associative.

#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "yamabe/exprlang/jet.hpp"

namespace yamabe {

enum class Op { Number, Constant, Coord, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Sin, Cos, Tan, Exp, Ln, Sqrt, Sinh, Cosh, Tanh, Atan };
enum class NamedConstant { Pi, E };

inline constexpr std::string_view kFunctionNames[] = {"sin",  "cos",  "tan",  "exp",  "ln",
                                                      "sqrt", "sinh", "cosh", "tanh", "atan"};

class Expr {
public:
  Expr() = default;

  static Expr number(double v) { return Expr(make(Op::Number, v, 0, nullptr, nullptr)); }
  static Expr constant(NamedConstant c) {
    return Expr(make(Op::Constant, 0.0, static_cast<int>(c), nullptr, nullptr));
  }
  /// Zero-based coordinate index; printed as x1, x2, ...
  static Expr coord(int index) { return Expr(make(Op::Coord, 0.0, index, nullptr, nullptr)); }
  static Expr neg(const Expr& a) { return Expr(make(Op::Neg, 0.0, 0, a.node_, nullptr)); }
  static Expr binary(Op op, const Expr& a, const Expr& b) {
    if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div && op != Op::Pow)
      throw std::invalid_argument("not a binary operator");
    return Expr(make(op, 0.0, 0, a.node_, b.node_));
  }
  static Expr call(Fn f, const Expr& a) {
    return Expr(make(Op::Call, 0.0, static_cast<int>(f), a.node_, nullptr));
  }

  bool valid() const { return node_ != nullptr; }
  Op op() const { return node_->op; }
  double number_value() const { return node_->value; }
  int coord_index() const { return node_->index; }
  Fn function() const { return static_cast<Fn>(node_->index); }
  NamedConstant named_constant() const { return static_cast<NamedConstant>(node_->index); }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }
  Expr operand() const { return lhs(); }

  friend bool operator==(const Expr& a, const Expr& b) { return equal(a.node_.get(), b.node_.get()); }

  bool depends_on_coords() const { return max_coord_index() >= 0; }

  /// Largest coordinate index referenced, -1 for a constant expression.
  int max_coord_index() const { return max_coord(node_.get()); }

  /// Infix text that parses back to a structurally identical tree.
  std::string str() const { return print(node_.get()); }

  /// Constructor-style dump, e.g. Div(1, Add(x1, 2)).
  std::string sexpr() const { return dump(node_.get()); }

private:
  struct Node {
    Op op;
    double value;
    int index;
    std::shared_ptr<const Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  static NodePtr make(Op op, double v, int idx, NodePtr l, NodePtr r) {
    return std::make_shared<const Node>(Node{op, v, idx, std::move(l), std::move(r)});
  }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    switch (a->op) {
      case Op::Number: return a->value == b->value;
      case Op::Constant:
      case Op::Coord: return a->index == b->index;
      case Op::Neg: return equal(a->lhs.get(), b->lhs.get());
      case Op::Call: return a->index == b->index && equal(a->lhs.get(), b->lhs.get());
      default: return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
    }
  }

  static int max_coord(const Node* n) {
    if (!n) return -1;
    if (n->op == Op::Coord) return n->index;
    return std::max(max_coord(n->lhs.get()), max_coord(n->rhs.get()));
  }

  static int precedence(const Node* n) {
    switch (n->op) {
      case Op::Add:
      case Op::Sub: return 1;
      case Op::Mul:
      case Op::Div: return 2;
      case Op::Neg: return 3;
      case Op::Pow: return 4;
      default: return 5;
    }
  }

  static std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  static std::string leaf(const Node* n) {
    switch (n->op) {
      case Op::Number: return format_number(n->value);
      case Op::Constant: return n->index == static_cast<int>(NamedConstant::Pi) ? "pi" : "e";
      case Op::Coord: return "x" + std::to_string(n->index + 1);
      default: return {};
    }
  }

  static std::string wrap(const Node* n, bool parens) {
    return parens ? "(" + print(n) + ")" : print(n);
  }

  static std::string print(const Node* n) {
    if (!n) return {};
    const int p = precedence(n);
    switch (n->op) {
      case Op::Number:
      case Op::Constant:
      case Op::Coord: return leaf(n);
      case Op::Neg: return "-" + wrap(n->lhs.get(), precedence(n->lhs.get()) < 3);
      case Op::Call:
        return std::string(kFunctionNames[n->index]) + "(" + print(n->lhs.get()) + ")";
      case Op::Pow:
        return wrap(n->lhs.get(), precedence(n->lhs.get()) <= 4) + "^" +
               wrap(n->rhs.get(), precedence(n->rhs.get()) < 3);
      default: {
        const char* sym = n->op == Op::Add ? " + " : n->op == Op::Sub ? " - " : n->op == Op::Mul ? "*" : "/";
        return wrap(n->lhs.get(), precedence(n->lhs.get()) < p) + sym +
               wrap(n->rhs.get(), precedence(n->rhs.get()) <= p);
      }
    }
  }

  static std::string dump(const Node* n) {
    if (!n) return {};
    switch (n->op) {
      case Op::Number:
      case Op::Constant:
      case Op::Coord: return leaf(n);
      case Op::Neg: return "Neg(" + dump(n->lhs.get()) + ")";
      case Op::Call: {
        std::string name(kFunctionNames[n->index]);
        name[0] = static_cast<char>(name[0] - 'a' + 'A');
        return name + "(" + dump(n->lhs.get()) + ")";
      }
      default: {
        static constexpr const char* names[] = {"", "", "", "", "Add", "Sub", "Mul", "Div", "Pow"};
        return std::string(names[static_cast<int>(n->op)]) + "(" + dump(n->lhs.get()) + ", " +
               dump(n->rhs.get()) + ")";
      }
    }
  }

  NodePtr node_;
};

class ParseError : public std::runtime_error {
public:
  enum class Kind { Syntax, UnknownIdentifier, Arity };

  ParseError(Kind kind, std::size_t offset, std::vector<std::string> expected, const std::string& what)
      : std::runtime_error(what), kind_(kind), offset_(offset), expected_(std::move(expected)) {}

  Kind kind() const { return kind_; }
  /// Byte offset into the source text.
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

private:
  Kind kind_;
  std::size_t offset_;
  std::vector<std::string> expected_;
};

namespace detail {

class Parser {
public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size())
      syntax_error({"end of input", "'+'", "'-'", "'*'", "'/'", "'^'"});
    return e;
  }

private:
  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) lhs = Expr::binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = Expr::binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = Expr::binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = Expr::binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::neg(unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) syntax_error(operand_tokens());
    const char ch = src_[pos_];
    if (ch == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (is_digit(ch) || ch == '.') return number();
    if (is_ident_start(ch)) return identifier();
    syntax_error(operand_tokens());
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && is_digit(src_[look])) {
        pos_ = look;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      syntax_error({"number"});
    }
    return Expr::number(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_ident_start(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    for (std::size_t f = 0; f < std::size(kFunctionNames); ++f) {
      if (name != kFunctionNames[f]) continue;
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '(')
        throw ParseError(ParseError::Kind::Arity, start, {"'('"},
                         "function '" + std::string(name) + "' at byte " + std::to_string(start) +
                             " requires one parenthesized argument");
      ++pos_;
      std::vector<Expr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (args.size() != 1)
        throw ParseError(ParseError::Kind::Arity, start, {},
                         "function '" + std::string(name) + "' at byte " + std::to_string(start) +
                             " takes 1 argument, got " + std::to_string(args.size()));
      return Expr::call(static_cast<Fn>(f), args[0]);
    }

    Expr leaf;
    if (name == "pi") leaf = Expr::constant(NamedConstant::Pi);
    else if (name == "e") leaf = Expr::constant(NamedConstant::E);
    else if (name.size() >= 2 && name[0] == 'x' && all_digits(name.substr(1)) && name[1] != '0') {
      int idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx > dim_) unknown(name, start);
      leaf = Expr::coord(idx - 1);
    } else {
      unknown(name, start);
    }
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(')
      throw ParseError(ParseError::Kind::Arity, start, {},
                       "'" + std::string(name) + "' at byte " + std::to_string(start) +
                           " is not a function and takes no arguments");
    return leaf;
  }

  [[noreturn]] void unknown(std::string_view name, std::size_t at) {
    throw ParseError(ParseError::Kind::UnknownIdentifier, at, {},
                     "unknown identifier '" + std::string(name) + "' at byte " + std::to_string(at) +
                         " (chart dimension " + std::to_string(dim_) + ")");
  }

  [[noreturn]] void syntax_error(std::vector<std::string> expected) {
    std::string msg = "syntax error at byte " + std::to_string(pos_) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
    if (pos_ < src_.size()) msg += std::string(", found '") + src_[pos_] + "'";
    else msg += ", found end of input";
    throw ParseError(ParseError::Kind::Syntax, pos_, std::move(expected), msg);
  }

  static std::vector<std::string> operand_tokens() {
    return {"number", "identifier", "'('", "'-'"};
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) syntax_error({std::string("'") + c + "'"});
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!is_digit(c)) return false;
    return true;
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `source` over a chart of dimension `dim` (coordinates x1..x<dim>).
inline Expr parse(std::string_view source, int dim) { return detail::Parser(source, dim).parse(); }

class EvalError : public std::runtime_error {
public:
  EvalError(std::string reason, std::string subexpression)
      : std::runtime_error(reason + " in '" + subexpression + "'"),
        reason_(std::move(reason)),
        subexpression_(std::move(subexpression)) {}

  const std::string& reason() const { return reason_; }
  const std::string& subexpression() const { return subexpression_; }

private:
  std::string reason_;
  std::string subexpression_;
};

namespace detail {

inline Jet eval_node(const Expr& e, std::span<const double> x, int order) {
  const int dim = static_cast<int>(x.size());
  try {
    switch (e.op()) {
      case Op::Number: return Jet::constant(dim, order, e.number_value());
      case Op::Constant:
        return Jet::constant(dim, order,
                             e.named_constant() == NamedConstant::Pi ? std::numbers::pi : std::numbers::e);
      case Op::Coord: return Jet::variable(dim, order, e.coord_index(), x[e.coord_index()]);
      case Op::Neg: return -eval_node(e.operand(), x, order);
      case Op::Add: return eval_node(e.lhs(), x, order) + eval_node(e.rhs(), x, order);
      case Op::Sub: return eval_node(e.lhs(), x, order) - eval_node(e.rhs(), x, order);
      case Op::Mul: return eval_node(e.lhs(), x, order) * eval_node(e.rhs(), x, order);
      case Op::Div: {
        Jet num = eval_node(e.lhs(), x, order);
        Jet den = eval_node(e.rhs(), x, order);
        return num / den;
      }
      case Op::Pow: {
        Jet base = eval_node(e.lhs(), x, order);
        const Expr ex = e.rhs();
        if (!ex.depends_on_coords()) {
          const double p = eval_node(ex, x, 0).value();
          if (std::isfinite(p) && p == std::nearbyint(p) && std::abs(p) < 1 << 30)
            return ipow(base, static_cast<long long>(p));
          return pow(base, p);
        }
        Jet expo = eval_node(ex, x, order);
        if (!(base.value() > 0.0)) throw DomainError("non-integer power of nonpositive base");
        return exp(expo * log(base));
      }
      case Op::Call: {
        Jet a = eval_node(e.operand(), x, order);
        switch (e.function()) {
          case Fn::Sin: return sin(a);
          case Fn::Cos: return cos(a);
          case Fn::Tan: return tan(a);
          case Fn::Exp: return exp(a);
          case Fn::Ln: return log(a);
          case Fn::Sqrt: return sqrt(a);
          case Fn::Sinh: return sinh(a);
          case Fn::Cosh: return cosh(a);
          case Fn::Tanh: return tanh(a);
          case Fn::Atan: return atan(a);
        }
      }
    }
  } catch (const DomainError& err) {
    throw EvalError(err.what(), e.str());
  }
  throw std::logic_error("unreachable expression node");
}

}  // namespace detail

/// Value and all partial derivatives up to `order` of `e` at `point`.
inline Jet eval_jet(const Expr& e, std::span<const double> point, int order = kDefaultJetOrder) {
  if (order < 0 || order > kMaxJetOrder)
    throw std::invalid_argument("jet order " + std::to_string(order) + " outside [0, " +
                                std::to_string(kMaxJetOrder) + "]");
  if (e.max_coord_index() >= static_cast<int>(point.size()))
    throw std::invalid_argument("expression references x" + std::to_string(e.max_coord_index() + 1) +
                                " but the point has dimension " + std::to_string(point.size()));
  return detail::eval_node(e, point, order);
}

inline double eval(const Expr& e, std::span<const double> point) { return eval_jet(e, point, 0).value(); }

}  // namespace yamabe
