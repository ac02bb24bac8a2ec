#include "expression.hpp"

#include <cctype>
#include <charconv>
#include <memory>
#include <string>
#include <vector>

#include "ellfem/errors.hpp"

namespace ellfem::cli {

namespace {

struct Node {
  enum class Op { Constant, Coordinate, Add, Sub, Mul, Neg, Pow } op = Op::Constant;
  double value = 0.0;
  int index = 0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    switch (op) {
      case Op::Constant: return value;
      case Op::Coordinate:
        if (index >= x.size())
          throw DomainError("coordinate x" + std::to_string(index + 1) + " not available in R^" +
                            std::to_string(x.size()));
        return x(index);
      case Op::Add: return lhs->eval(x) + rhs->eval(x);
      case Op::Sub: return lhs->eval(x) - rhs->eval(x);
      case Op::Mul: return lhs->eval(x) * rhs->eval(x);
      case Op::Neg: return -lhs->eval(x);
      case Op::Pow: {
        const double base = lhs->eval(x);
        double r = 1.0;
        for (int k = 0; k < index; ++k) r *= base;
        return r;
      }
    }
    return 0.0;
  }
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+')) e = binary(Node::Op::Add, e, term());
      else if (accept('-')) e = binary(Node::Op::Sub, e, term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    while (accept('*')) e = binary(Node::Op::Mul, e, factor());
    skip();
    if (pos_ < text_.size() && text_[pos_] == '/') fail("division is not part of the polynomial subset");
    return e;
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (!accept('^')) return base;
    skip();
    int exponent = 0;
    const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), exponent);
    if (ec != std::errc{} || exponent < 0) fail("exponent must be a non-negative integer");
    pos_ = static_cast<std::size_t>(end - text_.data());
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Pow;
    n->index = exponent;
    n->lhs = std::move(base);
    return n;
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Neg;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (ec != std::errc{}) fail("bad number");
      pos_ = static_cast<std::size_t>(end - text_.data());
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    auto coordinate = [&](int index, std::size_t length) {
      pos_ += length;
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Coordinate;
      n->index = index;
      return n;
    };
    if (c == 'x' && pos_ + 1 < text_.size() && text_[pos_ + 1] >= '1' && text_[pos_ + 1] <= '3')
      return coordinate(text_[pos_ + 1] - '1', 2);
    if (c == 'x') return coordinate(0, 1);
    if (c == 'y') return coordinate(1, 1);
    if (c == 'z') return coordinate(2, 1);
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarFunction parse_polynomial(std::string_view text) {
  NodePtr root = Parser(text).parse();
  return [root](const Eigen::Ref<const Eigen::VectorXd>& x) { return root->eval(x); };
}

}  // namespace ellfem::cli
