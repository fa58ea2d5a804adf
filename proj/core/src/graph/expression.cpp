#include "meso/graph/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "meso/error.hpp"

namespace meso::graph {

struct Expression::Node {
  enum class Kind { number, variable, unary_minus, binary, call } kind = Kind::number;
  double value = 0.0;
  std::size_t slot = 0;
  char op = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct Function {
  const char* name;
  double (*fn)(double);
};

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_tan(double x) { return std::tan(x); }
double f_exp(double x) { return std::exp(x); }
double f_log(double x) { return std::log(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_abs(double x) { return std::abs(x); }
double f_tanh(double x) { return std::tanh(x); }

constexpr Function kFunctions[] = {{"sin", f_sin},   {"cos", f_cos}, {"tan", f_tan}, {"exp", f_exp},
                                   {"log", f_log},   {"sqrt", f_sqrt}, {"abs", f_abs}, {"tanh", f_tanh}};

class Parser {
 public:
  Parser(std::string_view text, std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + what);
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
  static NodePtr binary(char op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+'))
        n = binary('+', n, term());
      else if (accept('-'))
        n = binary('-', n, term());
      else
        return n;
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = binary('*', n, unary());
      else if (accept('/'))
        n = binary('/', n, unary());
      else
        return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::unary_minus;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      if (accept('(')) {
        for (const auto& f : kFunctions)
          if (name == f.name) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::call;
            n->fn = f.fn;
            n->lhs = expr();
            if (!accept(')')) fail("expected ')' after argument of " + name);
            return n;
          }
        fail("unknown function '" + name + "'");
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::variable;
      auto it = std::find(vars_.begin(), vars_.end(), name);
      n->slot = static_cast<std::size_t>(it - vars_.begin());
      if (it == vars_.end()) vars_.push_back(name);
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<std::string>& vars_;
};

double eval(const Node& n, const std::vector<double>& v) {
  switch (n.kind) {
    case Node::Kind::number:
      return n.value;
    case Node::Kind::variable:
      return v[n.slot];
    case Node::Kind::unary_minus:
      return -eval(*n.lhs, v);
    case Node::Kind::call:
      return n.fn(eval(*n.lhs, v));
    case Node::Kind::binary: {
      const double a = eval(*n.lhs, v), b = eval(*n.rhs, v);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  Parser p(text, e.variables_);
  e.root_ = p.parse();
  return e;
}

double Expression::evaluate(const std::vector<double>& values) const {
  if (values.size() != variables_.size())
    throw ShapeError("expression expects " + std::to_string(variables_.size()) + " values");
  return eval(*root_, values);
}

Table algebraic_op(const Table& table, std::string_view expression, const std::string& label) {
  if (label.empty()) throw ConfigError("algebraic operation needs a label");
  const Expression e = Expression::parse(expression);
  std::vector<const std::vector<double>*> cols;
  for (const auto& v : e.variables()) {
    if (!table.has(v)) throw DataError("algebraic operation '" + label + "': no column '" + v + "'");
    cols.push_back(&table.column(v));
  }
  std::vector<double> out(table.rows());
  std::vector<double> args(cols.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) args[c] = (*cols[c])[r];
    out[r] = e.evaluate(args);
  }
  Table result = table;
  result.set_column(label, std::move(out));
  return result;
}

}  // namespace meso::graph
