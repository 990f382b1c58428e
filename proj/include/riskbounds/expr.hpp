#pragma once

// Scalar expressions of one variable `x` with named parameters, as used for
// the drift, volatility and short-rate functions of a model file.
//
// Grammar (highest precedence first):
//   primary  := number | x | parameter | func '(' expr ')' | '(' expr ')'
//   power    := primary ('^' unary)?          (right associative)
//   unary    := '-' unary | '+' unary | power
//   term     := unary (('*' | '/') unary)*
//   expr     := term (('+' | '-') term)*
// with func one of exp, log, sqrt, abs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "riskbounds/error.hpp"

namespace riskbounds::expr {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Parameter,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Log,
  Sqrt,
  Abs,
};

struct Node {
  Op op = Op::Constant;
  double value = 0.0;        // Constant
  std::string name;          // Parameter
  std::vector<Node> args;    // operands, left to right

  friend bool operator==(const Node&, const Node&) = default;
};

class SyntaxError : public ConfigError {
 public:
  SyntaxError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public ConfigError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset);
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

// Raised when evaluation leaves the real domain of an operation.  The
// message names the offending sub-expression.
class DomainError : public Error {
 public:
  DomainError(const std::string& node, const std::string& what);
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

using Bindings = std::map<std::string, double, std::less<>>;

class Expression {
 public:
  Expression() = default;

  const Node& root() const noexcept { return root_; }
  const std::set<std::string, std::less<>>& parameters() const noexcept { return parameters_; }
  const std::string& source() const noexcept { return source_; }

  // Tree-walking evaluation; the reference semantics for Function below.
  double eval(double x, const Bindings& bindings) const;

  // Fully parenthesised text that parses back to the same tree.
  std::string to_string() const;

 private:
  friend Expression parse(std::string_view, const std::set<std::string, std::less<>>&);
  Node root_;
  std::set<std::string, std::less<>> parameters_;
  std::string source_;
};

Expression parse(std::string_view source,
                 const std::set<std::string, std::less<>>& parameters = {});

double eval(const Expression& e, double x, const Bindings& bindings);

std::string to_string(const Node& node);

// An expression with its parameters bound, flattened to postfix code.
// Immutable and safe for concurrent use; batch evaluation needs a
// caller-owned scratch buffer.
class Function {
 public:
  Function() = default;
  Function(const Expression& e, const Bindings& bindings);

  double operator()(double x) const;

  // out[i] = f(xs[i]).  `scratch` is resized as needed.
  void eval_batch(std::span<const double> xs, std::span<double> out,
                  std::vector<double>& scratch) const;

  // True when the function does not depend on x.
  bool is_constant() const noexcept { return constant_; }
  const std::string& text() const noexcept { return text_; }

 private:
  struct Instr {
    Op op;
    double value;
    std::uint32_t label;  // index into labels_, for error messages
  };
  std::vector<Instr> code_;
  std::vector<std::string> labels_;
  std::size_t depth_ = 0;
  bool constant_ = true;
  std::string text_;

  void compile(const Node& n, const Bindings& b, std::size_t& depth, std::size_t& max_depth);
  [[noreturn]] void domain(std::uint32_t label, const char* what) const;
};

}  // namespace riskbounds::expr
