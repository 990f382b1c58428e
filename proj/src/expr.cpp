#include "riskbounds/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "riskbounds/simd/kernels.hpp"

namespace riskbounds::expr {

SyntaxError::SyntaxError(const std::string& what, std::size_t offset)
    : ConfigError("syntax error at offset " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

UnknownIdentifier::UnknownIdentifier(const std::string& name, std::size_t offset)
    : ConfigError("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(name),
      offset_(offset) {}

DomainError::DomainError(const std::string& node, const std::string& what)
    : Error("domain error in '" + node + "': " + what), node_(node) {}

namespace {

bool is_function(std::string_view name, Op& op) {
  if (name == "exp") op = Op::Exp;
  else if (name == "log") op = Op::Log;
  else if (name == "sqrt") op = Op::Sqrt;
  else if (name == "abs") op = Op::Abs;
  else return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string, std::less<>>& params)
      : src_(src), params_(params) {}

  Node parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("empty expression", pos_);
    Node n = expression();
    skip_ws();
    if (pos_ < src_.size())
      throw SyntaxError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return n;
  }

 private:
  std::string_view src_;
  const std::set<std::string, std::less<>>& params_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Node binary(Op op, Node lhs, Node rhs) {
    Node n;
    n.op = op;
    n.args.push_back(std::move(lhs));
    n.args.push_back(std::move(rhs));
    return n;
  }

  static Node unary_node(Op op, Node arg) {
    Node n;
    n.op = op;
    n.args.push_back(std::move(arg));
    return n;
  }

  Node expression() {
    Node lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Op::Add, std::move(lhs), term());
      else if (accept('-')) lhs = binary(Op::Sub, std::move(lhs), term());
      else return lhs;
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Op::Mul, std::move(lhs), unary());
      else if (accept('/')) lhs = binary(Op::Div, std::move(lhs), unary());
      else return lhs;
    }
  }

  Node unary() {
    if (accept('-')) return unary_node(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  Node power() {
    Node base = primary();
    if (accept('^')) return binary(Op::Pow, std::move(base), unary());
    return base;
  }

  Node primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Node inner = expression();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  Node number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) throw SyntaxError("malformed number '" + text + "'", start);
    Node n;
    n.op = Op::Constant;
    n.value = v;
    return n;
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    Op fn;
    if (is_function(name, fn)) {
      if (!accept('(')) throw SyntaxError("expected '(' after " + name, pos_);
      Node arg = expression();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return unary_node(fn, std::move(arg));
    }
    Node n;
    if (name == "x") {
      n.op = Op::Variable;
      return n;
    }
    if (params_.find(name) == params_.end()) throw UnknownIdentifier(name, start);
    n.op = Op::Parameter;
    n.name = name;
    return n;
  }
};

const char* symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    case Op::Pow: return " ^ ";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    default: return "";
  }
}

bool is_integer(double v) { return std::isfinite(v) && std::nearbyint(v) == v; }

// Shared by the tree walker and the postfix machine so both have the same
// domain rules.  Returns nullptr on success, else a description.
const char* apply_binary(Op op, double a, double b, double& out) {
  switch (op) {
    case Op::Add: out = a + b; return nullptr;
    case Op::Sub: out = a - b; return nullptr;
    case Op::Mul: out = a * b; return nullptr;
    case Op::Div:
      if (b == 0.0) return "division by zero";
      out = a / b;
      return nullptr;
    case Op::Pow:
      if (a == 0.0 && b < 0.0) return "zero raised to a negative power";
      if (a < 0.0 && !is_integer(b)) return "negative base with non-integer exponent";
      out = std::pow(a, b);
      return nullptr;
    default: return "not a binary operator";
  }
}

const char* apply_unary(Op op, double a, double& out) {
  switch (op) {
    case Op::Neg: out = -a; return nullptr;
    case Op::Exp: out = std::exp(a); return nullptr;
    case Op::Log:
      if (!(a > 0.0)) return "logarithm of a non-positive value";
      out = std::log(a);
      return nullptr;
    case Op::Sqrt:
      if (a < 0.0) return "square root of a negative value";
      out = std::sqrt(a);
      return nullptr;
    case Op::Abs: out = std::fabs(a); return nullptr;
    default: return "not a unary operator";
  }
}

double eval_node(const Node& n, double x, const Bindings& b) {
  switch (n.op) {
    case Op::Constant: return n.value;
    case Op::Variable: return x;
    case Op::Parameter: {
      auto it = b.find(n.name);
      if (it == b.end()) throw ConfigError("no binding for parameter '" + n.name + "'");
      return it->second;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: {
      const double lhs = eval_node(n.args[0], x, b);
      const double rhs = eval_node(n.args[1], x, b);
      double out = 0.0;
      if (const char* err = apply_binary(n.op, lhs, rhs, out)) throw DomainError(to_string(n), err);
      return out;
    }
    default: {
      const double a = eval_node(n.args[0], x, b);
      double out = 0.0;
      if (const char* err = apply_unary(n.op, a, out)) throw DomainError(to_string(n), err);
      return out;
    }
  }
}

}  // namespace

std::string to_string(const Node& n) {
  switch (n.op) {
    case Op::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      return buf;
    }
    case Op::Variable: return "x";
    case Op::Parameter: return n.name;
    case Op::Neg: return "(-" + to_string(n.args[0]) + ")";
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Abs: return std::string(symbol(n.op)) + "(" + to_string(n.args[0]) + ")";
    default:
      return "(" + to_string(n.args[0]) + symbol(n.op) + to_string(n.args[1]) + ")";
  }
}

Expression parse(std::string_view source, const std::set<std::string, std::less<>>& parameters) {
  Expression e;
  e.root_ = Parser(source, parameters).parse();
  e.parameters_ = parameters;
  e.source_ = std::string(source);
  return e;
}

double Expression::eval(double x, const Bindings& bindings) const {
  return eval_node(root_, x, bindings);
}

std::string Expression::to_string() const { return expr::to_string(root_); }

double eval(const Expression& e, double x, const Bindings& bindings) { return e.eval(x, bindings); }

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kMaxDepth = 64;
}

Function::Function(const Expression& e, const Bindings& bindings) : text_(e.source()) {
  for (const auto& name : e.parameters())
    if (bindings.find(name) == bindings.end())
      throw ConfigError("no binding for parameter '" + name + "'");
  std::size_t depth = 0;
  compile(e.root(), bindings, depth, depth_);
  if (depth_ > kMaxDepth) throw ConfigError("expression nesting too deep: " + text_);
}

void Function::compile(const Node& n, const Bindings& b, std::size_t& depth,
                       std::size_t& max_depth) {
  for (const Node& a : n.args) compile(a, b, depth, max_depth);
  Instr in{n.op, 0.0, static_cast<std::uint32_t>(labels_.size())};
  labels_.push_back(expr::to_string(n));
  switch (n.op) {
    case Op::Constant:
      in.value = n.value;
      ++depth;
      break;
    case Op::Parameter:
      in.op = Op::Constant;
      in.value = b.find(n.name)->second;
      ++depth;
      break;
    case Op::Variable:
      constant_ = false;
      ++depth;
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      --depth;
      break;
    default:
      break;
  }
  max_depth = std::max(max_depth, depth);
  code_.push_back(in);
}

void Function::domain(std::uint32_t label, const char* what) const {
  throw DomainError(labels_[label], what);
}

double Function::operator()(double x) const {
  std::array<double, kMaxDepth> stack;
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Constant: stack[sp++] = in.value; break;
      case Op::Variable: stack[sp++] = x; break;
      case Op::Add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
      case Op::Sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
      case Op::Mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
      case Op::Div:
      case Op::Pow: {
        --sp;
        double out = 0.0;
        if (const char* err = apply_binary(in.op, stack[sp - 1], stack[sp], out)) domain(in.label, err);
        stack[sp - 1] = out;
        break;
      }
      default: {
        double out = 0.0;
        if (const char* err = apply_unary(in.op, stack[sp - 1], out)) domain(in.label, err);
        stack[sp - 1] = out;
        break;
      }
    }
  }
  return stack[0];
}

void Function::eval_batch(std::span<const double> xs, std::span<double> out,
                          std::vector<double>& scratch) const {
  const std::size_t n = xs.size();
  if (out.size() < n) throw Error("eval_batch: output span too small");
  if (n == 0) return;
  scratch.resize(depth_ * n);
  const simd::KernelTable& k = simd::kernels();
  std::size_t sp = 0;
  auto slot = [&](std::size_t i) { return scratch.data() + i * n; };
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Constant: std::fill_n(slot(sp++), n, in.value); break;
      case Op::Variable: std::copy(xs.begin(), xs.end(), slot(sp++)); break;
      case Op::Add: --sp; k.add(slot(sp - 1), slot(sp), slot(sp - 1), n); break;
      case Op::Sub: --sp; k.sub(slot(sp - 1), slot(sp), slot(sp - 1), n); break;
      case Op::Mul: --sp; k.mul(slot(sp - 1), slot(sp), slot(sp - 1), n); break;
      case Op::Div: {
        --sp;
        const double* d = slot(sp);
        for (std::size_t i = 0; i < n; ++i)
          if (d[i] == 0.0) domain(in.label, "division by zero");
        k.div(slot(sp - 1), slot(sp), slot(sp - 1), n);
        break;
      }
      case Op::Pow: {
        --sp;
        double* a = slot(sp - 1);
        const double* b = slot(sp);
        for (std::size_t i = 0; i < n; ++i) {
          double r = 0.0;
          if (const char* err = apply_binary(Op::Pow, a[i], b[i], r)) domain(in.label, err);
          a[i] = r;
        }
        break;
      }
      case Op::Neg: k.neg(slot(sp - 1), slot(sp - 1), n); break;
      case Op::Abs: k.abs(slot(sp - 1), slot(sp - 1), n); break;
      case Op::Sqrt: {
        const double* a = slot(sp - 1);
        for (std::size_t i = 0; i < n; ++i)
          if (a[i] < 0.0) domain(in.label, "square root of a negative value");
        k.sqrt(slot(sp - 1), slot(sp - 1), n);
        break;
      }
      default: {
        double* a = slot(sp - 1);
        for (std::size_t i = 0; i < n; ++i) {
          double r = 0.0;
          if (const char* err = apply_unary(in.op, a[i], r)) domain(in.label, err);
          a[i] = r;
        }
        break;
      }
    }
  }
  std::copy_n(slot(0), n, out.begin());
}

}  // namespace riskbounds::expr
