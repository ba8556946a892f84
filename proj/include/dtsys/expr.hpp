#pragma once

// Scalar expression language used for map components and Lyapunov functions.
//
// Grammar (lowest to highest precedence):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// so "-x^2" is -(x^2) and "2^-1" is 0.5. Numbers are decimal with an optional
// exponent. Functions: sin cos exp log abs sqrt (one argument), min max (two).

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtsys {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(const std::string& name);
};

enum class NodeKind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Function { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Number;
  double value = 0.0;      // Number
  std::string name;        // Variable
  Function function{};     // Call
  std::vector<NodePtr> children;
};

/// Immutable expression tree. Copies share structure.
class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool empty() const { return root_ == nullptr; }

  static Expression number(double v);
  static Expression variable(std::string name);
  static Expression negate(Expression a);
  static Expression binary(NodeKind op, Expression a, Expression b);
  static Expression call(Function f, std::vector<Expression> args);

 private:
  NodePtr root_;
};

/// Name → value bindings. Each name may be bound once.
class Environment {
 public:
  Environment() = default;
  Environment(std::initializer_list<std::pair<const std::string, double>> init);

  void bind(const std::string& name, double value);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  double at(const std::string& name) const;
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

Expression parse(std::string_view text);

/// Evaluate against an environment. Non-finite results are returned as-is;
/// callers decide whether they mean divergence.
double evaluate(const Expression& e, const Environment& env);

std::set<std::string> free_variables(const Expression& e);

/// Print with minimal parentheses; parse(print(e)) reproduces the tree.
std::string print(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);

/// Replace variables by expressions (names absent from the map are kept).
Expression substitute(const Expression& e, const std::map<std::string, Expression>& replacements);

std::string_view function_name(Function f);
int function_arity(Function f);

/// Expression flattened to a postfix program over positional slots, for hot
/// loops (trajectories, cell sampling). Constants are folded in at compile
/// time. Evaluation is allocation-free after construction.
class CompiledExpression {
 public:
  CompiledExpression() = default;

  /// `slots` name the positional inputs; every other free variable must be
  /// bound in `constants`.
  CompiledExpression(const Expression& e, std::span<const std::string> slots,
                     const Environment& constants);

  double operator()(std::span<const double> inputs) const;

  std::size_t arity() const { return arity_; }

 private:
  enum class Op : unsigned char { Const, Load, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 };
  struct Instr {
    Op op;
    Function function{};
    std::size_t index = 0;
    double value = 0.0;
  };

  void emit(const Node& n, std::span<const std::string> slots, const Environment& constants,
            std::size_t depth);

  std::vector<Instr> program_;
  std::size_t arity_ = 0;
  std::size_t max_depth_ = 0;
};

}  // namespace dtsys
