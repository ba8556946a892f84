#include "dtsys/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>

namespace dtsys {

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

UnboundVariable::UnboundVariable(const std::string& name)
    : std::runtime_error("unbound variable '" + name + "'") {}

namespace {

struct FunctionInfo {
  std::string_view name;
  Function function;
  int arity;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"abs", Function::Abs, 1},
    {"sqrt", Function::Sqrt, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
}};

const FunctionInfo* lookup_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

Node node_of(NodeKind kind) {
  Node n;
  n.kind = kind;
  return n;
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse_all() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "expected expression, found end of input");
    Expression e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(pos_, std::string("expected operator or end of input, found '") +
                                 text_[pos_] + "'");
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) {
      std::string found = pos_ < text_.size() ? std::string("'") + text_[pos_] + "'"
                                               : std::string("end of input");
      throw ParseError(pos_, std::string("expected '") + c + "', found " + found);
    }
    ++pos_;
  }

  Expression parse_expr() {
    Expression lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      Expression rhs = parse_term();
      lhs = Expression::binary(c == '+' ? NodeKind::Add : NodeKind::Sub, lhs, rhs);
    }
  }

  Expression parse_term() {
    Expression lhs = parse_unary();
    for (;;) {
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      Expression rhs = parse_unary();
      lhs = Expression::binary(c == '*' ? NodeKind::Mul : NodeKind::Div, lhs, rhs);
    }
  }

  Expression parse_unary() {
    if (peek() == '-') {
      ++pos_;
      return Expression::negate(parse_unary());
    }
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (peek() == '^') {
      ++pos_;
      Expression exponent = parse_unary();
      return Expression::binary(NodeKind::Pow, base, exponent);
    }
    return base;
  }

  Expression parse_primary() {
    char c = peek();
    if (c == '\0') throw ParseError(pos_, "expected operand, found end of input");
    if (c == '(') {
      ++pos_;
      Expression inner = parse_expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_name();
    throw ParseError(pos_, std::string("expected operand, found '") + c + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    std::size_t i = pos_;
    bool digits = false;
    while (i < text_.size() && is_digit(text_[i])) { ++i; digits = true; }
    if (i < text_.size() && text_[i] == '.') {
      ++i;
      while (i < text_.size() && is_digit(text_[i])) { ++i; digits = true; }
    }
    if (!digits) throw ParseError(start, "expected digits in numeric literal");
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j >= text_.size() || !is_digit(text_[j])) {
        throw ParseError(j, "expected exponent digits in numeric literal");
      }
      while (j < text_.size() && is_digit(text_[j])) ++j;
      i = j;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + i, value);
    if (ec == std::errc::result_out_of_range) {
      // from_chars refuses overflow; treat as the IEEE result.
      value = std::strtod(std::string(text_.substr(start, i - start)).c_str(), nullptr);
    } else if (ec != std::errc() || ptr != text_.data() + i) {
      throw ParseError(start, "malformed numeric literal");
    }
    pos_ = i;
    return Expression::number(value);
  }

  Expression parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (peek() != '(') return Expression::variable(std::move(name));

    const FunctionInfo* info = lookup_function(name);
    if (info == nullptr) throw ParseError(start, "unknown function '" + name + "'");
    ++pos_;
    std::vector<Expression> args;
    args.push_back(parse_expr());
    while (peek() == ',') {
      ++pos_;
      args.push_back(parse_expr());
    }
    if (static_cast<int>(args.size()) != info->arity) {
      throw ParseError(start, "function '" + name + "' expects " + std::to_string(info->arity) +
                                  " argument(s), got " + std::to_string(args.size()));
    }
    expect(')');
    return Expression::call(info->function, std::move(args));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double apply1(Function f, double a) {
  switch (f) {
    case Function::Sin: return std::sin(a);
    case Function::Cos: return std::cos(a);
    case Function::Exp: return std::exp(a);
    case Function::Log: return std::log(a);
    case Function::Abs: return std::abs(a);
    case Function::Sqrt: return std::sqrt(a);
    default: break;
  }
  return std::nan("");
}

double apply2(Function f, double a, double b) {
  switch (f) {
    case Function::Min: return std::fmin(a, b);
    case Function::Max: return std::fmax(a, b);
    default: break;
  }
  return std::nan("");
}

double eval_node(const Node& n, const Environment& env) {
  switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::Variable: return env.at(n.name);
    case NodeKind::Negate: return -eval_node(*n.children[0], env);
    case NodeKind::Add: return eval_node(*n.children[0], env) + eval_node(*n.children[1], env);
    case NodeKind::Sub: return eval_node(*n.children[0], env) - eval_node(*n.children[1], env);
    case NodeKind::Mul: return eval_node(*n.children[0], env) * eval_node(*n.children[1], env);
    case NodeKind::Div: return eval_node(*n.children[0], env) / eval_node(*n.children[1], env);
    case NodeKind::Pow:
      return std::pow(eval_node(*n.children[0], env), eval_node(*n.children[1], env));
    case NodeKind::Call:
      if (n.children.size() == 1) return apply1(n.function, eval_node(*n.children[0], env));
      return apply2(n.function, eval_node(*n.children[0], env), eval_node(*n.children[1], env));
  }
  return std::nan("");
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::Variable) out.insert(n.name);
  for (const auto& c : n.children) collect(*c, out);
}

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string wrap_if(bool cond, std::string s) { return cond ? "(" + s + ")" : s; }

std::string print_node(const Node& n) {
  switch (n.kind) {
    case NodeKind::Number: {
      if (!std::isfinite(n.value) || std::signbit(n.value)) {
        throw std::invalid_argument("cannot print non-finite or negative literal");
      }
      return format_number(n.value);
    }
    case NodeKind::Variable: return n.name;
    case NodeKind::Negate: {
      const Node& a = *n.children[0];
      return "-" + wrap_if(precedence(a) < 3, print_node(a));
    }
    case NodeKind::Pow: {
      const Node& a = *n.children[0];
      const Node& b = *n.children[1];
      return wrap_if(precedence(a) <= 4, print_node(a)) + "^" +
             wrap_if(precedence(b) < 3, print_node(b));
    }
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const int p = precedence(n);
      const Node& a = *n.children[0];
      const Node& b = *n.children[1];
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? "*"
                                                 : "/";
      return wrap_if(precedence(a) < p, print_node(a)) + op +
             wrap_if(precedence(b) <= p, print_node(b));
    }
    case NodeKind::Call: {
      std::string s(function_name(n.function));
      s += "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) s += ", ";
        s += print_node(*n.children[i]);
      }
      return s + ")";
    }
  }
  return {};
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (!(a.value == b.value) && !(std::isnan(a.value) && std::isnan(b.value))) return false;
      break;
    case NodeKind::Variable:
      if (a.name != b.name) return false;
      break;
    case NodeKind::Call:
      if (a.function != b.function) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!equal_nodes(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

NodePtr substitute_node(const NodePtr& n, const std::map<std::string, Expression>& repl) {
  if (n->kind == NodeKind::Variable) {
    auto it = repl.find(n->name);
    if (it != repl.end()) {
      return std::make_shared<const Node>(it->second.root());
    }
    return n;
  }
  if (n->children.empty()) return n;
  Node copy = *n;
  for (auto& c : copy.children) c = substitute_node(c, repl);
  return make_node(std::move(copy));
}

}  // namespace

Expression Expression::number(double v) {
  Node n = node_of(NodeKind::Number);
  n.value = v;
  return Expression(make_node(std::move(n)));
}

Expression Expression::variable(std::string name) {
  Node n = node_of(NodeKind::Variable);
  n.name = std::move(name);
  return Expression(make_node(std::move(n)));
}

Expression Expression::negate(Expression a) {
  Node n = node_of(NodeKind::Negate);
  n.children.push_back(std::move(a.root_));
  return Expression(make_node(std::move(n)));
}

Expression Expression::binary(NodeKind op, Expression a, Expression b) {
  Node n = node_of(op);
  n.children.push_back(std::move(a.root_));
  n.children.push_back(std::move(b.root_));
  return Expression(make_node(std::move(n)));
}

Expression Expression::call(Function f, std::vector<Expression> args) {
  if (static_cast<int>(args.size()) != function_arity(f)) {
    throw std::invalid_argument("wrong number of arguments for " +
                                std::string(function_name(f)));
  }
  Node n = node_of(NodeKind::Call);
  n.function = f;
  for (auto& a : args) n.children.push_back(std::move(a.root_));
  return Expression(make_node(std::move(n)));
}

Environment::Environment(std::initializer_list<std::pair<const std::string, double>> init) {
  for (const auto& [k, v] : init) bind(k, v);
}

void Environment::bind(const std::string& name, double value) {
  if (!values_.emplace(name, value).second) {
    throw std::invalid_argument("name '" + name + "' bound twice");
  }
}

double Environment::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw UnboundVariable(name);
  return it->second;
}

Expression parse(std::string_view text) { return Parser(text).parse_all(); }

double evaluate(const Expression& e, const Environment& env) { return eval_node(e.root(), env); }

std::set<std::string> free_variables(const Expression& e) {
  std::set<std::string> out;
  if (!e.empty()) collect(e.root(), out);
  return out;
}

std::string print(const Expression& e) { return print_node(e.root()); }

bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return equal_nodes(a.root(), b.root());
}

Expression substitute(const Expression& e, const std::map<std::string, Expression>& replacements) {
  NodePtr root = std::make_shared<const Node>(e.root());
  return Expression(substitute_node(root, replacements));
}

std::string_view function_name(Function f) {
  for (const auto& info : kFunctions) {
    if (info.function == f) return info.name;
  }
  return "?";
}

int function_arity(Function f) {
  for (const auto& info : kFunctions) {
    if (info.function == f) return info.arity;
  }
  return 0;
}

CompiledExpression::CompiledExpression(const Expression& e, std::span<const std::string> slots,
                                       const Environment& constants)
    : arity_(slots.size()) {
  emit(e.root(), slots, constants, 0);
}

void CompiledExpression::emit(const Node& n, std::span<const std::string> slots,
                              const Environment& constants, std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth + 1);
  switch (n.kind) {
    case NodeKind::Number:
      program_.push_back({Op::Const, {}, 0, n.value});
      return;
    case NodeKind::Variable: {
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] == n.name) {
          program_.push_back({Op::Load, {}, i, 0.0});
          return;
        }
      }
      program_.push_back({Op::Const, {}, 0, constants.at(n.name)});
      return;
    }
    case NodeKind::Negate:
      emit(*n.children[0], slots, constants, depth);
      program_.push_back({Op::Neg});
      return;
    case NodeKind::Call:
      emit(*n.children[0], slots, constants, depth);
      if (n.children.size() == 2) {
        emit(*n.children[1], slots, constants, depth + 1);
        program_.push_back({Op::Call2, n.function});
      } else {
        program_.push_back({Op::Call1, n.function});
      }
      return;
    default: break;
  }
  emit(*n.children[0], slots, constants, depth);
  emit(*n.children[1], slots, constants, depth + 1);
  Op op = Op::Add;
  switch (n.kind) {
    case NodeKind::Add: op = Op::Add; break;
    case NodeKind::Sub: op = Op::Sub; break;
    case NodeKind::Mul: op = Op::Mul; break;
    case NodeKind::Div: op = Op::Div; break;
    case NodeKind::Pow: op = Op::Pow; break;
    default: break;
  }
  program_.push_back({op});
}

double CompiledExpression::operator()(std::span<const double> inputs) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (max_depth_ > kInline) {
    heap_stack.resize(max_depth_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack[top++] = in.value; break;
      case Op::Load: stack[top++] = inputs[in.index]; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
      case Op::Sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
      case Op::Mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
      case Op::Div: --top; stack[top - 1] = stack[top - 1] / stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Call1: stack[top - 1] = apply1(in.function, stack[top - 1]); break;
      case Op::Call2:
        --top;
        stack[top - 1] = apply2(in.function, stack[top - 1], stack[top]);
        break;
    }
  }
  return stack[0];
}

}  // namespace dtsys
