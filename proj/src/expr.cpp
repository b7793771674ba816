#include "hahn/expr.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hahn/error.hpp"

namespace hahn::expr {

namespace {

NodePtr make(std::size_t offset, auto kind) {
  return std::make_shared<const Node>(Node{std::move(kind), offset});
}

class Parser {
 public:
  Parser(std::string_view src, const std::set<Var>& allowed) : src_(src), allowed_(allowed) {}

  Expr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr root = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    }
    return Expr(std::move(root), std::move(used_));
  }

 private:
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

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) {
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      }
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  [[noreturn]] void fail_operand() {
    if (pos_ >= src_.size()) throw ParseError("expected an operand but input ended", pos_);
    throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make(at, Binary{BinaryOp::add, lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make(at, Binary{BinaryOp::sub, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make(at, Binary{BinaryOp::mul, lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make(at, Binary{BinaryOp::div, lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) return make(at, Unary{UnaryOp::negate, parse_unary()});
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return make(at, Binary{BinaryOp::pow, base, parse_exponent()});
    return base;
  }

  NodePtr parse_exponent() {
    skip_ws();
    NodePtr head;
    if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      head = parse_number();
    } else if (accept('(')) {
      head = parse_expr();
      expect(')');
    } else {
      if (pos_ >= src_.size()) throw ParseError("expected an exponent but input ended", pos_);
      throw ParseError("exponent must be a number or a parenthesized expression", pos_);
    }
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return make(at, Binary{BinaryOp::pow, head, parse_exponent()});
    return head;
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    };
    digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      digits();
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t probe = end + 1;
      if (probe < src_.size() && (src_[probe] == '+' || src_[probe] == '-')) ++probe;
      if (probe < src_.size() && std::isdigit(static_cast<unsigned char>(src_[probe]))) {
        end = probe;
        digits();
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (ec != std::errc() || ptr != src_.data() + end || !std::isfinite(value)) {
      throw ParseError("malformed number", start);
    }
    pos_ = end;
    return make(start, Number{value});
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail_operand();
    const char c = src_[pos_];
    const std::size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      const std::string name(src_.substr(pos_, end - pos_));
      pos_ = end;
      return parse_name(name, at);
    }
    fail_operand();
  }

  NodePtr parse_name(const std::string& name, std::size_t at) {
    static const std::pair<const char*, Func> funcs[] = {
        {"sqrt", Func::sqrt}, {"abs", Func::abs}, {"exp", Func::exp},
        {"log", Func::log},   {"sin", Func::sin}, {"cos", Func::cos}};
    for (const auto& [fname, func] : funcs) {
      if (name == fname) {
        expect('(');
        NodePtr arg = parse_expr();
        expect(')');
        return make(at, Call{func, arg});
      }
    }
    static const std::pair<const char*, Constant> constants[] = {
        {"q", Constant::q},   {"omega", Constant::omega}, {"omega0", Constant::omega0},
        {"pi", Constant::pi}, {"e", Constant::e}};
    for (const auto& [cname, constant] : constants) {
      if (name == cname) return make(at, Named{constant});
    }
    static const std::pair<const char*, Var> vars[] = {{"t", Var::t}, {"u", Var::u}, {"v", Var::v}};
    for (const auto& [vname, var] : vars) {
      if (name == vname && allowed_.count(var) != 0) {
        used_.insert(var);
        return make(at, Variable{var});
      }
    }
    throw UnknownIdentifierError(name, at);
  }

  std::string_view src_;
  const std::set<Var>& allowed_;
  std::set<Var> used_;
  std::size_t pos_ = 0;
};

// Scalar arithmetic shared by double and Dual evaluation.
struct DoubleOps {
  using T = double;
  static T lift(double x, bool) { return x; }
  static double value(T x) { return x; }
  static T add(T a, T b) { return a + b; }
  static T sub(T a, T b) { return a - b; }
  static T mul(T a, T b) { return a * b; }
  static T div(T a, T b) { return a / b; }
  static T neg(T a) { return -a; }
  static T pow(T a, T b) { return std::pow(a, b); }
  static T sqrt(T a) { return std::sqrt(a); }
  static T abs(T a) { return std::fabs(a); }
  static T exp(T a) { return std::exp(a); }
  static T log(T a) { return std::log(a); }
  static T sin(T a) { return std::sin(a); }
  static T cos(T a) { return std::cos(a); }
};

struct DualOps {
  using T = Dual;
  static T lift(double x, bool seeded) { return {x, seeded ? 1.0 : 0.0}; }
  static double value(T x) { return x.value; }
  static T add(T a, T b) { return {a.value + b.value, a.deriv + b.deriv}; }
  static T sub(T a, T b) { return {a.value - b.value, a.deriv - b.deriv}; }
  static T mul(T a, T b) { return {a.value * b.value, a.deriv * b.value + a.value * b.deriv}; }
  static T div(T a, T b) {
    return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
  }
  static T neg(T a) { return {-a.value, -a.deriv}; }
  static T pow(T a, T b) {
    const double p = std::pow(a.value, b.value);
    double d = 0.0;
    if (a.deriv != 0.0) d += b.value * std::pow(a.value, b.value - 1.0) * a.deriv;
    if (b.deriv != 0.0) d += p * std::log(a.value) * b.deriv;
    return {p, d};
  }
  static T sqrt(T a) {
    const double s = std::sqrt(a.value);
    return {s, a.deriv == 0.0 ? 0.0 : a.deriv / (2.0 * s)};
  }
  static T abs(T a) {
    return {std::fabs(a.value), a.value < 0.0 ? -a.deriv : a.deriv};
  }
  static T exp(T a) {
    const double x = std::exp(a.value);
    return {x, x * a.deriv};
  }
  static T log(T a) { return {std::log(a.value), a.deriv / a.value}; }
  static T sin(T a) { return {std::sin(a.value), std::cos(a.value) * a.deriv}; }
  static T cos(T a) { return {std::cos(a.value), -std::sin(a.value) * a.deriv}; }
};

template <typename Ops>
class Evaluation {
 public:
  using T = typename Ops::T;

  Evaluation(const Bindings& bindings, const HahnParams& params, std::optional<Var> seed)
      : bindings_(bindings), params_(params), seed_(seed) {}

  T run(const Node& node) const {
    return std::visit([&](const auto& k) { return this->visit(k, node.offset); }, node.kind);
  }

 private:
  T visit(const Number& n, std::size_t) const { return Ops::lift(n.value, false); }

  T visit(const Variable& v, std::size_t offset) const {
    const std::optional<double>& slot =
        v.var == Var::t ? bindings_.t : (v.var == Var::u ? bindings_.u : bindings_.v);
    if (!slot) {
      throw EvaluationError("no value bound for variable '" + std::string(name_of(v.var)) +
                            "' (offset " + std::to_string(offset) + ")");
    }
    return Ops::lift(*slot, seed_ && *seed_ == v.var);
  }

  T visit(const Named& n, std::size_t) const {
    switch (n.constant) {
      case Constant::q: return Ops::lift(params_.q(), false);
      case Constant::omega: return Ops::lift(params_.omega(), false);
      case Constant::omega0: return Ops::lift(params_.omega0(), false);
      case Constant::pi: return Ops::lift(std::numbers::pi, false);
      case Constant::e: return Ops::lift(std::numbers::e, false);
    }
    return Ops::lift(0.0, false);
  }

  T visit(const Unary& u, std::size_t) const { return Ops::neg(run(*u.operand)); }

  T visit(const Binary& b, std::size_t offset) const {
    const T lhs = run(*b.lhs);
    const T rhs = run(*b.rhs);
    switch (b.op) {
      case BinaryOp::add: return Ops::add(lhs, rhs);
      case BinaryOp::sub: return Ops::sub(lhs, rhs);
      case BinaryOp::mul: return Ops::mul(lhs, rhs);
      case BinaryOp::div:
        if (Ops::value(rhs) == 0.0) throw DomainError("division by zero", offset);
        return Ops::div(lhs, rhs);
      case BinaryOp::pow: {
        const double base = Ops::value(lhs);
        const double exponent = Ops::value(rhs);
        if (base < 0.0 && exponent != std::floor(exponent)) {
          throw DomainError("negative base raised to a non-integer power", offset);
        }
        if (base == 0.0 && exponent < 0.0) {
          throw DomainError("zero raised to a negative power", offset);
        }
        return Ops::pow(lhs, rhs);
      }
    }
    return lhs;
  }

  T visit(const Call& c, std::size_t offset) const {
    const T arg = run(*c.arg);
    switch (c.func) {
      case Func::sqrt:
        if (Ops::value(arg) < 0.0) throw DomainError("sqrt of a negative number", offset);
        return Ops::sqrt(arg);
      case Func::abs: return Ops::abs(arg);
      case Func::exp: return Ops::exp(arg);
      case Func::log:
        if (Ops::value(arg) <= 0.0) throw DomainError("log of a non-positive number", offset);
        return Ops::log(arg);
      case Func::sin: return Ops::sin(arg);
      case Func::cos: return Ops::cos(arg);
    }
    return arg;
  }

  const Bindings& bindings_;
  const HahnParams& params_;
  std::optional<Var> seed_;
};

void print(const Node& node, std::ostream& os);

void print_exponent(const Node& node, std::ostream& os) {
  if (std::holds_alternative<Number>(node.kind)) {
    print(node, os);
  } else {
    os << '(';
    print(node, os);
    os << ')';
  }
}

void print(const Node& node, std::ostream& os) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Number>) {
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, k.value);
          os << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        } else if constexpr (std::is_same_v<K, Variable>) {
          os << name_of(k.var);
        } else if constexpr (std::is_same_v<K, Named>) {
          static const char* names[] = {"q", "omega", "omega0", "pi", "e"};
          os << names[static_cast<int>(k.constant)];
        } else if constexpr (std::is_same_v<K, Unary>) {
          os << "(-";
          print(*k.operand, os);
          os << ')';
        } else if constexpr (std::is_same_v<K, Binary>) {
          if (k.op == BinaryOp::pow) {
            os << '(';
            print(*k.lhs, os);
            os << ")^";
            print_exponent(*k.rhs, os);
          } else {
            static const char ops[] = {'+', '-', '*', '/'};
            os << '(';
            print(*k.lhs, os);
            os << ' ' << ops[static_cast<int>(k.op)] << ' ';
            print(*k.rhs, os);
            os << ')';
          }
        } else {
          static const char* names[] = {"sqrt", "abs", "exp", "log", "sin", "cos"};
          os << names[static_cast<int>(k.func)] << '(';
          print(*k.arg, os);
          os << ')';
        }
      },
      node.kind);
}

void check_finite(double value, const Bindings& b) {
  if (std::isfinite(value)) return;
  std::ostringstream os;
  os << "expression evaluated to a non-finite value at";
  if (b.t) os << " t=" << *b.t;
  if (b.u) os << " u=" << *b.u;
  if (b.v) os << " v=" << *b.v;
  throw EvaluationError(os.str());
}

}  // namespace

std::string_view name_of(Var var) noexcept {
  switch (var) {
    case Var::t: return "t";
    case Var::u: return "u";
    case Var::v: return "v";
  }
  return "?";
}

Expr parse(std::string_view source, const std::set<Var>& allowed_vars) {
  return Parser(source, allowed_vars).run();
}

double eval(const Expr& expr, const Bindings& bindings, const HahnParams& params) {
  const double value = Evaluation<DoubleOps>(bindings, params, std::nullopt).run(expr.root());
  check_finite(value, bindings);
  return value;
}

Dual eval_dual(const Expr& expr, const Bindings& bindings, Var var, const HahnParams& params) {
  const Dual d = Evaluation<DualOps>(bindings, params, var).run(expr.root());
  check_finite(d.value, bindings);
  check_finite(d.deriv, bindings);
  return d;
}

namespace {

double central(const Expr& expr, Bindings b, Var var, double h, const HahnParams& params) {
  std::optional<double>& slot = var == Var::u ? b.u : b.v;
  if (!slot) throw EvaluationError("no value bound for the differentiated variable");
  const double x = *slot;
  const double x_up = x + h;
  const double x_down = x - h;
  *slot = x_up;
  const double up = eval(expr, b, params);
  *slot = x_down;
  const double down = eval(expr, b, params);
  return (up - down) / (x_up - x_down);
}

double bound_value(const Bindings& b, Var var) {
  const std::optional<double>& slot = var == Var::u ? b.u : b.v;
  if (!slot) throw EvaluationError("no value bound for the differentiated variable");
  return *slot;
}

}  // namespace

Evaluator partial(const Expr& expr, Var var, double h, const HahnParams& params) {
  if (var == Var::t) throw ValidationError("partial derivatives are taken in u or v only");
  if (!(h > 0.0)) throw ValidationError("difference step must be positive");
  return [expr, var, h, params](const Bindings& b) {
    if (!expr.uses(var)) return 0.0;
    return central(expr, b, var, h, params);
  };
}

Evaluator partial(const Expr& expr, Var var, const HahnParams& params) {
  if (var == Var::t) throw ValidationError("partial derivatives are taken in u or v only");
  return [expr, var, params](const Bindings& b) {
    if (!expr.uses(var)) return 0.0;
    const double h = default_fd_step(bound_value(b, var));
    return central(expr, b, var, h, params);
  };
}

std::string to_string(const Expr& expr) {
  std::ostringstream os;
  print(expr.root(), os);
  return os.str();
}

bool structurally_equal(const Node& a, const Node& b) noexcept {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      [&](const auto& ka) {
        using K = std::decay_t<decltype(ka)>;
        const K& kb = std::get<K>(b.kind);
        if constexpr (std::is_same_v<K, Number>) {
          return std::bit_cast<std::uint64_t>(ka.value) == std::bit_cast<std::uint64_t>(kb.value);
        } else if constexpr (std::is_same_v<K, Variable>) {
          return ka.var == kb.var;
        } else if constexpr (std::is_same_v<K, Named>) {
          return ka.constant == kb.constant;
        } else if constexpr (std::is_same_v<K, Unary>) {
          return ka.op == kb.op && structurally_equal(*ka.operand, *kb.operand);
        } else if constexpr (std::is_same_v<K, Binary>) {
          return ka.op == kb.op && structurally_equal(*ka.lhs, *kb.lhs) &&
                 structurally_equal(*ka.rhs, *kb.rhs);
        } else {
          return ka.func == kb.func && structurally_equal(*ka.arg, *kb.arg);
        }
      },
      a.kind);
}

RealFn to_real_fn(const Expr& expr, const HahnParams& params) {
  if (expr.uses(Var::u) || expr.uses(Var::v)) {
    throw ValidationError("a function of t may not reference u or v");
  }
  return RealFn([expr, params](double t) { return eval(expr, Bindings{t, {}, {}}, params); },
                to_string(expr));
}

}  // namespace hahn::expr
