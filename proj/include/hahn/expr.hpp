#pragma once

// A small arithmetic language for integrands f(t) and Lagrangians L(t, u, v).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' exponent)?
//   exponent:= (number | '(' expr ')') ('^' exponent)?
//   primary := number | name | func '(' expr ')' | '(' expr ')'
//
// Names: variables t, u, v (only those allowed at parse time), constants q,
// omega, omega0, pi, e, and functions sqrt abs exp log sin cos.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

#include "hahn/lattice.hpp"
#include "hahn/real_fn.hpp"

namespace hahn::expr {

enum class Var { t, u, v };
enum class Constant { q, omega, omega0, pi, e };
enum class UnaryOp { negate };
enum class BinaryOp { add, sub, mul, div, pow };
enum class Func { sqrt, abs, exp, log, sin, cos };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {
  Var var;
};
struct Named {
  Constant constant;
};
struct Unary {
  UnaryOp op;
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func func;
  NodePtr arg;
};

struct Node {
  std::variant<Number, Variable, Named, Unary, Binary, Call> kind;
  std::size_t offset = 0;  // byte offset of the node in the source text
};

/// Immutable parsed expression.
class Expr {
 public:
  Expr(NodePtr root, std::set<Var> free_vars)
      : root_(std::move(root)), free_vars_(std::move(free_vars)) {}

  const Node& root() const noexcept { return *root_; }
  const std::set<Var>& free_vars() const noexcept { return free_vars_; }
  bool uses(Var var) const noexcept { return free_vars_.count(var) != 0; }

 private:
  NodePtr root_;
  std::set<Var> free_vars_;
};

/// Throws ParseError (with byte offset) or UnknownIdentifierError.
Expr parse(std::string_view source, const std::set<Var>& allowed_vars);

/// Values for the free variables; unset entries are an error if referenced.
struct Bindings {
  std::optional<double> t;
  std::optional<double> u;
  std::optional<double> v;
};

/// Throws DomainError on sqrt/log/division violations and EvaluationError on
/// a non-finite result or a missing binding.
double eval(const Expr& expr, const Bindings& bindings, const HahnParams& params);

/// Value and one directional derivative, propagated in forward mode.
struct Dual {
  double value;
  double deriv;
};

/// Exact partial derivative with respect to `var` (forward-mode, not a
/// difference quotient). Same error behaviour as eval.
Dual eval_dual(const Expr& expr, const Bindings& bindings, Var var, const HahnParams& params);

using Evaluator = std::function<double(const Bindings&)>;

/// Default difference step for a variable currently equal to x.
inline double default_fd_step(double x) noexcept { return 1e-6 * std::max(1.0, std::abs(x)); }

/// Central difference (E(var + h) - E(var - h)) / (2h) with a fixed step h > 0.
/// Throws ValidationError for var == t or h <= 0.
Evaluator partial(const Expr& expr, Var var, double h, const HahnParams& params);

/// Central difference with the default step 1e-6 * max(1, |var|).
Evaluator partial(const Expr& expr, Var var, const HahnParams& params);

/// Canonical text; parse(to_string(e)) is structurally identical to e.
std::string to_string(const Expr& expr);

bool structurally_equal(const Node& a, const Node& b) noexcept;

/// f(t) from an expression over {t}. Throws ValidationError if u or v occur.
RealFn to_real_fn(const Expr& expr, const HahnParams& params);

std::string_view name_of(Var var) noexcept;

}  // namespace hahn::expr
