#pragma once

// Variational problems over the Hahn lattice:
//
//   minimize  L[y] = int_a^b L(t, y(sigma(t)), D[y](t)) dt,   y(a) = alpha, y(b) = beta
//
// with the Euler-Lagrange residual
//
//   R(t) = d2L(t, y^sigma(t), D[y](t)) - D[tau -> d3L(sigma(tau), y^{sigma^2}(tau), D[y](sigma(tau)))](t).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hahn/calculus.hpp"
#include "hahn/expr.hpp"
#include "hahn/lattice.hpp"
#include "hahn/real_fn.hpp"

namespace hahn {

class Lagrangian {
 public:
  using Fn = std::function<double(double t, double u, double v)>;

  explicit Lagrangian(Fn value, std::optional<Fn> d2 = std::nullopt,
                      std::optional<Fn> d3 = std::nullopt, double fd_step = 1e-6);

  double operator()(double t, double u, double v) const;
  /// dL/du; central difference with step fd_step * max(1, |u|) when absent.
  double d2(double t, double u, double v) const;
  /// dL/dv; central difference with step fd_step * max(1, |v|) when absent.
  double d3(double t, double u, double v) const;

  bool has_analytic_d2() const noexcept { return d2_.has_value(); }
  bool has_analytic_d3() const noexcept { return d3_.has_value(); }

 private:
  Fn value_;
  std::optional<Fn> d2_;
  std::optional<Fn> d3_;
  double fd_step_;
};

enum class PartialMode { forward_mode, central_difference };

/// Lagrangian from an expression over {t, u, v}. forward_mode attaches exact
/// partials; central_difference leaves them to the difference fallback.
Lagrangian lagrangian_from_expr(const expr::Expr& expr, const HahnParams& params,
                                PartialMode mode = PartialMode::forward_mode);

struct BoundaryConditions {
  double a;
  double b;
  double alpha;
  double beta;

  /// Throws ValidationError unless a < b.
  void validate() const;
};

struct ELReport {
  std::vector<double> points;
  std::vector<double> residuals;
  std::vector<bool> converged;
  double max_abs_residual = 0.0;
  std::vector<double> non_converged_points;
};

struct ELOptions {
  /// Step of the classical derivative used for the outer operator at omega0.
  /// The differentiated function already contains a difference quotient, so
  /// the default is larger than for a plain derivative.
  std::optional<double> outer_fixed_point_step;
};

double default_nested_fixed_point_step(const HahnParams& params) noexcept;

ELReport el_residual(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                     const BoundaryConditions& bc, int depth, const ELOptions& opts = {});

/// t -> L(t, y(sigma(t)), D[y](t)) integrated over [a, b].
SeriesResult action(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                    const BoundaryConditions& bc, const SeriesOptions& opts = {});

/// int_a^b [d2L eta^sigma + d3L D[eta]]. Throws ValidationError unless
/// |eta(a)| and |eta(b)| are at most 1e-9.
SeriesResult first_variation(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                             const RealFn& eta, const BoundaryConditions& bc,
                             const SeriesOptions& opts = {});

/// (phi(eps) - phi(-eps)) / (2 eps) with phi(e) = action(y + e eta).
double phi_prime_fd(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                    const RealFn& eta, const BoundaryConditions& bc, double eps,
                    const SeriesOptions& opts = {});

/// y + scale * eta.
RealFn perturbed(RealFn y, RealFn eta, double scale = 1.0);

/// Piecewise-linear interpolant through (nodes[i], values[i]), zero outside
/// [bc.a, bc.b] and pinned to zero at both endpoints. Nodes must lie in (a, b).
RealFn piecewise_linear_variation(const BoundaryConditions& bc, std::vector<double> nodes,
                                  std::vector<double> values);

enum class Convexity { convex, concave, neither, inconclusive };

std::string to_string(Convexity c);

struct ConvexitySample {
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;
  double gap = 0.0;  // L(t,u+u1,v+v1) - L(t,u,v) - d2L u1 - d3L v1
};

struct ConvexityBox {
  double u_lo;
  double u_hi;
  double v_lo;
  double v_hi;
};

struct ConvexityReport {
  Convexity verdict = Convexity::inconclusive;
  ConvexitySample most_negative;  // worst violation of convexity
  ConvexitySample most_positive;  // worst violation of concavity
  long samples = 0;
  long failures = 0;
};

/// Sampling evidence for joint convexity in (u, v): every grid base point is
/// paired with every other grid point of the box. Violations are measured
/// against 1e-9; more than 1% failed evaluations gives inconclusive.
ConvexityReport joint_convexity_check(const Lagrangian& lag, const std::vector<double>& t_samples,
                                      const ConvexityBox& box, int grid);

enum class LemmaVerdict { zero_function, witness };

struct LemmaProbe {
  double point;     // lattice point p where f is tested
  double integral;  // int_a^b f h^sigma for the single-point h at sigma(p)
};

struct FundamentalLemmaReport {
  LemmaVerdict verdict = LemmaVerdict::zero_function;
  double witness = 0.0;
  double witness_value = 0.0;  // f(witness)
  double integral = 0.0;       // the detecting integral (0 for an omega0 witness found by sampling)
  std::vector<LemmaProbe> probes;
};

FundamentalLemmaReport fundamental_lemma_oracle(const HahnParams& params, const RealFn& f,
                                                const BoundaryConditions& bc, int depth,
                                                double tol);

/// L(t, u, v) = v^2 + q u + t v with its exact partials.
Lagrangian leitmann_lagrangian(const HahnParams& params);

/// G(tau, ybar) = 2c ybar + (c^2 + q d) tau + sigma(tau) ybar + c sigma(tau) tau.
double leitmann_gauge(const HahnParams& params, double c, double d, double tau, double ybar);

struct LeitmannSolution {
  double c;
  double d;
  RealFn y;
  /// max over the lattice of |L(t, y^sigma, D[y]) - (D[ybar])^2 - D[G(., ybar)](t)| for
  /// ybar = y - (c t + d) = 0.
  double gauge_residual;
};

/// Affine minimizer y = c t + d with c a + d = alpha and c b + d = beta.
LeitmannSolution leitmann_affine_solve(const HahnParams& params, const BoundaryConditions& bc,
                                       int depth = 12);

struct GaugeCheck {
  double action_gap;     // action(y) - action_bar(ybar)
  double boundary_gap;   // G(b, ybar(b)) - G(a, ybar(a))
};

/// For y = ybar + c t + d, compares the action gap with the gauge boundary terms.
GaugeCheck leitmann_gauge_check(const HahnParams& params, const BoundaryConditions& bc,
                                const RealFn& ybar, const SeriesOptions& opts = {});

}  // namespace hahn
