#pragma once

// Hahn symmetric derivative and integral.
//
//   D[f](t) = (f(sigma(t)) - f(sigma^-1(t))) / (sigma(t) - sigma^-1(t)),  t != omega0
//   D[f](omega0) = f'(omega0)
//
//   int_{omega0}^{x} f = (sigma^-1(x) - sigma(x)) * sum_{n>=0} q^{2n+1} f(sigma^{2n+1}(x))
//   int_a^b f = int_{omega0}^b f - int_{omega0}^a f

#include <optional>
#include <utility>
#include <vector>

#include "hahn/lattice.hpp"
#include "hahn/real_fn.hpp"

namespace hahn {

struct SeriesOptions {
  double tol = 1e-10;    // absolute, applied to terms including the prefactor
  int max_terms = 10000;
};

struct SeriesResult {
  double value = 0.0;
  int terms_used = 0;
  double last_term_magnitude = 0.0;
  double tail_bound = 0.0;  // |last term| q^2 / (1 - q^2), advisory
  bool converged = true;
};

/// Value of D[f](t) together with how it was obtained.
struct DerivativeSample {
  double value;
  double sigma_t;
  double sigma_inv_t;
  bool classical;  // true when the omega0 fallback (or a degenerate quotient) fired
};

/// Default step of the classical derivative at omega0: 1e-4 * max(1, |omega0|).
double default_fixed_point_step(const HahnParams& params) noexcept;

/// Central difference with one Richardson step over (h, h/2).
double richardson_derivative(const RealFn& f, double x, double h);

DerivativeSample hahn_derivative_sample(const HahnParams& params, const RealFn& f, double t,
                                        std::optional<double> h0 = std::nullopt);

double hahn_derivative(const HahnParams& params, const RealFn& f, double t,
                       std::optional<double> h0 = std::nullopt);

/// t -> D[f](t) as a function in its own right.
RealFn hahn_derivative_fn(const HahnParams& params, RealFn f,
                          std::optional<double> h0 = std::nullopt);

/// t -> f(sigma(t)).
RealFn shifted(const HahnParams& params, RealFn f, int k = 1);

SeriesResult hahn_integral_from_fixed_point(const HahnParams& params, const RealFn& f, double x,
                                            const SeriesOptions& opts = {});

SeriesResult hahn_integral(const HahnParams& params, const RealFn& f, double a, double b,
                           const SeriesOptions& opts = {});

/// Function given by its values on finitely many points, `default_value`
/// elsewhere. Lookups match a support point within 4 ulp.
class LatticeTableFn {
 public:
  LatticeTableFn(HahnParams params, std::vector<std::pair<double, double>> entries,
                 double default_value = 0.0);

  double operator()(double t) const noexcept;

  const HahnParams& params() const noexcept { return params_; }
  const std::vector<std::pair<double, double>>& entries() const noexcept { return entries_; }
  double default_value() const noexcept { return default_; }

  RealFn to_real_fn() const;

 private:
  HahnParams params_;
  std::vector<std::pair<double, double>> entries_;
  double default_;
};

struct FtcReport {
  double derivative_residual = 0.0;   // max_x |D[F](x) - f(x)| over the lattice
  double derivative_worst_point = 0.0;
  double integral_residual = 0.0;     // |int_a^b D[f] - (f(b) - f(a))|
  double tol = 0.0;
  std::vector<double> non_converged_points;
  bool integral_converged = true;

  bool derivative_ok() const noexcept { return derivative_residual < tol; }
  bool integral_ok() const noexcept { return integral_residual < tol; }
  bool passed() const noexcept {
    return derivative_ok() && integral_ok() && integral_converged && non_converged_points.empty();
  }
};

/// Checks both halves of the fundamental theorem on build_interval(a, b, depth).
/// Sub-integrals are summed to a tolerance relative to their prefactor, so
/// the check is not limited by the absolute series tolerance.
FtcReport ftc_check(const HahnParams& params, const RealFn& f, double a, double b, int depth,
                    double tol);

enum class IbpVariant { sigma_inv, shifted };

struct IbpResult {
  double residual = 0.0;
  bool converged = true;
};

/// sigma_inv: |int f^{sigma^-1} D[g] - (fg|_a^b - int D[f] g^sigma)|
/// shifted:   |int f D[g] - (f^sigma g|_a^b - q int (D[f])^sigma g^sigma)|
IbpResult ibp_residual(const HahnParams& params, const RealFn& f, const RealFn& g, double a,
                       double b, IbpVariant variant, const SeriesOptions& opts = {});

/// ||y||_r: sup |y| (+ sup |D[y]| when r == 1) over build_interval(a, b, depth).
double norm_r(const HahnParams& params, const RealFn& y, double a, double b, int r, int depth);

}  // namespace hahn
