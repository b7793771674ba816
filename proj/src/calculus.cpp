#include "hahn/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "hahn/error.hpp"

namespace hahn {

namespace {

double checked(double value, const char* what, double at) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " is not finite at t=" << at;
    throw EvaluationError(os.str());
  }
  return value;
}

void validate(const SeriesOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("series tolerance must be positive");
  if (opts.max_terms < 1) throw ValidationError("max_terms must be >= 1");
}

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// True while some support point lies strictly between p and omega0, i.e. can
// still be hit by the orbit that is currently at p.
bool support_ahead(const FiniteSupport& support, double p, double w0) {
  const double gap = p - w0;
  return std::any_of(support.points.begin(), support.points.end(), [&](double s) {
    const double ds = s - w0;
    return ds * gap > 0.0 && std::fabs(ds) < std::fabs(gap) && !within_ulps(s, p) &&
           !within_ulps(s, w0);
  });
}

}  // namespace

double default_fixed_point_step(const HahnParams& params) noexcept {
  return 1e-4 * std::max(1.0, std::fabs(params.omega0()));
}

double richardson_derivative(const RealFn& f, double x, double h) {
  if (!(h > 0.0)) throw ValidationError("difference step must be positive");
  // Divide by the spacing of the points actually sampled, not by 2 * step.
  auto central = [&](double step) {
    const double up = x + step;
    const double down = x - step;
    return (f(up) - f(down)) / (up - down);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

DerivativeSample hahn_derivative_sample(const HahnParams& params, const RealFn& f, double t,
                                        std::optional<double> h0) {
  const double up = sigma(params, t);
  const double down = sigma_inv(params, t);
  if (is_fixed_point(params, t) || up == down) {
    const double h = h0.value_or(default_fixed_point_step(params));
    const double value = checked(richardson_derivative(f, t, h), "Hahn derivative", t);
    return {value, up, down, true};
  }
  const double value = checked((f(up) - f(down)) / (up - down), "Hahn derivative", t);
  return {value, up, down, false};
}

double hahn_derivative(const HahnParams& params, const RealFn& f, double t,
                       std::optional<double> h0) {
  return hahn_derivative_sample(params, f, t, h0).value;
}

RealFn hahn_derivative_fn(const HahnParams& params, RealFn f, std::optional<double> h0) {
  std::string label = "D[" + f.label() + "]";
  return RealFn([params, f = std::move(f), h0](double t) { return hahn_derivative(params, f, t, h0); },
                std::move(label));
}

RealFn shifted(const HahnParams& params, RealFn f, int k) {
  return RealFn([params, f = std::move(f), k](double t) { return f(sigma(params, k, t)); });
}

SeriesResult hahn_integral_from_fixed_point(const HahnParams& params, const RealFn& f, double x,
                                            const SeriesOptions& opts) {
  validate(opts);
  SeriesResult result;
  if (is_fixed_point(params, x)) return result;

  const double q = params.q();
  const double w0 = params.omega0();
  const double offset = x - w0;
  // sigma^-1(x) - sigma(x), formed from the offset so that it keeps full
  // relative precision when x is close to omega0.
  const double prefactor = (1.0 / q - q) * offset;
  const FiniteSupport* support = f.support();
  const bool table_cutoff = support != nullptr && support->default_value == 0.0;

  Accumulator sum;
  int small_run = 0;
  result.converged = false;
  for (int n = 0; n < opts.max_terms; ++n) {
    const double weight = std::pow(q, 2 * n + 1);
    const double point = w0 + weight * offset;
    const double term = checked(prefactor * weight * f(point), "integrand term", point);
    sum.add(term);
    result.terms_used = n + 1;
    result.last_term_magnitude = std::fabs(term);

    if (table_cutoff && !support_ahead(*support, point, w0)) {
      // Every remaining sample is the default value 0.
      result.last_term_magnitude = 0.0;
      result.converged = true;
      break;
    }
    small_run = result.last_term_magnitude < opts.tol ? small_run + 1 : 0;
    if (small_run >= 3) {
      result.converged = true;
      break;
    }
  }
  result.value = sum.value();
  result.tail_bound = result.last_term_magnitude * q * q / (1.0 - q * q);
  return result;
}

SeriesResult hahn_integral(const HahnParams& params, const RealFn& f, double a, double b,
                           const SeriesOptions& opts) {
  validate(opts);
  if (a == b) return SeriesResult{};
  const SeriesResult upper = hahn_integral_from_fixed_point(params, f, b, opts);
  const SeriesResult lower = hahn_integral_from_fixed_point(params, f, a, opts);
  SeriesResult result;
  result.value = upper.value - lower.value;
  result.terms_used = upper.terms_used + lower.terms_used;
  result.last_term_magnitude = std::max(upper.last_term_magnitude, lower.last_term_magnitude);
  result.tail_bound = upper.tail_bound + lower.tail_bound;
  result.converged = upper.converged && lower.converged;
  return result;
}

LatticeTableFn::LatticeTableFn(HahnParams params, std::vector<std::pair<double, double>> entries,
                               double default_value)
    : params_(params), entries_(std::move(entries)), default_(default_value) {
  for (const auto& [point, value] : entries_) {
    if (!std::isfinite(point) || !std::isfinite(value)) {
      throw ValidationError("lattice table entries must be finite");
    }
  }
  if (!std::isfinite(default_)) throw ValidationError("lattice table default must be finite");
}

double LatticeTableFn::operator()(double t) const noexcept {
  for (const auto& [point, value] : entries_) {
    if (within_ulps(point, t)) return value;
  }
  return default_;
}

RealFn LatticeTableFn::to_real_fn() const {
  auto support = std::make_shared<FiniteSupport>();
  support->default_value = default_;
  std::ostringstream label;
  label.precision(17);
  label << "table{";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    support->points.push_back(entries_[i].first);
    label << (i ? "," : "") << entries_[i].first << ':' << entries_[i].second;
  }
  label << "}";
  LatticeTableFn copy = *this;
  return RealFn([copy](double t) { return copy(t); }, std::move(support), label.str());
}

FtcReport ftc_check(const HahnParams& params, const RealFn& f, double a, double b, int depth,
                    double tol) {
  const HahnInterval lattice = build_interval(params, a, b, depth);
  FtcReport report;
  report.tol = tol;

  const double q = params.q();
  const double w0 = params.omega0();
  auto failed = std::make_shared<bool>(false);
  const RealFn primitive([params, f, q, w0, failed](double s) {
    SeriesOptions inner;
    inner.tol = std::max(1e-15 * std::fabs((1.0 / q - q) * (s - w0)),
                         std::numeric_limits<double>::min());
    const SeriesResult r = hahn_integral_from_fixed_point(params, f, s, inner);
    if (!r.converged) *failed = true;
    return r.value;
  });

  for (double x : lattice.points) {
    *failed = false;
    const double residual = std::fabs(hahn_derivative(params, primitive, x) - f(x));
    if (*failed) report.non_converged_points.push_back(x);
    if (residual > report.derivative_residual || std::isnan(residual)) {
      report.derivative_residual = residual;
      report.derivative_worst_point = x;
    }
  }

  SeriesOptions outer;
  outer.tol = 1e-14;
  const SeriesResult integral = hahn_integral(params, hahn_derivative_fn(params, f), a, b, outer);
  report.integral_converged = integral.converged;
  report.integral_residual = std::fabs(integral.value - (f(b) - f(a)));
  return report;
}

IbpResult ibp_residual(const HahnParams& params, const RealFn& f, const RealFn& g, double a,
                       double b, IbpVariant variant, const SeriesOptions& opts) {
  const RealFn df = hahn_derivative_fn(params, f);
  const RealFn dg = hahn_derivative_fn(params, g);
  const double q = params.q();

  SeriesResult lhs;
  SeriesResult rhs_integral;
  double boundary = 0.0;
  if (variant == IbpVariant::sigma_inv) {
    lhs = hahn_integral(
        params, RealFn([&](double t) { return f(sigma_inv(params, t)) * dg(t); }), a, b, opts);
    rhs_integral = hahn_integral(
        params, RealFn([&](double t) { return df(t) * g(sigma(params, t)); }), a, b, opts);
    boundary = f(b) * g(b) - f(a) * g(a);
  } else {
    lhs = hahn_integral(params, RealFn([&](double t) { return f(t) * dg(t); }), a, b, opts);
    rhs_integral = hahn_integral(
        params,
        RealFn([&](double t) {
          const double s = sigma(params, t);
          return q * df(s) * g(s);
        }),
        a, b, opts);
    boundary = f(sigma(params, b)) * g(b) - f(sigma(params, a)) * g(a);
  }
  return IbpResult{std::fabs(lhs.value - (boundary - rhs_integral.value)),
                   lhs.converged && rhs_integral.converged};
}

double norm_r(const HahnParams& params, const RealFn& y, double a, double b, int r, int depth) {
  if (r != 0 && r != 1) throw ValidationError("norm order r must be 0 or 1");
  const HahnInterval lattice = build_interval(params, a, b, depth);
  double sup_value = 0.0;
  double sup_deriv = 0.0;
  for (double t : lattice.points) {
    sup_value = std::max(sup_value, std::fabs(checked(y(t), "function", t)));
    if (r == 1) sup_deriv = std::max(sup_deriv, std::fabs(hahn_derivative(params, y, t)));
  }
  return sup_value + sup_deriv;
}

}  // namespace hahn
