#include "hahn/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "hahn/error.hpp"

namespace hahn {

namespace {

std::string describe(double t, double u, double v) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << t << ", u=" << u << ", v=" << v << ")";
  return os.str();
}

double finite_or_throw(double value, const char* what, double t, double u, double v) {
  if (!std::isfinite(value)) {
    throw EvaluationError(std::string(what) + " is not finite at " + describe(t, u, v));
  }
  return value;
}

}  // namespace

Lagrangian::Lagrangian(Fn value, std::optional<Fn> d2, std::optional<Fn> d3, double fd_step)
    : value_(std::move(value)), d2_(std::move(d2)), d3_(std::move(d3)), fd_step_(fd_step) {
  if (!value_) throw ValidationError("Lagrangian requires a value function");
  if (!(fd_step_ > 0.0)) throw ValidationError("Lagrangian difference step must be positive");
}

double Lagrangian::operator()(double t, double u, double v) const {
  return finite_or_throw(value_(t, u, v), "Lagrangian", t, u, v);
}

double Lagrangian::d2(double t, double u, double v) const {
  if (d2_) return finite_or_throw((*d2_)(t, u, v), "dL/du", t, u, v);
  const double h = fd_step_ * std::max(1.0, std::fabs(u));
  const double up = u + h;
  const double down = u - h;
  return finite_or_throw(((*this)(t, up, v) - (*this)(t, down, v)) / (up - down), "dL/du", t, u, v);
}

double Lagrangian::d3(double t, double u, double v) const {
  if (d3_) return finite_or_throw((*d3_)(t, u, v), "dL/dv", t, u, v);
  const double h = fd_step_ * std::max(1.0, std::fabs(v));
  const double up = v + h;
  const double down = v - h;
  return finite_or_throw(((*this)(t, u, up) - (*this)(t, u, down)) / (up - down), "dL/dv", t, u, v);
}

Lagrangian lagrangian_from_expr(const expr::Expr& e, const HahnParams& params, PartialMode mode) {
  using expr::Bindings;
  using expr::Var;
  Lagrangian::Fn value = [e, params](double t, double u, double v) {
    return expr::eval(e, Bindings{t, u, v}, params);
  };
  if (mode == PartialMode::central_difference) return Lagrangian(std::move(value));
  Lagrangian::Fn du = [e, params](double t, double u, double v) {
    return expr::eval_dual(e, Bindings{t, u, v}, Var::u, params).deriv;
  };
  Lagrangian::Fn dv = [e, params](double t, double u, double v) {
    return expr::eval_dual(e, Bindings{t, u, v}, Var::v, params).deriv;
  };
  return Lagrangian(std::move(value), std::move(du), std::move(dv));
}

void BoundaryConditions::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw ValidationError("boundary conditions require finite a < b");
  }
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ValidationError("boundary values must be finite");
  }
}

double default_nested_fixed_point_step(const HahnParams& params) noexcept {
  return 2e-3 * std::max(1.0, std::fabs(params.omega0()));
}

ELReport el_residual(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                     const BoundaryConditions& bc, int depth, const ELOptions& opts) {
  bc.validate();
  const HahnInterval lattice = build_interval(params, bc.a, bc.b, depth);
  const RealFn dy = hahn_derivative_fn(params, y);
  const RealFn momentum([&](double tau) {
    const double s = sigma(params, tau);
    return lag.d3(s, y(sigma(params, 2, tau)), dy(s));
  });
  const double outer_step = opts.outer_fixed_point_step.value_or(default_nested_fixed_point_step(params));

  ELReport report;
  for (double t : lattice.points) {
    double residual = 0.0;
    try {
      const double lhs = lag.d2(t, y(sigma(params, t)), dy(t));
      const double rhs = hahn_derivative(params, momentum, t, outer_step);
      residual = lhs - rhs;
    } catch (const Error& err) {
      std::ostringstream os;
      os.precision(17);
      os << err.what() << " (Euler-Lagrange residual at lattice point t=" << t << ")";
      throw EvaluationError(os.str());
    }
    const bool ok = std::isfinite(residual);
    report.points.push_back(t);
    report.residuals.push_back(residual);
    report.converged.push_back(ok);
    if (ok) {
      report.max_abs_residual = std::max(report.max_abs_residual, std::fabs(residual));
    } else {
      report.non_converged_points.push_back(t);
    }
  }
  return report;
}

SeriesResult action(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                    const BoundaryConditions& bc, const SeriesOptions& opts) {
  bc.validate();
  const RealFn dy = hahn_derivative_fn(params, y);
  const RealFn integrand([&](double t) { return lag(t, y(sigma(params, t)), dy(t)); });
  return hahn_integral(params, integrand, bc.a, bc.b, opts);
}

SeriesResult first_variation(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                             const RealFn& eta, const BoundaryConditions& bc,
                             const SeriesOptions& opts) {
  bc.validate();
  if (std::fabs(eta(bc.a)) > 1e-9 || std::fabs(eta(bc.b)) > 1e-9) {
    throw ValidationError("variation must vanish at both endpoints");
  }
  const RealFn dy = hahn_derivative_fn(params, y);
  const RealFn deta = hahn_derivative_fn(params, eta);
  const RealFn integrand([&](double t) {
    const double s = sigma(params, t);
    const double u = y(s);
    const double v = dy(t);
    return lag.d2(t, u, v) * eta(s) + lag.d3(t, u, v) * deta(t);
  });
  return hahn_integral(params, integrand, bc.a, bc.b, opts);
}

RealFn perturbed(RealFn y, RealFn eta, double scale) {
  return RealFn([y = std::move(y), eta = std::move(eta), scale](double t) {
    return y(t) + scale * eta(t);
  });
}

double phi_prime_fd(const HahnParams& params, const Lagrangian& lag, const RealFn& y,
                    const RealFn& eta, const BoundaryConditions& bc, double eps,
                    const SeriesOptions& opts) {
  if (!(eps > 0.0)) throw ValidationError("difference step must be positive");
  const double up = action(params, lag, perturbed(y, eta, eps), bc, opts).value;
  const double down = action(params, lag, perturbed(y, eta, -eps), bc, opts).value;
  return (up - down) / (2.0 * eps);
}

RealFn piecewise_linear_variation(const BoundaryConditions& bc, std::vector<double> nodes,
                                  std::vector<double> values) {
  bc.validate();
  if (nodes.size() != values.size()) throw ValidationError("nodes and values differ in length");
  std::vector<std::pair<double, double>> knots;
  knots.emplace_back(bc.a, 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] > bc.a && nodes[i] < bc.b)) {
      throw ValidationError("variation nodes must lie strictly inside (a, b)");
    }
    knots.emplace_back(nodes[i], values[i]);
  }
  knots.emplace_back(bc.b, 0.0);
  std::sort(knots.begin(), knots.end());
  return RealFn([knots = std::move(knots)](double t) {
    if (t <= knots.front().first || t >= knots.back().first) return 0.0;
    const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                     [](double x, const auto& k) { return x < k.first; });
    const auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  });
}

std::string to_string(Convexity c) {
  switch (c) {
    case Convexity::convex: return "CONVEX";
    case Convexity::concave: return "CONCAVE";
    case Convexity::neither: return "NEITHER";
    case Convexity::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

ConvexityReport joint_convexity_check(const Lagrangian& lag, const std::vector<double>& t_samples,
                                      const ConvexityBox& box, int grid) {
  if (grid < 2) throw ValidationError("convexity grid must have at least 2 points per axis");
  if (!(box.u_lo < box.u_hi) || !(box.v_lo < box.v_hi)) {
    throw ValidationError("convexity box must satisfy u_lo < u_hi and v_lo < v_hi");
  }
  constexpr double kSlack = 1e-9;
  auto node = [grid](double lo, double hi, int i) {
    return i == grid - 1 ? hi : lo + (hi - lo) * i / (grid - 1);
  };

  ConvexityReport report;
  report.most_negative.gap = std::numeric_limits<double>::infinity();
  report.most_positive.gap = -std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const double u = node(box.u_lo, box.u_hi, i);
        const double v = node(box.v_lo, box.v_hi, j);
        double base = 0.0, du = 0.0, dv = 0.0;
        try {
          base = lag(t, u, v);
          du = lag.d2(t, u, v);
          dv = lag.d3(t, u, v);
        } catch (const Error&) {
          const long skipped = static_cast<long>(grid) * grid - 1;
          report.samples += skipped;
          report.failures += skipped;
          continue;
        }
        for (int k = 0; k < grid; ++k) {
          for (int l = 0; l < grid; ++l) {
            if (k == i && l == j) continue;
            ++report.samples;
            const double u2 = node(box.u_lo, box.u_hi, k);
            const double v2 = node(box.v_lo, box.v_hi, l);
            double gap = 0.0;
            try {
              gap = lag(t, u2, v2) - base - du * (u2 - u) - dv * (v2 - v);
            } catch (const Error&) {
              ++report.failures;
              continue;
            }
            const ConvexitySample sample{t, u, v, u2 - u, v2 - v, gap};
            if (gap < report.most_negative.gap) report.most_negative = sample;
            if (gap > report.most_positive.gap) report.most_positive = sample;
          }
        }
      }
    }
  }

  const long good = report.samples - report.failures;
  if (good == 0 || report.failures * 100 > report.samples) {
    report.verdict = Convexity::inconclusive;
  } else if (report.most_negative.gap >= -kSlack) {
    report.verdict = Convexity::convex;
  } else if (report.most_positive.gap <= kSlack) {
    report.verdict = Convexity::concave;
  } else {
    report.verdict = Convexity::neither;
  }
  return report;
}

namespace {

// Function equal to `value` at `point` (matched relative to the distance from
// omega0) and zero elsewhere.
RealFn spike(const HahnParams& params, double point, double value) {
  const double w0 = params.omega0();
  const double radius = 1e-9 * std::fabs(point - w0);
  return RealFn([point, value, radius](double t) {
    return std::fabs(t - point) <= radius ? value : 0.0;
  });
}

}  // namespace

FundamentalLemmaReport fundamental_lemma_oracle(const HahnParams& params, const RealFn& f,
                                                const BoundaryConditions& bc, int depth,
                                                double tol) {
  bc.validate();
  if (depth < 1) throw ValidationError("depth must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");

  SeriesOptions opts;
  opts.tol = std::min(tol, 1e-12) * 1e-3;
  FundamentalLemmaReport report;
  bool found = false;

  // One probe per lattice point p = sigma^{2k+1}(x): h is supported at sigma(p)
  // with value f(p), so the integrand f h^sigma is supported at p.
  for (double x : {bc.b, bc.a}) {
    if (is_fixed_point(params, x)) continue;
    for (int k = 0; k < depth; ++k) {
      const double p = sigma(params, 2 * k + 1, x);
      const double fp = f(p);
      const RealFn h_sigma = spike(params, p, fp);
      const RealFn integrand(
          [&](double t) {
            const double hv = h_sigma(t);
            return hv == 0.0 ? 0.0 : f(t) * hv;
          },
          std::make_shared<FiniteSupport>(FiniteSupport{{p}, 0.0}), "f*h^sigma");
      const double integral = hahn_integral(params, integrand, bc.a, bc.b, opts).value;
      report.probes.push_back({p, integral});
      if (!found && std::fabs(integral) > tol) {
        found = true;
        report.verdict = LemmaVerdict::witness;
        report.witness = p;
        report.witness_value = fp;
        report.integral = integral;
      }
    }
  }
  if (found) return report;

  // Limit point: f(omega0) is approached by both orbits (continuity at omega0).
  const double w0 = params.omega0();
  const double f0 = f(w0);
  if (std::fabs(f0) > tol) {
    report.verdict = LemmaVerdict::witness;
    report.witness = w0;
    report.witness_value = f0;
    double integral = 0.0;
    for (double x : {bc.b, bc.a}) {
      if (is_fixed_point(params, x)) continue;
      const double p = sigma(params, 2 * depth + 1, x);
      const double sign = x == bc.b ? 1.0 : -1.0;
      const double prefactor = sigma_inv(params, x) - sigma(params, x);
      integral += sign * prefactor * std::pow(params.q(), 2 * depth + 1) * f(p) * f(p);
    }
    report.integral = integral;
  }
  return report;
}

Lagrangian leitmann_lagrangian(const HahnParams& params) {
  const double q = params.q();
  return Lagrangian([q](double t, double u, double v) { return v * v + q * u + t * v; },
                    [q](double, double, double) { return q; },
                    [](double t, double, double v) { return 2.0 * v + t; });
}

double leitmann_gauge(const HahnParams& params, double c, double d, double tau, double ybar) {
  const double s = sigma(params, tau);
  return 2.0 * c * ybar + (c * c + params.q() * d) * tau + s * ybar + c * s * tau;
}

LeitmannSolution leitmann_affine_solve(const HahnParams& params, const BoundaryConditions& bc,
                                       int depth) {
  bc.validate();
  const double c = (bc.alpha - bc.beta) / (bc.a - bc.b);
  const double d = (bc.a * bc.beta - bc.b * bc.alpha) / (bc.a - bc.b);
  RealFn y([c, d](double t) { return c * t + d; }, "affine");

  const Lagrangian lag = leitmann_lagrangian(params);
  const RealFn dy = hahn_derivative_fn(params, y);
  const RealFn gauge([&](double tau) { return leitmann_gauge(params, c, d, tau, 0.0); });
  double residual = 0.0;
  for (double t : build_interval(params, bc.a, bc.b, depth).points) {
    const double gap = lag(t, y(sigma(params, t)), dy(t));
    residual = std::max(residual, std::fabs(gap - hahn_derivative(params, gauge, t)));
  }
  return LeitmannSolution{c, d, std::move(y), residual};
}

GaugeCheck leitmann_gauge_check(const HahnParams& params, const BoundaryConditions& bc,
                                const RealFn& ybar, const SeriesOptions& opts) {
  bc.validate();
  const double c = (bc.alpha - bc.beta) / (bc.a - bc.b);
  const double d = (bc.a * bc.beta - bc.b * bc.alpha) / (bc.a - bc.b);
  const RealFn y([&](double t) { return ybar(t) + c * t + d; });
  const Lagrangian trivial([](double, double, double v) { return v * v; },
                           [](double, double, double) { return 0.0; },
                           [](double, double, double v) { return 2.0 * v; });
  const double gap =
      action(params, leitmann_lagrangian(params), y, bc, opts).value - action(params, trivial, ybar, bc, opts).value;
  const double boundary = leitmann_gauge(params, c, d, bc.b, ybar(bc.b)) -
                          leitmann_gauge(params, c, d, bc.a, ybar(bc.a));
  return GaugeCheck{gap, boundary};
}

}  // namespace hahn
