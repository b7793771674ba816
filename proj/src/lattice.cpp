#include "hahn/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hahn/error.hpp"

namespace hahn {

HahnParams::HahnParams(double q, double omega) : q_(q), omega_(omega), omega0_(0.0) {
  if (!std::isfinite(q) || !(q > 0.0 && q < 1.0)) {
    throw ValidationError("q must lie strictly inside (0, 1), got " + std::to_string(q));
  }
  if (1.0 - q < 1e-12) {
    throw ValidationError("q is too close to 1: 1 - q < 1e-12 makes omega0 ill-conditioned");
  }
  if (!std::isfinite(omega) || omega < 0.0) {
    throw ValidationError("omega must be finite and >= 0, got " + std::to_string(omega));
  }
  omega0_ = omega / (1.0 - q);
}

bool within_ulps(double a, double b, int n) noexcept {
  if (a == b) return true;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  const double ulp = std::nextafter(scale, std::numeric_limits<double>::infinity()) - scale;
  return std::fabs(a - b) <= n * ulp;
}

bool is_fixed_point(const HahnParams& params, double t) noexcept {
  return within_ulps(t, params.omega0());
}

double q_bracket(const HahnParams& params, int k) {
  if (k < 0) throw ValidationError("q_bracket requires k >= 0");
  // Direct sum for small k keeps [1]_q == 1 and [2]_q == 1 + q exact.
  if (k <= 64) {
    double sum = 0.0;
    double power = 1.0;
    for (int i = 0; i < k; ++i) {
      sum += power;
      power *= params.q();
    }
    return sum;
  }
  return (1.0 - std::pow(params.q(), k)) / (1.0 - params.q());
}

double sigma(const HahnParams& params, int k, double t) noexcept {
  if (k == 0) return t;
  // q^k t + omega [k]_q rewritten around the fixed point.
  const double w0 = params.omega0();
  return w0 + std::pow(params.q(), k) * (t - w0);
}

std::vector<double> odd_orbit(const HahnParams& params, double x, int depth) {
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(std::max(depth, 0)));
  for (int n = 0; n < depth; ++n) orbit.push_back(sigma(params, 2 * n + 1, x));
  return orbit;
}

HahnInterval build_interval(const HahnParams& params, double a, double b, int depth) {
  if (!(a < b)) throw ValidationError("interval requires a < b");
  if (depth < 1) throw ValidationError("interval depth must be >= 1");

  std::vector<double> points = odd_orbit(params, a, depth);
  const std::vector<double> from_b = odd_orbit(params, b, depth);
  points.insert(points.end(), from_b.begin(), from_b.end());
  points.push_back(params.omega0());
  std::sort(points.begin(), points.end());

  std::vector<double> merged;
  merged.reserve(points.size());
  for (double p : points) {
    if (merged.empty() || !within_ulps(merged.back(), p)) {
      merged.push_back(p);
    } else if (p == params.omega0()) {
      merged.back() = p;  // orbit points that collapsed onto omega0 are represented by it
    }
  }
  return HahnInterval{params, a, b, depth, std::move(merged)};
}

bool on_common_orbit(const HahnParams& params, double a, double b, int max_steps) {
  if (is_fixed_point(params, a) || is_fixed_point(params, b)) return true;
  const double w0 = params.omega0();
  if ((a - w0) * (b - w0) < 0.0) return false;
  // The point farther from omega0 must reach the nearer one by even steps.
  const bool a_outer = std::fabs(a - w0) > std::fabs(b - w0);
  const double outer = a_outer ? a : b;
  const double inner = a_outer ? b : a;
  for (int m = 1; m <= max_steps; ++m) {
    const double p = sigma(params, 2 * m, outer);
    if (std::fabs(p - inner) <= 1e-12 * std::max(1.0, std::fabs(inner))) return true;
    if (std::fabs(p - w0) < std::fabs(inner - w0) * 0.5) break;
  }
  return false;
}

}  // namespace hahn
