#pragma once

// Shift maps of the Hahn symmetric calculus and the lattices they generate.
//
//   sigma(t)    = q t + omega
//   sigma^-1(t) = (t - omega) / q
//   omega0      = omega / (1 - q)       (the unique fixed point of sigma)
//
// Every iterate sigma^k contracts (k > 0) or expands (k < 0) the distance to
// omega0 by the factor q^k, which is how the iterates are evaluated here.

#include <vector>

namespace hahn {

class HahnParams {
 public:
  /// Throws ValidationError unless 0 < q < 1, 1 - q >= 1e-12 and omega >= 0.
  HahnParams(double q, double omega);

  double q() const noexcept { return q_; }
  double omega() const noexcept { return omega_; }
  double omega0() const noexcept { return omega0_; }

 private:
  double q_;
  double omega_;
  double omega0_;
};

/// True when |a - b| <= n ulps of max(|a|, |b|).
bool within_ulps(double a, double b, int n = 4) noexcept;

/// True when t coincides with the fixed point omega0 within 4 ulp.
bool is_fixed_point(const HahnParams& params, double t) noexcept;

/// [k]_q = (1 - q^k) / (1 - q). Throws ValidationError for k < 0.
double q_bracket(const HahnParams& params, int k);

/// k-th iterate of sigma; negative k iterates the inverse map.
double sigma(const HahnParams& params, int k, double t) noexcept;

inline double sigma(const HahnParams& params, double t) noexcept { return sigma(params, 1, t); }
inline double sigma_inv(const HahnParams& params, double t) noexcept {
  return sigma(params, -1, t);
}

/// The odd orbit {sigma^{2n+1}(x) : 0 <= n < depth}.
std::vector<double> odd_orbit(const HahnParams& params, double x, int depth);

/// Truncated Hahn symmetric interval: the odd orbits of a and b (depth points
/// each) together with omega0, sorted ascending with 4-ulp duplicates merged.
struct HahnInterval {
  HahnParams params;
  double a;
  double b;
  int depth;
  std::vector<double> points;
};

/// Throws ValidationError when a >= b or depth < 1.
HahnInterval build_interval(const HahnParams& params, double a, double b, int depth);

/// True when a and b lie on one set [c]_{q,omega}: either endpoint equals
/// omega0, or one endpoint is an even iterate sigma^{2m}(other) with
/// 0 < m <= max_steps (matched within 1e-12 relative).
bool on_common_orbit(const HahnParams& params, double a, double b, int max_steps = 200);

}  // namespace hahn
