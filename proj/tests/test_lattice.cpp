#include <cmath>
#include <random>

#include "doctest.h"
#include "hahn/error.hpp"
#include "hahn/lattice.hpp"

using namespace hahn;

namespace {

// k-fold application of t -> q t + omega (or its inverse), the slow way.
double iterate(double q, double omega, int k, double t) {
  for (int i = 0; i < k; ++i) t = q * t + omega;
  for (int i = 0; i < -k; ++i) t = (t - omega) / q;
  return t;
}

double rel(double x, double y) {
  return std::fabs(x - y) / std::max({std::fabs(x), std::fabs(y), 1e-300});
}

}  // namespace

TEST_CASE("parameters are validated") {
  CHECK_THROWS_AS(HahnParams(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(HahnParams(1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(HahnParams(-0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(HahnParams(1.0 - 1e-13, 0.0), ValidationError);
  CHECK_THROWS_AS(HahnParams(0.5, -1e-9), ValidationError);
  CHECK_THROWS_AS(HahnParams(std::nan(""), 0.0), ValidationError);
  CHECK_NOTHROW(HahnParams(0.5, 0.0));

  const HahnParams p(0.3, 0.7);
  CHECK(p.omega0() == 0.7 / (1.0 - 0.3));
}

TEST_CASE("q-bracket") {
  const HahnParams p(0.5, 1.0);
  CHECK(q_bracket(p, 0) == 0.0);
  CHECK(q_bracket(p, 1) == 1.0);
  CHECK(q_bracket(p, 3) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK_THROWS_AS(q_bracket(p, -1), ValidationError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uq(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const HahnParams r(uq(rng), 0.0);
    const int k = static_cast<int>(rng() % 90);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::pow(r.q(), j);
    CHECK(std::fabs(q_bracket(r, k) - sum) <= 1e-13 * std::max(1.0, sum));
  }
}

TEST_CASE("sigma examples") {
  const HahnParams p(0.5, 1.0);
  CHECK(sigma(p, 1, 4.0) == 3.0);
  CHECK(sigma(p, -1, 4.0) == 6.0);
  CHECK(sigma(p, 5, 2.0) == 2.0);
  CHECK(sigma(p, 0, 3.7) == 3.7);
  CHECK(sigma(p, 4.0) == 3.0);
  CHECK(sigma_inv(p, 4.0) == 6.0);
}

TEST_CASE("closed-form iterates agree with repeated application") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ut(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double q = uq(rng), w = uw(rng), t = ut(rng);
    const HahnParams p(q, w);
    const int k = static_cast<int>(rng() % 25) - 12;
    const double scale = std::max(std::fabs(iterate(q, w, k, t)), std::fabs(p.omega0()));
    CHECK(std::fabs(sigma(p, k, t) - iterate(q, w, k, t)) <= 1e-11 * std::max(1.0, scale));
  }
}

TEST_CASE("composition identity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ut(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double t = ut(rng);
    const int j = static_cast<int>(rng() % 17) - 8;
    const int k = static_cast<int>(rng() % 17) - 8;
    CHECK(rel(sigma(p, j, sigma(p, k, t)), sigma(p, j + k, t)) < 1e-10);
  }
}

TEST_CASE("gap lemma") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ut(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double t = ut(rng);
    const int n = static_cast<int>(rng() % 12);
    const double lhs = sigma(p, n + 1, t) - sigma(p, n - 1, t);
    const double rhs = std::pow(p.q(), n) * (sigma(p, t) - sigma_inv(p, t));
    CHECK(rel(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("fixed point and monotone convergence") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ut(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    for (int k = -20; k <= 20; ++k) CHECK(within_ulps(sigma(p, k, p.omega0()), p.omega0()));
    CHECK(is_fixed_point(p, p.omega0()));

    const double t = ut(rng);
    if (is_fixed_point(p, t)) continue;
    double prev = std::fabs(t - p.omega0());
    for (int k = 1; k <= 30 && !within_ulps(sigma(p, k, t), p.omega0(), 64); ++k) {
      const double dist = std::fabs(sigma(p, k, t) - p.omega0());
      CHECK(dist < prev);
      prev = dist;
    }
  }
}

TEST_CASE("lattice examples") {
  const HahnParams p(0.5, 1.0);
  const HahnInterval i = build_interval(p, 2.0, 6.0, 2);
  CHECK(i.points == std::vector<double>{2.0, 2.5, 4.0});

  const HahnInterval j = build_interval(HahnParams(0.5, 0.0), 0.0, 1.0, 1);
  CHECK(j.points == std::vector<double>{0.0, 0.5});

  CHECK_THROWS_AS(build_interval(p, 6.0, 2.0, 3), ValidationError);
  CHECK_THROWS_AS(build_interval(p, 2.0, 2.0, 3), ValidationError);
  CHECK_THROWS_AS(build_interval(p, 2.0, 6.0, 0), ValidationError);
}

TEST_CASE("lattice invariants on random intervals") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    double a = ux(rng), b = ux(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const int depth = 1 + static_cast<int>(rng() % 15);
    const HahnInterval lat = build_interval(p, a, b, depth);
    const double lo = std::min({a, b, p.omega0()});
    const double hi = std::max({a, b, p.omega0()});

    CHECK(lat.points.size() <= static_cast<std::size_t>(2 * depth + 1));
    bool has_w0 = false;
    for (std::size_t k = 0; k < lat.points.size(); ++k) {
      CHECK(lat.points[k] >= lo);
      CHECK(lat.points[k] <= hi);
      if (k > 0) CHECK_FALSE(within_ulps(lat.points[k - 1], lat.points[k]));
      if (k > 0) CHECK(lat.points[k - 1] < lat.points[k]);
      has_w0 = has_w0 || lat.points[k] == p.omega0();
    }
    CHECK(has_w0);

    // Each odd orbit moves monotonically toward omega0, strictly until it
    // reaches omega0 at the resolution of doubles.
    for (double x : {a, b}) {
      const std::vector<double> orbit = odd_orbit(p, x, depth);
      CHECK(orbit.size() == static_cast<std::size_t>(depth));
      for (std::size_t k = 1; k < orbit.size(); ++k) {
        const bool resolved = !within_ulps(orbit[k], p.omega0(), 64);
        if (x > p.omega0()) CHECK((resolved ? orbit[k] < orbit[k - 1] : orbit[k] <= orbit[k - 1]));
        if (x < p.omega0()) CHECK((resolved ? orbit[k] > orbit[k - 1] : orbit[k] >= orbit[k - 1]));
      }
    }
  }
}

TEST_CASE("common orbits") {
  const HahnParams p(0.5, 1.0);
  CHECK(on_common_orbit(p, 2.0, 6.0));   // a is the fixed point
  CHECK(on_common_orbit(p, 3.0, 6.0));   // sigma^2(6) = 3
  CHECK(on_common_orbit(p, 6.0, 3.0));
  CHECK_FALSE(on_common_orbit(p, 4.0, 6.0));  // an odd iterate only
  CHECK_FALSE(on_common_orbit(p, 3.1, 6.0));
}
