#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "hahn/calculus.hpp"
#include "hahn/error.hpp"

using namespace hahn;

namespace {

double rel(double x, double y) {
  return std::fabs(x - y) / std::max({std::fabs(x), std::fabs(y), 1.0});
}

struct Poly {
  std::vector<double> c;
  double operator()(double t) const {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
    return s;
  }
};

Poly random_poly(std::mt19937_64& rng, int max_degree) {
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  Poly p;
  const int deg = static_cast<int>(rng() % (max_degree + 1));
  for (int k = 0; k <= deg; ++k) p.c.push_back(uc(rng));
  return p;
}

// Brute-force partial sum of the defining series, no stopping rule.
double series_oracle(const HahnParams& p, const std::function<double(double)>& f, double x,
                     int terms) {
  const double q = p.q();
  long double sum = 0.0L;
  long double point = x;
  // Orbit built by explicit iteration of sigma^2.
  const long double first = static_cast<long double>(q) * x + p.omega();
  point = first;
  long double weight = q;
  for (int n = 0; n < terms; ++n) {
    sum += weight * f(static_cast<double>(point));
    point = q * (q * point + p.omega()) + p.omega();
    weight *= static_cast<long double>(q) * q;
  }
  const long double prefactor = (x - p.omega()) / static_cast<long double>(q) - first;
  return static_cast<double>(prefactor * sum);
}

}  // namespace

TEST_CASE("derivative examples") {
  const HahnParams p(0.5, 1.0);
  CHECK(hahn_derivative(p, RealFn([](double t) { return t * t; }), 4.0) == 9.0);
  CHECK(hahn_derivative(p, RealFn([](double) { return 5.0; }), 3.3) == 0.0);
  CHECK(hahn_derivative(HahnParams(0.5, 0.0), RealFn([](double t) { return t; }), 1.0) == 1.0);

  const DerivativeSample s = hahn_derivative_sample(p, RealFn([](double t) { return t * t; }), 4.0);
  CHECK(s.sigma_t == 3.0);
  CHECK(s.sigma_inv_t == 6.0);
  CHECK_FALSE(s.classical);
}

TEST_CASE("derivative at the fixed point is the classical derivative") {
  const HahnParams p(0.5, 1.0);
  const RealFn f([](double t) { return t * t * t; });
  const DerivativeSample s = hahn_derivative_sample(p, f, 2.0);
  CHECK(s.classical);
  CHECK(std::fabs(s.value - 12.0) < 1e-9);
  CHECK(std::fabs(hahn_derivative(p, RealFn([](double t) { return std::exp(t); }), 2.0) -
                  std::exp(2.0)) < 1e-9);
  // Explicit step.
  CHECK(std::fabs(hahn_derivative(p, f, 2.0, 1e-3) - 12.0) < 1e-9);
  CHECK(default_fixed_point_step(p) == 2e-4);
}

TEST_CASE("non-finite derivative values are reported") {
  const HahnParams p(0.5, 1.0);
  const RealFn f([](double t) { return 1.0 / (t - 3.0); });
  CHECK_THROWS_AS(hahn_derivative(p, f, 4.0), EvaluationError);
}

TEST_CASE("integral examples") {
  const HahnParams p(0.5, 1.0);
  const RealFn one([](double) { return 1.0; });

  const SeriesResult r = hahn_integral_from_fixed_point(p, one, 6.0);
  CHECK(std::fabs(r.value - 4.0) < 1e-9);
  CHECK(r.converged);

  const SeriesResult z = hahn_integral_from_fixed_point(p, one, 2.0);
  CHECK(z.value == 0.0);
  CHECK(z.converged);

  const LatticeTableFn table(p, {{3.0, 6.0}, {4.0, 1.0}});
  const SeriesResult t = hahn_integral_from_fixed_point(p, table.to_real_fn(), 6.0);
  CHECK(t.value == 3.0);
  CHECK(t.converged);

  const SeriesResult c = hahn_integral(p, table.to_real_fn(), 4.0, 6.0);
  CHECK(c.value == -6.0);
  CHECK(c.converged);
  CHECK(c.terms_used <= 4);

  CHECK(hahn_integral(p, one, 5.0, 5.0).value == 0.0);
}

TEST_CASE("integral of t over [0, 1] in the q-symmetric case") {
  const HahnParams p(0.5, 0.0);
  const RealFn id([](double t) { return t; });
  const double brute = series_oracle(p, id, 1.0, 200);
  CHECK(std::fabs(brute - 0.4) < 1e-12);  // q / (1 + q^2)
  SeriesOptions fine;
  fine.tol = 1e-14;
  CHECK(std::fabs(hahn_integral(p, id, 0.0, 1.0, fine).value - brute) < 1e-12);

  // The primitive t^2/2 integrates its own derivative back to 1/2.
  const RealFn half_sq([](double t) { return 0.5 * t * t; });
  CHECK(std::fabs(hahn_integral(p, hahn_derivative_fn(p, half_sq), 0.0, 1.0, fine).value - 0.5) <
        1e-12);
}

TEST_CASE("series diagnostics") {
  const HahnParams p(0.5, 1.0);
  const RealFn one([](double) { return 1.0; });
  SeriesOptions opts;
  opts.max_terms = 5;
  const SeriesResult r = hahn_integral_from_fixed_point(p, one, 6.0, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.terms_used == 5);
  CHECK(r.tail_bound == doctest::Approx(r.last_term_magnitude * 0.25 / 0.75));

  SeriesOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(hahn_integral_from_fixed_point(p, one, 6.0, bad), ValidationError);
  bad = SeriesOptions{};
  bad.max_terms = 0;
  CHECK_THROWS_AS(hahn_integral(p, one, 3.0, 6.0, bad), ValidationError);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const HahnParams hp(uq(rng), uw(rng));
    SeriesOptions o;
    o.tol = std::pow(10.0, -6.0 - static_cast<double>(rng() % 8));
    o.max_terms = 1 + static_cast<int>(rng() % 200);
    const SeriesResult s = hahn_integral_from_fixed_point(
        hp, RealFn([](double t) { return std::cos(t); }), ux(rng), o);
    CHECK(s.terms_used <= o.max_terms);
    if (s.converged) CHECK(s.last_term_magnitude <= o.tol);
    CHECK(s.tail_bound >= 0.0);
  }
}

TEST_CASE("partial sums agree with the brute-force series") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-4.0, 4.0);
  for (int i = 0; i < 50; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double x = p.omega0() + ux(rng);
    auto f = [](double t) { return std::sin(t) + t * t; };
    SeriesOptions o;
    o.tol = 1e-14;
    const double got = hahn_integral_from_fixed_point(p, RealFn(f), x, o).value;
    CHECK(rel(got, series_oracle(p, f, x, 2000)) < 1e-11);
  }
}

TEST_CASE("lattice table lookup") {
  const HahnParams p(0.5, 1.0);
  const LatticeTableFn table(p, {{3.0, 6.0}, {4.0, 1.0}}, 0.0);
  CHECK(table(3.0) == 6.0);
  CHECK(table(std::nextafter(3.0, 4.0)) == 6.0);
  CHECK(table(3.0 + 1e-10) == 0.0);
  CHECK(table(5.0) == 0.0);
  const RealFn f = table.to_real_fn();
  REQUIRE(f.support() != nullptr);
  CHECK(f.support()->points.size() == 2);
  CHECK_THROWS_AS(LatticeTableFn(p, {{std::nan(""), 1.0}}), ValidationError);
}

TEST_CASE("a nonnegative integrand can have a negative integral") {
  const HahnParams p(0.5, 1.0);
  const LatticeTableFn table(p, {{3.0, 6.0}, {4.0, 1.0}});
  const SeriesResult r = hahn_integral(p, table.to_real_fn(), 4.0, 6.0);
  CHECK(r.value == -6.0);
  // The table as an opaque callable (no support information) gives the same number.
  const RealFn opaque([table](double t) { return table(t); });
  CHECK(std::fabs(hahn_integral(p, opaque, 4.0, 6.0).value + 6.0) < 1e-12);
}

TEST_CASE("ftc examples") {
  const RealFn cube([](double t) { return t * t * t; });
  const FtcReport r = ftc_check(HahnParams(0.7, 0.3), cube, 1.0, 2.0, 8, 1e-8);
  CHECK(r.derivative_residual < 1e-8);
  CHECK(r.integral_residual < 1e-8);
  CHECK(r.passed());

  const FtcReport c = ftc_check(HahnParams(0.4, 1.5), RealFn([](double) { return 3.0; }), -1.0,
                                4.0, 10, 1e-8);
  CHECK(c.integral_residual == 0.0);

  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double a = p.omega0() + ux(rng);
    const FtcReport id = ftc_check(p, RealFn([](double t) { return t; }), a, a + 2.0, 10, 1e-10);
    CHECK(id.derivative_residual < 1e-10);
  }
}

TEST_CASE("integration by parts examples") {
  const HahnParams p(0.5, 1.0);
  SeriesOptions o;
  o.tol = 1e-12;
  const RealFn t([](double x) { return x; });
  const RealFn t2([](double x) { return x * x; });
  const RealFn one([](double) { return 1.0; });
  for (IbpVariant v : {IbpVariant::sigma_inv, IbpVariant::shifted}) {
    const IbpResult r = ibp_residual(p, t, t2, 2.0, 6.0, v, o);
    CHECK(r.residual < 1e-8);
    CHECK(r.converged);
    CHECK(ibp_residual(p, t2, one, 2.0, 6.0, v, o).residual < 1e-10);
  }
  CHECK(ibp_residual(p, one, t2, 2.0, 6.0, IbpVariant::sigma_inv, o).residual < 1e-8);
}

TEST_CASE("norm examples") {
  const HahnParams p(0.5, 1.0);
  CHECK(norm_r(p, RealFn([](double) { return 0.0; }), 2.0, 6.0, 1, 5) == 0.0);

  const HahnInterval lat = build_interval(p, 2.0, 6.0, 5);
  CHECK(lat.points.back() == 4.0);  // sigma(b); b itself is not a lattice point
  CHECK(norm_r(p, RealFn([](double x) { return x; }), 2.0, 6.0, 1, 5) == 5.0);
  CHECK(norm_r(p, RealFn([](double x) { return x; }), 2.0, 6.0, 0, 5) == 4.0);
  CHECK(norm_r(p, RealFn([](double) { return -2.5; }), 2.0, 6.0, 1, 4) == 2.5);
  CHECK_THROWS_AS(norm_r(p, RealFn([](double x) { return x; }), 2.0, 6.0, 2, 5), ValidationError);
}

TEST_CASE("derivative is linear") {
  // Sampled where the defining quotient is well conditioned: the first two
  // odd iterates of endpoints at distance 1..3 from omega0.
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ud(1.0, 3.0), uc(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const Poly f = random_poly(rng, 5), g = random_poly(rng, 5);
    const double al = uc(rng), be = uc(rng);
    const RealFn combo([&](double t) { return al * f(t) + be * g(t); });
    const double a = p.omega0() - ud(rng), b = p.omega0() + ud(rng);
    for (double t : build_interval(p, a, b, 2).points) {
      const double lhs = hahn_derivative(p, combo, t);
      const double rhs = al * hahn_derivative(p, RealFn(f), t) + be * hahn_derivative(p, RealFn(g), t);
      CHECK(rel(lhs, rhs) < (is_fixed_point(p, t) ? 1e-10 : 1e-12));
    }
  }
}

TEST_CASE("product, quotient and composition rules") {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const Poly f = random_poly(rng, 4);
    const Poly g0 = random_poly(rng, 3);
    auto g = [&](double t) { return 2.0 + g0(t) * g0(t); };  // bounded away from 0
    const RealFn F(f), G(g);
    const double a = p.omega0() + ux(rng);
    for (double t : build_interval(p, a, a + 1.5, 4).points) {
      const double s = sigma(p, t), si = sigma_inv(p, t);
      const double df = hahn_derivative(p, F, t), dg = hahn_derivative(p, G, t);

      const double prod = hahn_derivative(p, RealFn([&](double x) { return f(x) * g(x); }), t);
      CHECK(rel(prod, df * g(s) + f(si) * dg) < 1e-10);

      const double quot = hahn_derivative(p, RealFn([&](double x) { return f(x) / g(x); }), t);
      CHECK(rel(quot, (df * g(si) - f(si) * dg) / (g(s) * g(si))) < 1e-10);

      const double comp = hahn_derivative(p, shifted(p, F), t);
      CHECK(rel(comp, p.q() * hahn_derivative(p, F, s)) < 1e-10);
    }
  }
}

TEST_CASE("integral properties") {
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-3.0, 3.0), uc(-2.0, 2.0);
  SeriesOptions o;
  o.tol = 1e-13;
  for (int i = 0; i < 50; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const Poly f = random_poly(rng, 4), g = random_poly(rng, 4);
    const double al = uc(rng), be = uc(rng);
    const double a = p.omega0() + ux(rng), b = p.omega0() + ux(rng), c = p.omega0() + ux(rng);
    const RealFn F(f), G(g);
    const RealFn combo([&](double t) { return al * f(t) + be * g(t); });

    const double lin = hahn_integral(p, combo, a, b, o).value;
    CHECK(rel(lin, al * hahn_integral(p, F, a, b, o).value + be * hahn_integral(p, G, a, b, o).value) <
          1e-10);
    CHECK(rel(hahn_integral(p, F, a, b, o).value,
              hahn_integral(p, F, a, c, o).value + hahn_integral(p, F, c, b, o).value) < 1e-10);
    CHECK(hahn_integral(p, F, a, b, o).value == -hahn_integral(p, F, b, a, o).value);
  }
}

TEST_CASE("nonnegative integrands on an orbit have nonnegative integrals from omega0") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double c = p.omega0() + ux(rng);
    const Poly g = random_poly(rng, 3);
    const RealFn f([&](double t) { return g(t) * g(t); });
    CHECK(hahn_integral_from_fixed_point(p, f, c).value >= -1e-10);
  }
}

TEST_CASE("integral of 1 is x - omega0") {
  std::mt19937_64 rng(38);
  std::uniform_real_distribution<double> uq(0.2, 0.9), uw(0.0, 2.0), ux(-10.0, 10.0);
  SeriesOptions o;
  o.tol = 1e-14;
  for (int i = 0; i < 100; ++i) {
    const HahnParams p(uq(rng), uw(rng));
    const double x = ux(rng);
    const double expected = x - p.omega0();
    const double got = hahn_integral_from_fixed_point(p, RealFn([](double) { return 1.0; }), x, o).value;
    CHECK(std::fabs(got - expected) <= 1e-10 * std::max(1.0, std::fabs(expected)));
  }
}
