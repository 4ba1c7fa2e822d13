#include <doctest.h>

#include <cmath>

#include "heatlab/error.hpp"
#include "heatlab/geometry.hpp"

using namespace heatlab;

TEST_CASE("Lambda") {
  const auto z2 = model_p1(1);
  for (cplx z : {cplx{0, 0}, cplx{1, -2}, cplx{10, 3}}) {
    for (double d : {0.01, 1.0, 7.0}) CHECK(lambda_fn(z2, z, d) == doctest::Approx(d * d));
  }
  // |z|^4 at z = 1: A11 = 4, A21 = A12 = 2, A22 = 1, so Lambda = (2 delta + delta^2)^2.
  CHECK(lambda_fn(model_p1(2), 1.0, 1.0) == doctest::Approx(9.0));
  CHECK(lambda_fn(model_p1(2), 1.0, 0.5) == doctest::Approx(std::pow(2 * 0.5 + 0.25, 2)));
  CHECK(lambda_fn(model_p1(2), 0.0, 2.0) == doctest::Approx(16.0));
}

TEST_CASE("mu") {
  const auto z2 = model_p1(1);
  for (double d : {0.01, 1.0, 7.0}) CHECK(mu_fn(z2, {3, 4}, d) == doctest::Approx(std::sqrt(d)));
  CHECK(mu_fn(model_p1(2), 1.0, 1.0) ==
        doctest::Approx(std::min({std::sqrt(0.25), std::cbrt(0.5), 1.0})));
  CHECK(mu_fn(model_p1(2), 1.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("mu(z, 1) for |z|^{2m} tracks min{1, |z|^{1-m}} with a z-independent constant") {
  for (int m : {2, 3, 4}) {
    const auto p = model_p1(m);
    double lo = INFINITY, hi = 0.0;
    for (double r = 1e-3; r <= 1e4; r *= 1.7) {
      const double ratio = mu_fn(p, cplx{r, 0.0} * std::polar(1.0, r), 1.0) / std::min(1.0, std::pow(r, 1.0 - m));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CAPTURE(m);
    CHECK(hi / lo < 2.0 * m);
    // Far out the ratio settles at 1/m (A11 = m^2 |z|^{2m-2} dominates).
    CHECK(mu_fn(p, 1e4, 1.0) * std::pow(1e4, m - 1) == doctest::Approx(1.0 / m).epsilon(1e-6));
  }
}

TEST_CASE("approximate inverse") {
  std::vector<SizeSample> samples;
  for (double r : {0.1, 1.0, 10.0}) {
    for (double d : {0.01, 1.0, 100.0}) {
      samples.push_back({cplx{r, 0.0}, d});
      samples.push_back({cplx{0.0, r}, d});
    }
  }
  const auto exact = approx_inverse_check(model_p1(1), samples, 1.0 + 1e-12);
  CHECK(exact.pass);
  CHECK(exact.mu_of_lambda.lo == doctest::Approx(1.0));
  CHECK(exact.lambda_of_mu.hi == doctest::Approx(1.0));

  const auto z4 = approx_inverse_check(model_p1(2), samples, 3.0);
  CHECK(z4.pass);
  // For x^4 the ratio Lambda(mu(delta)) / delta can approach the number of
  // mixed terms (6): at z = 0.1, delta = 0.01 four of them are comparable.
  const auto x4 = approx_inverse_check(model_p2(2), samples, 6.0);
  CHECK(x4.pass);
  CHECK(x4.lambda_of_mu.hi > 4.0);
  {
    // Hand evaluation at x = 0.1: A11 = 3x^2, A21 = A12 = 1.5x, A31 = A13 = 1/4, A22 = 3/8.
    const double x = 0.1, d = 0.01;
    const double a[][2] = {{3 * x * x, 2}, {1.5 * x, 3}, {1.5 * x, 3}, {0.25, 4}, {0.25, 4}, {0.375, 4}};
    double mu = INFINITY;
    for (const auto& t : a) mu = std::min(mu, std::pow(d / t[0], 1.0 / t[1]));
    double lam = 0.0;
    for (const auto& t : a) lam += t[0] * std::pow(mu, t[1]);
    CHECK(mu_fn(model_p2(2), x, d) == doctest::Approx(mu));
    CHECK(lambda_fn(model_p2(2), x, mu) == doctest::Approx(lam));
    CHECK(lam / d == doctest::Approx(4.8029).epsilon(1e-4));
  }

  CHECK_THROWS_AS(approx_inverse_check(model_p1(2), {samples.begin(), samples.begin() + 5}, 3.0), Error);
}

TEST_CASE("Sobolev radius") {
  CHECK(sobolev_radius(model_p1(1), 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(sobolev_radius(model_p1(1), 4.0, 0.0) == doctest::Approx(0.5));
  // |z|^4 at 1: |A10| = |A01| = 2, |A20| = |A02| = 1, A11 = 4, A21 = A12 = 2, A22 = 1.
  const double expect = std::min({1.0 / 2.0, std::pow(1.0, -0.5), std::pow(4.0, -0.5), std::pow(2.0, -1.0 / 3), 1.0});
  CHECK(sobolev_radius(model_p1(2), 1.0, 1.0) == doctest::Approx(expect));
  CHECK_THROWS_AS(sobolev_radius(model_p1(1), 0.0, 0.0), Error);
}

TEST_CASE("twist") {
  for (cplx z : {cplx{0, 0}, cplx{1, 2}}) CHECK(twist(model_p1(2), z, z) == 0.0);
  CHECK(twist(model_p1(1), cplx{0, 1}, 1.0) == doctest::Approx(-2.0));
  for (cplx w : {cplx{1, 1}, cplx{-3, 0.5}}) CHECK(twist(model_p1(1), w, 0.0) == 0.0);
}

TEST_CASE("grid metric") {
  const auto p1 = model_p1(2);
  const auto mg = make_metric_grid(p1, Grid2D(3.0, 121));
  CHECK(rho_metric(p1, 0.0, 0.0, mg).rho == 0.0);

  const auto r = rho_metric(p1, 0.0, 2.0, mg);
  const double closed = rho_closed_form(ModelKind::P1, 2, 0.0, 2.0);
  CHECK(closed == doctest::Approx(6.0));
  CHECK(r.rho / closed > 1.0 / 3.0);
  CHECK(r.rho / closed < 3.0);
  CHECK(r.rho <= r.straight_line * (1.0 + 1e-9) + 2 * mg.grid.h());

  const auto p2 = model_p2(2);
  const auto mg2 = make_metric_grid(p2, Grid2D(3.0, 121));
  const auto r2 = rho_metric(p2, 0.0, cplx{0, 2}, mg2);
  CHECK(rho_closed_form(ModelKind::P2, 2, 0.0, cplx{0, 2}) == doctest::Approx(2.0));
  CHECK(r2.rho / 2.0 > 1.0 / 3.0);
  CHECK(r2.rho / 2.0 < 3.0);
}

TEST_CASE("grid metric refuses a coarse grid") {
  const auto p = model_p1(4);
  const auto mg = make_metric_grid(p, Grid2D(8.0, 33));
  try {
    rho_metric(p, 0.0, 7.0, mg);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
}

TEST_CASE("closed forms") {
  CHECK(rho_closed_form(ModelKind::P1, 2, 0.0, 1.0) == doctest::Approx(2.0));
  for (int m : {1, 2, 5}) CHECK(rho_closed_form(ModelKind::P1, m, {1, 1}, {1, 1}) == 0.0);
  CHECK(rho_closed_form(ModelKind::P2, 3, 2.0, {2, 1}) == doctest::Approx(9.0));
  CHECK(size_sum(model_p1(2), {1, 1}, {1, 1}) == 0.0);
}
