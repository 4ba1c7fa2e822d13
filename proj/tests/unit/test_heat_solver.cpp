#include <doctest.h>

#include <cmath>

#include "heatlab/error.hpp"
#include "heatlab/heat_solver.hpp"
#include "heatlab/numerics.hpp"
#include "oracles.hpp"

using namespace heatlab;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("free kernel at the origin") {
  const Grid2D g(8.0, 257);
  const auto box = assemble_box(model_p1(1), 0.0, g);
  const std::vector<double> sched{0.5, 1.0};
  const auto col = kernel_column(box, 0.0, sched, 5e-3);
  const int c = g.center_index();
  CHECK(col.at_time(1.0).at(c, c).real() == doctest::Approx(1.0 / M_PI).epsilon(0.02));
  // Whole column against the Gaussian at every time.
  for (double s : sched) {
    double worst = 0.0;
    const auto& f = col.at_time(s);
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        const Vec2 x = g.node(i, j);
        worst = std::max(worst, std::abs(f.at(i, j) - oracle::free_kernel(s, x.x1, x.x2)));
      }
    }
    CHECK(worst < 0.02 * oracle::free_kernel(s, 0, 0));
  }
}

TEST_CASE("Mehler kernel including its phase") {
  const Grid2D g(4.0, 129);
  const double tau = 1.0;
  const auto box = assemble_box(model_p1(1), tau, g);
  const cplx y{0.5, 0.25};
  const auto col = kernel_column(box, y, std::vector<double>{0.25, 0.5}, 1e-3);
  for (double s : {0.25, 0.5}) {
    const double peak = std::abs(oracle::mehler(tau, s, y.real(), y.imag(), y.real(), y.imag()));
    for (Vec2 x : {Vec2{1.0, 0.0}, Vec2{0.5, 0.25}, Vec2{0.0, 0.5}, Vec2{0.75, -0.25}}) {
      const cplx pde = interpolate(col.at_time(s), x);
      const cplx ref = oracle::mehler(tau, s, x.x1, x.x2, y.real(), y.imag());
      CAPTURE(s);
      CAPTURE(x.x1);
      CAPTURE(x.x2);
      CHECK(std::abs(pde - ref) < 0.03 * peak);
    }
  }
}

TEST_CASE("contraction and spectral decay") {
  const Grid2D g(4.0, 129);
  const auto box = assemble_box(model_p1(1), 1.0, g);
  const auto sched = lin_space(0.5, 5.0, 19);
  const auto col = kernel_column(box, 0.0, sched, 1e-2);
  std::vector<double> s, lg;
  for (std::size_t k = 0; k < col.times.size(); ++k) {
    if (k > 0) CHECK(col.snapshots[k].l2_norm() <= col.snapshots[k - 1].l2_norm());
    if (col.times[k] >= 2.0) {
      s.push_back(col.times[k]);
      lg.push_back(std::log(col.snapshots[k].l2_norm()));
    }
  }
  // Lowest eigenvalue 2 tau.
  CHECK(fit_line(s, lg).slope == doctest::Approx(-2.0).epsilon(0.02));
}

TEST_CASE("smoothing bound ||box e^{-s box} f|| <= ||f|| / (e s)") {
  const Grid2D g(4.0, 129);
  const auto box = assemble_box(model_p1(2), 1.0, g);
  ComplexField f(g);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      const Vec2 x = g.node(i, j);
      f.at(i, j) = std::exp(-2.0 * ((x.x1 - 0.5) * (x.x1 - 0.5) + x.x2 * x.x2)) * std::polar(1.0, 1.3 * x.x2);
    }
  }
  const std::vector<double> sched{0.05, 0.1, 0.2, 0.4, 0.8};
  const auto col = evolve(box, f, sched, 1e-3);
  for (std::size_t k = 0; k < sched.size(); ++k) {
    const double lhs = apply_box(box, col.snapshots[k]).l2_norm();
    CAPTURE(sched[k]);
    CHECK(lhs <= f.l2_norm() / (M_E * sched[k]));
  }
}

TEST_CASE("guards") {
  const Grid2D g(2.0, 33);
  const auto box = assemble_box(model_p1(1), 1.0, g);
  CHECK(code_of([&] { kernel_column(box, 0.0, std::vector<double>{0.01, 1.0}, 1e-3); }) ==
        ErrorCode::ScheduleUnreachable);
  CHECK(code_of([&] { kernel_column(box, 0.0, std::vector<double>{0.5, 0.25}, 1e-3); }) ==
        ErrorCode::ScheduleUnreachable);
  CHECK(code_of([&] { kernel_column(box, 0.0, std::vector<double>{}, 1e-3); }) == ErrorCode::ScheduleUnreachable);
  CHECK(code_of([&] { kernel_column(box, cplx{2.0, 0.0}, std::vector<double>{0.5}, 1e-3); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { kernel_column(box, 0.0, std::vector<double>{0.5}, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tau = 0 has no usable fundamental solution") {
  const auto box = assemble_box(model_p1(1), 0.0, Grid2D(4.0, 65));
  FundamentalSolutionOptions opts;
  opts.dt_max = 0.02;
  CHECK(code_of([&] { fundamental_solution(box, 0.0, 5.0, opts); }) == ErrorCode::TailNotNegligible);
}

TEST_CASE("fundamental solution needs s_max beyond 10 mu^2") {
  const auto box = assemble_box(model_p1(1), 1.0, Grid2D(4.0, 65));
  CHECK(code_of([&] { fundamental_solution(box, 0.0, 5.0); }) == ErrorCode::InvalidArgument);
}
