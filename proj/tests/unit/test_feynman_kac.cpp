#include <doctest.h>

#include <cmath>

#include "heatlab/error.hpp"
#include "heatlab/feynman_kac.hpp"
#include "heatlab/heat_solver.hpp"
#include "oracles.hpp"

using namespace heatlab;

TEST_CASE("closed bridge is pinned at both ends") {
  const auto b = sample_bridge({0.3, -0.2}, {0.3, -0.2}, 0.7, 64, 5);
  CHECK(b.steps() == 64);
  CHECK(b.nodes.front().x1 == 0.3);
  CHECK(b.nodes.front().x2 == -0.2);
  CHECK(b.nodes.back().x1 == 0.3);
  CHECK(b.nodes.back().x2 == -0.2);
}

TEST_CASE("bridge midpoint statistics") {
  // Midpoint of a bridge over [0, T]: mean (x + y) / 2, variance T / 4 per axis.
  const Vec2 x{0.0, 0.0}, y{1.0, -0.5};
  const double T = 1.0;
  const int n = 10000;
  double m1 = 0, m2 = 0, s11 = 0, s22 = 0, s12 = 0;
  std::vector<Vec2> mids;
  for (int i = 0; i < n; ++i) {
    const auto b = sample_bridge(x, y, T, 64, 1000 + i);
    mids.push_back(b.nodes[32]);
    m1 += b.nodes[32].x1;
    m2 += b.nodes[32].x2;
  }
  m1 /= n;
  m2 /= n;
  for (const auto& v : mids) {
    s11 += (v.x1 - m1) * (v.x1 - m1);
    s22 += (v.x2 - m2) * (v.x2 - m2);
    s12 += (v.x1 - m1) * (v.x2 - m2);
  }
  s11 /= n - 1;
  s22 /= n - 1;
  s12 /= n - 1;
  const double var = T / 4;
  const double se_mean = std::sqrt(var / n);
  const double se_var = var * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(m1 - 0.5) < 3 * se_mean);
  CHECK(std::abs(m2 + 0.25) < 3 * se_mean);
  CHECK(std::abs(s11 - var) < 3 * se_var);
  CHECK(std::abs(s22 - var) < 3 * se_var);
  CHECK(std::abs(s12) < 3 * var / std::sqrt(n));
}

TEST_CASE("same seed, same path") {
  const auto a = sample_bridge({0, 0}, {1, 1}, 0.5, 128, 42);
  const auto b = sample_bridge({0, 0}, {1, 1}, 0.5, 128, 42);
  const auto c = sample_bridge({0, 0}, {1, 1}, 0.5, 128, 43);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    same = same && a.nodes[i].x1 == b.nodes[i].x1 && a.nodes[i].x2 == b.nodes[i].x2;
    differs = differs || a.nodes[i].x1 != c.nodes[i].x1;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("phase") {
  const auto b = sample_bridge({0.2, 0.1}, {-0.4, 0.3}, 0.5, 64, 3);
  CHECK(phase(b, model_p1(2), 0.0) == cplx{0.0, 0.0});

  // Path frozen at the origin: no line integral, V = (tau/2) Lap |z|^2 = 2 tau.
  BridgePath still{{0, 0}, {0, 0}, 0.6, std::vector<Vec2>(65, Vec2{0, 0})};
  const double tau = 1.5;
  const cplx f = phase(still, model_p1(1), tau);
  CHECK(f.real() == doctest::Approx(-2.0 * tau * 0.6));
  CHECK(f.imag() == 0.0);

  for (int seed = 0; seed < 50; ++seed) {
    const auto path = sample_bridge({0.5, 0.0}, {0.0, 0.5}, 0.4, 64, seed);
    CHECK(std::abs(std::exp(phase(path, model_p1(2), 2.0))) <= 1.0);
  }
}

TEST_CASE("tau = 0 Monte Carlo is the free kernel exactly") {
  const auto e = mc_kernel(model_p1(1), 0.0, {0.3, 0.1}, {-0.2, 0.4}, 0.7, 1000, 64, 1);
  CHECK(e.estimate == cplx{oracle::free_kernel(0.7, 0.5, -0.3), 0.0});
  CHECK(e.std_error == 0.0);
}

TEST_CASE("Monte Carlo against the Mehler kernel") {
  const double tau = 1.0, s = 0.25;
  for (Vec2 x : {Vec2{0, 0}, Vec2{0.5, 0.0}}) {
    const auto e = mc_kernel(model_p1(1), tau, x, {0, 0.25}, s, 20000, 128, 11);
    const cplx ref = oracle::mehler(tau, s, x.x1, x.x2, 0.0, 0.25);
    CAPTURE(e.estimate);
    CAPTURE(ref);
    // Path discretization error of the midpoint rule is below 1e-3 here.
    CHECK(std::abs(e.estimate - ref) < 3 * e.std_error + 2e-3);
    CHECK(std::abs(e.estimate) <= e.free_factor + 3 * e.std_error);
  }
}

TEST_CASE("Monte Carlo against the PDE for |z|^4" * doctest::timeout(120)) {
  const double tau = 1.0, s = 0.25;
  const auto p = model_p1(2);
  const auto box = assemble_box(p, tau, Grid2D(4.0, 129));
  // Kernel columns are indexed by source: H(s, x, y) is the column of y at x.
  const auto col = kernel_column(box, cplx{1.0, 0.0}, std::vector<double>{s}, 1e-3);
  const cplx pde = interpolate(col.at_time(s), {0.0, 0.0});
  const auto e = mc_kernel(p, tau, {0, 0}, {1, 0}, s, 20000, 128, 5);
  CAPTURE(pde);
  CAPTURE(e.estimate);
  CHECK(std::abs(e.estimate - pde) < 3 * (e.std_error + 0.01 * e.free_factor));
}

TEST_CASE("divergence of the magnetic potential vanishes") {
  const auto p = Polynomial::make({{{2, 2}, 1.0}, {{3, 1}, cplx{0.3, 0.2}}, {{1, 3}, cplx{0.3, -0.2}}});
  const auto d = divergence_check(p, 2.0, 2.0, 100, 3);
  CHECK(d.pass);
  CHECK(d.max_abs <= 1e-6 * (1.0 + d.scale));
}

TEST_CASE("Monte Carlo guards") {
  CHECK_THROWS_AS(mc_kernel(model_p1(1), 1.0, {0, 0}, {0, 0}, 0.25, 10, 128, 1), Error);
  CHECK_THROWS_AS(sample_bridge({0, 0}, {0, 0}, 0.5, 16, 1), Error);
  CHECK_THROWS_AS(sample_bridge({0, 0}, {0, 0}, 0.0, 64, 1), Error);
}
