#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "heatlab/error.hpp"
#include "heatlab/numerics.hpp"
#include "heatlab/verifier.hpp"
#include "oracles.hpp"

using namespace heatlab;

namespace {

double constant_of(const BoundReport& r, const std::string& key) {
  for (const auto& [k, v] : r.constants) {
    if (k == key) return v;
  }
  FAIL("missing constant " << key);
  return NAN;
}

const Criterion& criterion(const BoundReport& r, const std::string& name) {
  for (const auto& c : r.criteria) {
    if (c.name == name) return c;
  }
  FAIL("missing criterion " << name);
  return r.criteria.front();
}

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

TEST_CASE("criterion margins") {
  CHECK(Criterion{"a", 0.5, 0.0, 1.0}.pass());
  CHECK(Criterion{"a", 1.0, 0.0, 1.0}.pass());
  CHECK_FALSE(Criterion{"a", 1.5, 0.0, 1.0}.pass());
  CHECK(Criterion{"a", 1.5, 0.0, 1.0}.margin() == doctest::Approx(0.5));
  CHECK_FALSE(Criterion{"a", NAN, 0.0, 1.0}.pass());
  BoundReport empty;
  CHECK_FALSE(empty.pass());
}

TEST_CASE("report serialization") {
  BoundReport r;
  r.name = "demo";
  r.estimate = "x <= 1";
  r.add("x", 0.5, 0.0, 1.0);
  r.add("unbounded", 2.0, 1.0, INFINITY);
  r.constant("c", 3.0);
  r.record("grid", "L=1");
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"name", "estimate", "sample_set", "constants", "criteria", "worst_margin",
                          "threshold", "verdict", "provenance", "notes"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["verdict"] == "pass");
  CHECK(j["criteria"][1]["hi"].is_null());
  CHECK(j["constants"]["c"] == 3.0);
}

TEST_CASE("decay term") {
  const auto d = decay_term(model_p1(1), 1.0, 0.5, {0, 0}, {1, 0}, 0.5);
  CHECK(d.value == doctest::Approx(std::exp(-1.0) * std::exp(-0.25) * std::exp(-0.25)));
}

TEST_CASE("Gaussian domination") {
  const Grid2D g(4.0, 129);
  const std::vector<double> sched{0.5, 1.0, 2.0};
  // tau = 0 is the equality case; lattice dispersion at h = L/64 already costs ~6%.
  const auto col0 = kernel_column(assemble_box(model_p1(1), 0.0, Grid2D(4.0, 257)), 0.0, sched, 2e-3);
  const auto free = check_gaussian(col0);
  CHECK(free.pass());
  CHECK(criterion(free, "max_ratio").value == doctest::Approx(1.0).epsilon(0.03));

  const auto col1 = kernel_column(assemble_box(model_p1(1), 1.0, g), 0.0, sched, 2e-3);
  const auto mag = check_gaussian(col1);
  CHECK(mag.pass());
  CHECK(criterion(mag, "max_ratio").value < 1.0);

  auto scaled = col0;
  for (auto& f : scaled.snapshots) f.values *= 1.2;
  CHECK_FALSE(check_gaussian(scaled).pass());
}

TEST_CASE("long-time decay and energy" * doctest::timeout(120)) {
  const Grid2D g(4.0, 129);
  const auto sched = lin_space(0.25, 10.0, 40);
  const auto col = kernel_column(assemble_box(model_p1(1), 1.0, g), 0.0, sched, 1e-2);
  CHECK(check_longtime(col, model_p1(1), 1.0).pass());

  EnergyOptions eo;
  eo.expected_rate = 4.0;
  const auto e = check_energy(col, eo);
  CHECK(e.pass());
  CHECK(constant_of(e, "C_fitted") == doctest::Approx(4.0).epsilon(0.02));

  // Decay of ||H|| at tau = 4 runs at 8 = 2 x lowest eigenvalue.
  const auto sched4 = lin_space(0.0625, 2.5, 40);
  const auto col4 = kernel_column(assemble_box(model_p1(1), 4.0, g), 0.0, sched4, 2.5e-3);
  std::vector<double> s, lg;
  for (std::size_t k = 20; k < col4.times.size(); ++k) {
    s.push_back(col4.times[k]);
    lg.push_back(std::log(col4.snapshots[k].l2_norm()));
  }
  CHECK(-fit_line(s, lg).slope == doctest::Approx(8.0).epsilon(0.03));

  const auto free = kernel_column(assemble_box(model_p1(1), 0.0, g), 0.0, sched, 1e-2);
  CHECK_FALSE(check_longtime(free, model_p1(1), 0.0).pass());
  EnergyOptions none;
  const auto fe = check_energy(free, none);
  CHECK_FALSE(fe.pass());
  CHECK_FALSE(criterion(fe, "C_over_box_rate").pass());

  CHECK(code_of([&] { check_longtime(kernel_column(assemble_box(model_p1(1), 1.0, g), 0.0, lin_space(0.25, 2.0, 10), 1e-2), model_p1(1), 1.0); }) ==
        ErrorCode::ScheduleTooShort);
}

TEST_CASE("derivative exponents" * doctest::timeout(120)) {
  const auto box = assemble_box(model_p1(1), 1.0, Grid2D(2.0, 257));
  const auto col = kernel_column(box, 0.0, log_space(0.02, 0.25, 8), 1e-3);
  const auto r = check_derivatives(box, col, 1, 2, 0.25);
  CHECK(r.pass());
  CHECK(criterion(r, "sup_exponent_n1_a0").value == doctest::Approx(-2.0).epsilon(0.15));
  CHECK(criterion(r, "sup_exponent_n0_a1").value == doctest::Approx(-1.5).epsilon(0.15));
  CHECK(code_of([&] { check_derivatives(box, col, 3, 0, 0.25); }) == ErrorCode::OrderTooHigh);
}

TEST_CASE("subsolution") {
  const Grid2D g(4.0, 129);
  const auto col0 = kernel_column(assemble_box(model_p1(1), 0.0, g), 0.0, lin_space(0.1, 2.0, 39), 2e-3);
  const auto r0 = check_subsolution(col0, {Cylinder{1.0, {0, 0}, 0.5}});
  CHECK(std::isfinite(constant_of(r0, "C_max")));
  CHECK(constant_of(r0, "C_max") > 0.0);

  const auto col1 = kernel_column(assemble_box(model_p1(1), 1.0, g), 0.0, lin_space(0.1, 2.0, 39), 2e-3);
  CHECK(check_subsolution(col1, sample_cylinders(col1, 5, 0.5, 3)).pass());

  CHECK(code_of([&] { check_subsolution(col0, {Cylinder{1.0, {0, 0}, 0.1}}); }) == ErrorCode::CylinderOutOfRange);
  CHECK(code_of([&] { check_subsolution(col0, {Cylinder{1.0, {3.9, 0}, 0.5}}); }) == ErrorCode::CylinderOutOfRange);
  CHECK(code_of([&] { check_subsolution(col0, {Cylinder{0.2, {0, 0}, 0.5}}); }) == ErrorCode::CylinderOutOfRange);
}

TEST_CASE("scaling identities" * doctest::timeout(120)) {
  CHECK(check_scaling(model_p1(1), 1.0, Grid2D(4.0, 129), 0.0, {0.25, 0.5}).pass());
  CHECK(check_scaling(model_p1(2), 1.0, Grid2D(4.0, 129), 0.0, {0.25, 0.5}).pass());
}

TEST_CASE("semigroup and symmetry") {
  const auto box = assemble_box(model_p1(1), 1.0, Grid2D(3.0, 97));
  const auto r = check_semigroup(box, {0.0, {0.25, 0}, {0, 0.5}, {-0.5, 0.25}}, 0.25, 2.5e-3);
  CHECK(r.pass());
}

TEST_CASE("appendix pairs") {
  // Coincident points: everything vanishes.
  const auto p1 = model_p1(2);
  const auto mg = make_metric_grid(p1, Grid2D(3.0, 121));
  CHECK(rho_metric(p1, {1, 0.5}, {1, 0.5}, mg).rho == 0.0);
  CHECK(rho_closed_form(ModelKind::P1, 2, {1, 0.5}, {1, 0.5}) == 0.0);
  CHECK(size_sum(p1, {1, 0.5}, {1, 0.5}) == 0.0);

  // Real-axis pairs for p1, m = 2: all three comparable.
  for (auto [a, b] : {std::pair{0.0, 1.0}, {0.5, 2.0}, {-1.0, 1.5}}) {
    const double grid = rho_metric(p1, a, b, mg).rho;
    const double closed = rho_closed_form(ModelKind::P1, 2, a, b);
    const double sum = size_sum(p1, a, b);
    CAPTURE(a);
    CAPTURE(b);
    for (double ratio : {grid / closed, sum / closed, grid / sum}) {
      CHECK(ratio > 0.25);
      CHECK(ratio < 4.0);
    }
  }

  // p2, m = 2, moving along the imaginary axis: the closed form is |z - w|.
  const auto p2 = model_p2(2);
  const auto mg2 = make_metric_grid(p2, Grid2D(3.0, 121));
  const cplx z{0, -1}, w{0, 1.5};
  CHECK(rho_closed_form(ModelKind::P2, 2, z, w) == doctest::Approx(2.5));
  const double ratio = rho_metric(p2, z, w, mg2).rho / 2.5;
  CHECK(ratio > 0.25);
  CHECK(ratio < 4.0);
}

TEST_CASE("geometry report") {
  std::vector<SizeSample> samples;
  for (double r : {0.1, 1.0, 10.0}) {
    for (double d : {0.01, 1.0, 100.0}) samples.push_back({cplx{r, r}, d});
  }
  samples.push_back({0.0, 1.0});
  const auto r = check_geometry(model_p1(1), samples, 1.0 + 1e-9);
  CHECK(r.pass());
  CHECK(constant_of(r, "mu_of_lambda_lo") == doctest::Approx(1.0));
}
