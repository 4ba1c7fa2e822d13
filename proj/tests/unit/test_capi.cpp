// Exercises the shared library through heatlab.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "heatlab/heatlab.h"

TEST_CASE("status names and exit codes") {
  CHECK(std::string(hl_status_name(HL_OK)) == "Ok");
  CHECK(std::string(hl_status_name(HL_HARMONIC)) == "Harmonic");
  CHECK(hl_exit_code(HL_OK) == 0);
  CHECK(hl_exit_code(HL_SCHEDULE_UNREACHABLE) == 3);
  CHECK(hl_exit_code(HL_VALIDATION_ERROR) == 2);
  CHECK(hl_exit_code(HL_INTERNAL) == 70);
  CHECK(std::string(hl_version()).size() > 0);
}

TEST_CASE("polynomial round trip") {
  // |z|^2 = z conj(z)
  const int j[] = {1};
  const int k[] = {1};
  const double re[] = {1.0};
  const double im[] = {0.0};
  hl_polynomial* p = nullptr;
  REQUIRE(hl_polynomial_create(j, k, re, im, 1, &p) == HL_OK);
  CHECK(hl_polynomial_degree(p) == 2);
  double v = 0.0;
  REQUIRE(hl_polynomial_eval(p, 1.0, 2.0, &v) == HL_OK);
  CHECK(v == doctest::Approx(5.0));
  REQUIRE(hl_polynomial_laplacian(p, 0.3, -0.7, &v) == HL_OK);
  CHECK(v == doctest::Approx(4.0));
  REQUIRE(hl_geom_mu(p, 0.0, 0.0, 1.0, &v) == HL_OK);
  CHECK(v == doctest::Approx(1.0));
  hl_polynomial_destroy(p);

  // z^2 + conj(z)^2 = 2 Re z^2 is harmonic
  const int j2[] = {2, 0};
  const int k2[] = {0, 2};
  const double re2[] = {1.0, 1.0};
  const double im2[] = {0.0, 0.0};
  CHECK(hl_polynomial_create(j2, k2, re2, im2, 2, &p) == HL_HARMONIC);
  CHECK(std::string(hl_last_error()).size() > 0);
  CHECK(hl_polynomial_create(j2, k2, re2, im2, 1, &p) == HL_NOT_REAL);
  CHECK(hl_polynomial_eval(nullptr, 0, 0, &v) == HL_INVALID_ARGUMENT);
}

TEST_CASE("free kernel through the C API") {
  hl_polynomial* p = nullptr;
  REQUIRE(hl_polynomial_model(1, 1, &p) == HL_OK);
  const double sched[] = {0.5};
  hl_kernel* kern = nullptr;
  REQUIRE(hl_kernel_compute(p, 0.0, 4.0, 129, 2e-3, 0.0, 0.0, sched, 1, &kern) == HL_OK);
  CHECK(hl_kernel_snapshot_count(kern) == 1);
  CHECK(hl_kernel_grid_n(kern) == 129);
  CHECK(hl_kernel_time(kern, 0) == doctest::Approx(0.5));
  double re = 0.0, im = 0.0;
  REQUIRE(hl_kernel_value(kern, 0, 64, 64, &re, &im) == HL_OK);
  CHECK(re == doctest::Approx(1.0 / (M_PI * 0.5)).epsilon(0.02));
  REQUIRE(hl_kernel_interpolate(kern, 0, 0.5, 0.0, &re, &im) == HL_OK);
  CHECK(re == doctest::Approx(std::exp(-0.5) / (M_PI * 0.5)).epsilon(0.02));
  CHECK(hl_kernel_value(kern, 3, 0, 0, &re, &im) == HL_INVALID_ARGUMENT);
  hl_kernel_destroy(kern);

  const double early[] = {0.001};
  CHECK(hl_kernel_compute(p, 1.0, 4.0, 129, 2e-3, 0.0, 0.0, early, 1, &kern) == HL_SCHEDULE_UNREACHABLE);
  hl_polynomial_destroy(p);
}

TEST_CASE("config and run") {
  hl_config* c = nullptr;
  CHECK(hl_config_parse("[grid]\nn = 64\n", 0, &c) == HL_VALIDATION_ERROR);
  CHECK(hl_config_parse("[grid]\nn = \n", 0, &c) == HL_PARSE_ERROR);
  REQUIRE(hl_config_parse("[polynomial]\nmodel = p1:2\n", 0, &c) == HL_OK);
  char hash[17];
  REQUIRE(hl_config_hash(c, hash, sizeof hash) == HL_OK);
  CHECK(std::string(hash).size() == 16);
  CHECK(hl_config_set(c, "operator.tau", "-1") == HL_OK);
  CHECK(hl_config_validate(c) == HL_VALIDATION_ERROR);
  CHECK(std::string(hl_last_error()).find("non-goal") != std::string::npos);
  CHECK(hl_config_set(c, "operator.tau", "2") == HL_OK);
  CHECK(hl_config_set(c, "nope.key", "2") == HL_PARSE_ERROR);
  CHECK(hl_config_validate(c) == HL_OK);
  char* canon = hl_config_canonical(c);
  REQUIRE(canon);
  CHECK(std::string(canon).find("operator.tau = 2") != std::string::npos);
  hl_string_free(canon);

  const auto dir = std::filesystem::temp_directory_path() / "heatlab_capi_run";
  std::filesystem::remove_all(dir);
  char* summary = nullptr;
  CHECK(hl_run(c, "geom", dir.string().c_str(), &summary) == 0);
  REQUIRE(summary);
  hl_string_free(summary);
  CHECK(std::filesystem::exists(dir / "geom.csv"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  hl_config_destroy(c);
}
