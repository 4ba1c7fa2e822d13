#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "heatlab/config.hpp"
#include "heatlab/run.hpp"

using namespace heatlab;
namespace fs = std::filesystem;

namespace {

ErrorCode parse_code(std::string_view text, std::string* what = nullptr, bool oracle = false) {
  try {
    parse_config(text, oracle);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  FAIL("config was accepted");
  return ErrorCode::InvalidArgument;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("heatlab_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("defaults and overrides") {
  const auto cfg = parse_config("# nothing but a comment\n");
  CHECK(cfg.model == "p1:1");
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.n == 129);
  CHECK(cfg.schedule.size() == 4);
  CHECK(validate(cfg).empty());

  const auto c2 = parse_config(
      "[polynomial]\nmodel = p2:2\n[operator]\ntau = 2.5  # trailing comment\n"
      "[solver]\nschedule = 0.1, 0.2\nsource = 0.5, -0.25\n[geom]\npoints = 0 0; 1 2\n");
  CHECK(c2.model == "p2:2");
  CHECK(c2.tau == 2.5);
  CHECK(c2.schedule == std::vector<double>{0.1, 0.2});
  CHECK(c2.source == cplx{0.5, -0.25});
  CHECK(c2.geom_points.size() == 2);
  CHECK(c2.polynomial().degree() == 4);

  const auto c3 = parse_config("[polynomial]\n1 1 1 0\n2 2 0.5 0\n");
  CHECK(c3.model.empty());
  CHECK(c3.polynomial().degree() == 4);
}

TEST_CASE("validation errors name the problem") {
  std::string what;
  CHECK(parse_code("[operator]\ntau = -1\n", &what) == ErrorCode::ValidationError);
  CHECK(what.find("non-goal") != std::string::npos);

  CHECK(parse_code("[operator]\ntau = 0\n") == ErrorCode::ValidationError);
  CHECK(parse_config("[operator]\ntau = 0\n", true).tau == 0.0);

  // All violations are reported together.
  CHECK(parse_code("[operator]\ntau = -1\n[grid]\nn = 100\n[mc]\nn_paths = 10\n", &what) ==
        ErrorCode::ValidationError);
  CHECK(what.find("tau") != std::string::npos);
  CHECK(what.find("grid.n") != std::string::npos);
  CHECK(what.find("n_paths") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
  std::string what;
  CHECK(parse_code("[polynomial]\n1 1 1 0\n2 x 1 0\n", &what) == ErrorCode::ParseError);
  CHECK(what.find("line 3") != std::string::npos);

  CHECK(parse_code("[nope]\n[grid]\nwidth = 3\n", &what) == ErrorCode::ParseError);
  CHECK(what.find("line 1") != std::string::npos);
  CHECK(what.find("line 3") != std::string::npos);

  CHECK(parse_code("[grid]\nn = 65\nn = 65\n") == ErrorCode::ParseError);
  CHECK(parse_code("[polynomial]\nmodel = p1:1\n1 1 1 0\n") == ErrorCode::ParseError);
  CHECK(parse_code("[solver]\ndt = abc\n") == ErrorCode::ParseError);
}

TEST_CASE("hash is stable and sensitive") {
  RunConfig a, b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.tau = 2.0;
  CHECK(a.hash() != b.hash());
  set_config_value(b, "operator.tau", "1");
  CHECK(a.hash() == b.hash());
  CHECK(parse_config("[grid]\nn = 129\n").hash() == a.hash());
}

TEST_CASE("run: errors map to exit codes") {
  RunConfig cfg;
  cfg.n = 65;
  cfg.schedule = {0.01};
  const auto dir = scratch("early");
  const auto r = run(cfg, "kernel", dir.string());
  CHECK(r.exit_code == 3);
  CHECK(r.error.find("ScheduleUnreachable") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.json"));

  CHECK(run(cfg, "frobnicate", scratch("bad").string()).exit_code == exit_code_for(ErrorCode::InvalidArgument));

  RunConfig neg;
  neg.tau = -1.0;
  CHECK(run(neg, "geom", scratch("neg").string()).exit_code == kExitConfig);
}

TEST_CASE("run: artifacts are reproducible and stamped") {
  RunConfig cfg;
  cfg.model = "p1:2";
  cfg.half_width = 2.0;
  cfg.n = 65;
  cfg.schedule = {0.1, 0.2};
  cfg.n_paths = 1000;
  cfg.n_t = 64;
  cfg.rho_pairs = 4;

  for (const char* cmd : {"geom", "rho", "kernel", "mc"}) {
    const std::string cmd_name = cmd;
    CAPTURE(cmd_name);
    const auto d1 = scratch(std::string(cmd) + "_1");
    const auto d2 = scratch(std::string(cmd) + "_2");
    const auto r1 = run(cfg, cmd, d1.string());
    const auto r2 = run(cfg, cmd, d2.string());
    CAPTURE(r1.error);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    CHECK(r1.artifacts == r2.artifacts);
    for (const auto& name : r1.artifacts) {
      CAPTURE(name);
      const auto text = slurp(d1 / name);
      if (name != "manifest.json") CHECK(text == slurp(d2 / name));
      if (name.ends_with(".csv")) {
        CHECK(text.starts_with("# config_hash=" + cfg.hash() + "\n"));
      } else {
        CHECK(nlohmann::json::parse(text).at("config_hash") == cfg.hash());
      }
    }
    auto m1 = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    auto m2 = nlohmann::json::parse(slurp(d2 / "manifest.json"));
    CHECK(m1.at("config_hash") == cfg.hash());
    m1.erase("created_utc");
    m2.erase("created_utc");
    CHECK(m1 == m2);
  }
}
