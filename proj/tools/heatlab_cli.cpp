// heatlab command-line front end. Talks to the library only through heatlab.h.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/heatlab.h"

namespace {

struct Overrides {
  std::map<std::string, std::string> values;  // config key -> text

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        "--" + flag, [this, key](const std::string& v) { values[key] = v; }, help + " [" + key + "]");
  }
};

void add_model_flags(CLI::App* app, Overrides& o) {
  o.add(app, "p", "polynomial.model", "model polynomial p1:m or p2:m");
  o.add(app, "tau", "operator.tau", "weight parameter");
  o.add(app, "L", "grid.L", "grid half width");
  o.add(app, "n", "grid.n", "grid nodes per side");
}

int fail_with(int code, const std::string& what) {
  std::cerr << "heatlab: " << what << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heatlab: heat kernels of weighted dbar Laplacians on the plane"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", std::string(hl_version()));

  std::string config_path;
  std::string outdir = "heatlab_out";
  bool oracle_mode = false;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", outdir, "output directory")->capture_default_str();
  app.add_flag("--oracle-mode", oracle_mode, "allow tau = 0 (free heat kernel)");
  app.add_option("--set", sets, "override section.key=value (repeatable)");

  Overrides o;
  auto* geom = app.add_subcommand("geom", "size functions on a point set");
  add_model_flags(geom, o);
  o.add(geom, "points", "geom.points", "points 'x y; x y; ...'");
  o.add(geom, "deltas", "geom.deltas", "delta values");

  auto* rho = app.add_subcommand("rho", "grid metric against the closed forms");
  add_model_flags(rho, o);
  o.add(rho, "pairs", "rho.pairs", "number of sampled pairs");
  o.add(rho, "seed", "mc.seed", "sampling seed");

  auto* kernel = app.add_subcommand("kernel", "heat kernel column H(s, ., w0)");
  add_model_flags(kernel, o);
  o.add(kernel, "dt", "solver.dt", "time step");
  o.add(kernel, "w0", "solver.source", "source 'x1,x2'");
  o.add(kernel, "schedule", "solver.schedule", "snapshot times");

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of H(s, x, y)");
  add_model_flags(mc, o);
  o.add(mc, "x", "mc.x", "evaluation point 'x1,x2'");
  o.add(mc, "y", "mc.y", "source point 'y1,y2'");
  o.add(mc, "s", "mc.s", "kernel time");
  o.add(mc, "n-paths", "mc.n_paths", "number of bridges");
  o.add(mc, "n-t", "mc.n_t", "time steps per bridge");
  o.add(mc, "seed", "mc.seed", "base seed");

  auto* gfield = app.add_subcommand("gfield", "fundamental solution G(., w0)");
  add_model_flags(gfield, o);
  o.add(gfield, "dt", "solver.dt", "step cap");
  o.add(gfield, "w0", "solver.source", "source 'x1,x2'");
  o.add(gfield, "s-max", "gfield.s_max", "upper time limit (default 12 mu^2)");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_model_flags(verify, o);
  std::string suite;
  verify
      ->add_option("suite", suite,
                   "gaussian|longtime|energy|derivs|subsolution|scaling|gbounds|appendix|all "
                   "(extras: semigroup|mc|free)")
      ->check(CLI::IsMember({"gaussian", "longtime", "energy", "derivs", "subsolution", "scaling",
                             "gbounds", "appendix", "all", "semigroup", "mc", "free"}));
  o.add(verify, "w0", "solver.source", "source 'x1,x2'");
  o.add(verify, "dt", "solver.dt", "time step");
  o.add(verify, "schedule", "solver.schedule", "snapshot times");

  CLI11_PARSE(app, argc, argv);

  hl_config* cfg = nullptr;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    std::stringstream text;
    text << f.rdbuf();
    if (!f) return fail_with(hl_exit_code(HL_IO), "cannot read " + config_path);
    const hl_status s = hl_config_parse(text.str().c_str(), oracle_mode ? 1 : 0, &cfg);
    if (s != HL_OK) return fail_with(hl_exit_code(s), config_path + ": " + hl_last_error());
  } else if (hl_config_default(oracle_mode ? 1 : 0, &cfg) != HL_OK) {
    return fail_with(hl_exit_code(HL_INTERNAL), hl_last_error());
  }

  if (!suite.empty()) o.values["verify.suite"] = suite;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      hl_config_destroy(cfg);
      return fail_with(hl_exit_code(HL_PARSE_ERROR), "--set expects section.key=value, got '" + kv + "'");
    }
    o.values[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  std::string errors;
  for (const auto& [key, value] : o.values) {
    if (hl_config_set(cfg, key.c_str(), value.c_str()) != HL_OK) errors += std::string("\n  ") + hl_last_error();
  }
  if (!errors.empty()) {
    hl_config_destroy(cfg);
    return fail_with(hl_exit_code(HL_PARSE_ERROR), "bad command-line values:" + errors);
  }
  if (hl_config_validate(cfg) != HL_OK) {
    const std::string msg = hl_last_error();
    hl_config_destroy(cfg);
    return fail_with(hl_exit_code(HL_VALIDATION_ERROR), msg);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  char* summary = nullptr;
  const int code = hl_run(cfg, command.c_str(), outdir.c_str(), &summary);
  const std::string error = hl_last_error();
  if (summary) {
    std::cout << summary;
    hl_string_free(summary);
  }
  hl_config_destroy(cfg);
  if (!error.empty()) std::cerr << "heatlab: " << error << "\n";
  return code;
}
