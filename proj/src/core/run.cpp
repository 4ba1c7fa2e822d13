#include "heatlab/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>

#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json point_json(cplx z) { return Json::array({z.real(), z.imag()}); }

// Collects artifacts in memory; the caller flushes them from one thread.
class ArtifactSet {
 public:
  ArtifactSet(std::string outdir, std::string hash) : dir_(std::move(outdir)), hash_(std::move(hash)) {}

  const std::string& hash() const { return hash_; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    std::string s = "# config_hash=" + hash_ + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ",";
        s += g17(row[i]);
      }
      s += "\n";
    }
    files_.emplace_back(name, std::move(s));
  }

  void json(const std::string& name, Json j) {
    Json out;
    out["config_hash"] = hash_;
    for (auto& [k, v] : j.items()) {
      if (k != "config_hash") out[k] = v;
    }
    files_.emplace_back(name, out.dump(2) + "\n");
  }

  /// Writes every collected file plus manifest.json.
  std::vector<std::string> flush(Json manifest) {
    fs::create_directories(dir_);
    Json list = Json::array();
    std::vector<std::string> names;
    for (const auto& [name, body] : files_) {
      write(name, body);
      list.push_back({{"file", name}, {"bytes", body.size()}, {"fnv1a", hex64(fnv1a(body))}});
      names.push_back(name);
    }
    manifest["artifacts"] = list;
    write("manifest.json", manifest.dump(2) + "\n");
    names.push_back("manifest.json");
    return names;
  }

 private:
  void write(const std::string& name, const std::string& body) const {
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    f << body;
    if (!f) fail(ErrorCode::Io, "cannot write " + (fs::path(dir_) / name).string());
  }

  std::string dir_;
  std::string hash_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<double> field_row(const Grid2D& g, int i, int j, cplx v) {
  const Vec2 x = g.node(i, j);
  return {x.x1, x.x2, v.real(), v.imag(), std::abs(v)};
}

std::vector<std::vector<double>> field_rows(const ComplexField& f) {
  std::vector<std::vector<double>> rows;
  rows.reserve(f.grid.size());
  for (int i = 0; i < f.grid.n(); ++i) {
    for (int j = 0; j < f.grid.n(); ++j) rows.push_back(field_row(f.grid, i, j, f.at(i, j)));
  }
  return rows;
}

double decay_scale(const Polynomial& p, double tau, cplx w0) {
  return tau > 0.0 ? mu_fn(p, w0, 1.0 / tau) : 1.0;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_geom(const RunConfig& cfg, ArtifactSet& out, Json& summary) {
  const auto p = cfg.polynomial();
  std::vector<std::vector<double>> rows;
  for (const cplx z : cfg.geom_points) {
    const double r = cfg.tau > 0.0 ? sobolev_radius(p, cfg.tau, z) : INFINITY;
    for (const double d : cfg.geom_deltas) {
      rows.push_back({z.real(), z.imag(), d, lambda_fn(p, z, d), mu_fn(p, z, d), r});
    }
  }
  out.csv("geom.csv", {"z_re", "z_im", "delta", "lambda", "mu", "R_taup"}, rows);
  summary["rows"] = rows.size();
}

void cmd_rho(const RunConfig& cfg, ArtifactSet& out, Json& summary) {
  const auto p = cfg.polynomial();
  const Grid2D grid(cfg.half_width, cfg.n);
  const auto mg = make_metric_grid(p, grid);
  std::optional<std::pair<ModelKind, int>> model;
  if (cfg.coeffs.empty()) {
    const int family = cfg.model[1] - '0';
    model = {{family == 1 ? ModelKind::P1 : ModelKind::P2, std::stoi(cfg.model.substr(3))}};
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> node(grid.n() / 4, grid.n() - 1 - grid.n() / 4);
  std::vector<std::vector<double>> rows;
  double lo = INFINITY, hi = -INFINITY;
  while (static_cast<int>(rows.size()) < cfg.rho_pairs) {
    const int a = node(rng), b = node(rng), c = node(rng), d = node(rng);
    if (a == c && b == d) continue;
    const cplx z = to_complex(grid.node(a, b)), w = to_complex(grid.node(c, d));
    const auto r = rho_metric(p, z, w, mg);
    const double closed = model ? rho_closed_form(model->first, model->second, z, w) : NAN;
    const double ratio = r.rho / closed;
    if (std::isfinite(ratio)) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    rows.push_back({z.real(), z.imag(), w.real(), w.imag(), r.rho, r.straight_line, closed,
                    size_sum(p, z, w), ratio});
  }
  out.csv("rho.csv",
          {"z_re", "z_im", "w_re", "w_im", "rho_grid", "rho_straight", "rho_closed", "size_sum", "ratio"},
          rows);
  summary["pairs"] = rows.size();
  if (model) {
    summary["ratio_min"] = lo;
    summary["ratio_max"] = hi;
  }
}

void cmd_kernel(const RunConfig& cfg, ArtifactSet& out, Json& summary) {
  const auto p = cfg.polynomial();
  const auto box = assemble_box(p, cfg.tau, Grid2D(cfg.half_width, cfg.n));
  const auto col = kernel_column(box, cfg.source, cfg.schedule, cfg.dt);
  Json files = Json::array();
  for (std::size_t k = 0; k < col.times.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "kernel_%03zu.csv", k);
    out.csv(name, {"x1", "x2", "re", "im", "abs"}, field_rows(col.snapshots[k]));
    files.push_back({{"s", col.times[k]}, {"file", name}});
  }
  Json j;
  j["source"] = point_json(col.source);
  j["tau"] = cfg.tau;
  j["L"] = cfg.half_width;
  j["n"] = cfg.n;
  j["dt"] = cfg.dt;
  j["snapshots"] = files;
  j["steps"] = col.stats.steps;
  j["cg_iterations"] = col.stats.cg_iterations;
  j["max_residual"] = col.stats.max_residual;
  out.json("kernel.json", j);
  summary["snapshots"] = col.times.size();
  summary["steps"] = col.stats.steps;
}

void cmd_mc(const RunConfig& cfg, ArtifactSet& out, Json& summary) {
  const auto p = cfg.polynomial();
  const auto e = mc_kernel(p, cfg.tau, cfg.mc_x, cfg.mc_y, cfg.mc_s, cfg.n_paths, cfg.n_t, cfg.seed);
  Json params;
  params["polynomial"] = describe(p);
  params["tau"] = cfg.tau;
  params["x"] = Json::array({cfg.mc_x.x1, cfg.mc_x.x2});
  params["y"] = Json::array({cfg.mc_y.x1, cfg.mc_y.x2});
  params["s"] = cfg.mc_s;
  params["n_paths"] = cfg.n_paths;
  params["n_t"] = cfg.n_t;
  params["seed"] = cfg.seed;
  Json j;
  j["estimate_re"] = e.estimate.real();
  j["estimate_im"] = e.estimate.imag();
  j["stderr"] = e.std_error;
  j["free_factor"] = e.free_factor;
  j["params"] = params;
  out.json("mc.json", j);
  summary["estimate_re"] = e.estimate.real();
  summary["estimate_im"] = e.estimate.imag();
  summary["stderr"] = e.std_error;
}

void cmd_gfield(const RunConfig& cfg, ArtifactSet& out, Json& summary) {
  const auto p = cfg.polynomial();
  const auto box = assemble_box(p, cfg.tau, Grid2D(cfg.half_width, cfg.n));
  const double mu = decay_scale(p, cfg.tau, cfg.source);
  const double s_max = cfg.gfield_s_max > 0.0 ? cfg.gfield_s_max : 12.0 * mu * mu;
  FundamentalSolutionOptions opts;
  opts.n_points = cfg.gfield_points;
  opts.dt_max = cfg.dt;
  const auto g = fundamental_solution(box, cfg.source, s_max, opts);
  out.csv("gfield.csv", {"x1", "x2", "re", "im", "abs"}, field_rows(g.field));
  Json j;
  j["source"] = point_json(g.source);
  j["tau"] = cfg.tau;
  j["mu"] = mu;
  j["s_max"] = g.s_max;
  j["schedule_points"] = g.times.size();
  j["decay_rate"] = g.decay_rate;
  j["tail_bound"] = g.tail_bound;
  j["near_diagonal"] = g.near_diagonal;
  j["steps"] = g.stats.steps;
  out.json("gfield.json", j);
  summary["decay_rate"] = g.decay_rate;
  summary["tail_bound"] = g.tail_bound;
}

// ---------------------------------------------------------------------------
// Verify suite

// Problems for the derived checks are translated so the source sits at the
// origin of an origin-centered grid; moduli of covariant quantities do not
// change under translation.
struct Setup {
  Polynomial p;  // translated
  double tau;
  double mu;
};

Setup derived_setup(const RunConfig& cfg) {
  const auto p = cfg.polynomial();
  return {p.translated(cfg.source), cfg.tau, decay_scale(p, cfg.tau, cfg.source)};
}

void tag(BoundReport& r, const RunConfig& cfg, const std::string& setup) {
  r.record("polynomial", describe(cfg.polynomial()));
  r.record("config.source", g17(cfg.source.real()) + " " + g17(cfg.source.imag()));
  r.record("setup", setup);
}

BoundReport suite_gaussian(const RunConfig& cfg) {
  const auto box = assemble_box(cfg.polynomial(), cfg.tau, Grid2D(cfg.half_width, cfg.n));
  auto r = check_gaussian(kernel_column(box, cfg.source, cfg.schedule, cfg.dt));
  tag(r, cfg, "config grid, schedule and dt");
  return r;
}

struct LongColumn {
  DiscreteBox box;
  KernelColumn col;
};

LongColumn long_column(const Setup& s) {
  const double m2 = s.mu * s.mu;
  auto box = assemble_box(s.p, s.tau, Grid2D(4.0 * std::max(s.mu, 1.0), 129));
  auto col = kernel_column(box, 0.0, lin_space(0.25 * m2, 10.0 * m2, 40), 0.01 * m2);
  return {std::move(box), std::move(col)};
}

BoundReport suite_longtime(const RunConfig& cfg) {
  const auto s = derived_setup(cfg);
  auto r = check_longtime(long_column(s).col, s.p, s.tau);
  tag(r, cfg, "L = 4 max(mu, 1), n = 129, 40 times over [0.25, 10] mu^2, dt = 0.01 mu^2");
  return r;
}

BoundReport suite_energy(const RunConfig& cfg) {
  const auto s = derived_setup(cfg);
  const auto lc = long_column(s);
  const auto eig = smallest_eigenvalue(lc.box);
  EnergyOptions opts;
  opts.expected_rate = 2.0 * eig.value;
  auto r = check_energy(lc.col, opts);
  r.constant("lambda_min", eig.value);
  r.record("lambda_min.iterations", static_cast<double>(eig.iterations));
  tag(r, cfg,
      "L = 4 max(mu, 1), n = 129, 40 times over [0.25, 10] mu^2, dt = 0.01 mu^2; expected rate "
      "2 lambda_min of the same grid operator");
  return r;
}

BoundReport suite_derivs(const RunConfig& cfg) {
  const auto s = derived_setup(cfg);
  const double s_hi = 0.25 * s.mu * s.mu;
  const double s_lo = s_hi / 12.5;
  const auto box = assemble_box(s.p, s.tau, Grid2D(4.0 * std::sqrt(s_hi), 257));
  const auto col = kernel_column(box, 0.0, log_space(s_lo, s_hi, 8), s_lo / 20.0);
  auto r = check_derivatives(box, col, 1, 2, s_hi);
  tag(r, cfg, "L = 4 sqrt(s_hi), n = 257, 8 log-spaced times over [s_hi / 12.5, s_hi], s_hi = mu^2 / 4");
  return r;
}

BoundReport suite_subsolution(const RunConfig& cfg) {
  const auto s = derived_setup(cfg);
  const double m2 = s.mu * s.mu;
  const auto box = assemble_box(s.p, s.tau, Grid2D(4.0 * std::max(s.mu, 1.0), 257));
  const auto col = kernel_column(box, 0.0, lin_space(0.2 * m2, 2.0 * m2, 37), 0.01 * m2);
  auto r = check_subsolution(col, sample_cylinders(col, 5, 0.5 * s.mu, cfg.seed));
  tag(r, cfg, "L = 4 max(mu, 1), n = 257, 37 times over [0.2, 2] mu^2, 5 cylinders of radius mu / 2");
  return r;
}

BoundReport suite_scaling(const RunConfig& cfg) {
  ScalingOptions opts;
  opts.dt = cfg.dt;
  auto r = check_scaling(cfg.polynomial(), cfg.tau, Grid2D(cfg.half_width, cfg.n), cfg.source,
                         cfg.schedule, opts);
  tag(r, cfg, "config grid, schedule and dt");
  return r;
}

BoundReport suite_gbounds(const RunConfig& cfg) {
  const auto s = derived_setup(cfg);
  const double m2 = s.mu * s.mu;
  const auto box = assemble_box(s.p, s.tau, Grid2D(5.0 * s.mu, 385));
  FundamentalSolutionOptions opts;
  opts.dt_max = 0.05 * m2;
  auto r = check_G_bounds(fundamental_solution(box, 0.0, 12.0 * m2, opts), s.p, s.tau);
  tag(r, cfg, "L = 5 mu, n = 385, s_max = 12 mu^2, dt_max = 0.05 mu^2");
  return r;
}

BoundReport suite_appendix(const RunConfig& cfg) {
  AppendixOptions opts;
  auto r = check_appendix_equivalence(cfg.appendix_m, opts);
  r.record("setup", "model families p1 and p2 (independent of the configured polynomial)");
  return r;
}

BoundReport suite_semigroup(const RunConfig& cfg) {
  const auto box = assemble_box(cfg.polynomial(), cfg.tau, Grid2D(cfg.half_width, cfg.n));
  const double u = std::min(0.25, cfg.half_width / 16.0);
  std::vector<cplx> sources;
  for (const cplx o : {cplx{0, 0}, cplx{1, 0}, cplx{0, 1}, cplx{-1, 1}, cplx{2, 0}, cplx{0, -2},
                       cplx{2, 2}, cplx{-2, -1}, cplx{3, 0}, cplx{-3, 2}, cplx{1, -3}}) {
    sources.push_back(cfg.source + u * o);
  }
  auto r = check_semigroup(box, sources, cfg.schedule.front(), cfg.dt);
  tag(r, cfg, "config grid and dt, s = first schedule time, 11 sources around the configured one");
  return r;
}

BoundReport suite_mc(const RunConfig& cfg) {
  McOptions opts;
  opts.n_paths = cfg.n_paths;
  opts.n_t = cfg.n_t;
  opts.seed = cfg.seed;
  opts.half_width = cfg.half_width;
  opts.n = cfg.n;
  opts.dt = cfg.dt;
  std::vector<McTriple> triples;
  for (const Vec2 off : {Vec2{0.0, 0.0}, Vec2{0.5, 0.5}, Vec2{0.75, 0.0}}) {
    for (const double s : {cfg.mc_s, 2.0 * cfg.mc_s}) {
      triples.push_back({{cfg.mc_x.x1 + off.x1, cfg.mc_x.x2 + off.x2}, cfg.mc_y, s});
    }
  }
  auto r = check_mc_crossval(cfg.polynomial(), cfg.tau, triples, opts);
  tag(r, cfg, "config grid, dt and mc section; x offsets (0,0), (0.5,0.5), (0.75,0); s, 2s");
  return r;
}

BoundReport suite_free(const RunConfig& cfg) {
  auto r = check_free_oracle(cfg.half_width, cfg.n, cfg.dt, cfg.schedule);
  r.record("setup", "tau = 0 on the config grid, schedule and dt");
  return r;
}

using SuiteFn = BoundReport (*)(const RunConfig&);

SuiteFn suite_fn(std::string_view name) {
  static const std::pair<const char*, SuiteFn> table[] = {
      {"gaussian", suite_gaussian},   {"longtime", suite_longtime},   {"energy", suite_energy},
      {"derivs", suite_derivs},       {"subsolution", suite_subsolution},
      {"scaling", suite_scaling},     {"gbounds", suite_gbounds},     {"appendix", suite_appendix},
      {"semigroup", suite_semigroup}, {"mc", suite_mc},               {"free", suite_free},
  };
  for (const auto& [n, f] : table) {
    if (name == n) return f;
  }
  fail(ErrorCode::InvalidArgument, "unknown check '" + std::string(name) + "'");
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string summary_table(const std::vector<BoundReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "check" << std::setw(8) << "verdict" << std::setw(14)
     << "worst_margin" << "worst criterion\n";
  for (const auto& r : reports) {
    const Criterion* worst = nullptr;
    for (const auto& c : r.criteria) {
      if (!worst || c.margin() > worst->margin()) worst = &c;
    }
    os << std::setw(14) << r.name << std::setw(8) << (r.pass() ? "PASS" : "FAIL") << std::setw(14)
       << (r.criteria.empty() ? std::string("-") : short_num(r.worst_margin()));
    if (worst) {
      os << worst->name << " = " << worst->value << " in [" << worst->lo << ", " << worst->hi << "]";
    } else if (!r.notes.empty()) {
      os << r.notes.back();
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError: return kExitConfig;
    case ErrorCode::ScheduleUnreachable: return kExitScheduleUnreachable;
    case ErrorCode::InvalidArgument: return 4;
    case ErrorCode::NotReal: return 5;
    case ErrorCode::Harmonic: return 6;
    case ErrorCode::DegreeTooLow: return 7;
    case ErrorCode::AllMixedTermsVanish: return 8;
    case ErrorCode::GridTooCoarse: return 9;
    case ErrorCode::NotHermitian: return 10;
    case ErrorCode::NotPSD: return 11;
    case ErrorCode::SolverDiverged: return 12;
    case ErrorCode::TailNotNegligible: return 13;
    case ErrorCode::PositiveRealPart: return 14;
    case ErrorCode::OrderTooHigh: return 15;
    case ErrorCode::CylinderOutOfRange: return 16;
    case ErrorCode::ScheduleTooShort: return 17;
    case ErrorCode::Io: return 18;
  }
  return kExitInternal;
}

std::vector<std::string> suite_checks(std::string_view suite) {
  if (suite == "all") {
    return {"gaussian", "longtime", "energy", "derivs", "subsolution", "scaling", "gbounds", "appendix"};
  }
  (void)suite_fn(suite);
  return {std::string(suite)};
}

std::vector<BoundReport> run_suite(const RunConfig& cfg, std::string_view suite,
                                   std::vector<std::pair<std::size_t, Error>>* errors) {
  const auto names = suite_checks(suite);
  std::vector<std::future<BoundReport>> jobs;
  for (const auto& name : names) jobs.push_back(std::async(std::launch::async, suite_fn(name), std::cref(cfg)));
  std::vector<BoundReport> reports;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      reports.push_back(jobs[i].get());
    } catch (const Error& e) {
      BoundReport r;
      r.name = names[i];
      r.notes.push_back(std::string("error ") + error_code_name(e.code()) + ": " + e.what());
      reports.push_back(std::move(r));
      if (errors) errors->emplace_back(i, e);
    }
  }
  return reports;
}

RunOutcome run(const RunConfig& cfg, std::string_view command, const std::string& outdir) {
  RunOutcome outcome;
  ArtifactSet out(outdir, cfg.hash());
  Json summary;
  Json verdicts = Json::array();
  try {
    const auto errs = validate(cfg);
    if (!errs.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& e : errs) msg += "\n  " + e;
      fail(ErrorCode::ValidationError, msg);
    }
    if (command == "geom") {
      cmd_geom(cfg, out, summary);
    } else if (command == "rho") {
      cmd_rho(cfg, out, summary);
    } else if (command == "kernel") {
      cmd_kernel(cfg, out, summary);
    } else if (command == "mc") {
      cmd_mc(cfg, out, summary);
    } else if (command == "gfield") {
      cmd_gfield(cfg, out, summary);
    } else if (command == "verify") {
      std::vector<std::pair<std::size_t, Error>> errors;
      const auto reports = run_suite(cfg, cfg.suite, &errors);
      bool all_pass = true;
      for (const auto& r : reports) {
        out.json("report_" + r.name + ".json", Json::parse(to_json(r)));
        verdicts.push_back({{"check", r.name}, {"verdict", r.pass() ? "pass" : "fail"}});
        all_pass = all_pass && r.pass();
      }
      outcome.summary = summary_table(reports);
      if (!errors.empty()) {
        outcome.exit_code = exit_code_for(errors.front().second.code());
        outcome.error =
            std::string(error_code_name(errors.front().second.code())) + " in check '" +
            reports[errors.front().first].name + "': " + errors.front().second.what();
      } else if (!all_pass) {
        outcome.exit_code = kExitCheckFailed;
      }
    } else {
      fail(ErrorCode::InvalidArgument, "unknown command '" + std::string(command) + "'");
    }
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e.code());
    outcome.error = std::string(error_code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInternal;
    outcome.error = std::string("internal error: ") + e.what();
  }

  if (outcome.summary.empty() && !summary.is_null()) outcome.summary = summary.dump() + "\n";

  Json manifest;
  manifest["config_hash"] = out.hash();
  manifest["tool"] = "heatlab";
  manifest["version"] = kVersion;
  manifest["command"] = std::string(command);
  manifest["created_utc"] = utc_now();
  manifest["exit_code"] = outcome.exit_code;
  manifest["error"] = outcome.error.empty() ? Json() : Json(outcome.error);
  manifest["config"] = cfg.canonical();
  if (!summary.is_null()) manifest["summary"] = summary;
  if (!verdicts.empty()) manifest["verdicts"] = verdicts;
  try {
    outcome.artifacts = out.flush(manifest);
  } catch (const std::exception& e) {
    if (outcome.exit_code == kExitOk || outcome.exit_code == kExitCheckFailed) {
      outcome.exit_code = exit_code_for(ErrorCode::Io);
    }
    outcome.error += (outcome.error.empty() ? "" : "; ") + std::string("Io: ") + e.what();
  }
  return outcome;
}

}  // namespace heatlab
