#include "heatlab/heatlab.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

#include "heatlab/config.hpp"
#include "heatlab/feynman_kac.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/heat_solver.hpp"
#include "heatlab/run.hpp"

struct hl_polynomial {
  heatlab::Polynomial p;
};

struct hl_kernel {
  heatlab::KernelColumn col;
};

struct hl_config {
  heatlab::RunConfig cfg;
};

namespace {

thread_local std::string last_error;

hl_status to_status(heatlab::ErrorCode code) {
  return static_cast<hl_status>(static_cast<int>(code) + 1);
}

hl_status set_error(hl_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

// Runs f, translating exceptions into a status and the thread's message.
template <class F>
hl_status guard(F&& f) {
  try {
    last_error.clear();
    f();
    return HL_OK;
  } catch (const heatlab::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(HL_INTERNAL, e.what());
  } catch (...) {
    return set_error(HL_INTERNAL, "unknown exception");
  }
}

#define HL_REQUIRE(cond, msg) \
  if (!(cond)) return set_error(HL_INVALID_ARGUMENT, msg)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hl_version(void) { return "0.1.0"; }

const char* hl_status_name(hl_status status) {
  if (status == HL_OK) return "Ok";
  if (status == HL_INTERNAL) return "Internal";
  if (status > HL_OK && status < HL_INTERNAL) {
    return heatlab::error_code_name(static_cast<heatlab::ErrorCode>(status - 1));
  }
  return "Unknown";
}

const char* hl_last_error(void) { return last_error.c_str(); }

int hl_exit_code(hl_status status) {
  if (status == HL_OK) return heatlab::kExitOk;
  if (status > HL_OK && status < HL_INTERNAL) {
    return heatlab::exit_code_for(static_cast<heatlab::ErrorCode>(status - 1));
  }
  return heatlab::kExitInternal;
}

hl_status hl_polynomial_create(const int* j, const int* k, const double* re, const double* im,
                               size_t count, hl_polynomial** out) {
  HL_REQUIRE(out && (count == 0 || (j && k && re && im)), "null argument");
  return guard([&] {
    heatlab::CoeffTable t;
    for (size_t i = 0; i < count; ++i) {
      heatlab::require(j[i] >= 0 && k[i] >= 0, "coefficient indices must be nonnegative");
      t[{j[i], k[i]}] += heatlab::cplx{re[i], im[i]};
    }
    *out = new hl_polynomial{heatlab::Polynomial::make(t)};
  });
}

hl_status hl_polynomial_model(int family, int m, hl_polynomial** out) {
  HL_REQUIRE(out, "null argument");
  HL_REQUIRE(family == 1 || family == 2, "model family must be 1 or 2");
  HL_REQUIRE(m >= 1 && m <= 12, "model exponent must lie in [1, 12]");
  return guard([&] { *out = new hl_polynomial{family == 1 ? heatlab::model_p1(m) : heatlab::model_p2(m)}; });
}

void hl_polynomial_destroy(hl_polynomial* p) { delete p; }

int hl_polynomial_degree(const hl_polynomial* p) { return p ? p->p.degree() : -1; }

hl_status hl_polynomial_eval(const hl_polynomial* p, double x1, double x2, double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = p->p.eval({x1, x2}); });
}

hl_status hl_polynomial_laplacian(const hl_polynomial* p, double x1, double x2, double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = p->p.laplacian({x1, x2}); });
}

hl_status hl_geom_lambda(const hl_polynomial* p, double z_re, double z_im, double delta, double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = heatlab::lambda_fn(p->p, {z_re, z_im}, delta); });
}

hl_status hl_geom_mu(const hl_polynomial* p, double z_re, double z_im, double delta, double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = heatlab::mu_fn(p->p, {z_re, z_im}, delta); });
}

hl_status hl_geom_sobolev_radius(const hl_polynomial* p, double tau, double z_re, double z_im,
                                 double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = heatlab::sobolev_radius(p->p, tau, {z_re, z_im}); });
}

hl_status hl_geom_twist(const hl_polynomial* p, double w_re, double w_im, double z_re, double z_im,
                        double* out) {
  HL_REQUIRE(p && out, "null argument");
  return guard([&] { *out = heatlab::twist(p->p, {w_re, w_im}, {z_re, z_im}); });
}

hl_status hl_rho_grid(const hl_polynomial* p, double half_width, int n, double z_re, double z_im,
                      double w_re, double w_im, double* rho, double* straight_line) {
  HL_REQUIRE(p && rho, "null argument");
  return guard([&] {
    const auto mg = heatlab::make_metric_grid(p->p, heatlab::Grid2D(half_width, n));
    const auto r = heatlab::rho_metric(p->p, {z_re, z_im}, {w_re, w_im}, mg);
    *rho = r.rho;
    if (straight_line) *straight_line = r.straight_line;
  });
}

hl_status hl_rho_closed_form(int family, int m, double z_re, double z_im, double w_re, double w_im,
                             double* out) {
  HL_REQUIRE(out, "null argument");
  HL_REQUIRE(family == 1 || family == 2, "model family must be 1 or 2");
  return guard([&] {
    const auto kind = family == 1 ? heatlab::ModelKind::P1 : heatlab::ModelKind::P2;
    *out = heatlab::rho_closed_form(kind, m, {z_re, z_im}, {w_re, w_im});
  });
}

hl_status hl_kernel_compute(const hl_polynomial* p, double tau, double half_width, int n, double dt,
                            double w_re, double w_im, const double* schedule, size_t count,
                            hl_kernel** out) {
  HL_REQUIRE(p && out && (schedule || count == 0), "null argument");
  return guard([&] {
    const auto box = heatlab::assemble_box(p->p, tau, heatlab::Grid2D(half_width, n));
    auto col = heatlab::kernel_column(box, {w_re, w_im}, {schedule, count}, dt);
    *out = new hl_kernel{std::move(col)};
  });
}

void hl_kernel_destroy(hl_kernel* k) { delete k; }

size_t hl_kernel_snapshot_count(const hl_kernel* k) { return k ? k->col.times.size() : 0; }

int hl_kernel_grid_n(const hl_kernel* k) { return k ? k->col.grid.n() : 0; }

double hl_kernel_time(const hl_kernel* k, size_t snapshot) {
  return k && snapshot < k->col.times.size() ? k->col.times[snapshot] : -1.0;
}

hl_status hl_kernel_value(const hl_kernel* k, size_t snapshot, int i, int j, double* re, double* im) {
  HL_REQUIRE(k && re && im, "null argument");
  HL_REQUIRE(snapshot < k->col.times.size(), "snapshot index out of range");
  HL_REQUIRE(i >= 0 && j >= 0 && i < k->col.grid.n() && j < k->col.grid.n(), "node index out of range");
  const auto v = k->col.snapshots[snapshot].at(i, j);
  *re = v.real();
  *im = v.imag();
  return HL_OK;
}

hl_status hl_kernel_interpolate(const hl_kernel* k, size_t snapshot, double x1, double x2, double* re,
                                double* im) {
  HL_REQUIRE(k && re && im, "null argument");
  HL_REQUIRE(snapshot < k->col.times.size(), "snapshot index out of range");
  return guard([&] {
    const auto v = heatlab::interpolate(k->col.snapshots[snapshot], {x1, x2});
    *re = v.real();
    *im = v.imag();
  });
}

hl_status hl_mc_kernel(const hl_polynomial* p, double tau, double x1, double x2, double y1, double y2,
                       double s, int n_paths, int n_t, uint64_t seed, double* re, double* im,
                       double* std_error, double* free_factor) {
  HL_REQUIRE(p && re && im, "null argument");
  return guard([&] {
    const auto e = heatlab::mc_kernel(p->p, tau, {x1, x2}, {y1, y2}, s, n_paths, n_t, seed);
    *re = e.estimate.real();
    *im = e.estimate.imag();
    if (std_error) *std_error = e.std_error;
    if (free_factor) *free_factor = e.free_factor;
  });
}

hl_status hl_config_default(int oracle_mode, hl_config** out) {
  HL_REQUIRE(out, "null argument");
  return guard([&] {
    auto* c = new hl_config{};
    c->cfg.oracle_mode = oracle_mode != 0;
    *out = c;
  });
}

hl_status hl_config_parse(const char* text, int oracle_mode, hl_config** out) {
  HL_REQUIRE(text && out, "null argument");
  return guard([&] { *out = new hl_config{heatlab::parse_config(text, oracle_mode != 0)}; });
}

void hl_config_destroy(hl_config* c) { delete c; }

hl_status hl_config_set(hl_config* c, const char* key, const char* value) {
  HL_REQUIRE(c && key && value, "null argument");
  return guard([&] { heatlab::set_config_value(c->cfg, key, value); });
}

hl_status hl_config_validate(const hl_config* c) {
  HL_REQUIRE(c, "null argument");
  const auto errs = heatlab::validate(c->cfg);
  if (errs.empty()) return HL_OK;
  std::string msg = "configuration has " + std::to_string(errs.size()) + " invalid value(s):";
  for (const auto& e : errs) msg += "\n  " + e;
  return set_error(HL_VALIDATION_ERROR, msg);
}

hl_status hl_config_hash(const hl_config* c, char* buf, size_t len) {
  HL_REQUIRE(c && buf, "null argument");
  HL_REQUIRE(len >= 17, "hash buffer needs 17 bytes");
  return guard([&] {
    const auto h = c->cfg.hash();
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

char* hl_config_canonical(const hl_config* c) { return c ? dup_string(c->cfg.canonical()) : nullptr; }

int hl_run(const hl_config* c, const char* command, const char* outdir, char** summary) {
  if (summary) *summary = nullptr;
  if (!c || !command || !outdir) {
    set_error(HL_INVALID_ARGUMENT, "null argument");
    return hl_exit_code(HL_INVALID_ARGUMENT);
  }
  try {
    last_error.clear();
    const auto r = heatlab::run(c->cfg, command, outdir);
    last_error = r.error;
    if (summary) *summary = dup_string(r.summary);
    return r.exit_code;
  } catch (const std::exception& e) {
    set_error(HL_INTERNAL, e.what());
    return heatlab::kExitInternal;
  }
}

void hl_string_free(char* s) { std::free(s); }

}  // extern "C"

static_assert(HL_IO == static_cast<int>(heatlab::ErrorCode::Io) + 1, "status table out of sync");
