#include "heatlab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "heatlab/error.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double dist2(Vec2 a, Vec2 b) {
  const double dx = a.x1 - b.x1, dy = a.x2 - b.x2;
  return dx * dx + dy * dy;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::string point(cplx z) { return "(" + num(z.real()) + "," + num(z.imag()) + ")"; }

void record_grid(BoundReport& r, const Grid2D& g, const std::string& prefix = "grid") {
  r.record(prefix + ".L", g.half_width());
  r.record(prefix + ".n", static_cast<double>(g.n()));
  r.record(prefix + ".h", g.h());
}

void record_column(BoundReport& r, const KernelColumn& col) {
  record_grid(r, col.grid);
  r.record("tau", col.tau);
  r.record("dt", col.stats.dt);
  r.record("source", point(col.source));
  r.record("schedule", list(col.times));
  r.record("solver.steps", static_cast<double>(col.stats.steps));
  r.record("solver.max_residual", col.stats.max_residual);
}

KernelColumn solve_column(const Polynomial& p, double tau, const Grid2D& g, cplx w0,
                          const std::vector<double>& schedule, double dt) {
  return kernel_column(assemble_box(p, tau, g), w0, schedule, dt);
}

// Interior sup of |f| (outside the invalid rings and the outer ring).
double sup_abs(const ComplexField& f) {
  const auto& g = f.grid;
  const int m = std::max(2, f.invalid_margin);
  double best = 0.0;
  for (int i = m; i < g.n() - m; ++i) {
    for (int j = m; j < g.n() - m; ++j) best = std::max(best, std::abs(f.at(i, j)));
  }
  return best;
}

double interior_l2(const ComplexField& f) {
  const auto& g = f.grid;
  const int m = f.invalid_margin;
  double acc = 0.0;
  for (int i = m; i < g.n() - m; ++i) {
    for (int j = m; j < g.n() - m; ++j) acc += std::norm(f.at(i, j));
  }
  return std::sqrt(acc) * g.h();
}

double ring_mean(const ComplexField& f, cplx c, double r, int angles = 64) {
  double acc = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double t = 2.0 * kPi * k / angles;
    acc += std::abs(interpolate(f, to_vec(c + std::polar(r, t))));
  }
  return acc / angles;
}

struct Comparison {
  double peak = 0.0;      // |a - b| / |b| at the maximum of |b|
  double half_max = 0.0;  // max relative error on the band 0.4..0.6 of the maximum
};

Comparison compare_fields(const Grid2D& g, const std::function<bool(int, int)>& valid,
                          const std::function<cplx(int, int)>& a,
                          const std::function<cplx(int, int)>& b) {
  double bmax = 0.0;
  int pi = -1, pj = -1;
  for (int i = 1; i < g.n() - 1; ++i) {
    for (int j = 1; j < g.n() - 1; ++j) {
      if (!valid(i, j)) continue;
      const double v = std::abs(b(i, j));
      if (v > bmax) {
        bmax = v;
        pi = i;
        pj = j;
      }
    }
  }
  Comparison c;
  if (pi < 0 || bmax == 0.0) return {kInf, kInf};
  c.peak = std::abs(a(pi, pj) - b(pi, pj)) / bmax;
  for (int i = 1; i < g.n() - 1; ++i) {
    for (int j = 1; j < g.n() - 1; ++j) {
      if (!valid(i, j)) continue;
      const double v = std::abs(b(i, j));
      if (v < 0.4 * bmax || v > 0.6 * bmax) continue;
      c.half_max = std::max(c.half_max, std::abs(a(i, j) - b(i, j)) / v);
    }
  }
  return c;
}

}  // namespace

DecayTerm decay_term(const Polynomial& p, double tau, double s, Vec2 x, Vec2 y, double c2) {
  require(s > 0.0 && tau > 0.0 && c2 >= 0.0, "decay term needs s > 0, tau > 0, c2 >= 0");
  const double mx = mu_fn(p, to_complex(x), 1.0 / tau);
  const double my = mu_fn(p, to_complex(y), 1.0 / tau);
  DecayTerm d{s, x, y, c2, 0.0};
  d.value = std::exp(-dist2(x, y) / (2.0 * s) - c2 * s / (mx * mx) - c2 * s / (my * my));
  return d;
}

double Criterion::margin() const {
  if (std::isnan(value)) return kInf;
  return std::max(lo - value, value - hi);
}

double BoundReport::worst_margin() const {
  double w = -kInf;
  for (const auto& c : criteria) w = std::max(w, c.margin());
  return w;
}

void BoundReport::add(std::string crit, double value, double lo, double hi) {
  criteria.push_back({std::move(crit), value, lo, hi});
}

void BoundReport::constant(std::string key, double value) {
  constants.emplace_back(std::move(key), value);
}

void BoundReport::record(std::string key, std::string value) {
  provenance.emplace_back(std::move(key), std::move(value));
}

void BoundReport::record(std::string key, double value) { record(std::move(key), num(value)); }

std::string describe(const Polynomial& p) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [jk, c] : p.coeffs()) {
    os << (first ? "" : "; ") << jk.first << " " << jk.second << " " << c.real() + 0.0 << " " << c.imag() + 0.0;
    first = false;
  }
  return os.str();
}

std::string to_json(const BoundReport& r) {
  using nlohmann::ordered_json;
  // JSON has no infinity; open window ends are written as null.
  auto finite_or_null = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); };
  ordered_json j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["sample_set"] = r.sample_set;
  ordered_json constants = ordered_json::object();
  for (const auto& [k, v] : r.constants) constants[k] = finite_or_null(v);
  j["constants"] = constants;
  ordered_json crit = ordered_json::array();
  for (const auto& c : r.criteria) {
    crit.push_back({{"name", c.name},
                    {"value", finite_or_null(c.value)},
                    {"lo", finite_or_null(c.lo)},
                    {"hi", finite_or_null(c.hi)},
                    {"pass", c.pass()}});
  }
  j["criteria"] = crit;
  j["worst_margin"] = finite_or_null(r.worst_margin());
  j["threshold"] = r.threshold;
  j["verdict"] = r.pass() ? "pass" : "fail";
  ordered_json prov = ordered_json::object();
  for (const auto& [k, v] : r.provenance) prov[k] = v;
  j["provenance"] = prov;
  j["notes"] = r.notes;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

BoundReport check_gaussian(const KernelColumn& col, const GaussianOptions& opts) {
  require(opts.floor > 0.0 && opts.floor < 1.0, "relevance floor must lie in (0, 1)");
  BoundReport r;
  r.name = "gaussian";
  r.estimate = "|H(s,z,w)| <= (1/(pi s)) exp(-|z-w|^2/s)";
  r.sample_set = "interior nodes where the bound is >= floor * its peak, all schedule times";
  record_column(r, col);
  r.record("floor", opts.floor);

  const auto& g = col.grid;
  const Vec2 w = to_vec(col.source);
  double worst = 0.0, wide = 0.0;
  long compared = 0;
  for (size_t k = 0; k < col.times.size(); ++k) {
    const double s = col.times[k];
    const auto& f = col.snapshots[k];
    const double peak = 1.0 / (kPi * s);
    double at_s = 0.0;
    for (int i = 1; i < g.n() - 1; ++i) {
      for (int j = 1; j < g.n() - 1; ++j) {
        const double bound = peak * std::exp(-dist2(g.node(i, j), w) / s);
        if (bound < 1e-6 * peak) continue;
        const double ratio = std::abs(f.at(i, j)) / bound;
        wide = std::max(wide, ratio);
        if (bound < opts.floor * peak) continue;
        at_s = std::max(at_s, ratio);
        ++compared;
      }
    }
    r.constant("max_ratio@s=" + num(s), at_s);
    worst = std::max(worst, at_s);
  }
  r.constant("max_ratio_floor_1e-6", wide);
  r.constant("nodes_compared", static_cast<double>(compared));
  r.add("max_ratio", worst, 0.0, 1.0 + opts.tol);
  r.notes.push_back("ratio |H| pi s exp(|z-w|^2/s); below the floor the lattice kernel's tails and "
                    "rounding dominate both sides");
  return r;
}

BoundReport check_longtime(const KernelColumn& col, const Polynomial& p, double tau, double c2_min) {
  BoundReport r;
  r.name = "longtime";
  r.estimate = "|H(s,z,w)| <= (C1/s) exp(-C2 s/mu(z,1/tau)^2) exp(-C2 s/mu(w,1/tau)^2)";
  record_column(r, col);
  r.record("c2_min", c2_min);

  double mu = 1.0;
  if (tau > 0.0) {
    mu = mu_fn(p, col.source, 1.0 / tau);
  } else {
    r.notes.push_back("tau = 0: mu is infinite; s is measured in units of 1 (control run)");
  }
  const double mu2 = mu * mu;
  if (col.times.back() < 10.0 * mu2 * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "schedule ends at " << col.times.back() << " but must reach 10 mu^2 = " << 10.0 * mu2;
    fail(ErrorCode::ScheduleTooShort, os.str());
  }
  std::vector<double> x, y;
  std::vector<size_t> tail;
  for (size_t k = 0; k < col.times.size(); ++k) {
    const double s = col.times[k];
    if (s < mu2) continue;
    x.push_back(s / mu2);
    y.push_back(std::log(s * sup_abs(col.snapshots[k])));
    tail.push_back(k);
  }
  if (x.size() < 3) fail(ErrorCode::ScheduleTooShort, "fewer than 3 schedule times beyond mu^2");
  const auto fit = fit_line(x, y);
  r.sample_set = "schedule times s >= mu(w,1/tau)^2, sup over interior nodes";
  r.constant("mu", mu);
  r.constant("C2_fitted", -fit.slope);
  r.constant("fit_r_squared", fit.r_squared);

  if (tau > 0.0) {
    // C1 for the displayed bound with C2 = c2_min, over the tail snapshots.
    const auto& g = col.grid;
    std::vector<double> mu_node(g.size());
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        mu_node[g.index(i, j)] = mu_fn(p, to_complex(g.node(i, j)), 1.0 / tau);
      }
    }
    double c1 = 0.0;
    for (size_t k : tail) {
      const double s = col.times[k];
      const auto& f = col.snapshots[k];
      const double floor = 1e-12 * sup_abs(f);
      for (int i = 2; i < g.n() - 2; ++i) {
        for (int j = 2; j < g.n() - 2; ++j) {
          const double a = std::abs(f.at(i, j));
          if (a <= floor) continue;
          const double mz = mu_node[g.index(i, j)];
          const double d = std::exp(-c2_min * s / (mz * mz) - c2_min * s / mu2);
          c1 = std::max(c1, s * a / d);
        }
      }
    }
    r.constant("C1_at_c2_min", c1);
  }
  r.add("C2", -fit.slope, c2_min, kInf);
  return r;
}

BoundReport check_energy(const KernelColumn& col, const EnergyOptions& opts) {
  BoundReport r;
  r.name = "energy";
  r.estimate = "g(s) = ||H(s,.,w)||^2 satisfies g' <= -C g";
  record_column(r, col);
  const size_t n = col.times.size();
  if (n < 10) fail(ErrorCode::ScheduleTooShort, "energy check needs at least 10 schedule times");

  std::vector<double> s(col.times.begin(), col.times.end()), lg(n);
  double worst_step = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double norm = col.snapshots[k].l2_norm();
    lg[k] = 2.0 * std::log(norm);
    if (k > 0) worst_step = std::max(worst_step, std::exp(lg[k] - lg[k - 1]));
  }
  const size_t from = n / 2;
  const size_t mid = from + (n - from) / 2;
  auto rate = [&](size_t a, size_t b) {
    std::span<const double> xs(s.data() + a, b - a), ys(lg.data() + a, b - a);
    return -fit_line(xs, ys).slope;
  };
  const double c = rate(from, n);
  const double early = rate(from, mid + 1);
  const double late = rate(mid, n);
  r.sample_set = "second half of the schedule (" + num(s[from]) + " <= s <= " + num(s.back()) + ")";
  r.constant("C_fitted", c);
  r.constant("C_early", early);
  r.constant("C_late", late);
  r.add("max_step_ratio", worst_step, 0.0, 1.0 - 1e-12);
  r.add("C_positive", c, 1e-3, kInf);
  r.add("rate_stability", std::abs(early - late) / std::abs(c), 0.0, opts.stability);
  // The Dirichlet box alone makes g decay at 2 x (pi^2 / (8 L^2)); a rate that is not well
  // above that comes from the walls, not from the operator.
  const double box_rate = kPi * kPi / (4.0 * col.grid.half_width() * col.grid.half_width());
  r.constant("box_rate", box_rate);
  r.add("C_over_box_rate", c / box_rate, opts.min_box_factor, kInf);
  if (opts.expected_rate) {
    r.constant("C_expected", *opts.expected_rate);
    r.add("C_over_expected", c / *opts.expected_rate, 1.0 - opts.rel_tol, 1.0 + opts.rel_tol);
  }
  r.notes.push_back("log g concave-or-linear is tested as agreement of the local rates over the two "
                    "halves of the window");
  return r;
}

BoundReport check_derivatives(const DiscreteBox& box, const KernelColumn& col, int max_n,
                              int max_alpha, double s_hi) {
  if (max_n > 2 || max_alpha > 2 || max_n < 0 || max_alpha < 0) {
    fail(ErrorCode::OrderTooHigh, "derivative orders are capped at 2 (grid noise beyond that)");
  }
  require(box.grid == col.grid, "box and column live on different grids");
  BoundReport r;
  r.name = "derivs";
  r.estimate = "|d_s^n Y^a H| <= c1 s^{-n-|a|/2-1} exp(-|z-w|^2/(32 s)) (decay factors <= 1)";
  record_column(r, col);
  r.record("s_hi", s_hi);

  std::vector<size_t> idx;
  for (size_t k = 0; k < col.times.size(); ++k) {
    if (col.times[k] <= s_hi * (1.0 + 1e-12)) idx.push_back(k);
  }
  if (idx.size() < 4) fail(ErrorCode::ScheduleTooShort, "need at least 4 schedule times <= s_hi");

  using Seq = std::vector<FieldKind>;
  const std::vector<std::vector<Seq>> by_alpha = {
      {Seq{}},
      {Seq{FieldKind::X1}, Seq{FieldKind::X2}},
      {Seq{FieldKind::X1, FieldKind::X1}, Seq{FieldKind::X2, FieldKind::X2},
       Seq{FieldKind::X1, FieldKind::X2}}};

  const Vec2 w = to_vec(col.source);
  const auto& g = col.grid;
  std::vector<double> logs;
  for (size_t k : idx) logs.push_back(std::log(col.times[k]));

  for (int n = 0; n <= max_n; ++n) {
    std::vector<std::vector<double>> sup(max_alpha + 1);
    std::vector<double> l2;
    std::vector<double> c1(max_alpha + 1, 0.0);
    for (size_t k : idx) {
      const double s = col.times[k];
      ComplexField base = col.snapshots[k];
      for (int q = 0; q < n; ++q) {
        base = apply_box(box, base);
        base.values = -base.values;
        base.invalid_margin = std::max(base.invalid_margin, 1);
      }
      l2.push_back(std::log(interior_l2(base)));
      for (int a = 0; a <= max_alpha && n + a <= 2; ++a) {
        double best = 0.0;
        for (const auto& seq : by_alpha[a]) {
          ComplexField f = base;
          for (auto it = seq.rbegin(); it != seq.rend(); ++it) f = apply_field(*it, box.p, box.tau, f);
          const double m = sup_abs(f);
          best = std::max(best, m);
          const int mg = std::max(2, f.invalid_margin);
          const double scale = std::pow(s, n + 0.5 * a + 1.0);
          for (int i = mg; i < g.n() - mg; ++i) {
            for (int j = mg; j < g.n() - mg; ++j) {
              const double v = std::abs(f.at(i, j));
              if (v < 1e-8 * m) continue;
              c1[a] = std::max(c1[a], v * scale * std::exp(dist2(g.node(i, j), w) / (32.0 * s)));
            }
          }
        }
        sup[a].push_back(std::log(best));
      }
    }
    for (int a = 0; a <= max_alpha && n + a <= 2; ++a) {
      const double expected = -n - 0.5 * a - 1.0;
      const double slope = fit_line(logs, sup[a]).slope;
      const std::string tag = "n" + std::to_string(n) + "_a" + std::to_string(a);
      r.constant("expected_exponent_" + tag, expected);
      r.constant("c1_" + tag, c1[a]);
      r.add("sup_exponent_" + tag, slope, expected - 0.3, expected + 0.3);
    }
    const double expected_l2 = -n - 0.5;
    r.add("l2_exponent_n" + std::to_string(n), fit_line(logs, l2).slope, expected_l2 - 0.3,
          expected_l2 + 0.3);
  }
  r.sample_set = "schedule times s <= " + num(s_hi) + ", Y in {X1, X2}, sup over interior nodes";
  r.notes.push_back("orders capped at 2: c independent of (n, alpha) is only tested over this range");
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Field at time t, linear in time between bracketing snapshots.
Eigen::VectorXcd field_at(const KernelColumn& col, double t) {
  const auto& ts = col.times;
  for (size_t k = 0; k < ts.size(); ++k) {
    if (std::abs(ts[k] - t) <= 1e-12 * std::max(1.0, t)) return col.snapshots[k].values;
  }
  for (size_t k = 0; k + 1 < ts.size(); ++k) {
    if (ts[k] < t && t < ts[k + 1]) {
      const double a = (t - ts[k]) / (ts[k + 1] - ts[k]);
      return (1.0 - a) * col.snapshots[k].values + a * col.snapshots[k + 1].values;
    }
  }
  fail(ErrorCode::CylinderOutOfRange, "time " + num(t) + " outside the column schedule");
}

std::vector<double> window_times(const KernelColumn& col, double lo, double hi) {
  std::vector<double> out{lo};
  for (double t : col.times) {
    if (t > lo * (1.0 + 1e-12) && t < hi * (1.0 - 1e-12)) out.push_back(t);
  }
  out.push_back(hi);
  return out;
}

}  // namespace

BoundReport check_subsolution(const KernelColumn& col, const std::vector<Cylinder>& cylinders) {
  require(!cylinders.empty(), "subsolution check needs at least one cylinder");
  BoundReport r;
  r.name = "subsolution";
  r.estimate = "sup_{Q_{r/2}} |u| <= (C/r^2) (int int_{Q_{2r/3}} |u|^2)^{1/2}";
  record_column(r, col);
  const auto& g = col.grid;
  const double h = g.h();

  double cmin = kInf, cmax = 0.0;
  bool finite = true;
  std::ostringstream samples;
  for (size_t c = 0; c < cylinders.size(); ++c) {
    const auto& q = cylinders[c];
    if (!(q.r > 0.0) || 0.5 * q.r < 2.0 * h) {
      fail(ErrorCode::CylinderOutOfRange, "cylinder radius " + num(q.r) + " below four grid cells");
    }
    const double reach = std::max(std::abs(q.x0.x1), std::abs(q.x0.x2)) + q.r;
    if (reach > g.half_width() - 2.0 * h) {
      fail(ErrorCode::CylinderOutOfRange, "cylinder at " + point(to_complex(q.x0)) + " leaves the grid");
    }
    const double big = 2.0 * q.r / 3.0, small = 0.5 * q.r;
    const double t_big = q.s0 - big * big, t_small = q.s0 - small * small;
    if (t_big < col.times.front() * (1.0 - 1e-12) || q.s0 > col.times.back() * (1.0 + 1e-12)) {
      fail(ErrorCode::CylinderOutOfRange, "cylinder time span [" + num(t_big) + ", " + num(q.s0) +
                                              "] not covered by the schedule");
    }

    // Node masks for the two balls.
    std::vector<size_t> in_big, in_small;
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        const double d2 = dist2(g.node(i, j), q.x0);
        if (d2 < big * big) in_big.push_back(g.index(i, j));
        if (d2 <= small * small) in_small.push_back(g.index(i, j));
      }
    }

    const auto ts = window_times(col, t_big, q.s0);
    double integral = 0.0, sup = 0.0, prev = 0.0;
    for (size_t k = 0; k < ts.size(); ++k) {
      const auto u = field_at(col, ts[k]);
      double slice = 0.0;
      for (size_t v : in_big) slice += std::norm(u[v]);
      slice *= h * h;
      if (k > 0) integral += 0.5 * (ts[k] - ts[k - 1]) * (slice + prev);
      prev = slice;
      if (ts[k] >= t_small * (1.0 - 1e-12)) {
        for (size_t v : in_small) sup = std::max(sup, std::abs(u[v]));
      }
    }
    // The smaller cylinder may start between snapshots.
    {
      const auto u = field_at(col, t_small);
      for (size_t v : in_small) sup = std::max(sup, std::abs(u[v]));
    }
    const double cval = q.r * q.r * sup / std::sqrt(integral);
    finite = finite && std::isfinite(cval) && cval > 0.0;
    cmin = std::min(cmin, cval);
    cmax = std::max(cmax, cval);
    r.constant("C[" + std::to_string(c) + "]", cval);
    samples << (c ? "; " : "") << "s0=" << q.s0 << " x0=" << point(to_complex(q.x0)) << " r=" << q.r;
  }
  r.sample_set = samples.str();
  r.constant("C_min", cmin);
  r.constant("C_max", cmax);
  r.add("all_finite", finite ? 1.0 : 0.0, 1.0, 1.0);
  r.add("C_spread", cmax / cmin, 1.0, 10.0 * (1.0 - 1e-12));
  r.notes.push_back("the right side carries a square root, as needed for the two sides to scale alike");
  return r;
}

std::vector<Cylinder> sample_cylinders(const KernelColumn& col, int count, double r,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double big = 2.0 * r / 3.0;
  std::uniform_real_distribution<double> time(col.times.front() + big * big, col.times.back());
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  std::vector<Cylinder> out;
  for (int k = 0; k < count; ++k) {
    out.push_back({time(rng), {col.source.real() + offset(rng), col.source.imag() + offset(rng)}, r});
  }
  return out;
}

BoundReport check_scaling(const Polynomial& p, double tau, const Grid2D& grid, cplx w0,
                          const std::vector<double>& s_list, const ScalingOptions& opts) {
  require(!s_list.empty(), "scaling check needs schedule times");
  require(opts.lambda > 0.0, "dilation factor must be positive");
  BoundReport r;
  r.name = "scaling";
  r.estimate = "translation, twist and dilation identities of H";
  const double h = grid.h();
  const int di = static_cast<int>(std::lround(opts.z0.real() / h));
  const int dj = static_cast<int>(std::lround(opts.z0.imag() / h));
  const cplx z0{di * h, dj * h};
  const cplx src = w0 + z0;
  record_grid(r, grid);
  r.record("tau", tau);
  r.record("dt", opts.dt);
  r.record("source", point(w0));
  r.record("z0", point(z0));
  r.record("lambda", opts.lambda);
  r.record("schedule", list(s_list));
  r.sample_set = "grid nodes, peak and half-maximum band of each reference kernel";

  const auto base = solve_column(p, tau, grid, src, s_list, opts.dt);
  const auto moved = solve_column(p.translated(z0), tau, grid, w0, s_list, opts.dt);
  const auto centered = solve_column(p.mixed_part(src), tau, grid, src, s_list, opts.dt);

  const double lambda = opts.lambda;
  const Grid2D big(grid.half_width() * lambda, grid.n());
  std::vector<double> s_big;
  for (double s : s_list) s_big.push_back(lambda * lambda * s);
  const auto at_w0 = solve_column(p, tau, grid, w0, s_list, opts.dt);
  const auto dilated =
      solve_column(p.dilated(lambda), tau, big, lambda * w0, s_big, lambda * lambda * opts.dt);

  std::vector<double> twist_phase(grid.size());
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) {
      twist_phase[grid.index(i, j)] = tau * twist(p, to_complex(grid.node(i, j)), src);
    }
  }

  Comparison worst_t, worst_r, worst_d;
  auto keep = [](Comparison& acc, const Comparison& c) {
    acc.peak = std::max(acc.peak, c.peak);
    acc.half_max = std::max(acc.half_max, c.half_max);
  };
  const int n = grid.n();
  for (size_t k = 0; k < s_list.size(); ++k) {
    const auto& fb = base.snapshots[k];
    const auto& fm = moved.snapshots[k];
    keep(worst_t, compare_fields(
                      grid,
                      [&](int i, int j) {
                        return i + di >= 1 && j + dj >= 1 && i + di < n - 1 && j + dj < n - 1;
                      },
                      [&](int i, int j) { return fm.at(i, j); },
                      [&](int i, int j) { return fb.at(i + di, j + dj); }));
    const auto& fc = centered.snapshots[k];
    keep(worst_r, compare_fields(
                      grid, [](int, int) { return true; }, [&](int i, int j) { return fc.at(i, j); },
                      [&](int i, int j) {
                        return std::polar(1.0, twist_phase[grid.index(i, j)]) * fb.at(i, j);
                      }));
    const auto& fd = dilated.snapshots[k];
    const auto& fw = at_w0.snapshots[k];
    keep(worst_d, compare_fields(
                      grid, [](int, int) { return true; }, [&](int i, int j) { return fd.at(i, j); },
                      [&](int i, int j) { return fw.at(i, j) / (lambda * lambda); }));
  }
  r.add("translation_peak", worst_t.peak, 0.0, 0.03);
  r.add("translation_half_max", worst_t.half_max, 0.0, 0.10);
  r.add("twist_peak", worst_r.peak, 0.0, 0.03);
  r.add("twist_half_max", worst_r.half_max, 0.0, 0.10);
  r.add("dilation_peak", worst_d.peak, 0.0, 0.03);
  r.add("dilation_half_max", worst_d.half_max, 0.0, 0.10);
  r.notes.push_back("twist: H for the mixed part of p at z0 equals exp(i tau T(z,z0)) H_p(s,z,z0)");
  r.notes.push_back("dilation: H for p(./lambda) at (lambda^2 s, lambda z, lambda w) equals "
                    "lambda^-2 H_p(s,z,w), compared on grids with spacing ratio lambda");
  return r;
}

BoundReport check_G_bounds(const FundamentalSolutionField& gf, const Polynomial& p, double tau) {
  require(tau > 0.0, "G bounds need tau > 0");
  BoundReport r;
  r.name = "gbounds";
  r.estimate = "|G| <= C log(2mu/|z-w|) inside mu, |Y G| <= C |z-w|^-1, |G| <= C exp(-C2 |z-w|/mu) outside";
  const auto& g = gf.field.grid;
  record_grid(r, g);
  r.record("tau", tau);
  r.record("source", point(gf.source));
  r.record("s_max", gf.s_max);
  r.record("schedule_points", static_cast<double>(gf.times.size()));
  r.constant("tail_bound", gf.tail_bound);
  r.constant("near_diagonal", gf.near_diagonal);
  r.constant("decay_rate", gf.decay_rate);

  const double mu = mu_fn(p, gf.source, 1.0 / tau);
  r.constant("mu", mu);
  const double reach = std::max(std::abs(gf.source.real()), std::abs(gf.source.imag())) + 4.0 * mu;
  require(reach < g.half_width() - 2.0 * g.h(), "grid too small for rings out to 4 mu");

  std::vector<double> inner_r;
  for (int k = 1; k <= 4; ++k) {
    const double rad = mu * std::pow(2.0, -k);
    if (rad >= 2.0 * g.h()) {
      inner_r.push_back(rad);
    } else {
      r.notes.push_back("ring mu/" + std::to_string(1 << k) + " is below two cells and skipped");
    }
  }
  require(inner_r.size() >= 3, "grid too coarse: fewer than 3 rings inside mu");

  // Regime 1: log profile.
  std::vector<double> lg, gv;
  double c_log = 0.0;
  for (double rad : inner_r) {
    const double v = ring_mean(gf.field, gf.source, rad);
    lg.push_back(std::log(2.0 * mu / rad));
    gv.push_back(v);
    c_log = std::max(c_log, v / lg.back());
  }
  const auto fit = fit_line(lg, gv);
  double resid = 0.0;
  for (size_t k = 0; k < lg.size(); ++k) {
    resid = std::max(resid, std::abs(fit.slope * lg[k] + fit.intercept - gv[k]) / gv[k]);
  }
  r.constant("C_log", c_log);
  r.constant("log_slope", fit.slope);
  r.add("log_profile_residual", resid, 0.0, 0.15);
  r.add("log_profile_slope", fit.slope, 0.0, kInf);

  // Regime 2: one weighted derivative.
  ComplexField grad(g);
  {
    const auto d1 = apply_field(FieldKind::X1, p, tau, gf.field);
    const auto d2 = apply_field(FieldKind::X2, p, tau, gf.field);
    grad.values = (d1.values.cwiseAbs2() + d2.values.cwiseAbs2()).cwiseSqrt().cast<cplx>();
    grad.invalid_margin = d1.invalid_margin;
  }
  std::vector<double> lr, lgrad;
  double c_grad = 0.0;
  for (double rad : inner_r) {
    const double v = ring_mean(grad, gf.source, rad);
    lr.push_back(std::log(rad));
    lgrad.push_back(std::log(v));
    c_grad = std::max(c_grad, v * rad);
  }
  const double power = fit_line(lr, lgrad).slope;
  r.constant("C_derivative", c_grad);
  r.add("derivative_power", power, -1.3, -0.7);

  // Regime 3: exponential decay outside mu.
  std::vector<double> xr, lo;
  for (double k : {2.0, 3.0, 4.0}) {
    xr.push_back(k);
    lo.push_back(std::log(ring_mean(gf.field, gf.source, k * mu)));
  }
  const double c2 = -fit_line(xr, lo).slope;
  r.constant("C2_fitted", c2);
  r.add("C2", c2, 0.2, kInf);
  r.sample_set = "ring means over 64 angles at r = mu 2^-k (k = 1..4) and r = mu {2,3,4}";
  r.notes.push_back("C2 has no upper window: for |z|^2 the exact G decays faster than any "
                    "exponential in |z-w|/mu");
  return r;
}

BoundReport check_appendix_equivalence(const std::vector<int>& m_list, const AppendixOptions& opts) {
  require(!m_list.empty(), "appendix check needs at least one m");
  BoundReport r;
  r.name = "appendix";
  r.estimate = "|z-w|/mu(w,1) + |z-w|/mu(z,1) ~ rho_closed(z,w) ~ rho_grid(z,w)";
  const Grid2D grid(opts.half_width, opts.n);
  record_grid(r, grid);
  r.record("seed", static_cast<double>(opts.seed));
  r.record("pairs", static_cast<double>(opts.pairs));
  r.sample_set = std::to_string(opts.pairs) + " node pairs uniform in [-L/2, L/2]^2 per family";

  for (auto model : {ModelKind::P1, ModelKind::P2}) {
    for (int m : m_list) {
      require(m == 2 || m == 3, "appendix check covers m in {2, 3}");
      const auto p = model == ModelKind::P1 ? model_p1(m) : model_p2(m);
      const auto mg = make_metric_grid(p, grid);
      std::mt19937_64 rng(opts.seed + 1000 * m + (model == ModelKind::P1 ? 0 : 1));
      std::uniform_int_distribution<int> pick(grid.n() / 4, 3 * grid.n() / 4);
      double lo = kInf, hi = 0.0;
      double pair_lo[3] = {kInf, kInf, kInf}, pair_hi[3] = {0.0, 0.0, 0.0};
      int used = 0;
      while (used < opts.pairs) {
        const cplx z = to_complex(grid.node(pick(rng), pick(rng)));
        const cplx w = to_complex(grid.node(pick(rng), pick(rng)));
        if (z == w) continue;
        const double a = size_sum(p, z, w);
        const double b = rho_closed_form(model, m, z, w);
        const double c = rho_metric(p, z, w, mg).rho;
        const double ratios[3] = {a / b, a / c, b / c};
        for (int q = 0; q < 3; ++q) {
          pair_lo[q] = std::min(pair_lo[q], ratios[q]);
          pair_hi[q] = std::max(pair_hi[q], ratios[q]);
          lo = std::min(lo, ratios[q]);
          hi = std::max(hi, ratios[q]);
        }
        ++used;
      }
      const std::string tag = std::string(model == ModelKind::P1 ? "p1" : "p2") + "_m" + std::to_string(m);
      static const char* pair_names[3] = {"size/closed", "size/grid", "closed/grid"};
      for (int q = 0; q < 3; ++q) {
        r.constant(tag + "_" + pair_names[q] + "_min", pair_lo[q]);
        r.constant(tag + "_" + pair_names[q] + "_max", pair_hi[q]);
      }
      r.add(tag + "_min_ratio", lo, 0.25, kInf);
      r.add(tag + "_max_ratio", hi, 0.0, 4.0);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

BoundReport check_free_oracle(double half_width, int n, double dt, const std::vector<double>& s_list,
                              double max_peak_error, double min_reduction) {
  BoundReport r;
  r.name = "free_oracle";
  r.estimate = "tau = 0: H(s,x,0) = (1/(pi s)) exp(-|x|^2/s)";
  const Grid2D fine(half_width, n);
  const Grid2D coarse(half_width, (n + 1) / 2);
  record_grid(r, fine);
  record_grid(r, coarse, "coarse");
  r.record("dt", dt);
  r.record("schedule", list(s_list));
  r.sample_set = "all nodes, error relative to the peak 1/(pi s)";
  const auto p = model_p1(1);
  auto error = [&](const KernelColumn& col, size_t k) {
    const double s = col.times[k];
    const double peak = 1.0 / (kPi * s);
    const auto& g = col.grid;
    double e = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        const auto x = g.node(i, j);
        e = std::max(e, std::abs(col.snapshots[k].at(i, j) - peak * std::exp(-dist2(x, {}) / s)));
      }
    }
    return e / peak;
  };
  const auto cf = solve_column(p, 0.0, fine, 0.0, s_list, dt);
  const auto cc = solve_column(p, 0.0, coarse, 0.0, s_list, 2.0 * dt);
  double worst = 0.0, reduction = kInf;
  for (size_t k = 0; k < s_list.size(); ++k) {
    const double ef = error(cf, k), ec = error(cc, k);
    r.constant("error@s=" + num(s_list[k]), ef);
    r.constant("coarse_error@s=" + num(s_list[k]), ec);
    worst = std::max(worst, ef);
    reduction = std::min(reduction, ec / ef);
  }
  r.add("max_peak_relative_error", worst, 0.0, max_peak_error);
  r.add("refinement_reduction", reduction, min_reduction, kInf);
  return r;
}

BoundReport check_semigroup(const DiscreteBox& box, const std::vector<cplx>& sources, double s,
                            double dt) {
  require(sources.size() >= 2, "semigroup check needs at least two sources");
  BoundReport r;
  r.name = "semigroup";
  r.estimate = "H(2s,z,w) = int H(s,z,v) H(s,v,w) dv and H(s,z,w) = conj H(s,w,z)";
  const auto& g = box.grid;
  record_grid(r, g);
  r.record("tau", box.tau);
  r.record("dt", dt);
  r.record("s", s);
  const std::vector<double> schedule{s, 2.0 * s};

  std::vector<KernelColumn> cols;
  std::vector<std::pair<int, int>> nodes;
  std::ostringstream names;
  for (size_t k = 0; k < sources.size(); ++k) {
    cols.push_back(kernel_column(box, sources[k], schedule, dt));
    nodes.emplace_back(g.nearest(sources[k].real()), g.nearest(sources[k].imag()));
    names << (k ? " " : "") << point(cols.back().source);
  }
  r.record("sources", names.str());

  double semigroup = 0.0, symmetry = 0.0;
  int pairs = 0;
  for (size_t a = 0; a < cols.size(); ++a) {
    const double peak = sup_abs(cols[a].snapshots[1]);
    for (size_t b = 0; b < cols.size(); ++b) {
      const auto [bi, bj] = nodes[b];
      const cplx lhs = cols[a].snapshots[1].at(bi, bj);
      const cplx rhs = inner(cols[a].snapshots[0], cols[b].snapshots[0]);
      semigroup = std::max(semigroup, std::abs(lhs - rhs) / peak);
      if (b <= a) continue;
      const auto [ai, aj] = nodes[a];
      for (int t = 0; t < 2; ++t) {
        const cplx hab = cols[a].snapshots[t].at(bi, bj);
        const cplx hba = cols[b].snapshots[t].at(ai, aj);
        const double scale = std::max(std::abs(hab), 1e-6 * sup_abs(cols[a].snapshots[t]));
        symmetry = std::max(symmetry, std::abs(hab - std::conj(hba)) / scale);
        ++pairs;
      }
    }
  }
  r.sample_set = std::to_string(pairs) + " (z, w, s) symmetry samples over all source pairs";
  r.constant("symmetry_samples", pairs);
  r.add("semigroup_peak_relative", semigroup, 0.0, 0.02);
  r.add("symmetry_relative", symmetry, 0.0, 0.01);
  return r;
}

BoundReport check_mc_crossval(const Polynomial& p, double tau, const std::vector<McTriple>& triples,
                              const McOptions& opts) {
  require(!triples.empty(), "Monte Carlo cross-check needs triples");
  BoundReport r;
  r.name = "mc_crossval";
  r.estimate = "|PDE - MC| <= 3 (stderr + grid error), |MC| <= free factor + 3 stderr";
  const Grid2D fine(opts.half_width, opts.n), coarse(opts.half_width, (opts.n + 1) / 2);
  record_grid(r, fine);
  record_grid(r, coarse, "coarse");
  r.record("tau", tau);
  r.record("polynomial", describe(p));
  r.record("dt", opts.dt);
  r.record("n_paths", static_cast<double>(opts.n_paths));
  r.record("n_t", static_cast<double>(opts.n_t));
  r.record("seed", static_cast<double>(opts.seed));

  // One column per source, holding every requested time.
  std::map<std::pair<double, double>, std::set<double>> times;
  for (const auto& t : triples) times[{t.y.x1, t.y.x2}].insert(t.s);
  const auto fine_box = assemble_box(p, tau, fine);
  const auto coarse_box = assemble_box(p, tau, coarse);
  std::map<std::pair<double, double>, std::pair<KernelColumn, KernelColumn>> cols;
  for (const auto& [y, ts] : times) {
    const std::vector<double> sched(ts.begin(), ts.end());
    const cplx src{y.first, y.second};
    cols.emplace(y, std::make_pair(kernel_column(fine_box, src, sched, opts.dt),
                                   kernel_column(coarse_box, src, sched, 2.0 * opts.dt)));
  }

  double worst = 0.0, dominance = -kInf;
  std::ostringstream samples;
  for (size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    const auto& [cf, cc] = cols.at({t.y.x1, t.y.x2});
    const cplx pde = interpolate(cf.at_time(t.s), t.x);
    const cplx pde_c = interpolate(cc.at_time(t.s), t.x);
    const double grid_err = std::abs(pde - pde_c) / 3.0;
    const auto mc = mc_kernel(p, tau, t.x, t.y, t.s, opts.n_paths, opts.n_t,
                              splitmix64(opts.seed + k));
    const double allowed = 3.0 * (mc.std_error + grid_err);
    const double ratio = std::abs(pde - mc.estimate) / allowed;
    worst = std::max(worst, ratio);
    dominance = std::max(dominance, (std::abs(mc.estimate) - mc.free_factor) / (3.0 * mc.std_error));
    const std::string tag = "[" + std::to_string(k) + "]";
    r.constant("pde_re" + tag, pde.real());
    r.constant("pde_im" + tag, pde.imag());
    r.constant("mc_re" + tag, mc.estimate.real());
    r.constant("mc_im" + tag, mc.estimate.imag());
    r.constant("stderr" + tag, mc.std_error);
    r.constant("grid_error" + tag, grid_err);
    samples << (k ? "; " : "") << "x=" << point(to_complex(t.x)) << " y=" << point(to_complex(t.y))
            << " s=" << t.s;
  }
  r.sample_set = samples.str();
  r.add("deviation_over_allowed", worst, 0.0, 1.0);
  r.add("excess_over_free_in_3stderr", dominance, -kInf, 1.0);
  return r;
}

BoundReport check_geometry(const Polynomial& p, const std::vector<SizeSample>& samples,
                           double constant) {
  BoundReport r;
  r.name = "geometry";
  r.estimate = "mu(z, Lambda(z,delta)) ~ delta ~ Lambda(z, mu(z,delta))";
  r.record("polynomial", describe(p));
  r.record("constant", constant);
  r.sample_set = std::to_string(samples.size()) + " (z, delta) samples";
  const auto res = approx_inverse_check(p, samples, constant);
  r.constant("mu_of_lambda_lo", res.mu_of_lambda.lo);
  r.constant("mu_of_lambda_hi", res.mu_of_lambda.hi);
  r.constant("lambda_of_mu_lo", res.lambda_of_mu.lo);
  r.constant("lambda_of_mu_hi", res.lambda_of_mu.hi);
  r.add("min_ratio", std::min(res.mu_of_lambda.lo, res.lambda_of_mu.lo), 1.0 / constant, kInf);
  r.add("max_ratio", std::max(res.mu_of_lambda.hi, res.lambda_of_mu.hi), 0.0, constant);
  return r;
}

}  // namespace heatlab
