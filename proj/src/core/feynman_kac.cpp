#include "heatlab/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "heatlab/error.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

// p_z and p_zzbar as flat term lists, evaluated from shared power tables.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const Polynomial& p) : degree_(p.degree()) {
    for (const auto& [jk, c] : p.coeffs()) {
      const auto [j, k] = jk;
      if (j >= 1) dz_.push_back({j - 1, k, c * static_cast<double>(j)});
      if (j >= 1 && k >= 1) dzzb_.push_back({j - 1, k - 1, c * static_cast<double>(j * k)});
    }
    zp_.resize(degree_ + 1);
    zbp_.resize(degree_ + 1);
  }

  // a = tau (2 Im p_z, 2 Re p_z).
  Vec2 potential(Vec2 x, double tau) {
    load(x);
    const cplx pz = sum(dz_);
    return {2.0 * tau * pz.imag(), 2.0 * tau * pz.real()};
  }

  // V = (tau / 2) Lap p = 2 tau Re p_zzbar.
  double electric(Vec2 x, double tau) {
    load(x);
    return 2.0 * tau * sum(dzzb_).real();
  }

 private:
  struct Term {
    int j, k;
    cplx c;
  };

  void load(Vec2 x) {
    const cplx z = to_complex(x);
    zp_[0] = zbp_[0] = 1.0;
    for (int i = 1; i <= degree_; ++i) {
      zp_[i] = zp_[i - 1] * z;
      zbp_[i] = zbp_[i - 1] * std::conj(z);
    }
  }

  cplx sum(const std::vector<Term>& terms) const {
    cplx acc{};
    for (const auto& t : terms) acc += t.c * zp_[t.j] * zbp_[t.k];
    return acc;
  }

  int degree_;
  std::vector<Term> dz_, dzzb_;
  std::vector<cplx> zp_, zbp_;
};

void fill_bridge(BridgePath& path, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int n = path.steps();
  const double dt = path.horizon / n;
  path.nodes[0] = path.x;
  for (int i = 0; i + 1 < n; ++i) {
    // Condition on the current node and the pinned endpoint.
    const double remaining = path.horizon - i * dt;
    const double frac = dt / remaining;
    const double sd = std::sqrt(dt * (remaining - dt) / remaining);
    const Vec2 w = path.nodes[i];
    path.nodes[i + 1] = {w.x1 + frac * (path.y.x1 - w.x1) + sd * normal(rng),
                         w.x2 + frac * (path.y.x2 - w.x2) + sd * normal(rng)};
  }
  path.nodes[n] = path.y;
}

cplx phase_with(const BridgePath& path, FieldEvaluator& ev, double tau) {
  if (tau == 0.0) return {};
  const int n = path.steps();
  const double dt = path.horizon / n;
  double line = 0.0;
  double pot = 0.0;
  double v_prev = ev.electric(path.nodes[0], tau);
  for (int i = 0; i < n; ++i) {
    const Vec2 u = path.nodes[i], w = path.nodes[i + 1];
    const Vec2 a = ev.potential({0.5 * (u.x1 + w.x1), 0.5 * (u.x2 + w.x2)}, tau);
    line += a.x1 * (w.x1 - u.x1) + a.x2 * (w.x2 - u.x2);
    const double v_next = ev.electric(w, tau);
    pot += 0.5 * dt * (v_prev + v_next);
    v_prev = v_next;
  }
  if (-pot > 0.0) {
    std::ostringstream os;
    os << "Re F = " << -pot << " > 0: Lap(p) < 0 along the path";
    fail(ErrorCode::PositiveRealPart, os.str());
  }
  return {-pot, -line};
}

}  // namespace

BridgePath sample_bridge(Vec2 x, Vec2 y, double horizon, int n_t, std::uint64_t seed) {
  require(n_t >= 64, "bridge needs at least 64 time steps");
  require(horizon > 0.0 && std::isfinite(horizon), "bridge horizon must be positive");
  BridgePath path{x, y, horizon, std::vector<Vec2>(static_cast<size_t>(n_t) + 1)};
  std::mt19937_64 rng(seed);
  fill_bridge(path, rng);
  return path;
}

cplx phase(const BridgePath& path, const Polynomial& p, double tau) {
  require(tau >= 0.0, "tau must be nonnegative");
  FieldEvaluator ev(p);
  return phase_with(path, ev, tau);
}

McEstimate mc_kernel(const Polynomial& p, double tau, Vec2 x, Vec2 y, double s, int n_paths,
                     int n_t, std::uint64_t seed) {
  require(n_paths >= 1000, "Monte Carlo needs at least 1000 paths");
  require(n_t >= 64, "bridge needs at least 64 time steps");
  require(s > 0.0 && std::isfinite(s), "kernel time must be positive");
  require(tau >= 0.0, "tau must be nonnegative");
  const double dx = x.x1 - y.x1, dy = x.x2 - y.x2;
  McEstimate out;
  out.free_factor = std::exp(-(dx * dx + dy * dy) / s) / (std::numbers::pi * s);
  out.s = s;
  out.n_paths = n_paths;
  out.n_t = n_t;
  out.seed = seed;
  if (tau == 0.0) {
    out.estimate = out.free_factor;
    return out;
  }

  const double reach = std::max({std::hypot(x.x1, x.x2), std::hypot(y.x1, y.x2)}) + 4.0 * std::sqrt(s);
  const auto div = divergence_check(p, tau, reach, 100, seed);
  if (!div.pass) {
    std::ostringstream os;
    os << "div a = " << div.max_abs << " does not vanish; the dropped phase term would matter";
    fail(ErrorCode::InvalidArgument, os.str());
  }

  FieldEvaluator ev(p);
  BridgePath path{x, y, 0.5 * s, std::vector<Vec2>(static_cast<size_t>(n_t) + 1)};
  cplx sum{};
  double sum_sq = 0.0;
  for (int i = 0; i < n_paths; ++i) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i)));
    fill_bridge(path, rng);
    const cplx w = std::exp(phase_with(path, ev, tau));
    sum += w;
    sum_sq += std::norm(w);
  }
  const double n = n_paths;
  const cplx mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * std::norm(mean)) / (n - 1.0));
  out.estimate = out.free_factor * mean;
  out.std_error = out.free_factor * std::sqrt(var / n);
  return out;
}

DivergenceCheck divergence_check(const Polynomial& p, double tau, double half_width, int count,
                                 std::uint64_t seed) {
  FieldEvaluator ev(p);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-half_width, half_width);
  constexpr double step = 1e-4;
  DivergenceCheck out;
  for (int i = 0; i < count; ++i) {
    const Vec2 x{coord(rng), coord(rng)};
    const double d1 = (ev.potential({x.x1 + step, x.x2}, tau).x1 -
                       ev.potential({x.x1 - step, x.x2}, tau).x1) / (2 * step);
    const double d2 = (ev.potential({x.x1, x.x2 + step}, tau).x2 -
                       ev.potential({x.x1, x.x2 - step}, tau).x2) / (2 * step);
    const Vec2 a = ev.potential(x, tau);
    out.max_abs = std::max(out.max_abs, std::abs(d1 + d2));
    out.scale = std::max(out.scale, std::hypot(a.x1, a.x2));
  }
  // Truncation is O(step^2 |a'''|), rounding O(eps |a| / step).
  out.pass = out.max_abs <= 1e-6 * (1.0 + out.scale);
  return out;
}

}  // namespace heatlab
