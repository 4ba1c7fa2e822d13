#pragma once

#include <cstdint>
#include <vector>

#include "heatlab/polynomial.hpp"

namespace heatlab {

/// Brownian bridge with covariance t per coordinate, pinned at x for t = 0 and
/// y for t = horizon; nodes at t_i = i * horizon / n_t.
struct BridgePath {
  Vec2 x;
  Vec2 y;
  double horizon = 0.0;
  std::vector<Vec2> nodes;

  int steps() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Exact sequential conditional sampling. Needs n_t >= 64 and horizon > 0.
BridgePath sample_bridge(Vec2 x, Vec2 y, double horizon, int n_t, std::uint64_t seed);

/// F = -i int a(w) . dw - int V(w) dt over the path, with a = tau (-p_x2, p_x1)
/// and V = (tau/2) Lap(p). The line integral uses the midpoint rule, the
/// potential the trapezoid rule. Throws PositiveRealPart if Re F > 0.
cplx phase(const BridgePath& path, const Polynomial& p, double tau);

struct McEstimate {
  cplx estimate;
  double std_error = 0.0;
  /// (1 / (pi s)) exp(-|x - y|^2 / s), the tau = 0 kernel.
  double free_factor = 0.0;
  double s = 0.0;
  int n_paths = 0;
  int n_t = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of H(s, x, y). The semigroup exp(-s box) is
/// exp(-(s/2) (2 box)) and 2 box = 1/2 (-i grad - a)^2 + V, so the paths are
/// bridges of horizon s/2 from x to y. Path i uses the seed splitmix64(seed + i).
/// Needs n_paths >= 1000.
McEstimate mc_kernel(const Polynomial& p, double tau, Vec2 x, Vec2 y, double s, int n_paths,
                     int n_t, std::uint64_t seed);

struct DivergenceCheck {
  double max_abs = 0.0;
  double scale = 0.0;
  bool pass = false;
};
/// Largest |div a| over `count` random points in [-half_width, half_width]^2,
/// by centered differences with step 1e-4. The phase drops the div a term, so
/// every Monte Carlo run asserts it vanishes.
DivergenceCheck divergence_check(const Polynomial& p, double tau, double half_width, int count,
                                 std::uint64_t seed);

}  // namespace heatlab
