#pragma once

#include <functional>
#include <span>
#include <vector>

#include "heatlab/box.hpp"

namespace heatlab {

struct EvolveOptions {
  /// Each schedule gap is cut into max(min_substeps, ceil(gap / dt)) equal steps.
  int min_substeps = 10;
  double rel_tol = 1e-10;
  int max_cg_iterations = 2000;
};

struct SolverStats {
  double dt = 0.0;
  long steps = 0;
  long cg_iterations = 0;
  int max_cg_iterations = 0;
  double max_residual = 0.0;
};

/// s -> H(s, ., w0) sampled at ascending times.
struct KernelColumn {
  cplx source;
  std::vector<double> times;
  std::vector<ComplexField> snapshots;
  Grid2D grid;
  double tau = 0.0;
  SolverStats stats;

  const ComplexField& at_time(double s) const;
  std::size_t index_of(double s) const;
};

using SnapshotObserver = std::function<void(std::size_t, double, const ComplexField&)>;

/// Crank-Nicolson: (I + dt/2 A) u_{n+1} = (I - dt/2 A) u_n, each step solved by
/// Jacobi-preconditioned conjugate gradients to the requested relative residual.
/// Calls `observe` at every schedule time. Throws ScheduleUnreachable for a
/// non-ascending or nonpositive schedule and SolverDiverged when CG stalls.
SolverStats evolve_observe(const DiscreteBox& box, const ComplexField& u0,
                           std::span<const double> schedule, double dt,
                           const SnapshotObserver& observe, const EvolveOptions& opts = {});

KernelColumn evolve(const DiscreteBox& box, const ComplexField& u0,
                    std::span<const double> schedule, double dt, const EvolveOptions& opts = {});

/// Column of the heat kernel with source w0, evolved from a point mass of weight
/// 1/h^2. The first schedule time must be at least 20 dt.
KernelColumn kernel_column(const DiscreteBox& box, cplx w0, std::span<const double> schedule,
                           double dt, const EvolveOptions& opts = {});

/// G(., w0) = integral of H(s, ., w0) over s in [0, s_max], trapezoid rule on
/// a log-spaced schedule, plus a tail estimate |H(s_max)| / rate where the rate
/// is fitted to the late-time decay of ||H(s)||_2.
struct FundamentalSolutionField {
  cplx source;
  ComplexField field;
  double s_max = 0.0;
  std::vector<double> times;
  double decay_rate = 0.0;
  double tail_bound = 0.0;
  double near_diagonal = 0.0;
  SolverStats stats;
};

struct FundamentalSolutionOptions {
  int n_points = 96;
  /// First schedule time; <= 0 picks 0.02 h^2.
  double s_min = 0.0;
  /// Step cap; steps are otherwise one tenth of each log gap.
  double dt_max = 0.05;
};

/// Requires s_max >= 10 mu(w0, 1/tau)^2 when tau > 0 and at least 60 schedule
/// points. Throws TailNotNegligible when the tail estimate exceeds 5% of the
/// near-diagonal value of G.
FundamentalSolutionField fundamental_solution(const DiscreteBox& box, cplx w0, double s_max,
                                              const FundamentalSolutionOptions& opts = {});

}  // namespace heatlab
