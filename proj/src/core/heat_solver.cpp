#include "heatlab/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heatlab/error.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

// Solves (I + c A) x = b by Jacobi-preconditioned CG, starting from x.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseMatrix& a, const EvolveOptions& opts)
      : a_(a), opts_(opts), diag_(a.diagonal().real()) {}

  // One Crank-Nicolson step in place: u <- (I + cA)^{-1} (I - cA) u, with
  // au = A u supplied by the caller. Starting from x = u the initial residual
  // is -2c A u, so no extra product is needed.
  int step(double c, Eigen::VectorXcd& u, const Eigen::VectorXcd& au, double& residual) {
    b_ = u - c * au;
    r_ = (-2.0 * c) * au;
    return iterate(c, b_, u, residual);
  }

 private:
  int iterate(double c, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double& residual) {
    if (c != last_c_) {
      inv_diag_ = (1.0 + c * diag_.array()).inverse().matrix();
      last_c_ = c;
    }
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
      x.setZero();
      residual = 0.0;
      return 0;
    }
    z_ = r_.cwiseProduct(inv_diag_);
    p_ = z_;
    cplx rz = r_.dot(z_);
    for (int it = 0; it <= opts_.max_cg_iterations; ++it) {
      residual = r_.norm() / bnorm;
      if (residual <= opts_.rel_tol) return it;
      q_.noalias() = a_ * p_;
      q_ = p_ + c * q_;
      const cplx pq = p_.dot(q_);
      const cplx alpha = rz / pq;
      x += alpha * p_;
      r_ -= alpha * q_;
      z_ = r_.cwiseProduct(inv_diag_);
      const cplx rz_new = r_.dot(z_);
      const cplx beta = rz_new / rz;
      rz = rz_new;
      p_ = z_ + beta * p_;
      if (!std::isfinite(std::abs(alpha))) break;
    }
    std::ostringstream os;
    os << "conjugate gradients stalled at relative residual " << residual << " after "
       << opts_.max_cg_iterations << " iterations";
    fail(ErrorCode::SolverDiverged, os.str());
  }

  const SparseMatrix& a_;
  EvolveOptions opts_;
  Eigen::VectorXd diag_;
  double last_c_ = -1.0;
  Eigen::VectorXcd inv_diag_, b_, q_, r_, z_, p_;
};

void validate_schedule(std::span<const double> schedule) {
  if (schedule.empty()) fail(ErrorCode::ScheduleUnreachable, "empty schedule");
  double prev = 0.0;
  for (double s : schedule) {
    if (!(s > prev) || !std::isfinite(s)) {
      std::ostringstream os;
      os << "schedule must be positive and strictly ascending (got " << s << " after " << prev << ")";
      fail(ErrorCode::ScheduleUnreachable, os.str());
    }
    prev = s;
  }
}

}  // namespace

const ComplexField& KernelColumn::at_time(double s) const { return snapshots[index_of(s)]; }

std::size_t KernelColumn::index_of(double s) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - s) <= 1e-12 * std::max(1.0, s)) return i;
  }
  std::ostringstream os;
  os << "time " << s << " is not in the column schedule";
  fail(ErrorCode::InvalidArgument, os.str());
}

SolverStats evolve_observe(const DiscreteBox& box, const ComplexField& u0,
                           std::span<const double> schedule, double dt,
                           const SnapshotObserver& observe, const EvolveOptions& opts) {
  require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
  require(u0.grid == box.grid, "initial field and operator live on different grids");
  validate_schedule(schedule);

  ShiftedSolver solver(box.action, opts);
  SolverStats stats;
  stats.dt = dt;
  Eigen::VectorXcd u = u0.values;
  Eigen::VectorXcd au(u.size());
  double s = 0.0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double gap = schedule[k] - s;
    const long steps =
        std::max<long>(opts.min_substeps, static_cast<long>(std::ceil(gap / dt - 1e-9)));
    const double h = gap / static_cast<double>(steps);
    for (long n = 0; n < steps; ++n) {
      au.noalias() = box.action * u;
      double residual = 0.0;
      const int its = solver.step(0.5 * h, u, au, residual);
      stats.cg_iterations += its;
      stats.max_cg_iterations = std::max(stats.max_cg_iterations, its);
      stats.max_residual = std::max(stats.max_residual, residual);
    }
    stats.steps += steps;
    s = schedule[k];
    if (!u.allFinite()) fail(ErrorCode::SolverDiverged, "non-finite values in the evolved field");
    observe(k, s, ComplexField(box.grid, u));
  }
  return stats;
}

KernelColumn evolve(const DiscreteBox& box, const ComplexField& u0,
                    std::span<const double> schedule, double dt, const EvolveOptions& opts) {
  KernelColumn col{cplx{}, {}, {}, box.grid, box.tau, {}};
  col.stats = evolve_observe(
      box, u0, schedule, dt,
      [&](std::size_t, double s, const ComplexField& f) {
        col.times.push_back(s);
        col.snapshots.push_back(f);
      },
      opts);
  return col;
}

KernelColumn kernel_column(const DiscreteBox& box, cplx w0, std::span<const double> schedule,
                           double dt, const EvolveOptions& opts) {
  const auto& g = box.grid;
  const int i = g.nearest(w0.real()), j = g.nearest(w0.imag());
  require(g.contains(to_vec(w0)) && g.interior(i, j, 2), "kernel source must be interior");
  validate_schedule(schedule);
  if (schedule.front() < 20.0 * dt * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "first schedule time " << schedule.front() << " precedes the burn-in of 20 steps ("
       << 20.0 * dt << ")";
    fail(ErrorCode::ScheduleUnreachable, os.str());
  }
  auto col = evolve(box, point_mass(g, w0), schedule, dt, opts);
  col.source = to_complex(g.node(i, j));
  return col;
}

FundamentalSolutionField fundamental_solution(const DiscreteBox& box, cplx w0, double s_max,
                                              const FundamentalSolutionOptions& opts) {
  const auto& g = box.grid;
  require(opts.n_points >= 60, "fundamental solution needs at least 60 schedule points");
  if (box.tau > 0.0) {
    const double mu = mu_fn(box.p, w0, 1.0 / box.tau);
    if (s_max < 10.0 * mu * mu) {
      std::ostringstream os;
      os << "s_max = " << s_max << " is shorter than 10 mu^2 = " << 10.0 * mu * mu;
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
  const double s_min = opts.s_min > 0.0 ? opts.s_min : 0.02 * g.h() * g.h();
  require(s_min < s_max, "s_min must precede s_max");
  const auto schedule = log_space(s_min, s_max, opts.n_points);

  const int si = g.nearest(w0.real()), sj = g.nearest(w0.imag());
  require(g.interior(si, sj, 2), "fundamental solution source must be interior");

  FundamentalSolutionField out{to_complex(g.node(si, sj)), ComplexField(g), s_max, schedule, 0.0, 0.0, 0.0, {}};
  Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()));
  double prev_s = 0.0;
  std::vector<double> late_s, late_log_norm;
  Eigen::VectorXcd last;
  const std::size_t late_from = schedule.size() - std::max<std::size_t>(8, schedule.size() / 8);

  EvolveOptions eo;
  eo.min_substeps = 10;
  // The point mass itself is not integrated: H(0, z, w0) = 0 for z != w0.
  out.stats = evolve_observe(
      box, point_mass(g, w0), schedule, opts.dt_max,
      [&](std::size_t k, double s, const ComplexField& f) {
        out.field.values += 0.5 * (s - prev_s) * (prev + f.values);
        prev = f.values;
        prev_s = s;
        if (k >= late_from) {
          late_s.push_back(s);
          late_log_norm.push_back(std::log(std::max(f.l2_norm(), 1e-300)));
        }
        if (k + 1 == schedule.size()) last = f.values;
      },
      eo);

  const auto fit = fit_line(late_s, late_log_norm);
  out.decay_rate = -fit.slope;
  const double h_last = last.cwiseAbs().maxCoeff();
  out.tail_bound = out.decay_rate > 0.0 ? h_last / out.decay_rate : INFINITY;
  out.near_diagonal = 0.25 * (std::abs(out.field.at(si + 1, sj)) + std::abs(out.field.at(si - 1, sj)) +
                              std::abs(out.field.at(si, sj + 1)) + std::abs(out.field.at(si, sj - 1)));
  if (!(out.tail_bound <= 0.05 * out.near_diagonal)) {
    std::ostringstream os;
    os << "tail estimate " << out.tail_bound << " exceeds 5% of the near-diagonal value "
       << out.near_diagonal << " (fitted decay rate " << out.decay_rate << ")";
    fail(ErrorCode::TailNotNegligible, os.str());
  }
  return out;
}

}  // namespace heatlab
