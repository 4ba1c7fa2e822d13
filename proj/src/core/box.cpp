#include "heatlab/box.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <random>
#include <sstream>

#include "heatlab/error.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

constexpr cplx kI{0.0, 1.0};

// Line integral of a = tau (-p_x2, p_x1) from `from` along axis `axis` over length h.
double edge_phase(const Polynomial& p, double tau, Vec2 from, int axis, double h,
                  const std::vector<double>& nodes, const std::vector<double>& weights) {
  double acc = 0.0;
  for (size_t q = 0; q < nodes.size(); ++q) {
    const double t = 0.5 * (nodes[q] + 1.0) * h;
    Vec2 x = from;
    (axis == 0 ? x.x1 : x.x2) += t;
    const Vec2 g = p.gradient(x);
    const double a = axis == 0 ? -g.x2 : g.x1;
    acc += 0.5 * weights[q] * h * a;
  }
  return tau * acc;
}

void check_hermitian(const SparseMatrix& a) {
  const SparseMatrix adj = a.adjoint();
  const SparseMatrix diff = a - adj;
  double max_diff = 0.0;
  double max_entry = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      max_diff = std::max(max_diff, std::abs(it.value()));
    }
  }
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      max_entry = std::max(max_entry, std::abs(it.value()));
    }
  }
  if (max_diff > 1e-12 * max_entry) {
    std::ostringstream os;
    os << "assembled operator is not Hermitian: max |A - A^H| = " << max_diff;
    fail(ErrorCode::NotHermitian, os.str());
  }
}

void check_psd(const SparseMatrix& a) {
  std::mt19937_64 rng(0x5eed'b0c5ULL);
  std::normal_distribution<double> normal;
  double max_entry = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      max_entry = std::max(max_entry, std::abs(it.value()));
    }
  }
  Eigen::VectorXcd u(a.rows());
  for (int trial = 0; trial < 8; ++trial) {
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = {normal(rng), normal(rng)};
    const cplx q = u.dot(a * u);
    if (q.real() < -1e-10 * (1.0 + max_entry) * u.squaredNorm()) {
      std::ostringstream os;
      os << "assembled operator is not positive semidefinite: <Au,u> = " << q.real();
      fail(ErrorCode::NotPSD, os.str());
    }
  }
}

}  // namespace

DiscreteBox assemble_box(const Polynomial& p, double tau, const Grid2D& grid) {
  require(std::isfinite(tau) && tau >= 0.0, "tau must be nonnegative");
  const int n = grid.n();
  const double h = grid.h();
  const double hop = -0.25 / (h * h);
  const auto [gl_nodes, gl_weights] = gauss_legendre(p.degree() / 2 + 1);

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(grid.size() * 5);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 x = grid.node(i, j);
      const auto row = static_cast<Eigen::Index>(grid.index(i, j));
      const double diag = 1.0 / (h * h) + (tau == 0.0 ? 0.0 : 0.25 * tau * p.laplacian(x));
      triplets.emplace_back(row, row, diag);
      for (int axis = 0; axis < 2; ++axis) {
        const int ni = axis == 0 ? i + 1 : i;
        const int nj = axis == 0 ? j : j + 1;
        if (ni >= n || nj >= n) continue;
        const auto col = static_cast<Eigen::Index>(grid.index(ni, nj));
        const double theta =
            tau == 0.0 ? 0.0 : edge_phase(p, tau, x, axis, h, gl_nodes, gl_weights);
        const cplx link = hop * std::exp(-kI * theta);
        triplets.emplace_back(row, col, link);
        triplets.emplace_back(col, row, std::conj(link));
      }
    }
  }
  SparseMatrix a(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  check_hermitian(a);
  check_psd(a);
  return DiscreteBox{grid, tau, p, std::move(a)};
}

double box_potential(const Polynomial& p, double tau, Vec2 x) {
  const Vec2 g = p.gradient(x);
  return 0.25 * tau * p.laplacian(x) + 0.25 * tau * tau * (g.x1 * g.x1 + g.x2 * g.x2);
}

ComplexField apply_real_form(const Polynomial& p, double tau, const ComplexField& f) {
  const auto& g = f.grid;
  const double h = g.h();
  ComplexField out(g);
  out.invalid_margin = std::max(1, f.invalid_margin + 1);
  for (int i = 1; i < g.n() - 1; ++i) {
    for (int j = 1; j < g.n() - 1; ++j) {
      const Vec2 x = g.node(i, j);
      const cplx u = f.at(i, j);
      const cplx lap =
          (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * u) / (h * h);
      const cplx d1 = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * h);
      const cplx d2 = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * h);
      const Vec2 grad = p.gradient(x);
      out.at(i, j) = -0.25 * lap + box_potential(p, tau, x) * u +
                     0.5 * kI * tau * (grad.x1 * d2 - grad.x2 * d1);
    }
  }
  return out;
}

ComplexField apply_box(const DiscreteBox& box, const ComplexField& f) {
  require(f.grid == box.grid, "field and operator live on different grids");
  ComplexField out(box.grid, box.action * f.values);
  out.invalid_margin = f.invalid_margin == 0 ? 0 : f.invalid_margin + 1;
  return out;
}

std::string_view field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::Zbar: return "Zbar";
    case FieldKind::Z: return "Z";
    case FieldKind::X1: return "X1";
    case FieldKind::X2: return "X2";
    case FieldKind::U1: return "U1";
    case FieldKind::U2: return "U2";
  }
  return "?";
}

FieldKind parse_field_kind(std::string_view name) {
  for (auto k : {FieldKind::Zbar, FieldKind::Z, FieldKind::X1, FieldKind::X2, FieldKind::U1,
                 FieldKind::U2}) {
    if (field_kind_name(k) == name) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown field kind '" + std::string(name) + "'");
}

ComplexField apply_field(FieldKind kind, const Polynomial& p, double tau, const ComplexField& f) {
  const auto& g = f.grid;
  const double h = g.h();
  ComplexField out(g);
  out.invalid_margin = f.invalid_margin + 1;
  for (int i = 1; i < g.n() - 1; ++i) {
    for (int j = 1; j < g.n() - 1; ++j) {
      const cplx z = to_complex(g.node(i, j));
      const cplx u = f.at(i, j);
      const cplx d1 = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * h);
      const cplx d2 = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * h);
      const cplx pz = p.wirtinger(1, 0, z);
      const double p1 = 2.0 * pz.real();
      const double p2 = -2.0 * pz.imag();
      cplx r;
      switch (kind) {
        case FieldKind::Zbar: r = 0.5 * (d1 + kI * d2) + tau * std::conj(pz) * u; break;
        case FieldKind::Z: r = 0.5 * (d1 - kI * d2) - tau * pz * u; break;
        case FieldKind::X1: r = d1 + kI * tau * p2 * u; break;
        case FieldKind::X2: r = d2 - kI * tau * p1 * u; break;
        case FieldKind::U1: r = d1 - kI * tau * p2 * u; break;
        case FieldKind::U2: r = d2 + kI * tau * p1 * u; break;
      }
      out.at(i, j) = r;
    }
  }
  // Zero the invalid rings so they never leak into norms.
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (!g.interior(i, j, out.invalid_margin)) out.at(i, j) = 0.0;
    }
  }
  return out;
}

cplx inner(const ComplexField& u, const ComplexField& v, int margin) {
  require(u.grid == v.grid, "inner product of fields on different grids");
  const auto& g = u.grid;
  cplx acc{};
  for (int i = margin; i < g.n() - margin; ++i) {
    for (int j = margin; j < g.n() - margin; ++j) acc += u.at(i, j) * std::conj(v.at(i, j));
  }
  return acc * g.h() * g.h();
}

EigenResult smallest_eigenvalue(const DiscreteBox& box, double tol, int max_iter) {
  const auto& a = box.action;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<cplx>>
      cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(20000);
  cg.compute(a);

  std::mt19937_64 rng(0xe19e'0001ULL);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd x(a.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = {normal(rng), normal(rng)};
  x.normalize();

  EigenResult r;
  double prev = INFINITY;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXcd y = cg.solveWithGuess(x, x);
    if (cg.info() != Eigen::Success) {
      fail(ErrorCode::SolverDiverged, "inner CG solve failed in inverse iteration");
    }
    x = y.normalized();
    const Eigen::VectorXcd ax = a * x;
    const double rq = x.dot(ax).real();
    r.value = rq;
    r.iterations = it;
    r.residual = (ax - rq * x).norm();
    if (std::abs(rq - prev) <= tol * std::abs(rq)) break;
    prev = rq;
  }
  return r;
}

}  // namespace heatlab
