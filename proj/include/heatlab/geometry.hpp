#pragma once

#include <vector>

#include "heatlab/grid.hpp"
#include "heatlab/polynomial.hpp"

namespace heatlab {

struct SizeQuery {
  const Polynomial& p;
  cplx z;
  double delta;
};

/// Lambda(z, delta) = sum_{j,k>=1} |A_jk(z)| delta^{j+k}.
double lambda_fn(const SizeQuery& q);
/// mu(z, delta) = min over nonvanishing A_jk(z), j,k >= 1, of |delta / A_jk(z)|^{1/(j+k)}.
/// Coefficients below 1e-14 of the table's largest entry count as zero.
double mu_fn(const SizeQuery& q);

inline double lambda_fn(const Polynomial& p, cplx z, double delta) { return lambda_fn({p, z, delta}); }
inline double mu_fn(const Polynomial& p, cplx z, double delta) { return mu_fn({p, z, delta}); }

/// R(z) = min over A_jk(z) != 0 with j + k >= 1 of |tau A_jk(z)|^{-1/(j+k)}.
double sobolev_radius(const Polynomial& p, double tau, cplx z);

/// T(w, z) = -2 Im sum_{j>=1} A_j0(z) (w - z)^j.
double twist(const Polynomial& p, cplx w, cplx z);

struct RatioRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct ApproxInverseResult {
  RatioRange mu_of_lambda;  ///< mu(z, Lambda(z, delta)) / delta
  RatioRange lambda_of_mu;  ///< Lambda(z, mu(z, delta)) / delta
  double constant = 0.0;    ///< acceptance window [1/C, C]
  bool pass = false;
  int samples = 0;
};

struct SizeSample {
  cplx z;
  double delta;
};

/// Needs at least 10 samples.
ApproxInverseResult approx_inverse_check(const Polynomial& p, const std::vector<SizeSample>& samples,
                                         double constant);

/// Node weights 1/mu(v, 1) for the conformal metric d rho = ds / mu(., 1).
struct MetricGrid {
  Grid2D grid;
  std::vector<double> weight;
};

MetricGrid make_metric_grid(const Polynomial& p, const Grid2D& grid);

struct RhoResult {
  double rho = 0.0;
  /// Integral of 1/mu along the straight segment (an upper bound for the
  /// continuous metric).
  double straight_line = 0.0;
};

/// Shortest path in the 8-neighbour graph with edge weight
/// |edge| (w(u) + w(v)) / 2. Endpoints snap to the nearest nodes. Throws
/// GridTooCoarse if 1/mu changes by 20% or more across one cell along the
/// segment from z to w.
RhoResult rho_metric(const Polynomial& p, cplx z, cplx w, const MetricGrid& mg);

enum class ModelKind { P1, P2 };

/// p1: |z-w| + |z-w| (|z|^{m-1} + |w|^{m-1});
/// p2: |z-w| + |z-w| (|Re z|^{m-1} + |Re w|^{m-1}).
double rho_closed_form(ModelKind model, int m, cplx z, cplx w);

/// |z-w| / mu(w, 1) + |z-w| / mu(z, 1).
double size_sum(const Polynomial& p, cplx z, cplx w);

}  // namespace heatlab
