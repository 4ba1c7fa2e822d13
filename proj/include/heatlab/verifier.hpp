#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/feynman_kac.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/heat_solver.hpp"

namespace heatlab {

/// D(s, x, y) = exp(-|x-y|^2 / (2s)) exp(-c2 s / mu(x, 1/tau)^2) exp(-c2 s / mu(y, 1/tau)^2).
struct DecayTerm {
  double s = 0.0;
  Vec2 x, y;
  double c2 = 0.0;
  double value = 0.0;
};
DecayTerm decay_term(const Polynomial& p, double tau, double s, Vec2 x, Vec2 y, double c2);

/// One acceptance window. The margin is max(lo - value, value - hi); the
/// criterion holds iff the margin is <= 0.
struct Criterion {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double margin() const;
  bool pass() const { return margin() <= 0.0; }
};

/// Outcome of one check. The verdict is pass iff the worst margin over all
/// criteria is <= threshold (always 0).
struct BoundReport {
  std::string name;
  std::string estimate;
  std::string sample_set;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<Criterion> criteria;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<std::string> notes;
  double threshold = 0.0;

  double worst_margin() const;
  bool pass() const { return !criteria.empty() && worst_margin() <= threshold; }

  void add(std::string crit, double value, double lo, double hi);
  void constant(std::string key, double value);
  void record(std::string key, std::string value);
  void record(std::string key, double value);
};

/// Serialized report (JSON object, keys documented in docs/schema.md).
std::string to_json(const BoundReport& report);

/// Human-readable label for provenance records.
std::string describe(const Polynomial& p);

// ---------------------------------------------------------------------------

struct GaussianOptions {
  /// Nodes where the bound falls below floor x its peak are not compared:
  /// there both sides are dominated by lattice dispersion and rounding.
  double floor = 1e-3;
  double tol = 0.05;
};

/// |H(s, z, w0)| pi s exp(|z - w0|^2 / s) <= 1 + tol on interior nodes.
BoundReport check_gaussian(const KernelColumn& col, const GaussianOptions& opts = {});

/// Fits log(s max_z |H|) against s / mu(w0, 1/tau)^2 over s >= mu^2. Passes iff
/// the slope is <= -c2_min. Throws ScheduleTooShort when the schedule ends
/// before 10 mu^2.
BoundReport check_longtime(const KernelColumn& col, const Polynomial& p, double tau,
                           double c2_min = 0.1);

struct EnergyOptions {
  /// When set, the fitted rate of g = ||H||^2 must match within rel_tol.
  std::optional<double> expected_rate;
  double rel_tol = 0.10;
  /// Local rates over the two halves of the tail window must agree within this.
  double stability = 0.25;
  /// Fitted rate must exceed this multiple of the rate the Dirichlet walls alone produce.
  double min_box_factor = 2.0;
};

/// g(s) = ||H(s, ., w0)||^2: strictly decreasing with a stable exponential
/// rate over the second half of the schedule. Needs >= 10 schedule points.
BoundReport check_energy(const KernelColumn& col, const EnergyOptions& opts = {});

/// Fitted small-s exponents of sup_z |d_s^n Y^alpha H| (expected -n-|alpha|/2-1)
/// and of ||d_s^n H||_2 (expected -n-1/2) over schedule times <= s_hi.
/// d_s is -box, Y ranges over X1, X2. Pairs with n + |alpha| <= 2 are tested.
/// Throws OrderTooHigh beyond order 2.
BoundReport check_derivatives(const DiscreteBox& box, const KernelColumn& col, int max_n,
                              int max_alpha, double s_hi);

/// Space-time cylinder Q_r = [s0 - r^2, s0] x B(x0, r).
struct Cylinder {
  double s0 = 0.0;
  Vec2 x0;
  double r = 0.0;
};

/// Smallest C with sup_{Q_{r/2}} |u| <= (C / r^2) (int int_{Q_{2r/3}} |u|^2)^{1/2}
/// per cylinder; passes iff all are finite and max C / min C < 10.
/// Throws CylinderOutOfRange when a cylinder leaves the grid or schedule, or
/// r / 2 is below two cells.
BoundReport check_subsolution(const KernelColumn& col, const std::vector<Cylinder>& cylinders);

/// Deterministic pseudo-random cylinders that fit the column.
std::vector<Cylinder> sample_cylinders(const KernelColumn& col, int count, double r,
                                       std::uint64_t seed);

struct ScalingOptions {
  cplx z0{1.0, 0.0};  ///< snapped to the grid
  double lambda = 2.0;
  double dt = 2e-3;
};

/// Translation, twist (gauge) and dilation identities between solver columns.
/// Relative error <= 3% at the peak and <= 10% on the half-maximum band.
BoundReport check_scaling(const Polynomial& p, double tau, const Grid2D& grid, cplx w0,
                          const std::vector<double>& s_list, const ScalingOptions& opts = {});

/// Ring profiles of G around the source: log profile for r = mu 2^-k,
/// k = 1..4; one weighted derivative decaying like r^-1 on the same rings;
/// exponential decay over r = mu {2, 3, 4} with fitted rate >= 0.2.
BoundReport check_G_bounds(const FundamentalSolutionField& g, const Polynomial& p, double tau);

struct AppendixOptions {
  int pairs = 20;
  std::uint64_t seed = 11;
  double half_width = 3.0;
  int n = 257;
};

/// Size sum, closed-form rho and grid rho agree within [1/4, 4] pairwise for
/// p1 and p2 at each m.
BoundReport check_appendix_equivalence(const std::vector<int>& m_list,
                                       const AppendixOptions& opts = {});

// ---------------------------------------------------------------------------
// Checks beyond the eight suite reports.

/// tau = 0 columns against (1/(pi s)) exp(-|x|^2/s): peak error at each time on
/// the fine grid, and the reduction factor against a grid with twice the
/// spacing and time step.
BoundReport check_free_oracle(double half_width, int n, double dt, const std::vector<double>& s_list,
                              double max_peak_error = 0.02, double min_reduction = 3.0);

/// Reproducing identity H(2s, z, w0) = sum_v H(s, z, v) H(s, v, w0) h^2 and
/// conjugate symmetry H(s, z, w) = conj H(s, w, z) over pairs of sources.
BoundReport check_semigroup(const DiscreteBox& box, const std::vector<cplx>& sources, double s,
                            double dt);

struct McTriple {
  Vec2 x;
  Vec2 y;
  double s = 0.0;
};

struct McOptions {
  int n_paths = 100000;
  int n_t = 128;
  std::uint64_t seed = 7;
  double half_width = 4.0;
  int n = 257;
  double dt = 5e-4;
};

/// |PDE - MC| <= 3 (stderr + grid error); the grid error is the Richardson
/// estimate |fine - coarse| / 3 with coarse = half resolution. Also
/// |MC| <= free factor + 3 stderr.
BoundReport check_mc_crossval(const Polynomial& p, double tau, const std::vector<McTriple>& triples,
                              const McOptions& opts = {});

/// Approximate-inverse ratios of mu and Lambda within [1/C, C].
BoundReport check_geometry(const Polynomial& p, const std::vector<SizeSample>& samples,
                           double constant = 3.0);

}  // namespace heatlab
