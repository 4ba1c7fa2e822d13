#include "heatlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "heatlab/error.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace {

constexpr double kVanishing = 1e-14;

double table_scale(const RecenteredTaylor& t) {
  double scale = 0.0;
  for (int j = 0; j <= t.degree(); ++j) {
    for (int k = 0; j + k <= t.degree(); ++k) scale = std::max(scale, std::abs(t.at(j, k)));
  }
  return scale;
}

}  // namespace

double lambda_fn(const SizeQuery& q) {
  require(q.delta > 0.0, "Lambda needs delta > 0");
  const auto t = q.p.recenter(q.z);
  double sum = 0.0;
  for (int j = 1; j <= t.degree(); ++j) {
    for (int k = 1; j + k <= t.degree(); ++k) sum += std::abs(t.at(j, k)) * std::pow(q.delta, j + k);
  }
  return sum;
}

double mu_fn(const SizeQuery& q) {
  require(q.delta > 0.0, "mu needs delta > 0");
  const auto t = q.p.recenter(q.z);
  const double cutoff = kVanishing * table_scale(t);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= t.degree(); ++j) {
    for (int k = 1; j + k <= t.degree(); ++k) {
      const double a = std::abs(t.at(j, k));
      if (a <= cutoff) continue;
      best = std::min(best, std::pow(q.delta / a, 1.0 / (j + k)));
    }
  }
  if (!std::isfinite(best)) {
    fail(ErrorCode::AllMixedTermsVanish, "every mixed coefficient A_jk vanishes at the center");
  }
  return best;
}

double sobolev_radius(const Polynomial& p, double tau, cplx z) {
  require(tau > 0.0, "Sobolev radius needs tau > 0");
  const auto t = p.recenter(z);
  const double cutoff = kVanishing * table_scale(t);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= t.degree(); ++j) {
    for (int k = 0; j + k <= t.degree(); ++k) {
      if (j + k == 0) continue;
      const double a = std::abs(t.at(j, k));
      if (a <= cutoff) continue;
      best = std::min(best, std::pow(tau * a, -1.0 / (j + k)));
    }
  }
  return best;
}

double twist(const Polynomial& p, cplx w, cplx z) {
  const auto t = p.recenter(z);
  const cplx u = w - z;
  cplx sum{};
  cplx up = 1.0;
  for (int j = 1; j <= t.degree(); ++j) {
    up *= u;
    sum += t.at(j, 0) * up;
  }
  return -2.0 * sum.imag();
}

ApproxInverseResult approx_inverse_check(const Polynomial& p, const std::vector<SizeSample>& samples,
                                         double constant) {
  require(samples.size() >= 10, "approximate-inverse check needs at least 10 samples");
  require(constant >= 1.0, "acceptance constant must be >= 1");
  ApproxInverseResult r;
  r.constant = constant;
  r.samples = static_cast<int>(samples.size());
  r.mu_of_lambda = {INFINITY, -INFINITY};
  r.lambda_of_mu = {INFINITY, -INFINITY};
  for (const auto& s : samples) {
    const double a = mu_fn(p, s.z, lambda_fn(p, s.z, s.delta)) / s.delta;
    const double b = lambda_fn(p, s.z, mu_fn(p, s.z, s.delta)) / s.delta;
    r.mu_of_lambda.lo = std::min(r.mu_of_lambda.lo, a);
    r.mu_of_lambda.hi = std::max(r.mu_of_lambda.hi, a);
    r.lambda_of_mu.lo = std::min(r.lambda_of_mu.lo, b);
    r.lambda_of_mu.hi = std::max(r.lambda_of_mu.hi, b);
  }
  const auto inside = [&](RatioRange x) { return x.lo >= 1.0 / constant && x.hi <= constant; };
  r.pass = inside(r.mu_of_lambda) && inside(r.lambda_of_mu);
  return r;
}

MetricGrid make_metric_grid(const Polynomial& p, const Grid2D& grid) {
  MetricGrid mg{grid, std::vector<double>(grid.size())};
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) {
      const double w = 1.0 / mu_fn(p, to_complex(grid.node(i, j)), 1.0);
      require(std::isfinite(w) && w > 0.0, "metric weight must be finite and positive");
      mg.weight[grid.index(i, j)] = w;
    }
  }
  return mg;
}

RhoResult rho_metric(const Polynomial& p, cplx z, cplx w, const MetricGrid& mg) {
  const auto& g = mg.grid;
  require(g.contains(to_vec(z)) && g.contains(to_vec(w)), "rho endpoints must lie inside the grid");

  // Resolution guard along the straight segment.
  const double len = std::abs(w - z);
  const int cells = std::max(1, static_cast<int>(std::ceil(len / g.h())));
  double prev = 1.0 / mu_fn(p, z, 1.0);
  for (int c = 1; c <= cells; ++c) {
    const cplx x = z + (w - z) * (static_cast<double>(c) / cells);
    const double cur = 1.0 / mu_fn(p, x, 1.0);
    if (std::abs(cur - prev) >= 0.2 * std::min(cur, prev)) {
      std::ostringstream os;
      os << "grid spacing " << g.h() << " too coarse: 1/mu changes from " << prev << " to " << cur
         << " across one cell";
      fail(ErrorCode::GridTooCoarse, os.str());
    }
    prev = cur;
  }

  RhoResult r;
  {
    const auto [nodes, weights] = gauss_legendre(8);
    const int panels = std::max(16, cells);
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
      for (size_t q = 0; q < nodes.size(); ++q) {
        const double t = (k + 0.5 * (nodes[q] + 1.0)) / panels;
        acc += 0.5 * weights[q] / panels / mu_fn(p, z + (w - z) * t, 1.0);
      }
    }
    r.straight_line = acc * len;
  }

  const int si = g.nearest(z.real()), sj = g.nearest(z.imag());
  const int ti = g.nearest(w.real()), tj = g.nearest(w.imag());
  if (si == ti && sj == tj) return r;

  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  const std::size_t src = g.index(si, sj);
  const std::size_t dst = g.index(ti, tj);
  dist[src] = 0.0;
  queue.push({0.0, src});
  const int n = g.n();
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u == dst) break;
    const int ui = static_cast<int>(u / n), uj = static_cast<int>(u % n);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const int vi = ui + di, vj = uj + dj;
        if (vi < 0 || vj < 0 || vi >= n || vj >= n) continue;
        const std::size_t v = g.index(vi, vj);
        const double edge = g.h() * std::sqrt(static_cast<double>(di * di + dj * dj));
        const double nd = d + edge * 0.5 * (mg.weight[u] + mg.weight[v]);
        if (nd < dist[v]) {
          dist[v] = nd;
          queue.push({nd, v});
        }
      }
    }
  }
  r.rho = dist[dst];
  return r;
}

double rho_closed_form(ModelKind model, int m, cplx z, cplx w) {
  require(m >= 1, "model exponent m must be >= 1");
  const double d = std::abs(z - w);
  if (model == ModelKind::P1) {
    return d + d * (std::pow(std::abs(z), m - 1) + std::pow(std::abs(w), m - 1));
  }
  return d + d * (std::pow(std::abs(z.real()), m - 1) + std::pow(std::abs(w.real()), m - 1));
}

double size_sum(const Polynomial& p, cplx z, cplx w) {
  const double d = std::abs(z - w);
  if (d == 0.0) return 0.0;
  return d / mu_fn(p, w, 1.0) + d / mu_fn(p, z, 1.0);
}

}  // namespace heatlab
