#include "heatlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "heatlab/error.hpp"

namespace heatlab {

Grid2D::Grid2D(double half_width, int n) : half_width_(half_width), n_(n), h_(0.0) {
  require(std::isfinite(half_width) && half_width > 0.0, "grid half-width must be positive");
  require(n >= 33 && n % 2 == 1, "grid needs an odd node count n >= 33");
  h_ = 2.0 * half_width / (n - 1);
}

int Grid2D::nearest(double x) const {
  const long i = std::lround(x / h_) + center_index();
  return static_cast<int>(std::clamp<long>(i, 0, n_ - 1));
}

bool Grid2D::contains(Vec2 x) const {
  const double tol = 1e-12 * half_width_;
  return std::abs(x.x1) <= half_width_ + tol && std::abs(x.x2) <= half_width_ + tol;
}

double ComplexField::l2_norm() const { return grid.h() * values.norm(); }

double ComplexField::max_abs() const {
  return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
}

bool ComplexField::all_finite() const { return values.allFinite(); }

ComplexField point_mass(const Grid2D& grid, cplx w0) {
  require(grid.contains(to_vec(w0)), "point mass location outside the grid");
  ComplexField f(grid);
  f.at(grid.nearest(w0.real()), grid.nearest(w0.imag())) = 1.0 / (grid.h() * grid.h());
  return f;
}

cplx interpolate(const ComplexField& f, Vec2 x) {
  const auto& g = f.grid;
  require(g.contains(x), "interpolation point outside the grid");
  const double u = x.x1 / g.h() + g.center_index();
  const double v = x.x2 / g.h() + g.center_index();
  const int i = std::clamp(static_cast<int>(std::floor(u)), 0, g.n() - 2);
  const int j = std::clamp(static_cast<int>(std::floor(v)), 0, g.n() - 2);
  const double a = u - i;
  const double b = v - j;
  return (1 - a) * (1 - b) * f.at(i, j) + a * (1 - b) * f.at(i + 1, j) +
         (1 - a) * b * f.at(i, j + 1) + a * b * f.at(i + 1, j + 1);
}

}  // namespace heatlab
