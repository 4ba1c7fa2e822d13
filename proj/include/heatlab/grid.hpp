#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "heatlab/polynomial.hpp"

namespace heatlab {

/// Uniform origin-centered square grid [-L, L]^2 with n nodes per side.
/// Node (i, j) sits at ((i - c) h, (j - c) h), c = (n - 1) / 2; i runs along x1.
class Grid2D {
 public:
  Grid2D(double half_width, int n);

  double half_width() const { return half_width_; }
  int n() const { return n_; }
  double h() const { return h_; }
  int center_index() const { return (n_ - 1) / 2; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  double coord(int i) const { return (i - center_index()) * h_; }
  Vec2 node(int i, int j) const { return {coord(i), coord(j)}; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  /// Nearest node index along one axis, clamped to the grid.
  int nearest(double x) const;
  bool contains(Vec2 x) const;
  /// True when x is at least `margin` cells away from the outer ring.
  bool interior(int i, int j, int margin = 1) const {
    return i >= margin && j >= margin && i < n_ - margin && j < n_ - margin;
  }

  bool operator==(const Grid2D& o) const { return n_ == o.n_ && half_width_ == o.half_width_; }

 private:
  double half_width_;
  int n_;
  double h_;
};

/// Complex grid function. The outer `invalid_margin` rings hold no meaningful
/// data (e.g. after a centered-difference stencil) and are kept at zero.
struct ComplexField {
  explicit ComplexField(const Grid2D& g) : grid(g), values(Eigen::VectorXcd::Zero(g.size())) {}
  ComplexField(const Grid2D& g, Eigen::VectorXcd v) : grid(g), values(std::move(v)) {}

  Grid2D grid;
  Eigen::VectorXcd values;
  int invalid_margin = 0;

  cplx at(int i, int j) const { return values[grid.index(i, j)]; }
  cplx& at(int i, int j) { return values[grid.index(i, j)]; }

  /// Discrete L2 norm sqrt(h^2 sum |u|^2).
  double l2_norm() const;
  double max_abs() const;
  bool all_finite() const;
};

/// Discrete point mass of weight 1/h^2 at the node nearest to w0.
ComplexField point_mass(const Grid2D& grid, cplx w0);

/// Bilinear interpolation of a field at an arbitrary point inside the grid.
cplx interpolate(const ComplexField& f, Vec2 x);

}  // namespace heatlab
