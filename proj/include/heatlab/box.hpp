#pragma once

#include <Eigen/SparseCore>
#include <string_view>

#include "heatlab/grid.hpp"
#include "heatlab/polynomial.hpp"

namespace heatlab {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// The weighted Laplacian
//
//   box = -1/4 Lap + tau/4 Lap(p) + tau^2/4 |grad p|^2 + (i/2) tau (p_x1 d_x2 - p_x2 d_x1)
//       = 1/4 (-i grad - a)^2 + tau/4 Lap(p),          a = tau (-p_x2, p_x1),
//
// is discretized on the grid with link phases: the hopping between neighbouring
// nodes x -> y carries exp(-i theta), theta = integral of a along the edge
// (Gauss-Legendre, exact for polynomial p). Nodes outside the grid are zero.
// The resulting matrix is Hermitian and, for Lap(p) >= 0, positive semidefinite
// by construction, and it transforms exactly under gauge changes of p.
struct DiscreteBox {
  Grid2D grid;
  double tau;
  Polynomial p;
  SparseMatrix action;
};

/// Assembles the discrete operator and verifies Hermitian symmetry and
/// positivity on 8 random vectors. tau = 0 gives -1/4 of the 5-point Laplacian.
/// Throws NotHermitian / NotPSD when the checks fail.
DiscreteBox assemble_box(const Polynomial& p, double tau, const Grid2D& grid);

/// Zeroth-order part of the real form: tau/4 Lap(p) + tau^2/4 |grad p|^2.
double box_potential(const Polynomial& p, double tau, Vec2 x);

/// Direct centered-difference discretization of the real form (5-point
/// Laplacian, centered first derivatives). Independent of the link-phase
/// assembly; the outer ring of the result is invalid.
ComplexField apply_real_form(const Polynomial& p, double tau, const ComplexField& f);

ComplexField apply_box(const DiscreteBox& box, const ComplexField& f);

enum class FieldKind { Zbar, Z, X1, X2, U1, U2 };

std::string_view field_kind_name(FieldKind kind);
FieldKind parse_field_kind(std::string_view name);

/// Centered-difference application of a first-order weighted field:
///   Zbar = d/dzbar + tau p_zbar,  Z = d/dz - tau p_z,
///   X1 = d_x1 + i tau p_x2,       X2 = d_x2 - i tau p_x1,
///   U1 = d_x1 - i tau p_x2,       U2 = d_x2 + i tau p_x1.
ComplexField apply_field(FieldKind kind, const Polynomial& p, double tau, const ComplexField& f);

/// Discrete inner product h^2 sum u conj(v) over nodes at least `margin` cells
/// inside the grid.
cplx inner(const ComplexField& u, const ComplexField& v, int margin = 0);

struct EigenResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Smallest eigenvalue of the assembled operator by inverse iteration with
/// conjugate-gradient inner solves; stops when the Rayleigh quotient changes by
/// less than `tol` (relative).
EigenResult smallest_eigenvalue(const DiscreteBox& box, double tol = 1e-10, int max_iter = 200);

}  // namespace heatlab
