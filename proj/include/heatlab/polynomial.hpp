#pragma once

#include <complex>
#include <map>
#include <utility>
#include <vector>

namespace heatlab {

using cplx = std::complex<double>;

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline cplx to_complex(Vec2 v) { return {v.x1, v.x2}; }
inline Vec2 to_vec(cplx z) { return {z.real(), z.imag()}; }

/// Wirtinger coefficient table: (j, k) -> c_jk, the coefficient of z^j conj(z)^k.
using CoeffTable = std::map<std::pair<int, int>, cplx>;

/// Normalized derivatives A_jk(z) = (1/(j!k!)) d^{j+k}p / dz^j dzbar^k at a center,
/// for 0 <= j, k <= degree. Entries with j + k > degree are zero.
class RecenteredTaylor {
 public:
  RecenteredTaylor(cplx center, int degree);

  cplx center() const { return center_; }
  int degree() const { return degree_; }
  cplx at(int j, int k) const;
  cplx& at(int j, int k);

  /// Sum of A_jk (w - center)^j conj(w - center)^k.
  cplx evaluate(cplx w) const;

 private:
  cplx center_;
  int degree_;
  std::vector<cplx> table_;
};

/// Real-valued polynomial p: C -> R stored in Wirtinger form. Immutable.
class Polynomial {
 public:
  /// Validates reality (symmetrizing asymmetries below 1e-12), the presence of a
  /// mixed term, and degree >= 2. Throws NotReal, Harmonic or DegreeTooLow.
  static Polynomial make(const CoeffTable& coeffs);

  /// Skips the nonharmonic/degree checks; reality is still enforced. Used for
  /// intermediate objects such as the harmonic part of a recentering.
  static Polynomial make_unchecked(const CoeffTable& coeffs);

  const CoeffTable& coeffs() const { return coeffs_; }
  int degree() const { return degree_; }

  /// d^a/dz^a d^b/dzbar^b p evaluated at z.
  cplx wirtinger(int a, int b, cplx z) const;

  double eval(Vec2 x) const;
  /// Complex-valued evaluation; the imaginary part is rounding noise.
  cplx eval_complex(cplx z) const;
  Vec2 gradient(Vec2 x) const;
  double laplacian(Vec2 x) const;

  RecenteredTaylor recenter(cplx z) const;

  /// w -> p(w + shift).
  Polynomial translated(cplx shift) const;
  /// w -> sum_{j,k>=1} A_jk(z0) (w - z0)^j conj(w - z0)^k: p with the harmonic
  /// part of its expansion at z0 removed.
  Polynomial mixed_part(cplx z0) const;
  /// w -> p(w / lambda).
  Polynomial dilated(double lambda) const;

  bool operator==(const Polynomial& other) const { return coeffs_ == other.coeffs_; }

 private:
  explicit Polynomial(CoeffTable coeffs);

  CoeffTable coeffs_;
  int degree_ = 0;
};

/// |z|^{2m}.
Polynomial model_p1(int m);
/// (Re z)^{2m}.
Polynomial model_p2(int m);

struct SubharmonicityReport {
  double min_laplacian = 0.0;
  double max_abs_laplacian = 0.0;
  Vec2 argmin;
  bool pass = false;
};

/// Samples the Laplacian on an n x n lattice over [-half_width, half_width]^2
/// around `center`.
SubharmonicityReport subharmonicity_check(const Polynomial& p, cplx center,
                                          double half_width, int n);

}  // namespace heatlab
