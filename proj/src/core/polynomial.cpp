#include "heatlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heatlab/error.hpp"

namespace heatlab {

namespace {

constexpr double kRealityTolerance = 1e-12;

double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
  return r;
}

double factorial(int n) { return falling_factorial(n, n); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return falling_factorial(n, k) / factorial(k);
}

std::vector<cplx> powers(cplx z, int n) {
  std::vector<cplx> out(static_cast<size_t>(n) + 1);
  out[0] = 1.0;
  for (int i = 1; i <= n; ++i) out[i] = out[i - 1] * z;
  return out;
}

int degree_of(const CoeffTable& coeffs) {
  int d = 0;
  for (const auto& [jk, c] : coeffs) {
    if (c != cplx{}) d = std::max(d, jk.first + jk.second);
  }
  return d;
}

CoeffTable symmetrize(const CoeffTable& in) {
  double scale = 1.0;
  for (const auto& [jk, c] : in) {
    require(jk.first >= 0 && jk.second >= 0, "negative exponent in coefficient table");
    require(std::isfinite(c.real()) && std::isfinite(c.imag()),
            "non-finite polynomial coefficient");
    scale = std::max(scale, std::abs(c));
  }
  CoeffTable out;
  auto lookup = [&](int j, int k) {
    auto it = in.find({j, k});
    return it == in.end() ? cplx{} : it->second;
  };
  for (const auto& [jk, c] : in) {
    const auto [j, k] = jk;
    const cplx mirror = std::conj(lookup(k, j));
    if (std::abs(c - mirror) > kRealityTolerance * scale) {
      std::ostringstream os;
      os << "coefficient table is not real-valued: c(" << j << "," << k << ") = " << c
         << " but conj(c(" << k << "," << j << ")) = " << mirror;
      fail(ErrorCode::NotReal, os.str());
    }
    const cplx sym = 0.5 * (c + mirror);
    if (sym != cplx{}) {
      out[{j, k}] = sym;
      out[{k, j}] = std::conj(sym);
    }
  }
  return out;
}

}  // namespace

RecenteredTaylor::RecenteredTaylor(cplx center, int degree)
    : center_(center),
      degree_(degree),
      table_(static_cast<size_t>(degree + 1) * static_cast<size_t>(degree + 1)) {}

cplx RecenteredTaylor::at(int j, int k) const {
  if (j < 0 || k < 0 || j > degree_ || k > degree_) return {};
  return table_[static_cast<size_t>(j) * (degree_ + 1) + k];
}

cplx& RecenteredTaylor::at(int j, int k) {
  require(j >= 0 && k >= 0 && j <= degree_ && k <= degree_, "Taylor index out of range");
  return table_[static_cast<size_t>(j) * (degree_ + 1) + k];
}

cplx RecenteredTaylor::evaluate(cplx w) const {
  const cplx u = w - center_;
  const auto up = powers(u, degree_);
  const auto ubp = powers(std::conj(u), degree_);
  cplx sum{};
  for (int j = 0; j <= degree_; ++j) {
    for (int k = 0; j + k <= degree_; ++k) sum += at(j, k) * up[j] * ubp[k];
  }
  return sum;
}

Polynomial::Polynomial(CoeffTable coeffs)
    : coeffs_(std::move(coeffs)), degree_(degree_of(coeffs_)) {}

Polynomial Polynomial::make(const CoeffTable& coeffs) {
  Polynomial p(symmetrize(coeffs));
  const bool mixed = std::any_of(p.coeffs_.begin(), p.coeffs_.end(), [](const auto& e) {
    return e.first.first >= 1 && e.first.second >= 1 && e.second != cplx{};
  });
  if (!mixed) fail(ErrorCode::Harmonic, "polynomial has no mixed z^j zbar^k term (harmonic)");
  if (p.degree_ < 2) fail(ErrorCode::DegreeTooLow, "polynomial degree must be at least 2");
  return p;
}

Polynomial Polynomial::make_unchecked(const CoeffTable& coeffs) {
  return Polynomial(symmetrize(coeffs));
}

cplx Polynomial::wirtinger(int a, int b, cplx z) const {
  const auto zp = powers(z, degree_);
  const auto zbp = powers(std::conj(z), degree_);
  cplx sum{};
  for (const auto& [jk, c] : coeffs_) {
    const auto [j, k] = jk;
    if (j < a || k < b) continue;
    sum += c * falling_factorial(j, a) * falling_factorial(k, b) * zp[j - a] * zbp[k - b];
  }
  return sum;
}

cplx Polynomial::eval_complex(cplx z) const { return wirtinger(0, 0, z); }

double Polynomial::eval(Vec2 x) const { return eval_complex(to_complex(x)).real(); }

Vec2 Polynomial::gradient(Vec2 x) const {
  const cplx pz = wirtinger(1, 0, to_complex(x));
  return {2.0 * pz.real(), -2.0 * pz.imag()};
}

double Polynomial::laplacian(Vec2 x) const {
  return 4.0 * wirtinger(1, 1, to_complex(x)).real();
}

RecenteredTaylor Polynomial::recenter(cplx z) const {
  RecenteredTaylor t(z, degree_);
  for (int j = 0; j <= degree_; ++j) {
    for (int k = 0; j + k <= degree_; ++k) {
      t.at(j, k) = wirtinger(j, k, z) / (factorial(j) * factorial(k));
    }
  }
  return t;
}

Polynomial Polynomial::translated(cplx shift) const {
  if (shift == cplx{}) return *this;
  const auto t = recenter(shift);
  CoeffTable out;
  for (int j = 0; j <= degree_; ++j) {
    for (int k = 0; j + k <= degree_; ++k) {
      const cplx c = t.at(j, k);
      if (c != cplx{}) out[{j, k}] = c;
    }
  }
  // Translation keeps reality exactly in exact arithmetic; re-symmetrize rounding.
  for (auto& [jk, c] : out) {
    auto it = out.find({jk.second, jk.first});
    if (it != out.end() && jk.first < jk.second) {
      const cplx avg = 0.5 * (c + std::conj(it->second));
      c = avg;
      it->second = std::conj(avg);
    } else if (jk.first == jk.second) {
      c = {c.real(), 0.0};
    }
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::mixed_part(cplx z0) const {
  const auto t = recenter(z0);
  CoeffTable centered;
  for (int j = 1; j <= degree_; ++j) {
    for (int k = 1; j + k <= degree_; ++k) {
      const cplx c = t.at(j, k);
      if (c != cplx{}) centered[{j, k}] = c;
    }
  }
  for (auto& [jk, c] : centered) {
    if (jk.first == jk.second) c = {c.real(), 0.0};
  }
  return Polynomial(std::move(centered)).translated(-z0);
}

Polynomial Polynomial::dilated(double lambda) const {
  require(lambda > 0.0 && std::isfinite(lambda), "dilation factor must be positive");
  CoeffTable out;
  for (const auto& [jk, c] : coeffs_) {
    out[jk] = c * std::pow(lambda, -static_cast<double>(jk.first + jk.second));
  }
  return Polynomial(std::move(out));
}

Polynomial model_p1(int m) {
  require(m >= 1, "model p1 needs m >= 1");
  return Polynomial::make({{{m, m}, 1.0}});
}

Polynomial model_p2(int m) {
  require(m >= 1, "model p2 needs m >= 1");
  // ((z + zbar)/2)^{2m}
  CoeffTable c;
  const double scale = std::pow(2.0, -2.0 * m);
  for (int j = 0; j <= 2 * m; ++j) c[{j, 2 * m - j}] = scale * binomial(2 * m, j);
  return Polynomial::make(c);
}

SubharmonicityReport subharmonicity_check(const Polynomial& p, cplx center,
                                          double half_width, int n) {
  require(n >= 2, "subharmonicity check needs at least 2 samples per side");
  require(half_width > 0.0, "subharmonicity box must have positive size");
  SubharmonicityReport r;
  r.min_laplacian = INFINITY;
  const double step = 2.0 * half_width / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 x{center.real() - half_width + i * step, center.imag() - half_width + j * step};
      const double lap = p.laplacian(x);
      if (lap < r.min_laplacian) {
        r.min_laplacian = lap;
        r.argmin = x;
      }
      r.max_abs_laplacian = std::max(r.max_abs_laplacian, std::abs(lap));
    }
  }
  r.pass = r.min_laplacian >= -1e-10 * (1.0 + r.max_abs_laplacian);
  return r;
}

}  // namespace heatlab
