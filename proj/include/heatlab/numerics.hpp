#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace heatlab {

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Largest absolute residual of the fitted line.
  double max_residual = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Log-spaced points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);
std::vector<double> lin_space(double lo, double hi, int count);

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace heatlab
