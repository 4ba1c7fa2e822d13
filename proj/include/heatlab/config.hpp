#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heatlab/polynomial.hpp"

namespace heatlab {

// Line-oriented configuration:
//
//   # comment
//   [polynomial]
//   model = p1:2            # or p2:m, or coefficient lines "j k re im"
//   [operator]
//   tau = 1
//   [grid]
//   L = 4
//   n = 129
//   ...
//
// Keys are documented in docs/schema.md; unset keys keep their defaults.
struct RunConfig {
  // [polynomial]
  std::string model = "p1:1";  ///< empty when coefficient lines are used
  CoeffTable coeffs;
  // [operator]
  double tau = 1.0;
  bool oracle_mode = false;
  // [grid]
  double half_width = 4.0;
  int n = 129;
  // [solver]
  double dt = 2e-3;
  std::vector<double> schedule{0.25, 0.5, 1.0, 2.0};
  cplx source{0.0, 0.0};
  // [mc]
  int n_paths = 10000;
  int n_t = 128;
  std::uint64_t seed = 7;
  Vec2 mc_x{0.0, 0.0};
  Vec2 mc_y{0.0, 0.0};
  double mc_s = 0.25;
  // [geom]
  std::vector<cplx> geom_points{{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  std::vector<double> geom_deltas{0.25, 1.0, 4.0};
  // [rho]
  int rho_pairs = 20;
  // [gfield]
  double gfield_s_max = 0.0;  ///< <= 0 picks 12 mu(w0, 1/tau)^2
  int gfield_points = 96;
  // [verify]
  std::string suite = "all";
  std::vector<int> appendix_m{2, 3};

  Polynomial polynomial() const;
  /// Canonical "section.key = value" listing; the config hash is taken over it.
  std::string canonical() const;
  std::string hash() const;
};



/// Parses and validates. Throws Error(ParseError) listing all syntax errors
/// with line numbers, or Error(ValidationError) listing all range violations.
RunConfig parse_config(std::string_view text, bool oracle_mode = false);

/// Sets one "section.key" from its textual value (same syntax as the file).
/// Setting polynomial.model drops any coefficient lines.
void set_config_value(RunConfig& cfg, std::string_view dotted_key, std::string_view value);

/// All range violations; empty when the config is valid.
std::vector<std::string> validate(const RunConfig& cfg);

}  // namespace heatlab
