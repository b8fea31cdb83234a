#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tj/vec2.hpp"

namespace tj {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialConfig {
  std::array<Vec2, 3> wells{Vec2{1.0, 0.0}, Vec2{-0.5, 0.86602540378443865}, Vec2{-0.5, -0.86602540378443865}};
  double scale = 1.0;
  int hypothesis_samples = 4096;
  friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct ProfileConfig {
  double L = 20.0;
  int n_1d = 2001;
  double tol_1d = 1e-9;
  long max_iter = 200000;
  /// Node counts of the sigma(n) convergence table.
  std::vector<int> convergence_n{501, 1001, 2001, 4001};
  friend bool operator==(const ProfileConfig&, const ProfileConfig&) = default;
};

struct FieldConfig {
  double Lx = 40.0;
  int n_2d = 641;
  double theta = 0.0;
  double tol_2d = 1e-8;
  long max_iter = 200000;
  bool symmetrize = false;
  int restart_period = 0;
  int levels = 1;
  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

struct DiagnosticsConfig {
  double delta = 0.3;
  double eps = 0.1;
  std::vector<double> radii{10.0, 15.0, 20.0, 25.0};
  std::vector<double> triangle_radii{8.0, 12.0};
  std::vector<double> equipartition_radii{5.0, 10.0, 15.0, 20.0};
  std::vector<double> strip_radii{10.0, 15.0, 20.0, 25.0};
  std::vector<double> xs{5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0};
  double r0 = 0.2;
  double h_prime_x = 15.0;
  /// Sub-lattices of the grid-resolved reference connection.
  int lattice_subdivisions = 8;
  double lattice_L = 25.0;
  friend bool operator==(const DiagnosticsConfig&, const DiagnosticsConfig&) = default;
};

/// Extra relaxations used by the cross-run acceptance rows of `all`.
struct StudyConfig {
  bool enabled = false;
  std::vector<double> scaling_Lx{20.0, 40.0, 80.0};
  bool grid_doubling = true;
  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

struct RunConfig {
  PotentialConfig potential;
  ProfileConfig profile;
  FieldConfig field;
  DiagnosticsConfig diagnostics;
  StudyConfig study;
  std::uint64_t seed = 0;
  std::string out_dir = "runs";
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// JSON text; `//` and `/* */` comments are accepted. Missing keys keep their
/// defaults, unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// JSON with a leading units comment block; parse_config inverts it exactly.
std::string serialize_config(const RunConfig& cfg);

/// Throws ConfigError naming the first violated constraint.
void validate(const RunConfig& cfg);

/// 16 hex digits of the FNV-1a hash of the canonical JSON (out_dir excluded).
std::string run_id(const RunConfig& cfg);

/// Grid spacing implied by the field section.
double field_spacing(const FieldConfig& f);

}  // namespace tj
