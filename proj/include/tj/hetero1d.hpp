#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "tj/ncg.hpp"
#include "tj/potential.hpp"
#include "tj/vec2.hpp"

namespace tj {

/// Sampled heteroclinic candidate U on the uniform grid y_k = -L + k dy,
/// dy = 2L / (n - 1), connecting a_left (y = -L) to a_right (y = +L).
struct Profile1D {
  double halfwidth = 0.0;
  std::vector<Vec2> samples;
  int left_well = 0;
  int right_well = 0;
  double sigma = 0.0;

  std::size_t size() const { return samples.size(); }
  double spacing() const { return 2.0 * halfwidth / static_cast<double>(samples.size() - 1); }
  double y(std::size_t k) const { return -halfwidth + static_cast<double>(k) * spacing(); }
};

struct ConnectionOptions {
  double tol = 1e-9;  // max norm of -U'' + W_u(U) at interior nodes
  long max_iter = 200000;
};

/// Carries the last iterate when the connection solver gives up.
class ConnectionError : public std::runtime_error {
 public:
  ConnectionError(const std::string& what, SolverStatus status, Profile1D last, double residual)
      : std::runtime_error(what), status_(status), last_(std::move(last)), residual_(residual) {}
  SolverStatus status() const { return status_; }
  const Profile1D& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  SolverStatus status_;
  Profile1D last_;
  double residual_;
};

/// Minimizes the trapezoid discretization of J(U) = int (1/2|U'|^2 + W(U))
/// with U(-L) = a_i, U(L) = a_j clamped, subject to the gauge
/// |U(0) - a_i| = |U(0) - a_j| (U(0) read by linear interpolation).
/// `init`, when given, is resampled onto the grid and re-gauged first.
Profile1D solve_connection(const Potential& p, int i, int j, double L = 20.0, int n = 2001,
                           const ConnectionOptions& opt = {}, const std::optional<Profile1D>& init = std::nullopt);

/// Trapezoid-rule J(U).
double profile_energy(const Profile1D& prof, const Potential& p);

/// J restricted to [s_minus, s_plus], integrating the piecewise-linear
/// interpolant (exact gradient part, trapezoid potential part).
double truncated_energy(const Profile1D& prof, const Potential& p, double s_minus, double s_plus);

/// max_k |1/2 |U'(y_k)|^2 - W(U(y_k))| over interior nodes, U' by central differences.
double equipartition_residual(const Profile1D& prof, const Potential& p);

/// Same first integral with the O(dy^2) correction of the central-difference
/// scheme, -dy^2 (U'.W_uu U' / 12 + |W_u|^2 / 24). Vanishes to O(dy^4) on a
/// discrete critical point.
double scheme_first_integral_residual(const Profile1D& prof, const Potential& p);

/// Max norm of the discrete Euler-Lagrange residual -U'' + W_u(U) over interior nodes.
double euler_lagrange_residual(const Profile1D& prof, const Potential& p);

/// Linear interpolation inside [-L, L]; the end values outside.
Vec2 sample_profile(const Profile1D& prof, double y);

/// Central-difference U' at node k (one-sided at the ends), interpolated linearly elsewhere.
Vec2 sample_derivative(const Profile1D& prof, double y);
Vec2 sample_second_derivative(const Profile1D& prof, double y);

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  double ground_mode_overlap = 0.0;
};

/// The m smallest eigenvalues of -phi'' + W_uu(U) phi with Dirichlet ends,
/// discretized by second differences on the profile grid.
SpectrumReport linearized_spectrum(const Profile1D& prof, const Potential& p, int m = 4);

/// Decay rate k of |U(y) - a_end| ~ K e^{-k |y|} on the given tail, fitted by
/// least squares on nodes with |U - a_end| in [lo, hi].
double tail_decay_rate(const Profile1D& prof, bool right_tail, double lo = 1e-8, double hi = 1e-2);

/// Connection resolved at lattice spacing `spacing` but sampled at
/// spacing / subdivisions: sub-lattice s holds the discrete minimizer on the
/// lattice offset by s * spacing / subdivisions. Its samples reproduce the
/// discrete heteroclinic a grid of spacing `spacing` actually supports, at any
/// shift. sigma is the lattice energy at zero offset.
Profile1D lattice_connection(const Potential& p, int i, int j, double spacing, double L, int subdivisions,
                             const ConnectionOptions& opt = {});

}  // namespace tj
