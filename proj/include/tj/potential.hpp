#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

#include "tj/vec2.hpp"

namespace tj {

/// The three phases a_1, a_2, a_3. Indices are 0-based in code: well 0 is a_1.
struct WellTriple {
  std::array<Vec2, 3> a;

  /// Vertices of the equilateral triangle inscribed in the unit circle,
  /// a_1 = (1, 0) and the others obtained by successive 2pi/3 rotations.
  static WellTriple equilateral();

  const Vec2& operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
  double min_separation() const;
  friend bool operator==(const WellTriple&, const WellTriple&) = default;
};

struct PotentialSample {
  double value = 0.0;
  Vec2 grad;
  Sym2 hess;
};

class PotentialError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Triple-well potential W(u) = scale * prod_i |u - a_i|^2.
///
/// Caches the constants the analysis refers to: the two-sided well Hessian
/// bounds c1 <= Hess W(a_i) <= c2, the coercivity radius M beyond which
/// W_u(u).u > 0, and the comparability radius deltaW used for the
/// quadratic-growth estimate near the wells.
class Potential {
 public:
  /// Throws PotentialError on coincident wells or a negative scale. A zero
  /// scale is accepted so that hypothesis checks can report it.
  Potential(WellTriple wells, double scale = 1.0);

  double value(Vec2 u) const;
  Vec2 gradient(Vec2 u) const;
  /// Value and gradient without the Hessian.
  std::pair<double, Vec2> value_gradient(Vec2 u) const;
  Sym2 hessian(Vec2 u) const;
  PotentialSample evaluate(Vec2 u) const;
  /// Coefficients of W(u + a v) - W(u) as a polynomial in a (index = power, [0] = 0).
  std::array<double, 7> line_coefficients(Vec2 u, Vec2 v) const;

  const WellTriple& wells() const { return wells_; }
  double scale() const { return scale_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double outer_radius() const { return outer_radius_; }
  double comparability_radius() const { return comparability_radius_; }

  /// Diffuse-interface length scale 4 / sqrt(c1).
  double interface_width() const;

  /// Index of the nearest well and the distance to it.
  std::pair<int, double> nearest_well(Vec2 u) const;
  double distance_to_wells(Vec2 u) const { return nearest_well(u).second; }

 private:
  WellTriple wells_;
  double scale_;
  double c1_ = 0.0;
  double c2_ = 0.0;
  double outer_radius_ = 2.0;
  double comparability_radius_ = 0.1;
};

/// Default potential: equilateral wells, unit scale.
Potential make_triple_well(WellTriple wells = WellTriple::equilateral(), double scale = 1.0);

struct HypothesisCheck {
  bool passed = true;
  double extreme = 0.0;  // smallest W, or smallest W_u.u, found
  Vec2 witness;          // sample realising `extreme`
  std::string message;
};

struct HypothesisReport {
  HypothesisCheck zeros_only_at_wells;
  HypothesisCheck coercivity;
  /// Quadratic growth constants estimated on circles |u - a_i| = delta:
  /// (1/2) c_hat delta^2 <= W <= (1/2) C_hat delta^2.
  double delta = 0.0;
  double c_hat = 0.0;
  double C_hat = 0.0;
  bool comparability_ok = true;

  bool all_passed() const { return zeros_only_at_wells.passed && coercivity.passed && comparability_ok; }
};

/// Sampling-based verification of the structural hypotheses on W.
/// sample_count >= 1000; delta must be below the comparability radius.
HypothesisReport check_hypotheses(const Potential& p, int sample_count, double delta = 0.01);

}  // namespace tj
