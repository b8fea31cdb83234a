#pragma once

// Finite-scale measurements on a relaxed triple-junction field: energy growth
// on disks and triangles, equipartition, Hamiltonian slice integrals,
// localization of the diffuse interface, slice distances to the heteroclinic
// family, decay fits and the variational maximum principle.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tj/field2d.hpp"
#include "tj/hetero1d.hpp"
#include "tj/partition.hpp"
#include "tj/potential.hpp"
#include "tj/region.hpp"

namespace tj {

class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Energy growth

struct ShapeSpec {
  enum class Kind { Disk, Triangle };
  Kind kind = Kind::Disk;
  double R = 0.0;
};

struct EnergyGrowthRow {
  std::string shape;  // "disk" or "triangle"
  double R = 0.0;
  double energy = 0.0;
  double excess = 0.0;  // energy - 3 sigma R
};

/// Disks B_R about the origin; triangles S_R in the frame of `frame`. Every
/// shape must fit in the inner disk |z| <= 3Lx/4.
std::vector<EnergyGrowthRow> energy_growth(const Field2D& f, const Potential& p, const std::vector<ShapeSpec>& shapes,
                                           double sigma, const TriodGeometry& frame);

// ---------------------------------------------------------------------------
// Equipartition and global deformation

struct EquipartitionRow {
  double R = 0.0;
  double potential_over_R = 0.0;    // int_{B_R} W / R
  double gradient_over_2R = 0.0;    // int_{B_R} |grad u|^2 / (2R)
  double tangential_over_2R = 0.0;  // int_{B_R} |d_T u|^2 / (2R)
  /// Over the annulus B_2R \ B_R; NaN when 2R leaves the inner region.
  double annulus_radial_over_R = 0.0;    // int |d_r u|^2 / R
  double annulus_radial_fraction = 0.0;  // int |d_r u|^2 / int |grad u|^2
  double annulus_defect_over_R = 0.0;    // int |W - 1/2 |grad u|^2| / R
};

std::vector<EquipartitionRow> equipartition_report(const Field2D& f, const Potential& p,
                                                   const std::vector<double>& radii);

struct StripRow {
  double R = 0.0;
  double energy = 0.0;  // E over {0 < x < R, |y| <= 3Lx/4}
  double excess = 0.0;  // energy - sigma R
};

struct DeformationReport {
  double radial_total = 0.0;  // int |d_r u|^2 over the inner disk
  /// int |d_t u|^2 over the inner disk on the far side of the line through
  /// the frame's center normal to ray 0, t the ray-0 direction.
  double horizontal_total = 0.0;
  double horizontal_origin = 0.0;  // same with x > 0 and d_x, about the origin
  std::vector<StripRow> strips;
};

DeformationReport global_deformation(const Field2D& f, const Potential& p, const std::vector<double>& strip_radii,
                                     double sigma, const TriodGeometry& frame = {});

/// int |d_t u|^2 over the inner disk intersected with {(z - frame.center) . t > 0},
/// t = frame.ray_direction(0). Cells cut by the line count with their area fraction.
double horizontal_energy(const Field2D& f, const TriodGeometry& frame);

// ---------------------------------------------------------------------------
// Slice integrals

/// Integrals of a vertical slice on its own y nodes. J and the |d_y u|^2 part
/// of G use differences between neighbouring nodes (the scheme the 1D
/// connection minimizes), W and the d_x u terms the trapezoid rule.
struct SliceIntegrals {
  double J = 0.0;  // int 1/2 |d_y u|^2 + W
  double G = 0.0;  // int 1/2 (|d_y u|^2 - |d_x u|^2) + W
  double H = 0.0;  // int d_x u . d_y u
  double dx_norm2 = 0.0;  // int |d_x u|^2
};

SliceIntegrals slice_integrals(const Slice& s, const Potential& p);

struct HamiltonianRow {
  double x = 0.0;
  double G = 0.0;
  double H = 0.0;
  double G_rel_dev = 0.0;  // G / sigma - 1
  double H_rel = 0.0;      // H / sigma
};

std::vector<HamiltonianRow> hamiltonian_profile(const Field2D& f, const Potential& p, const std::vector<double>& xs,
                                                double sigma);

// ---------------------------------------------------------------------------
// Localization

struct WidthRow {
  double x = 0.0;
  double width = 0.0;  // vertical extent of Gamma_delta near the a1-a3 ray, plus one cell
  int count = 0;
};

struct ThetaRow {
  double R = 0.0;
  double theta = 0.0;
  Vec2 center;
  int count = 0;
};

struct LocalizationReport {
  double delta = 0.0;
  TriodGeometry triod;
  double max_dist = 0.0;  // over Gamma_delta nodes in the inner region
  std::size_t count = 0;
  std::vector<WidthRow> width_by_x;
  std::vector<ThetaRow> theta_by_R;
};

/// Least-squares triod through a point cloud: coarse theta scan over one
/// period 2pi/3 and golden-section refinement, with the center solved in
/// closed form for each theta from the nearest-ray assignment.
TriodGeometry fit_triod(const std::vector<Vec2>& points, std::optional<Vec2> initial_center = std::nullopt);

/// Gamma_delta = {min_i |u - a_i| >= delta} restricted to the inner region.
/// delta must lie in (0, (min well separation) / 2); throws when Gamma_delta
/// is empty. The fitted triod is labelled so that ray 0 separates a_3
/// (clockwise side) from a_1.
LocalizationReport interface_report(const Field2D& f, const Potential& p, double delta,
                                    const std::vector<double>& radii = {});

// ---------------------------------------------------------------------------
// Slices against the heteroclinic family

struct SliceRow {
  double x = 0.0;
  double J = 0.0;
  double d0 = 0.0;
  double h = 0.0;
  double orth_residual = 0.0;
  bool orth_certified = false;  // |orth_residual| <= 1e-6 ||U'||
  double G = 0.0;
  double H = 0.0;
  double sup_dev = 0.0;       // sup_y |u - U(y - h)|
  double sup_dev_grad = 0.0;  // sup_y |d_y u - U'(y - h)|
  double h1_dist = 0.0;       // H^1 distance at the L^2-optimal shift
  bool in_bad_set = false;    // h1_dist >= eps
  bool bracket_hit = false;   // shift search ended at the bracket
  bool shift_optimal = true;  // d0 does not decrease at h +- dy
};

struct SliceSummary {
  double badset_measure = 0.0;
  double h_total_variation = 0.0;
  double h_limit = 0.0;
  /// min (J - sigma_ref) / d0^2 over rows outside the bad set with d0 > 0.
  double alpha_hat = 0.0;
  double sigma_ref = 0.0;
  /// sum over xs-cells of (J - sigma_ref), the slice-energy excess.
  double excess_total = 0.0;
};

struct SliceReport {
  std::vector<SliceRow> rows;
  SliceSummary summary;
};

/// Optimal L^2 shift of a sampled slice against the reference profile.
struct ShiftFit {
  double h = 0.0;
  double d0 = 0.0;
  double orth_residual = 0.0;
  bool bracket_hit = false;
};

/// Coarse scan over [-bracket, bracket], golden section, then Newton polish on
/// the orthogonality residual.
ShiftFit optimal_shift(const Slice& s, const Profile1D& ref, double bracket);

/// `ref` is the gauge-fixed U_31, ideally resolved on the field's lattice
/// (lattice_connection); sigma_ref its energy on that lattice.
SliceReport slice_analysis(const Field2D& f, const Potential& p, const Profile1D& ref, const std::vector<double>& xs,
                           double eps, double sigma_ref);

struct HPrimeCheck {
  double x = 0.0;
  double dx = 0.0;
  double fd = 0.0;
  double formula = 0.0;
  double abs_diff = 0.0;
  double denominator = 0.0;
  bool denominator_ok = true;  // denominator >= 1/2 ||U'||^2
};

/// h'(x) by central differences of the optimal shift against
/// -int d_x u . U'(y - h) dy / int (|U'|^2 - U''(y - h) . (u - U(y - h))) dy.
HPrimeCheck h_prime_check(const Field2D& f, const Profile1D& ref, double x, double dx);

// ---------------------------------------------------------------------------
// Decay and maximum principle

struct RaySpec {
  Vec2 origin;
  double angle = 0.0;
};

struct DecayFit {
  double K = 0.0;
  double k = 0.0;
  double k_stderr = 0.0;
  double rms_log_residual = 0.0;
  int count = 0;
  RaySpec ray;
  double lo = 1e-6;
  double hi = 0.0;
};

/// Fit of log min_i |u - a_i| = log K - k dist(z, triod) on the grid nodes
/// within one cell of the ray inside the inner region, using values in
/// [lo, hi]. Throws when fewer than 20 nodes qualify.
DecayFit decay_fit(const Field2D& f, const Potential& p, const TriodGeometry& triod, const RaySpec& ray,
                   double lo = 1e-6, double hi = 0.1);

struct MaxPrincipleResult {
  bool hypothesis_met = false;
  bool holds = false;
  double max_boundary_deviation = 0.0;
  double max_interior_deviation = 0.0;
};

/// On the grid nodes inside `rect`: if |u - a_i| <= r on its boundary nodes
/// (those with a 4-neighbour outside), checks |u - a_i| <= r at the others.
MaxPrincipleResult max_principle_check(const Field2D& f, const WellTriple& wells, const Region& rect, int i,
                                       double r);

/// min_i |u - a_i|.
double well_distance(const WellTriple& wells, Vec2 u);

}  // namespace tj
