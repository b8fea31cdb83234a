#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tj/hetero1d.hpp"
#include "tj/ncg.hpp"
#include "tj/partition.hpp"
#include "tj/potential.hpp"
#include "tj/region.hpp"

namespace tj {

/// Square grid on [-Lx, Lx]^2 with n nodes per side.
struct GridSpec {
  double halfwidth = 40.0;
  int n = 641;

  double spacing() const { return 2.0 * halfwidth / (n - 1); }
  double coord(int i) const { return -halfwidth + i * spacing(); }
  /// Spacing at most a quarter of the interface width 4 / sqrt(c1).
  bool resolves(const Potential& p) const { return spacing() <= p.interface_width() / 4.0 * (1.0 + 1e-12); }
  /// Radius of the inner disk |z| <= 3Lx/4 that diagnostics are restricted to.
  double inner_radius() const { return 0.75 * halfwidth; }
  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// u sampled on a GridSpec. Node (i, j) sits at (x_i, y_j); storage is
/// row-major in j with both components interleaved.
class Field2D {
 public:
  Field2D() = default;
  /// Constant field with the boundary ring frozen.
  Field2D(GridSpec grid, Vec2 value);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.n) + i; }

  Vec2 at(int i, int j) const {
    const std::size_t k = 2 * index(i, j);
    return {data_[k], data_[k + 1]};
  }
  void set(int i, int j, Vec2 v) {
    const std::size_t k = 2 * index(i, j);
    data_[k] = v.x;
    data_[k + 1] = v.y;
  }
  bool frozen(int i, int j) const { return frozen_[index(i, j)] != 0; }
  void set_frozen(int i, int j, bool f) { frozen_[index(i, j)] = f ? 1 : 0; }
  /// True when every node of the outer ring is frozen.
  bool boundary_frozen() const;
  bool all_finite() const;

  /// Bilinear interpolation; z must lie in the domain.
  Vec2 sample(Vec2 z) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<std::uint8_t>& mask() { return frozen_; }
  const std::vector<std::uint8_t>& mask() const { return frozen_; }

  /// Field with values f(z) at every node, boundary ring frozen.
  static Field2D from_function(GridSpec grid, const std::function<Vec2(Vec2)>& f);

 private:
  GridSpec grid_;
  std::vector<double> data_;
  std::vector<std::uint8_t> frozen_;
};

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Triod, heteroclinic profiles and wells that define boundary data and the
/// competitor. profiles[k] belongs to ray k and must run from the clockwise
/// well to the counterclockwise well of that ray (U_31, U_12, U_23).
struct JunctionData {
  TriodGeometry triod;
  std::array<Profile1D, 3> profiles;
  WellTriple wells;
  double interface_width = 1.0;
};

/// U_ij(signed distance to the nearest ray), or the sector's well once the
/// nearest-ray distance exceeds 5 interface widths.
Vec2 heteroclinic_rule(const JunctionData& jd, Vec2 z);

struct BoundaryValue {
  int i = 0;
  int j = 0;
  Vec2 value;
};

/// Values on the boundary ring by the heteroclinic rule. Throws FieldError for
/// triods outside the middle third or within 2 interface widths of the boundary.
std::vector<BoundaryValue> boundary_data(const GridSpec& grid, const JunctionData& jd);

/// Nearest-ray heteroclinic field in the interior; within 2 interface widths of
/// the center it is blended with an angular partition of unity over the three
/// ray rules and pulled toward the wells' centroid at the center itself.
Field2D competitor_init(const GridSpec& grid, const JunctionData& jd);

/// Energy split over the grid cells whose centers lie in a region. Derivatives
/// are central differences at cell centers, W is evaluated at the cell-center
/// average. dirichlet, tangential and radial carry the factor 1/2 (so
/// dirichlet = tangential + radial); horizontal is int |d_x u|^2 without it.
struct EnergyBreakdown {
  double total = 0.0;
  double dirichlet = 0.0;
  double potential = 0.0;
  double tangential = 0.0;
  double radial = 0.0;
  double horizontal = 0.0;
  /// int |W - 1/2 |grad u|^2|
  double equipartition_defect = 0.0;
  std::size_t cells = 0;
};

EnergyBreakdown energy(const Field2D& f, const Potential& p, const Region& region, Vec2 polar_origin = {});

/// Gradient and potential weights of E_R(v, .) = int (1/(2R)|grad v|^2 + R W(v)).
struct RescaledWeights {
  double gradient;
  double potential;
};
RescaledWeights rescaled_weights(double R);

/// E_R(v, region) for v(z) = u(Rz), region given in rescaled coordinates.
double rescaled_energy(const Field2D& f, const Potential& p, double R, const Region& region);

/// Discrete relaxation energy sum_edges 1/2|u_a - u_b|^2 + h^2 sum_nodes W(u),
/// whose gradient is h^2 (-Delta_h u + W_u(u)).
long double discrete_energy(const Field2D& f, const Potential& p);

struct ResidualField {
  double max_norm = 0.0;
  std::vector<Vec2> values;  // 0 on frozen nodes
};
/// -(5-point Laplacian) + W_u at interior non-frozen nodes.
ResidualField residual(const Field2D& f, const Potential& p);

struct RelaxOptions {
  double tol = 1e-8;  // max norm of -Delta_h u + W_u over free nodes
  long max_iter = 200000;
  int restart_period = 50;
  /// Keep the field invariant under (x, y) -> (x, -y) combined with the
  /// u-plane reflection exchanging a_1 and a_3.
  bool symmetrize = false;
};

struct RelaxResult {
  Field2D field;
  long iterations = 0;
  double residual = 0.0;
  double energy = 0.0;
  SolverStatus status = SolverStatus::NonConverged;
};

/// Observer receives (iteration, discrete energy, residual) after each accepted step.
RelaxResult relax(Field2D f, const Potential& p, const RelaxOptions& opt, const NcgObserver& observer = {});

/// Nested iteration: relax the competitor on successively refined grids
/// (n_l = (n - 1) / 2^l + 1), prolongating bilinearly and re-imposing the
/// boundary data at each level. levels = 1 is a plain relax.
RelaxResult relax_nested(const GridSpec& grid, const JunctionData& jd, const Potential& p, const RelaxOptions& opt,
                         int levels, const NcgObserver& observer = {});

/// Bilinear prolongation from a grid to the grid with twice as many cells.
Field2D prolongate(const Field2D& coarse);

/// Vertical section u(x, .) at the grid's y nodes, with d_x u alongside.
struct Slice {
  double x = 0.0;
  double halfwidth = 0.0;
  std::vector<Vec2> values;
  std::vector<Vec2> dx;

  std::size_t size() const { return values.size(); }
  double spacing() const { return 2.0 * halfwidth / static_cast<double>(values.size() - 1); }
  double y(std::size_t k) const { return -halfwidth + static_cast<double>(k) * spacing(); }
};

/// Linear interpolation in x between the two neighbouring columns; exact at a column.
Slice slice(const Field2D& f, double x);

/// The reflection of the u-plane exchanging a_1 and a_3 (fixing the line
/// through a_2 and the midpoint of a_1 a_3).
Vec2 reflect_a1_a3(const WellTriple& wells, Vec2 u);

}  // namespace tj
