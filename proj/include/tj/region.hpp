#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tj/vec2.hpp"

namespace tj {

struct TriodGeometry;

/// Closed half-plane {z : normal . z >= offset}.
struct HalfPlane {
  Vec2 normal;
  double offset = 0.0;
  bool contains(Vec2 z) const { return dot(normal, z) >= offset; }
};

/// Closed subset of the plane built as (disk or whole plane) minus an open
/// inner disk, intersected with finitely many closed half-planes. Covers the
/// disks B_R, annuli B_{2R} \ B_R, rectangles, half-planes, half-disks and the
/// triangles S_R used by the energy diagnostics.
class Region {
 public:
  enum class Kind { Plane, Disk, Annulus, Rectangle, HalfPlane, Triangle, Composite };

  static Region plane();
  static Region disk(Vec2 center, double radius);
  static Region annulus(Vec2 center, double inner, double outer);
  static Region rectangle(double x0, double x1, double y0, double y1);
  static Region half_plane(Vec2 normal, double offset);
  /// Equilateral triangle S_R: vertices (R, +-sqrt(3) R), (-2R, 0) in the
  /// frame of the triod (origin at its center, x-axis along its a1-a3 ray).
  static Region triangle(double R, const TriodGeometry& frame);

  /// Intersection with an extra half-plane.
  Region clipped(HalfPlane h) const;

  /// Image under z -> factor * z.
  Region scaled(double factor) const;

  bool contains(Vec2 z) const;

  /// Bounding box as (xmin, xmax, ymin, ymax); may be infinite.
  std::array<double, 4> bounds() const;

  /// Largest distance from `origin` to a point of the region (infinite when unbounded).
  double max_radius(Vec2 origin = {}) const;

  /// Length of {o + s d : s >= 0} inside the region. Ray pieces lying on the
  /// boundary count fully. Requires a region without an inner hole.
  double clip_ray_length(Vec2 origin, Vec2 direction) const;

  Kind kind() const { return kind_; }
  /// Nominal size parameter (radius, R of S_R, outer radius of an annulus).
  double size() const { return size_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Plane;
  double size_ = 0.0;
  std::optional<Vec2> disk_center_;
  double disk_radius_ = std::numeric_limits<double>::infinity();
  double hole_radius_ = 0.0;
  std::vector<HalfPlane> planes_;
  std::vector<Vec2> vertices_;  // polygon vertices when bounded by half-planes only
};

}  // namespace tj
