#include "tj/partition.hpp"

#include <cmath>
#include <limits>

namespace tj {

namespace {

constexpr double kAngularTol = 1e-12;

// Angle of z - center measured from ray 0, in [0, 2pi).
double relative_angle(const TriodGeometry& t, Vec2 z) {
  const Vec2 v = z - t.center;
  return wrap_angle(std::atan2(v.y, v.x) - t.theta);
}

}  // namespace

int classify(const SectorPartition& part, Vec2 z) {
  const Vec2 v = z - part.frame.center;
  if (v.x == 0.0 && v.y == 0.0) return kOnInterface;
  const double a = relative_angle(part.frame, z);
  for (int k = 0; k < 3; ++k) {
    const double edge = k * kThirdTurn;
    if (std::abs(a - edge) <= kAngularTol) return kOnInterface;
  }
  if (kTwoPi - a <= kAngularTol) return kOnInterface;
  return static_cast<int>(a / kThirdTurn);
}

int sector_of(const SectorPartition& part, Vec2 z) {
  const Vec2 v = z - part.frame.center;
  if (v.x == 0.0 && v.y == 0.0) return 0;
  double a = relative_angle(part.frame, z);
  // Snap angles within tolerance of a ray onto the ray so the ray joins the
  // sector counterclockwise of it.
  for (int k = 0; k <= 3; ++k) {
    if (std::abs(a - k * kThirdTurn) <= kAngularTol) a = (k % 3) * kThirdTurn;
  }
  const int s = static_cast<int>(a / kThirdTurn);
  return s > 2 ? 2 : s;
}

Vec2 triple_junction_map(const SectorPartition& part, const WellTriple& wells, Vec2 z) {
  return wells[sector_of(part, z)];
}

RayProjection project_on_ray(const TriodGeometry& t, int k, Vec2 z) {
  const Vec2 v = z - t.center;
  const Vec2 d = t.ray_direction(k);
  RayProjection r;
  r.ray = k;
  r.along = dot(v, d);
  r.signed_dist = dot(v, perp(d));
  r.dist = r.along >= 0.0 ? std::abs(r.signed_dist) : norm(v);
  return r;
}

RayProjection nearest_ray(const TriodGeometry& t, Vec2 z) {
  RayProjection best = project_on_ray(t, 0, z);
  for (int k = 1; k < 3; ++k) {
    const RayProjection r = project_on_ray(t, k, z);
    if (r.dist < best.dist) best = r;
  }
  return best;
}

double distance_to_triod(const TriodGeometry& t, Vec2 z) { return nearest_ray(t, z).dist; }

double triod_length_in_disk(const TriodGeometry& t, double R) {
  return triod_length_in(t, Region::disk({0.0, 0.0}, R));
}

double triod_length_in(const TriodGeometry& t, const Region& K) {
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += K.clip_ray_length(t.center, t.ray_direction(k));
  return total;
}

double partition_energy(const TriodGeometry& t, double sigma, const Region& K) {
  return sigma * triod_length_in(t, K);
}

std::array<int, 2> ray_wells(int k) {
  switch (k) {
    case 0:
      return {2, 0};
    case 1:
      return {0, 1};
    default:
      return {1, 2};
  }
}

}  // namespace tj
