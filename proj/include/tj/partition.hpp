#pragma once

#include <array>

#include "tj/potential.hpp"
#include "tj/region.hpp"
#include "tj/vec2.hpp"

namespace tj {

/// Three rays from `center` with directions theta, theta + 2pi/3, theta - 2pi/3.
/// Ray 0 is the a_1-a_3 interface; ray k is the clockwise edge of sector k.
struct TriodGeometry {
  Vec2 center;
  double theta = 0.0;

  Vec2 ray_direction(int k) const { return unit_at_angle(theta + k * kThirdTurn); }
  /// Counterclockwise unit normal of ray k; points into sector k.
  Vec2 ray_normal(int k) const { return perp(ray_direction(k)); }
};

/// Sector partition D_1, D_2, D_3 around a triod: sector k spans the angles
/// (theta + 2 pi k / 3, theta + 2 pi (k + 1) / 3) seen from the center.
struct SectorPartition {
  TriodGeometry frame;
};

inline constexpr int kOnInterface = -1;

/// Sector index of z, or kOnInterface on a ray (1e-12 angular tolerance) or at the center.
int classify(const SectorPartition& part, Vec2 z);

/// Sector index with the tie-break used for u_P: points on ray k belong to
/// sector k (the sector counterclockwise of the ray); the center belongs to sector 0.
int sector_of(const SectorPartition& part, Vec2 z);

/// u_P(z) = a_i for z in D_i.
Vec2 triple_junction_map(const SectorPartition& part, const WellTriple& wells, Vec2 z);

struct RayProjection {
  int ray = 0;
  double along = 0.0;    // coordinate along the ray (may be negative)
  double signed_dist = 0.0;  // positive on the counterclockwise side
  double dist = 0.0;     // Euclidean distance to the half-line
};

/// Projection of z onto ray k of the triod.
RayProjection project_on_ray(const TriodGeometry& t, int k, Vec2 z);
/// Ray nearest to z as a half-line.
RayProjection nearest_ray(const TriodGeometry& t, Vec2 z);
double distance_to_triod(const TriodGeometry& t, Vec2 z);

/// H^1 measure of the triod inside B_R(origin).
double triod_length_in_disk(const TriodGeometry& t, double R);
/// H^1 measure of the triod inside a convex region.
double triod_length_in(const TriodGeometry& t, const Region& K);

/// sigma times the interface length inside K: the partition energy E_0 of a
/// sector partition, whose interfaces are exactly the triod.
double partition_energy(const TriodGeometry& t, double sigma, const Region& K);

/// Wells adjacent to ray k as (clockwise side, counterclockwise side):
/// ray 0 -> (a_3, a_1), ray 1 -> (a_1, a_2), ray 2 -> (a_2, a_3).
std::array<int, 2> ray_wells(int k);

}  // namespace tj
