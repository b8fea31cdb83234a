#include <cmath>
#include <random>

#include "doctest.h"
#include "tj/partition.hpp"

using namespace tj;

namespace {

// Length of the triod inside B_R by fine sampling of each ray.
double brute_length(const TriodGeometry& t, double R) {
  const int steps = 400000;
  const double reach = norm(t.center) + R + 1.0;
  const double ds = reach / steps;
  double len = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < steps; ++s)
      if (norm(t.center + (s + 0.5) * ds * t.ray_direction(k)) <= R) len += ds;
  return len;
}


}  // namespace

TEST_CASE("classify the canonical sectors") {
  const SectorPartition P{};
  CHECK(classify(P, {1.0, 0.1}) == 0);
  CHECK(classify(P, {-1.0, 0.0}) == 1);
  CHECK(classify(P, {0.3, -1.0}) == 2);
  CHECK(classify(P, {5.0, 0.0}) == kOnInterface);
  CHECK(classify(P, {0.0, 0.0}) == kOnInterface);
  CHECK(classify(P, 3.0 * unit_at_angle(kThirdTurn)) == kOnInterface);
}

TEST_CASE("triple junction map and its tie-break") {
  const SectorPartition P{};
  const WellTriple w = WellTriple::equilateral();
  CHECK(triple_junction_map(P, w, {0.0, 1.0}) == w[0]);
  CHECK(triple_junction_map(P, w, {0.0, -1.0}) == w[2]);
  CHECK(triple_junction_map(P, w, {-3.0, 0.0}) == w[1]);
  // Points on a ray go to the sector counterclockwise of it.
  CHECK(triple_junction_map(P, w, {5.0, 0.0}) == w[0]);
  CHECK(triple_junction_map(P, w, 2.0 * unit_at_angle(kThirdTurn)) == w[1]);
  CHECK(triple_junction_map(P, w, 2.0 * unit_at_angle(-kThirdTurn)) == w[2]);
}

TEST_CASE("classify is scale invariant and equivariant under the order-3 rotation") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-10.0, 10.0), L(0.01, 100.0);
  const SectorPartition P{};
  const WellTriple w = WellTriple::equilateral();
  for (int t = 0; t < 1000; ++t) {
    const Vec2 z{U(rng), U(rng)};
    const int c = classify(P, z);
    if (c == kOnInterface) continue;
    REQUIRE(classify(P, L(rng) * z) == c);
    // Rotating z by 2pi/3 moves it to the next sector and the wells rotate with it.
    const Vec2 rz = rotate(z, kThirdTurn);
    REQUIRE(distance(triple_junction_map(P, w, rz), rotate(triple_junction_map(P, w, z), kThirdTurn)) <= 1e-12);
  }
  // Tilted partitions rotate with their frame.
  const SectorPartition T{TriodGeometry{{0.0, 0.0}, 0.4}};
  for (int t = 0; t < 200; ++t) {
    const Vec2 z{U(rng), U(rng)};
    const int c = classify(P, z);
    if (c == kOnInterface) continue;
    REQUIRE(classify(T, rotate(z, 0.4)) == c);
  }
}

TEST_CASE("triod length in a disk") {
  for (double th : {0.0, 0.3, 1.7}) CHECK(triod_length_in_disk({{0.0, 0.0}, th}, 2.5) == doctest::Approx(7.5));
  const TriodGeometry off{{0.6, -0.3}, 0.37};
  const double d = norm(off.center), R = 3.0;
  const double len = triod_length_in_disk(off, R);
  CHECK(len >= 3 * R - 3 * d);
  CHECK(len <= 3 * R + 3 * d);
  CHECK(len == doctest::Approx(brute_length(off, R)).epsilon(1e-4));
  const TriodGeometry far{{10.0, 0.0}, 0.0};
  CHECK(triod_length_in_disk(far, 2.0) == 0.0);
}

TEST_CASE("partition energy") {
  const double sigma = 1.7;
  const TriodGeometry t{};
  CHECK(partition_energy(t, sigma, Region::disk({}, 1.0)) == doctest::Approx(3 * sigma));
  for (double R : {0.5, 2.0, 8.0}) CHECK(partition_energy(t, sigma, Region::disk({}, R)) == doctest::Approx(3 * sigma * R));
  // Upper half-disk: ray 0 lies on the boundary and counts fully, ray 1 is inside, ray 2 outside.
  const Region half = Region::disk({}, 1.0).clipped(HalfPlane{{0.0, 1.0}, 0.0});
  CHECK(partition_energy(t, sigma, half) == doctest::Approx(2 * sigma));
  CHECK(partition_energy(t, sigma, Region::rectangle(-1.0, 2.0, -0.5, 0.5)) == doctest::Approx(sigma * (2.0 + 2.0 * 0.5 / std::sin(kThirdTurn))));
}

TEST_CASE("distances to the triod") {
  const TriodGeometry t{{1.0, 2.0}, 0.0};
  CHECK(distance_to_triod(t, {5.0, 3.0}) == doctest::Approx(1.0));
  CHECK(distance_to_triod(t, {1.0, 2.0}) == doctest::Approx(0.0));
  const RayProjection pr = nearest_ray(t, {5.0, 1.5});
  CHECK(pr.ray == 0);
  CHECK(pr.signed_dist == doctest::Approx(-0.5));
  // The bisector of sector 1 is at distance r sin(pi/3) from the rays.
  CHECK(distance_to_triod(t, t.center + 4.0 * unit_at_angle(std::acos(-1.0))) == doctest::Approx(4.0 * std::sin(kThirdTurn / 2)));
  CHECK(ray_wells(0) == std::array<int, 2>{2, 0});
  CHECK(ray_wells(1) == std::array<int, 2>{0, 1});
  CHECK(ray_wells(2) == std::array<int, 2>{1, 2});
}
