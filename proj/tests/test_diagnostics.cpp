#include <cmath>
#include <random>

#include "doctest.h"
#include "tj/diagnostics.hpp"

using namespace tj;

namespace {

const Potential& pot() {
  static const Potential p = make_triple_well();
  return p;
}

const Profile1D& u31() {
  static const Profile1D prof = solve_connection(pot(), 2, 0, 20.0, 2001);
  return prof;
}

JunctionData junction() {
  JunctionData jd;
  for (int k = 0; k < 3; ++k) {
    const auto w = ray_wells(k);
    jd.profiles[static_cast<std::size_t>(k)] = solve_connection(pot(), w[0], w[1], 20.0, 2001);
  }
  jd.wells = pot().wells();
  jd.interface_width = pot().interface_width();
  return jd;
}

const JunctionData& jdata() {
  static const JunctionData jd = junction();
  return jd;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kThirdTurn);
  return std::min(d, kThirdTurn - d);
}

}  // namespace

TEST_CASE("constant field: zero energy everywhere") {
  const Field2D f(GridSpec{12.0, 97}, pot().wells()[0]);
  const auto g = energy_growth(f, pot(), {{ShapeSpec::Kind::Disk, 4.0}, {ShapeSpec::Kind::Triangle, 2.0}}, 1.8, {});
  REQUIRE(g.size() == 2);
  CHECK(g[0].energy == 0.0);
  CHECK(g[1].energy == 0.0);
  CHECK(g[0].excess == doctest::Approx(-3 * 1.8 * 4.0));
  const auto eq = equipartition_report(f, pot(), {3.0});
  REQUIRE(eq.size() == 1);
  CHECK(eq[0].potential_over_R == 0.0);
  CHECK(eq[0].gradient_over_2R == 0.0);
  CHECK(energy_growth(f, pot(), {}, 1.8, {}).empty());
  CHECK(equipartition_report(f, pot(), {}).empty());
  CHECK_THROWS_AS(energy_growth(f, pot(), {{ShapeSpec::Kind::Disk, 10.0}}, 1.8, {}), DiagnosticError);
  CHECK_THROWS_AS(interface_report(f, pot(), 0.3), DiagnosticError);
}

TEST_CASE("growth rows are the plain disk energies") {
  const Field2D f = competitor_init({20.0, 161}, jdata());
  const auto g = energy_growth(f, pot(), {{ShapeSpec::Kind::Disk, 5.0}, {ShapeSpec::Kind::Disk, 12.0}}, u31().sigma, {});
  CHECK(g[0].energy == energy(f, pot(), Region::disk({}, 5.0)).total);
  CHECK(g[1].energy == energy(f, pot(), Region::disk({}, 12.0)).total);
  CHECK(g[1].excess == g[1].energy - 3 * u31().sigma * 12.0);
}

TEST_CASE("the competitor's gradient is tangential away from the center") {
  const Field2D f = competitor_init({40.0, 321}, jdata());
  const auto eq = equipartition_report(f, pot(), {10.0});
  REQUIRE(eq.size() == 1);
  CHECK(eq[0].tangential_over_2R == doctest::Approx(eq[0].gradient_over_2R).epsilon(0.05));
  CHECK(eq[0].annulus_radial_fraction <= 0.02);
  const auto far = equipartition_report(f, pot(), {20.0});
  CHECK(std::isnan(far[0].annulus_radial_fraction));
}

TEST_CASE("exact heteroclinic field: flat slices with G = J = sigma and H = 0") {
  const double h = 0.25;
  const Profile1D ref = lattice_connection(pot(), 2, 0, h, 25.0, 8);
  const GridSpec g{12.0, 97};
  const Field2D f = Field2D::from_function(g, [&](Vec2 z) { return sample_profile(ref, z.y); });
  const SliceIntegrals si = slice_integrals(slice(f, 3.0), pot());
  CHECK(si.J == doctest::Approx(ref.sigma).epsilon(1e-8));
  CHECK(si.G == doctest::Approx(ref.sigma).epsilon(1e-8));
  CHECK(std::abs(si.H) <= 1e-14);
  CHECK(si.dx_norm2 <= 1e-20);

  const SliceReport rep = slice_analysis(f, pot(), ref, {2.0, 4.0, 6.0}, 0.1, ref.sigma);
  for (const SliceRow& r : rep.rows) {
    CHECK(std::abs(r.h) <= 1e-6);
    CHECK(r.d0 <= 1e-6);
    CHECK_FALSE(r.in_bad_set);
    CHECK_FALSE(r.bracket_hit);
  }
  CHECK(rep.summary.badset_measure == 0.0);
  CHECK(rep.summary.h_total_variation <= 1e-6);

  const auto ham = hamiltonian_profile(f, pot(), {2.0, 5.0}, ref.sigma);
  for (const auto& r : ham) {
    CHECK(std::abs(r.G_rel_dev) <= 1e-8);
    CHECK(std::abs(r.H_rel) <= 1e-12);
  }
}

TEST_CASE("optimal shift recovers a translation") {
  const Field2D f = Field2D::from_function({12.0, 193}, [&](Vec2 z) { return sample_profile(u31(), z.y - 0.7); });
  const ShiftFit s = optimal_shift(slice(f, 1.0), u31(), 4.0);
  CHECK(s.h == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(s.d0 <= 1e-3);
  CHECK_FALSE(s.bracket_hit);
  const ShiftFit edge = optimal_shift(slice(f, 1.0), u31(), 0.2);
  CHECK(edge.bracket_hit);
}

TEST_CASE("h' of a tilted heteroclinic") {
  const Field2D f = Field2D::from_function({12.0, 193}, [&](Vec2 z) { return sample_profile(u31(), z.y - 0.01 * z.x); });
  const HPrimeCheck c = h_prime_check(f, u31(), 2.0, 0.25);
  CHECK(c.fd == doctest::Approx(0.01).epsilon(1e-2));
  CHECK(c.formula == doctest::Approx(0.01).epsilon(1e-2));
  CHECK(c.denominator_ok);
}

TEST_CASE("triod fit: exact on triod samples and idempotent") {
  const TriodGeometry t{{0.3, -0.2}, 0.25};
  std::vector<Vec2> pts;
  for (int k = 0; k < 3; ++k)
    for (int s = 1; s <= 60; ++s) pts.push_back(t.center + 0.1 * s * t.ray_direction(k));
  const TriodGeometry fit = fit_triod(pts);
  CHECK(distance(fit.center, t.center) <= 1e-6);
  CHECK(angle_gap(fit.theta, t.theta) <= 1e-6);
  const TriodGeometry again = fit_triod(pts, fit.center);
  CHECK(distance(again.center, fit.center) <= 1e-9);
  CHECK(angle_gap(again.theta, fit.theta) <= 1e-9);
}

TEST_CASE("interface of the competitor sits on its triod") {
  const Field2D f = competitor_init({20.0, 161}, jdata());
  const LocalizationReport r = interface_report(f, pot(), 0.3, {6.0, 10.0});
  CHECK(norm(r.triod.center) <= 0.2);
  CHECK(std::abs(wrap_angle(r.triod.theta)) <= 0.02);
  CHECK(r.max_dist <= pot().interface_width());
  CHECK(r.count > 0u);
  CHECK(r.theta_by_R.size() == 2);
  CHECK_THROWS_AS(interface_report(f, pot(), 0.9), DiagnosticError);
  CHECK_THROWS_AS(interface_report(f, pot(), 0.0), DiagnosticError);
}

TEST_CASE("decay fit recovers an exact exponential") {
  const TriodGeometry t{};
  const SectorPartition P{t};
  const WellTriple& w = pot().wells();
  const Field2D f = Field2D::from_function({12.0, 193}, [&](Vec2 z) {
    return w[sector_of(P, z)] + 0.5 * std::exp(-4.0 * distance_to_triod(t, z)) * Vec2{0.0, 1.0};
  });
  const DecayFit d = decay_fit(f, pot(), t, {{0.0, 0.0}, kThirdTurn / 2}, 1e-6, 0.1);
  CHECK(d.k == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(d.K == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(d.rms_log_residual <= 1e-6);
  CHECK(d.count >= 20);
  CHECK_THROWS_AS(decay_fit(f, pot(), t, {{0.0, 0.0}, kThirdTurn / 2}, 1e-6, 1e-5), DiagnosticError);
}

TEST_CASE("variational maximum principle check") {
  const GridSpec g{6.0, 61};
  const Vec2 a1 = pot().wells()[0];
  const Region rect = Region::rectangle(-2.0, 2.0, -2.0, 2.0);
  const Field2D flat(g, a1);
  const MaxPrincipleResult ok = max_principle_check(flat, pot().wells(), rect, 0, 0.1);
  CHECK(ok.hypothesis_met);
  CHECK(ok.holds);
  const Field2D bump = Field2D::from_function(g, [&](Vec2 z) { return a1 + 0.3 * std::exp(-norm2(z)) * Vec2{1.0, 0.0}; });
  const MaxPrincipleResult b = max_principle_check(bump, pot().wells(), rect, 0, 0.1);
  CHECK(b.hypothesis_met);
  CHECK_FALSE(b.holds);
  CHECK(b.max_interior_deviation == doctest::Approx(0.3).epsilon(1e-9));
  const MaxPrincipleResult off = max_principle_check(bump, pot().wells(), Region::rectangle(-0.5, 0.5, -0.5, 0.5), 0, 0.1);
  CHECK_FALSE(off.hypothesis_met);
  CHECK(well_distance(pot().wells(), a1 + Vec2{0.0, 0.02}) == doctest::Approx(0.02));
}

TEST_CASE("horizontal energy with a fractional cut") {
  const GridSpec g{8.0, 129};
  const double r = g.inner_radius(), d = 0.05;
  const double area = r * r * std::acos(d / r) - d * std::sqrt(r * r - d * d);
  const Field2D fx = Field2D::from_function(g, [](Vec2 z) { return Vec2{0.1 * z.x, 0.0}; });
  CHECK(horizontal_energy(fx, {{d, 0.0}, 0.0}) == doctest::Approx(0.01 * area).epsilon(1e-2));
  // A cut inside a column of cells takes its area fraction, not the whole column.
  const double step = horizontal_energy(fx, {{0.0, 0.0}, 0.0}) - horizontal_energy(fx, {{0.5 * g.spacing(), 0.0}, 0.0});
  CHECK(step == doctest::Approx(0.01 * 0.5 * g.spacing() * 2 * r).epsilon(0.02));
  const Field2D fy = Field2D::from_function(g, [](Vec2 z) { return Vec2{0.0, 0.1 * z.y}; });
  CHECK(horizontal_energy(fy, {{0.0, d}, 0.5 * std::acos(-1.0)}) == doctest::Approx(0.01 * area).epsilon(1e-2));
  const Field2D f = competitor_init({20.0, 161}, jdata());
  const DeformationReport rep = global_deformation(f, pot(), {}, u31().sigma);
  CHECK(rep.horizontal_total == doctest::Approx(rep.horizontal_origin).epsilon(1e-12));
}
