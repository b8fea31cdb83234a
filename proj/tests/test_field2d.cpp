#include <cmath>
#include <random>

#include "doctest.h"
#include "tj/field2d.hpp"

using namespace tj;

namespace {

const Potential& pot() {
  static const Potential p = make_triple_well();
  return p;
}

const std::array<Profile1D, 3>& profiles() {
  static const std::array<Profile1D, 3> pr = [] {
    std::array<Profile1D, 3> out;
    for (int k = 0; k < 3; ++k) {
      const auto w = ray_wells(k);
      out[static_cast<std::size_t>(k)] = solve_connection(pot(), w[0], w[1], 20.0, 2001);
    }
    return out;
  }();
  return pr;
}

JunctionData junction(TriodGeometry t = {}) {
  JunctionData jd;
  jd.triod = t;
  jd.profiles = profiles();
  jd.wells = pot().wells();
  jd.interface_width = pot().interface_width();
  return jd;
}

double tri_area(Vec2 a, Vec2 b, Vec2 c) { return std::abs(cross(b - a, c - a)) / 2.0; }

bool in_hull(const WellTriple& w, Vec2 z) {
  const double whole = tri_area(w[0], w[1], w[2]);
  return tri_area(z, w[1], w[2]) + tri_area(w[0], z, w[2]) + tri_area(w[0], w[1], z) <= whole * (1.0 + 1e-12);
}

// sup_{(x,y), x >= 0} |u(x, y) - reflect(u(x, -y))|
double symmetry_defect(const Field2D& f, const WellTriple& w) {
  double d = 0.0;
  const int n = f.n();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) d = std::max(d, distance(f.at(i, j), reflect_a1_a3(w, f.at(i, n - 1 - j))));
  return d;
}

const GridSpec kSmall{6.0, 61};

}  // namespace

TEST_CASE("grid geometry and validation") {
  const GridSpec g{40.0, 641};
  CHECK(g.spacing() == doctest::Approx(0.125));
  CHECK(g.coord(320) == doctest::Approx(0.0).scale(1e-12));
  CHECK(g.inner_radius() == doctest::Approx(30.0));
  CHECK(g.resolves(pot()));
  CHECK_FALSE((GridSpec{40.0, 161}).resolves(pot()));
  CHECK_THROWS((GridSpec{40.0, 2}).validate());
  CHECK_THROWS((GridSpec{-1.0, 65}).validate());
}

TEST_CASE("boundary data follows the heteroclinic rule") {
  const JunctionData jd = junction();
  const GridSpec g{10.0, 101};
  const auto ring = boundary_data(g, jd);
  CHECK(ring.size() == 4u * 100u);
  const WellTriple& w = pot().wells();
  for (const BoundaryValue& b : ring) {
    const Vec2 z{g.coord(b.i), g.coord(b.j)};
    if (std::abs(z.y) > 4.0) continue;
    if (b.i == 0) CHECK(distance(b.value, w[1]) <= 1e-12);  // inside 5 widths of no ray
    if (b.i == g.n - 1) CHECK(distance(b.value, sample_profile(profiles()[0], z.y)) <= 1e-12);
  }
  // Points on ray 0 take the profile midpoint, deep in a sector the well.
  CHECK(distance(heteroclinic_rule(jd, {8.0, 0.0}), sample_profile(profiles()[0], 0.0)) <= 1e-12);
  CHECK(heteroclinic_rule(jd, {0.0, 30.0}) == w[0]);
  CHECK(heteroclinic_rule(jd, {0.0, -30.0}) == w[2]);

  CHECK_THROWS_AS(boundary_data(g, junction({{4.0, 0.0}, 0.0})), FieldError);
  JunctionData bad = junction();
  std::swap(bad.profiles[0], bad.profiles[1]);
  CHECK_THROWS_AS(boundary_data(g, bad), FieldError);
}

TEST_CASE("competitor: exact slices far out, hull near the center") {
  const JunctionData jd = junction();
  const GridSpec g{40.0, 321};
  const Field2D f = competitor_init(g, jd);
  CHECK(f.boundary_frozen());
  const Slice s = slice(f, 25.0);
  double d0 = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (std::abs(s.y(k)) <= 10.0) d0 = std::max(d0, distance(s.values[k], sample_profile(profiles()[0], s.y(k))));
  CHECK(d0 <= 1e-3);

  const WellTriple& w = pot().wells();
  const int c = (g.n - 1) / 2;
  CHECK(distance(f.at(c, c), (w[0] + w[1] + w[2]) / 3.0) <= 1e-12);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      if (norm(Vec2{g.coord(i), g.coord(j)}) <= 2.0 * jd.interface_width) REQUIRE(in_hull(w, f.at(i, j)));
}

TEST_CASE("competitor energy grows like 3 sigma R") {
  // E - 3 sigma R is O(1) plus a grid error proportional to R h^2 along the rays.
  const JunctionData jd = junction();
  const double sigma = profiles()[0].sigma;
  auto excess = [&](double Lx, double h, std::vector<double> radii) {
    const GridSpec g{Lx, static_cast<int>(std::lround(2 * Lx / h)) + 1};
    const Field2D f = competitor_init(g, jd);
    std::vector<double> out;
    for (double R : radii) out.push_back(energy(f, pot(), Region::disk({}, R)).total - 3 * sigma * R);
    return out;
  };
  const auto coarse = excess(108.0, 0.2, {20.0, 40.0, 80.0});
  const auto fine = excess(54.0, 0.1, {20.0, 40.0});
  for (double e : coarse) CHECK(std::abs(e) <= 3.0);
  for (double e : fine) CHECK(std::abs(e) <= 3.0);
  const double slope_coarse = (coarse[1] - coarse[0]) / 20.0, slope_fine = (fine[1] - fine[0]) / 20.0;
  CHECK((coarse[2] - coarse[1]) / 40.0 == doctest::Approx(slope_coarse).epsilon(0.1));
  CHECK(slope_coarse / slope_fine == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("energy of constant and jump fields") {
  const WellTriple& w = pot().wells();
  const Field2D c(kSmall, w[1]);
  CHECK(energy(c, pot(), Region::rectangle(-6.0, 6.0, -6.0, 6.0)).total == doctest::Approx(0.0).scale(1e-20));
  CHECK(discrete_energy(c, pot()) == doctest::Approx(0.0).scale(1e-20));

  auto jump = [&](int n) {
    const Field2D f = Field2D::from_function({6.0, n}, [&](Vec2 z) { return z.x > 1e-9 ? w[0] : w[2]; });
    return energy(f, pot(), Region::rectangle(-3.0, 3.0, -3.0, 3.0)).dirichlet;
  };
  const double e1 = jump(61), e2 = jump(121), e3 = jump(241);
  CHECK(e2 / e1 > 1.8);
  CHECK(e3 / e2 > 1.8);
}

TEST_CASE("energy breakdown identities") {
  const Field2D f = competitor_init({20.0, 321}, junction());
  const EnergyBreakdown e = energy(f, pot(), Region::disk({}, 10.0));
  CHECK(e.total == doctest::Approx(e.dirichlet + e.potential).epsilon(1e-12));
  CHECK(e.dirichlet == doctest::Approx(e.tangential + e.radial).epsilon(1e-10));
  CHECK(e.horizontal >= 0.0);
  CHECK(e.cells > 0u);
  const double R = 10.0;
  CHECK(rescaled_energy(f, pot(), R, Region::disk({}, 1.0)) == doctest::Approx(e.total / R).epsilon(1e-12));
  const RescaledWeights rw = rescaled_weights(4.0);
  CHECK(rw.gradient == doctest::Approx(0.125));
  CHECK(rw.potential == doctest::Approx(4.0));
}

TEST_CASE("residual is the scaled gradient of the discrete energy") {
  Field2D f = competitor_init(kSmall, junction());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-0.05, 0.05);
  std::uniform_int_distribution<int> I(1, kSmall.n - 2);
  for (int j = 1; j + 1 < kSmall.n; ++j)
    for (int i = 1; i + 1 < kSmall.n; ++i) f.set(i, j, f.at(i, j) + Vec2{U(rng), U(rng)});
  const ResidualField r = residual(f, pot());
  const double h2 = kSmall.spacing() * kSmall.spacing();
  const double eps = 1e-5;
  for (int t = 0; t < 50; ++t) {
    const int i = I(rng), j = I(rng);
    for (int comp = 0; comp < 2; ++comp) {
      Field2D a = f, b = f;
      double& pa = a.data()[2 * a.index(i, j) + static_cast<std::size_t>(comp)];
      double& pb = b.data()[2 * b.index(i, j) + static_cast<std::size_t>(comp)];
      pa += eps;
      pb -= eps;
      const double fd = static_cast<double>(discrete_energy(a, pot()) - discrete_energy(b, pot())) / (2 * eps) / h2;
      const Vec2 g = r.values[f.index(i, j)];
      const double an = comp == 0 ? g.x : g.y;
      REQUIRE(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("relaxation decreases the energy and respects frozen nodes") {
  Field2D f = competitor_init(kSmall, junction());
  f.set(40, 20, Vec2{0.1, 0.2});
  f.set_frozen(40, 20, true);
  RelaxOptions opt;
  opt.tol = 1e-6;
  double last = INFINITY;
  bool monotone = true;
  const double e0 = static_cast<double>(discrete_energy(f, pot()));
  const RelaxResult r = relax(f, pot(), opt, [&](long, double e, double) {
    monotone = monotone && e <= last;
    last = e;
  });
  CHECK(r.status == SolverStatus::Converged);
  CHECK(monotone);
  CHECK(r.energy <= e0);
  CHECK(r.residual <= 1e-6);
  CHECK(residual(r.field, pot()).max_norm == doctest::Approx(r.residual).epsilon(1e-6));
  CHECK(r.field.at(40, 20) == Vec2{0.1, 0.2});
  for (int k = 0; k < kSmall.n; ++k) {
    REQUIRE(r.field.at(k, 0) == f.at(k, 0));
    REQUIRE(r.field.at(0, k) == f.at(0, k));
    REQUIRE(r.field.at(k, kSmall.n - 1) == f.at(k, kSmall.n - 1));
  }
}

TEST_CASE("infinite tolerance returns the initial field") {
  const Field2D f = competitor_init(kSmall, junction());
  RelaxOptions opt;
  opt.tol = INFINITY;
  const RelaxResult r = relax(f, pot(), opt);
  CHECK(r.iterations == 0);
  CHECK(r.status == SolverStatus::Converged);
  CHECK(r.field.data() == f.data());
}

TEST_CASE("unfrozen boundaries and NaN starts are refused") {
  Field2D f = competitor_init(kSmall, junction());
  f.set_frozen(0, 3, false);
  CHECK_THROWS_AS(relax(f, pot(), {}), FieldError);
  Field2D g = competitor_init(kSmall, junction());
  g.set(5, 5, Vec2{NAN, 0.0});
  CHECK_THROWS_AS(relax(g, pot(), {}), FieldError);
}

TEST_CASE("symmetrized relaxation keeps the reflection symmetry") {
  const Field2D f = competitor_init(kSmall, junction());
  const WellTriple& w = pot().wells();
  // Nearest-ray ties on the negative x-axis break the symmetry of the start.
  CHECK(symmetry_defect(f, w) > 1e-3);
  RelaxOptions opt;
  opt.tol = 1e-6;
  opt.symmetrize = true;
  const RelaxResult r = relax(f, pot(), opt);
  CHECK(r.status == SolverStatus::Converged);
  CHECK(symmetry_defect(r.field, w) <= 1e-6);
}

TEST_CASE("a perturbed well relaxes back into its basin") {
  const Vec2 a1 = pot().wells()[0];
  Field2D f(kSmall, a1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-0.1, 0.1);
  for (int j = 1; j + 1 < kSmall.n; ++j)
    for (int i = 1; i + 1 < kSmall.n; ++i) f.set(i, j, a1 + Vec2{U(rng), U(rng)});
  RelaxOptions opt;
  opt.tol = 1e-9;
  const RelaxResult r = relax(f, pot(), opt);
  CHECK(r.status == SolverStatus::Converged);
  double d = 0.0;
  for (int j = 0; j < kSmall.n; ++j)
    for (int i = 0; i < kSmall.n; ++i) d = std::max(d, distance(r.field.at(i, j), a1));
  CHECK(d <= 1e-9);
}

TEST_CASE("slices and interpolation") {
  const Field2D f = Field2D::from_function(kSmall, [](Vec2 z) { return Vec2{2 * z.x + z.y, z.x * z.y}; });
  const Slice s = slice(f, kSmall.coord(45));
  REQUIRE(s.size() == static_cast<std::size_t>(kSmall.n));
  for (std::size_t k = 0; k < s.size(); ++k) REQUIRE(s.values[k] == f.at(45, static_cast<int>(k)));
  const Slice m = slice(f, 1.03);
  for (std::size_t k = 0; k < m.size(); ++k) {
    REQUIRE(distance(m.values[k], Vec2{2.06 + m.y(k), 1.03 * m.y(k)}) <= 1e-12);
    REQUIRE(distance(m.dx[k], Vec2{2.0, m.y(k)}) <= 1e-10);
  }
  CHECK(distance(f.sample({0.33, -1.7}), Vec2{0.66 - 1.7, 0.33 * -1.7}) <= 1e-12);
}

TEST_CASE("prolongation is exact on bilinear fields") {
  auto bil = [](Vec2 z) { return Vec2{1.0 + z.x - 2 * z.y + 0.5 * z.x * z.y, -z.x * z.y}; };
  const Field2D c = Field2D::from_function({4.0, 33}, bil);
  const Field2D fine = prolongate(c);
  CHECK(fine.n() == 65);
  double d = 0.0;
  for (int j = 0; j < fine.n(); ++j)
    for (int i = 0; i < fine.n(); ++i) d = std::max(d, distance(fine.at(i, j), bil({fine.grid().coord(i), fine.grid().coord(j)})));
  CHECK(d <= 1e-12);
}
