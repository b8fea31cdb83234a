#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "tj/field2d.hpp"
#include "tj/hetero1d.hpp"

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

double golden_sigma() {
  std::ifstream in(std::string(TJ_TEST_DATA) + "/golden/sigma.txt");
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return std::stod(line);
  return NAN;
}

Profile1D constant_profile(int well, int n) {
  Profile1D prof;
  prof.halfwidth = 20.0;
  prof.samples.assign(static_cast<std::size_t>(n), pot().wells()[well]);
  prof.left_well = prof.right_well = well;
  return prof;
}

}  // namespace

TEST_CASE("connection energies agree across the three pairs") {
  const Profile1D u12 = solve_connection(pot(), 0, 1, 20.0, 2001);
  const Profile1D u23 = solve_connection(pot(), 1, 2, 20.0, 2001);
  const double s = u31().sigma;
  CHECK(s > 0.0);
  CHECK(std::abs(u12.sigma - s) <= 1e-6 * s);
  CHECK(std::abs(u23.sigma - s) <= 1e-6 * s);
  CHECK(profile_energy(u31(), pot()) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("clamped ends, gauge and interpolation") {
  const Profile1D& u = u31();
  const WellTriple& w = pot().wells();
  CHECK(u.samples.front() == w[2]);
  CHECK(u.samples.back() == w[0]);
  CHECK(sample_profile(u, -u.halfwidth) == w[2]);
  CHECK(sample_profile(u, 10.0 * u.halfwidth) == w[0]);
  const Vec2 mid = sample_profile(u, 0.0);
  CHECK(std::abs(distance(mid, w[2]) - distance(mid, w[0])) <= 1e-8);
  CHECK(euler_lagrange_residual(u, pot()) <= 1e-9);
}

TEST_CASE("sigma matches the golden Richardson value") {
  const Profile1D u4001 = solve_connection(pot(), 2, 0, 20.0, 4001);
  const double rich = u4001.sigma + (u4001.sigma - u31().sigma) / 3.0;
  const double g = golden_sigma();
  REQUIRE(std::isfinite(g));
  CHECK(std::abs(rich - g) <= 1e-10);
}

TEST_CASE("grid convergence is second order") {
  const Profile1D a = solve_connection(pot(), 2, 0, 20.0, 501);
  const Profile1D b = solve_connection(pot(), 2, 0, 20.0, 1001);
  const double r = (b.sigma - a.sigma) / (u31().sigma - b.sigma);
  CHECK(r == doctest::Approx(4.0).epsilon(0.05));
  const double e = equipartition_residual(b, pot()) / equipartition_residual(u31(), pot());
  CHECK(e == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("random clamped perturbations never lower the energy") {
  const Profile1D& u = u31();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.01, 0.01);
  for (int t = 0; t < 100; ++t) {
    Profile1D q = u;
    for (std::size_t k = 1; k + 1 < q.size(); ++k) q.samples[k] += Vec2{U(rng), U(rng)};
    REQUIRE(profile_energy(q, pot()) >= u.sigma - 1e-10);
  }
  Profile1D shifted = u;
  for (std::size_t k = 0; k < u.size(); ++k) shifted.samples[k] = k < 5 ? u.samples.front() : u.samples[k - 5];
  shifted.samples.back() = u.samples.back();
  CHECK(profile_energy(shifted, pot()) >= u.sigma);
}

TEST_CASE("equipartition residual") {
  CHECK(equipartition_residual(constant_profile(0, 401), pot()) == 0.0);
  CHECK(profile_energy(constant_profile(0, 401), pot()) == 0.0);
  Profile1D bump = u31();
  for (std::size_t k = 0; k < bump.size(); ++k) {
    const double y = bump.y(k) - 5.0;
    bump.samples[k] += 0.2 * std::exp(-y * y) * Vec2{0.0, 1.0};
  }
  CHECK(equipartition_residual(bump, pot()) > 0.01);
  // The scheme-corrected first integral vanishes to O(dy^4) on the discrete minimizer.
  CHECK(scheme_first_integral_residual(u31(), pot()) <= 1e-6);
}

TEST_CASE("truncated energy and the 1D lower bound") {
  const Profile1D& u = u31();
  CHECK(truncated_energy(u, pot(), -u.halfwidth, u.halfwidth) == doctest::Approx(u.sigma).epsilon(1e-10));
  CHECK(truncated_energy(u, pot(), 1.0, 1.0) == 0.0);

  const double delta = 0.05;
  const WellTriple& w = pot().wells();
  double sm = 0.0, sp = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double y = u.y(k);
    if (y < 0 && distance(u.samples[k], w[2]) <= delta) sm = y;
    if (y > 0 && sp == 0.0 && distance(u.samples[k], w[0]) <= delta) sp = y;
  }
  REQUIRE(sm < 0.0);
  REQUIRE(sp > 0.0);
  const double C = check_hypotheses(pot(), 4096, 0.01).C_hat;
  CHECK(truncated_energy(u, pot(), sm, sp) >= u.sigma - C * delta * delta);
}

TEST_CASE("reflection equivariance") {
  const Profile1D& u = u31();
  const std::size_t n = u.size();
  long double d2 = 0.0L;
  for (std::size_t k = 0; k < n; ++k) d2 += norm2(reflect_a1_a3(pot().wells(), u.samples[n - 1 - k]) - u.samples[k]);
  CHECK(std::sqrt(static_cast<double>(d2) * u.spacing()) <= 1e-6);
}

TEST_CASE("tail decays at the well rate") {
  const double k = tail_decay_rate(u31(), true);
  CHECK(k >= 0.8 * std::sqrt(pot().c1()));
  CHECK(tail_decay_rate(u31(), false) == doctest::Approx(k).epsilon(1e-3));
}

TEST_CASE("linearized spectrum: simple zero eigenvalue with kernel U'") {
  const SpectrumReport s = linearized_spectrum(u31(), pot(), 4);
  REQUIRE(s.eigenvalues.size() == 4);
  for (std::size_t k = 1; k < 4; ++k) CHECK(s.eigenvalues[k] >= s.eigenvalues[k - 1]);
  CHECK(std::abs(s.eigenvalues[0]) <= 1e-3);
  CHECK(s.ground_mode_overlap >= 0.999);
  CHECK(s.eigenvalues[1] >= 10.0 * std::abs(s.eigenvalues[0]));
  CHECK(s.eigenvalues[1] > 1.0);
}

TEST_CASE("scaling W by 4 scales the spectrum by 4") {
  // W -> 4W with y -> y/2 maps the discrete problem onto itself exactly.
  const Potential p4(WellTriple::equilateral(), 4.0);
  const Profile1D a = solve_connection(pot(), 2, 0, 20.0, 801);
  const Profile1D b = solve_connection(p4, 2, 0, 10.0, 801);
  CHECK(b.sigma == doctest::Approx(2.0 * a.sigma).epsilon(1e-9));
  const SpectrumReport sa = linearized_spectrum(a, pot(), 4), sb = linearized_spectrum(b, p4, 4);
  for (std::size_t k = 1; k < 4; ++k) CHECK(sb.eigenvalues[k] == doctest::Approx(4.0 * sa.eigenvalues[k]).epsilon(1e-6));
  CHECK(std::abs(sb.eigenvalues[0]) <= 1e-3);
}

TEST_CASE("non-convergence carries the last iterate") {
  ConnectionOptions opt;
  opt.max_iter = 2;
  opt.tol = 1e-14;
  try {
    solve_connection(pot(), 2, 0, 20.0, 801, opt);
    FAIL("expected ConnectionError");
  } catch (const ConnectionError& e) {
    CHECK(e.status() == SolverStatus::NonConverged);
    CHECK(e.last_iterate().size() == 801);
    CHECK(e.residual() > 1e-14);
  }
  CHECK_THROWS(solve_connection(pot(), 1, 1, 20.0, 801));
}

TEST_CASE("warm start from a coarser profile") {
  const Profile1D coarse = solve_connection(pot(), 2, 0, 20.0, 401);
  const Profile1D fine = solve_connection(pot(), 2, 0, 20.0, 2001, {}, coarse);
  CHECK(fine.sigma == doctest::Approx(u31().sigma).epsilon(1e-10));
}

TEST_CASE("lattice connection reproduces the lattice minimizer at every offset") {
  const double h = 0.125;
  const Profile1D lat = lattice_connection(pot(), 2, 0, h, 25.0, 4);
  CHECK(lat.size() == static_cast<std::size_t>(2 * 25.0 / h) * 4 + 1);
  const Profile1D direct = solve_connection(pot(), 2, 0, 25.0, static_cast<int>(2 * 25.0 / h) + 1);
  CHECK(lat.sigma == doctest::Approx(direct.sigma).epsilon(1e-10));
  for (std::size_t k = 0; k < direct.size(); ++k) REQUIRE(distance(lat.samples[4 * k], direct.samples[k]) <= 1e-7);
}
