#include <cmath>
#include <random>

#include "doctest.h"
#include "tj/potential.hpp"

using namespace tj;

namespace {

// Central differences of the value only, independent of the closed forms.
Vec2 fd_gradient(const Potential& p, Vec2 u, double h) {
  return {(p.value({u.x + h, u.y}) - p.value({u.x - h, u.y})) / (2 * h),
          (p.value({u.x, u.y + h}) - p.value({u.x, u.y - h})) / (2 * h)};
}

Sym2 fd_hessian(const Potential& p, Vec2 u, double h) {
  auto W = [&](double dx, double dy) { return p.value({u.x + dx, u.y + dy}); };
  Sym2 H;
  H.xx = (W(h, 0) - 2 * W(0, 0) + W(-h, 0)) / (h * h);
  H.yy = (W(0, h) - 2 * W(0, 0) + W(0, -h)) / (h * h);
  H.xy = (W(h, h) - W(h, -h) - W(-h, h) + W(-h, -h)) / (4 * h * h);
  return H;
}


}  // namespace

TEST_CASE("default wells are zeros and the origin has unit value") {
  const Potential p = make_triple_well();
  for (int i = 0; i < 3; ++i) {
    const PotentialSample s = p.evaluate(p.wells()[i]);
    CHECK(std::abs(s.value) <= 1e-15);
    CHECK(norm(s.grad) < 1e-14);
    CHECK(s.hess.xx > 0.0);
    CHECK(s.hess.xx * s.hess.yy - s.hess.xy * s.hess.xy > 0.0);
  }
  CHECK(p.value({0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("well Hessian is 18 I, confirmed by finite differences") {
  const Potential p = make_triple_well();
  for (int i = 0; i < 3; ++i) {
    const Sym2 fd = fd_hessian(p, p.wells()[i], 1e-5);
    CHECK(fd.xx == doctest::Approx(18.0).epsilon(1e-4));
    CHECK(fd.yy == doctest::Approx(18.0).epsilon(1e-4));
    CHECK(std::abs(fd.xy) < 1e-3);
    const Sym2 h = p.hessian(p.wells()[i]);
    CHECK(h.xx == doctest::Approx(fd.xx).epsilon(1e-4));
    CHECK(h.yy == doctest::Approx(fd.yy).epsilon(1e-4));
  }
  CHECK(p.c1() == doctest::Approx(18.0));
  CHECK(p.c2() == doctest::Approx(18.0));
  CHECK(p.interface_width() == doctest::Approx(4.0 / std::sqrt(18.0)));
}

TEST_CASE("gradient matches finite differences at 100 random points") {
  const Potential p = make_triple_well();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const Vec2 u{U(rng), U(rng)};
    const Vec2 g = p.gradient(u);
    CHECK(distance(g, fd_gradient(p, u, 1e-5)) <= 1e-6 * (1.0 + norm(g)));
    const Sym2 h = p.hessian(u), fh = fd_hessian(p, u, 1e-4);
    CHECK(std::abs(h.xy - fh.xy) <= 1e-4 * (1.0 + std::abs(h.xy)));
  }
}

TEST_CASE("coercivity sample and rotation symmetry") {
  const Potential p = make_triple_well();
  CHECK(dot(p.gradient({2.0, 0.0}), Vec2{2.0, 0.0}) > 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vec2 u{U(rng), U(rng)};
    const double w = p.value(u);
    worst = std::max(worst, std::abs(p.value(rotate(u, kThirdTurn)) - w) / std::max(1.0, w));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("hypothesis checks on the default potential") {
  const Potential p = make_triple_well();
  const HypothesisReport r = check_hypotheses(p, 4096, 0.01);
  CHECK(r.zeros_only_at_wells.passed);
  CHECK(r.coercivity.passed);
  CHECK(r.all_passed());
  CHECK(r.c_hat == doctest::Approx(18.0).epsilon(0.05));
  CHECK(r.C_hat == doctest::Approx(18.0).epsilon(0.05));

  // Comparability: W >= c_hat delta^2 / 2 wherever every well is >= delta away.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const double delta = 0.05;
  const HypothesisReport r5 = check_hypotheses(p, 4096, delta);
  for (int t = 0; t < 20000; ++t) {
    const Vec2 u{U(rng), U(rng)};
    if (p.distance_to_wells(u) < delta) continue;
    REQUIRE(p.value(u) >= 0.5 * r5.c_hat * delta * delta * (1.0 - 1e-9));
  }
}

TEST_CASE("zero scale fails the zeros-only-at-wells check") {
  const Potential p(WellTriple::equilateral(), 0.0);
  const HypothesisReport r = check_hypotheses(p, 1000);
  CHECK_FALSE(r.zeros_only_at_wells.passed);
  CHECK_FALSE(r.zeros_only_at_wells.message.empty());
}

TEST_CASE("coincident wells and bad arguments are rejected") {
  WellTriple w = WellTriple::equilateral();
  w.a[2] = w.a[0];
  CHECK_THROWS_AS(make_triple_well(w), PotentialError);
  CHECK_THROWS_AS(Potential(WellTriple::equilateral(), -1.0), PotentialError);
  CHECK_THROWS(check_hypotheses(make_triple_well(), 10));
}

TEST_CASE("line coefficients reproduce W(u + a v) - W(u)") {
  const Potential p(WellTriple::equilateral(), 2.5);
  const Vec2 u{0.3, -0.4}, v{0.7, 0.2};
  const auto c = p.line_coefficients(u, v);
  for (double a : {-1.0, 0.25, 0.9}) {
    double e = 0.0;
    for (int k = 6; k >= 1; --k) e = (e + c[static_cast<std::size_t>(k)]) * a;
    CHECK(e == doctest::Approx(p.value(u + a * v) - p.value(u)).epsilon(1e-12));
  }
}
