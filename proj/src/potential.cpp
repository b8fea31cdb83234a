#include "tj/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tj {

WellTriple WellTriple::equilateral() {
  const double s = std::sqrt(3.0) / 2.0;
  return WellTriple{{Vec2{1.0, 0.0}, Vec2{-0.5, s}, Vec2{-0.5, -s}}};
}

double WellTriple::min_separation() const {
  return std::min({distance(a[0], a[1]), distance(a[1], a[2]), distance(a[2], a[0])});
}

Potential::Potential(WellTriple wells, double scale) : wells_(wells), scale_(scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw PotentialError("potential scale must be finite and >= 0");
  if (wells.min_separation() <= 0.0) throw PotentialError("wells must be pairwise distinct");
  c1_ = std::numeric_limits<double>::infinity();
  c2_ = 0.0;
  for (const Vec2& a : wells_.a) {
    const auto [lo, hi] = hessian(a).eigenvalues();
    c1_ = std::min(c1_, lo);
    c2_ = std::max(c2_, hi);
  }
}

double Potential::value(Vec2 u) const {
  return scale_ * norm2(u - wells_.a[0]) * norm2(u - wells_.a[1]) * norm2(u - wells_.a[2]);
}

Vec2 Potential::gradient(Vec2 u) const {
  const Vec2 d0 = u - wells_.a[0], d1 = u - wells_.a[1], d2 = u - wells_.a[2];
  const double p0 = norm2(d0), p1 = norm2(d1), p2 = norm2(d2);
  return (2.0 * scale_) * ((p1 * p2) * d0 + (p0 * p2) * d1 + (p0 * p1) * d2);
}

std::pair<double, Vec2> Potential::value_gradient(Vec2 u) const {
  const Vec2 d0 = u - wells_.a[0], d1 = u - wells_.a[1], d2 = u - wells_.a[2];
  const double p0 = norm2(d0), p1 = norm2(d1), p2 = norm2(d2);
  return {scale_ * p0 * p1 * p2, (2.0 * scale_) * ((p1 * p2) * d0 + (p0 * p2) * d1 + (p0 * p1) * d2)};
}

Sym2 Potential::hessian(Vec2 u) const { return evaluate(u).hess; }

PotentialSample Potential::evaluate(Vec2 u) const {
  const std::array<Vec2, 3> d{u - wells_.a[0], u - wells_.a[1], u - wells_.a[2]};
  const std::array<double, 3> p{norm2(d[0]), norm2(d[1]), norm2(d[2])};
  PotentialSample s;
  s.value = scale_ * p[0] * p[1] * p[2];
  // For f = prod p_i with p_i = |d_i|^2: grad p_i = 2 d_i, Hess p_i = 2 I.
  Vec2 g;
  Sym2 h;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    g += (2.0 * p[j] * p[k]) * d[i];
    const double diag = 2.0 * p[j] * p[k];
    h.xx += diag;
    h.yy += diag;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const int k = 3 - i - j;
      const double w = 4.0 * p[k];
      h.xx += w * d[i].x * d[j].x;
      h.xy += w * d[i].x * d[j].y;
      h.yy += w * d[i].y * d[j].y;
    }
  }
  s.grad = scale_ * g;
  s.hess = {scale_ * h.xx, scale_ * h.xy, scale_ * h.yy};
  return s;
}

std::array<double, 7> Potential::line_coefficients(Vec2 u, Vec2 v) const {
  // Each factor |u - a_i + a v|^2 = P_i + 2 Q_i a + V a^2.
  const double V = norm2(v);
  std::array<double, 7> out{};
  std::array<double, 5> q01{};
  const Vec2 d0 = u - wells_.a[0], d1 = u - wells_.a[1], d2 = u - wells_.a[2];
  const std::array<double, 3> f0{norm2(d0), 2.0 * dot(d0, v), V};
  const std::array<double, 3> f1{norm2(d1), 2.0 * dot(d1, v), V};
  const std::array<double, 3> f2{norm2(d2), 2.0 * dot(d2, v), V};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) q01[a + b] += f0[a] * f1[b];
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      if (a + b > 0) out[a + b] += q01[a] * f2[b];
  for (double& c : out) c *= scale_;
  return out;
}

double Potential::interface_width() const { return 4.0 / std::sqrt(c1_); }

std::pair<int, double> Potential::nearest_well(Vec2 u) const {
  int best = 0;
  double dist = distance(u, wells_.a[0]);
  for (int i = 1; i < 3; ++i) {
    const double d = distance(u, wells_.a[static_cast<std::size_t>(i)]);
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return {best, dist};
}

Potential make_triple_well(WellTriple wells, double scale) { return Potential(wells, scale); }

namespace {

std::string describe(const char* what, Vec2 z, double v) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at (" << z.x << ", " << z.y << "): " << v;
  return os.str();
}

}  // namespace

HypothesisReport check_hypotheses(const Potential& p, int sample_count, double delta) {
  if (sample_count < 1000) throw std::invalid_argument("check_hypotheses: sample_count must be >= 1000");
  const double M = p.outer_radius();
  const double deltaW = p.comparability_radius();
  if (!(delta > 0.0) || !(delta < deltaW)) throw std::invalid_argument("check_hypotheses: delta must lie in (0, deltaW)");

  HypothesisReport rep;
  rep.delta = delta;

  // (i) W > 0 on a dense box sample, excluding deltaW-balls around the wells.
  {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(sample_count))));
    const double lo = -2.0 * M, step = 4.0 * M / (side - 1);
    double best = std::numeric_limits<double>::infinity();
    Vec2 witness;
    for (int j = 0; j < side; ++j) {
      for (int i = 0; i < side; ++i) {
        const Vec2 u{lo + i * step, lo + j * step};
        if (p.distance_to_wells(u) < deltaW) continue;
        const double w = p.value(u);
        if (w < best) {
          best = w;
          witness = u;
        }
      }
    }
    rep.zeros_only_at_wells = {best > 0.0, best, witness,
                               best > 0.0 ? "" : describe("W vanishes away from the wells", witness, best)};
  }

  // (ii) quadratic growth on small circles around each well.
  {
    const int per_well = std::max(64, sample_count / 3);
    rep.c_hat = std::numeric_limits<double>::infinity();
    rep.C_hat = 0.0;
    for (const Vec2& a : p.wells().a) {
      for (int k = 0; k < per_well; ++k) {
        const Vec2 u = a + delta * unit_at_angle(kTwoPi * k / per_well);
        const double ratio = 2.0 * p.value(u) / (delta * delta);
        rep.c_hat = std::min(rep.c_hat, ratio);
        rep.C_hat = std::max(rep.C_hat, ratio);
      }
    }
    rep.comparability_ok = rep.c_hat > 0.0;
  }

  // (iii) W_u(u).u > 0 on the annulus M < |u| <= 2M.
  {
    const int radial = 16;
    const int angular = std::max(64, sample_count / radial);
    double best = std::numeric_limits<double>::infinity();
    Vec2 witness;
    for (int r = 1; r <= radial; ++r) {
      const double rad = M + M * r / radial;
      for (int k = 0; k < angular; ++k) {
        const Vec2 u = rad * unit_at_angle(kTwoPi * k / angular);
        const double v = dot(p.gradient(u), u);
        if (v < best) {
          best = v;
          witness = u;
        }
      }
    }
    rep.coercivity = {best > 0.0, best, witness,
                      best > 0.0 ? "" : describe("W_u(u).u <= 0 on the outer annulus", witness, best)};
  }
  return rep;
}

}  // namespace tj
