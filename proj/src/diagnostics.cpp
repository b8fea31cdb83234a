#include "tj/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

namespace tj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInnerTol = 1e-9;

double trap_weight(std::size_t k, std::size_t n) { return (k == 0 || k + 1 == n) ? 0.5 : 1.0; }

void require_inner(const Field2D& f, double radius, const std::string& what) {
  const double inner = f.grid().inner_radius();
  if (radius > inner * (1.0 + kInnerTol)) {
    std::ostringstream os;
    os << what << " reaches radius " << radius << ", beyond the inner region " << inner;
    throw DiagnosticError(os.str());
  }
}

// Triangle S_R reaches 2R from its center.
double shape_reach(const ShapeSpec& s, const TriodGeometry& frame) {
  if (s.kind == ShapeSpec::Kind::Disk) return s.R;
  return Region::triangle(s.R, frame).max_radius({});
}

}  // namespace

double well_distance(const WellTriple& wells, Vec2 u) {
  return std::min({distance(u, wells[0]), distance(u, wells[1]), distance(u, wells[2])});
}

// ---------------------------------------------------------------------------

std::vector<EnergyGrowthRow> energy_growth(const Field2D& f, const Potential& p, const std::vector<ShapeSpec>& shapes,
                                           double sigma, const TriodGeometry& frame) {
  std::vector<EnergyGrowthRow> rows;
  rows.reserve(shapes.size());
  for (const ShapeSpec& s : shapes) {
    if (!(s.R > 0.0)) throw DiagnosticError("energy_growth: shape size must be positive");
    const bool disk = s.kind == ShapeSpec::Kind::Disk;
    require_inner(f, shape_reach(s, frame), disk ? "disk" : "triangle");
    const Region region = disk ? Region::disk({}, s.R) : Region::triangle(s.R, frame);
    EnergyGrowthRow row;
    row.shape = disk ? "disk" : "triangle";
    row.R = s.R;
    row.energy = energy(f, p, region).total;
    row.excess = row.energy - 3.0 * sigma * s.R;
    rows.push_back(row);
  }
  return rows;
}

std::vector<EquipartitionRow> equipartition_report(const Field2D& f, const Potential& p,
                                                   const std::vector<double>& radii) {
  std::vector<EquipartitionRow> rows;
  const double inner = f.grid().inner_radius();
  for (double R : radii) {
    if (!(R > 0.0)) throw DiagnosticError("equipartition_report: radius must be positive");
    require_inner(f, R, "equipartition disk");
    const EnergyBreakdown e = energy(f, p, Region::disk({}, R));
    EquipartitionRow row;
    row.R = R;
    row.potential_over_R = e.potential / R;
    row.gradient_over_2R = e.dirichlet / R;
    row.tangential_over_2R = e.tangential / R;
    if (2.0 * R <= inner * (1.0 + kInnerTol)) {
      const EnergyBreakdown a = energy(f, p, Region::annulus({}, R, 2.0 * R));
      row.annulus_radial_over_R = 2.0 * a.radial / R;
      row.annulus_radial_fraction = a.dirichlet > 0.0 ? a.radial / a.dirichlet : 0.0;
      row.annulus_defect_over_R = a.equipartition_defect / R;
    } else {
      row.annulus_radial_over_R = row.annulus_radial_fraction = row.annulus_defect_over_R = kNaN;
    }
    rows.push_back(row);
  }
  return rows;
}

double horizontal_energy(const Field2D& f, const TriodGeometry& frame) {
  const GridSpec& g = f.grid();
  const double h = g.spacing();
  const double inner = g.inner_radius();
  const Vec2 t = frame.ray_direction(0);
  const double half_diag = 0.5 * std::sqrt(2.0) * h;
  // The integrand is O(1) in the junction core, so a cut that snaps to cell
  // centers would move the result by O(h) there.
  constexpr int kSub = 16;
  long double tot = 0.0L;
  for (int j = 0; j + 1 < g.n; ++j) {
    for (int i = 0; i + 1 < g.n; ++i) {
      const Vec2 c{g.coord(i) + 0.5 * h, g.coord(j) + 0.5 * h};
      if (norm(c) > inner) continue;
      const double s = dot(c - frame.center, t);
      double frac = s > 0.0 ? 1.0 : 0.0;
      if (std::abs(s) < half_diag) {
        int in = 0;
        for (int b = 0; b < kSub; ++b)
          for (int a = 0; a < kSub; ++a) {
            const Vec2 z = c + Vec2{((a + 0.5) / kSub - 0.5) * h, ((b + 0.5) / kSub - 0.5) * h};
            if (dot(z - frame.center, t) > 0.0) ++in;
          }
        frac = static_cast<double>(in) / (kSub * kSub);
      }
      if (frac == 0.0) continue;
      const Vec2 u00 = f.at(i, j), u10 = f.at(i + 1, j), u01 = f.at(i, j + 1), u11 = f.at(i + 1, j + 1);
      const Vec2 ux = ((u10 - u00) + (u11 - u01)) / (2.0 * h);
      const Vec2 uy = ((u01 - u00) + (u11 - u10)) / (2.0 * h);
      tot += frac * norm2(t.x * ux + t.y * uy);
    }
  }
  return static_cast<double>(tot * h * h);
}

DeformationReport global_deformation(const Field2D& f, const Potential& p, const std::vector<double>& strip_radii,
                                     double sigma, const TriodGeometry& frame) {
  const double inner = f.grid().inner_radius();
  const Region disk = Region::disk({}, inner);
  DeformationReport rep;
  rep.radial_total = 2.0 * energy(f, p, disk).radial;
  rep.horizontal_origin = energy(f, p, disk.clipped({{1.0, 0.0}, 0.0})).horizontal;
  rep.horizontal_total = horizontal_energy(f, frame);
  for (double R : strip_radii) {
    if (!(R > 0.0) || R > inner * (1.0 + kInnerTol)) throw DiagnosticError("global_deformation: strip outside the inner region");
    StripRow row;
    row.R = R;
    row.energy = energy(f, p, Region::rectangle(0.0, R, -inner, inner)).total;
    row.excess = row.energy - sigma * R;
    rep.strips.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

SliceIntegrals slice_integrals(const Slice& s, const Potential& p) {
  const std::size_t n = s.size();
  const double dy = s.spacing();
  long double edges = 0.0L, pot = 0.0L, dx2 = 0.0L, cross = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = trap_weight(k, n);
    pot += w * p.value(s.values[k]);
    dx2 += w * norm2(s.dx[k]);
    Vec2 uy;
    if (k == 0)
      uy = (s.values[1] - s.values[0]) / dy;
    else if (k + 1 == n)
      uy = (s.values[n - 1] - s.values[n - 2]) / dy;
    else
      uy = (s.values[k + 1] - s.values[k - 1]) / (2.0 * dy);
    cross += w * dot(s.dx[k], uy);
    if (k + 1 < n) edges += norm2(s.values[k + 1] - s.values[k]);
  }
  SliceIntegrals out;
  const double grad = static_cast<double>(0.5L * edges / dy);
  out.J = grad + static_cast<double>(pot * dy);
  out.dx_norm2 = static_cast<double>(dx2 * dy);
  out.G = out.J - 0.5 * out.dx_norm2;
  out.H = static_cast<double>(cross * dy);
  return out;
}

std::vector<HamiltonianRow> hamiltonian_profile(const Field2D& f, const Potential& p, const std::vector<double>& xs,
                                                double sigma) {
  std::vector<HamiltonianRow> rows;
  for (double x : xs) {
    if (!(x > 0.0)) throw DiagnosticError("hamiltonian_profile: x must be positive");
    require_inner(f, x, "hamiltonian slice");
    const SliceIntegrals I = slice_integrals(slice(f, x), p);
    rows.push_back({x, I.G, I.H, I.G / sigma - 1.0, I.H / sigma});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Triod fitting

namespace {

struct FitState {
  Vec2 center;
  double cost = 0.0;
};

// Center update for fixed theta: nearest-ray assignment, then the center
// minimizing the summed squared distances to the assigned ray lines.
FitState fit_center(const std::vector<Vec2>& pts, double theta, Vec2 start, int sweeps) {
  TriodGeometry t{start, theta};
  for (int s = 0; s < sweeps; ++s) {
    Sym2 A;
    Vec2 b;
    for (const Vec2& z : pts) {
      const int k = nearest_ray(t, z).ray;
      const Vec2 nk = t.ray_normal(k);
      const double nz = dot(nk, z);
      A.xx += nk.x * nk.x;
      A.xy += nk.x * nk.y;
      A.yy += nk.y * nk.y;
      b += nz * nk;
    }
    const double det = A.xx * A.yy - A.xy * A.xy;
    if (!(std::abs(det) > 1e-12 * (A.xx + A.yy) * (A.xx + A.yy))) break;
    t.center = {(A.yy * b.x - A.xy * b.y) / det, (A.xx * b.y - A.xy * b.x) / det};
  }
  long double cost = 0.0L;
  for (const Vec2& z : pts) {
    const double d = nearest_ray(t, z).dist;
    cost += d * d;
  }
  return {t.center, static_cast<double>(cost)};
}

}  // namespace

TriodGeometry fit_triod(const std::vector<Vec2>& pts, std::optional<Vec2> initial_center) {
  if (pts.empty()) throw DiagnosticError("fit_triod: no points");
  Vec2 start;
  if (initial_center) {
    start = *initial_center;
  } else {
    for (const Vec2& z : pts) start += z;
    start = start / static_cast<double>(pts.size());
  }
  const int scan = 120;
  const double step = kThirdTurn / scan;
  double best_theta = 0.0;
  FitState best{start, std::numeric_limits<double>::infinity()};
  for (int q = 0; q < scan; ++q) {
    const double th = q * step;
    const FitState s = fit_center(pts, th, start, 4);
    if (s.cost < best.cost) {
      best = s;
      best_theta = th;
    }
  }
  // Golden section on [best - step, best + step], re-solving the center.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_theta - step, b = best_theta + step;
  double c = b - g * (b - a), d = a + g * (b - a);
  FitState fc = fit_center(pts, c, best.center, 6), fd = fit_center(pts, d, best.center, 6);
  for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
    if (fc.cost < fd.cost) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fit_center(pts, c, fd.center, 6);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fit_center(pts, d, fc.center, 6);
    }
  }
  const double theta = 0.5 * (a + b);
  const FitState fin = fit_center(pts, theta, fc.cost < fd.cost ? fc.center : fd.center, 8);
  return {fin.center, theta};
}

namespace {

// Rotates the triod labels so that ray 0 has a_3 on its clockwise side and
// a_1 on its counterclockwise side; returns false when no rotation does.
bool resolve_labels(const Field2D& f, const Potential& p, TriodGeometry& t, double reach) {
  const double w = p.interface_width();
  int best_k = -1, best_score = -1;
  for (int k = 0; k < 3; ++k) {
    TriodGeometry c{t.center, t.theta + k * kThirdTurn};
    int score = 0;
    for (int r = 0; r < 3; ++r) {
      const auto wells = ray_wells(r);
      const Vec2 base = c.center + reach * c.ray_direction(r);
      const Vec2 cw = base - 2.0 * w * c.ray_normal(r), ccw = base + 2.0 * w * c.ray_normal(r);
      const double L = f.grid().halfwidth;
      auto inside = [L](Vec2 z) { return std::abs(z.x) <= L && std::abs(z.y) <= L; };
      if (!inside(cw) || !inside(ccw)) continue;
      if (p.nearest_well(f.sample(cw)).first == wells[0]) ++score;
      if (p.nearest_well(f.sample(ccw)).first == wells[1]) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  t.theta = t.theta + best_k * kThirdTurn;
  t.theta = std::remainder(t.theta, kTwoPi);
  return best_score == 6;
}

}  // namespace

LocalizationReport interface_report(const Field2D& f, const Potential& p, double delta,
                                    const std::vector<double>& radii) {
  const double half_sep = 0.5 * p.wells().min_separation();
  if (!(delta > 0.0) || !(delta < half_sep)) {
    std::ostringstream os;
    os << "interface_report: delta must lie in (0, " << half_sep << ")";
    throw DiagnosticError(os.str());
  }
  const GridSpec& g = f.grid();
  const double inner = g.inner_radius();
  std::vector<Vec2> pts;
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const Vec2 z{g.coord(i), g.coord(j)};
      if (norm(z) > inner) continue;
      if (well_distance(p.wells(), f.at(i, j)) >= delta) pts.push_back(z);
    }
  }
  if (pts.empty()) throw DiagnosticError("interface_report: Gamma_delta is empty");

  LocalizationReport rep;
  rep.delta = delta;
  rep.count = pts.size();
  rep.triod = fit_triod(pts);
  resolve_labels(f, p, rep.triod, 0.5 * inner);
  for (const Vec2& z : pts) rep.max_dist = std::max(rep.max_dist, distance_to_triod(rep.triod, z));

  // Vertical extent per column, for points attached to the a1-a3 ray.
  const double h = g.spacing();
  const int stride = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  for (int i = (g.n - 1) / 2 + stride; i < g.n; i += stride) {
    const double x = g.coord(i);
    if (x > inner) break;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int count = 0;
    for (const Vec2& z : pts) {
      if (std::abs(z.x - x) > 0.5 * h) continue;
      if (nearest_ray(rep.triod, z).ray != 0) continue;
      lo = std::min(lo, z.y);
      hi = std::max(hi, z.y);
      ++count;
    }
    rep.width_by_x.push_back({x, count > 0 ? hi - lo + h : 0.0, count});
  }

  for (double R : radii) {
    std::vector<Vec2> sub;
    for (const Vec2& z : pts)
      if (norm(z) <= R) sub.push_back(z);
    ThetaRow row;
    row.R = R;
    row.count = static_cast<int>(sub.size());
    if (sub.size() >= 3) {
      TriodGeometry t = fit_triod(sub, rep.triod.center);
      // Same labelling as the global fit: nearest of the three rotations.
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double th = std::remainder(t.theta + k * kThirdTurn, kTwoPi);
        const double d = std::abs(std::remainder(th - rep.triod.theta, kTwoPi));
        if (d < best) {
          best = d;
          row.theta = th;
        }
      }
      row.center = t.center;
    } else {
      row.theta = kNaN;
      row.center = {kNaN, kNaN};
    }
    rep.theta_by_R.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Slices against U(. - h)

namespace {

double ref_l2_norm2_derivative(const Profile1D& ref) {
  const std::size_t n = ref.size();
  const double dy = ref.spacing();
  long double acc = 0.0L;
  for (std::size_t k = 0; k + 1 < n; ++k) acc += norm2(ref.samples[k + 1] - ref.samples[k]);
  return static_cast<double>(acc / dy);
}

double distance2(const Slice& s, const Profile1D& ref, double h) {
  const std::size_t n = s.size();
  long double acc = 0.0L;
  for (std::size_t k = 0; k < n; ++k) acc += trap_weight(k, n) * norm2(s.values[k] - sample_profile(ref, s.y(k) - h));
  return static_cast<double>(acc * s.spacing());
}

// Orthogonality residual int (u - U(y - h)) . U'(y - h) and its h-derivative.
std::pair<double, double> orthogonality(const Slice& s, const Profile1D& ref, double h) {
  const std::size_t n = s.size();
  long double F = 0.0L, dF = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = s.y(k) - h;
    const Vec2 e = s.values[k] - sample_profile(ref, y);
    const Vec2 d1 = sample_derivative(ref, y), d2 = sample_second_derivative(ref, y);
    const double w = trap_weight(k, n);
    F += w * dot(e, d1);
    dF += w * (norm2(d1) - dot(e, d2));
  }
  return {static_cast<double>(F * s.spacing()), static_cast<double>(dF * s.spacing())};
}

}  // namespace

ShiftFit optimal_shift(const Slice& s, const Profile1D& ref, double bracket) {
  if (!(bracket > 0.0)) throw DiagnosticError("optimal_shift: bracket must be positive");
  const double step = s.spacing();
  const int count = static_cast<int>(std::ceil(bracket / step));
  int best_q = -count;
  double best = std::numeric_limits<double>::infinity();
  for (int q = -count; q <= count; ++q) {
    const double d = distance2(s, ref, q * step);
    if (d < best) {
      best = d;
      best_q = q;
    }
  }
  ShiftFit out;
  out.bracket_hit = std::abs(best_q) == count;

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = (best_q - 1) * step, b = (best_q + 1) * step;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = distance2(s, ref, c), fd = distance2(s, ref, d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = distance2(s, ref, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = distance2(s, ref, d);
    }
  }
  double h = 0.5 * (a + b);

  const double tol = 1e-6 * std::sqrt(ref_l2_norm2_derivative(ref));
  auto [F, dF] = orthogonality(s, ref, h);
  for (int it = 0; it < 5 && std::abs(F) > tol && dF > 0.0; ++it) {
    const double next = h - F / dF;
    if (std::abs(next - h) > step) break;
    h = next;
    std::tie(F, dF) = orthogonality(s, ref, h);
  }
  out.h = h;
  out.d0 = std::sqrt(distance2(s, ref, h));
  out.orth_residual = F;
  return out;
}

SliceReport slice_analysis(const Field2D& f, const Potential& p, const Profile1D& ref, const std::vector<double>& xs,
                           double eps, double sigma_ref) {
  if (ref.left_well != 2 || ref.right_well != 0) throw DiagnosticError("slice_analysis: reference must be U_31");
  if (!std::is_sorted(xs.begin(), xs.end())) throw DiagnosticError("slice_analysis: xs must be increasing");
  const double bracket = 0.5 * f.grid().halfwidth;
  const double orth_tol = 1e-6 * std::sqrt(ref_l2_norm2_derivative(ref));
  SliceReport rep;
  for (double x : xs) {
    require_inner(f, std::abs(x), "slice");
    const Slice s = slice(f, x);
    const SliceIntegrals I = slice_integrals(s, p);
    const ShiftFit fit = optimal_shift(s, ref, bracket);
    SliceRow row;
    row.x = x;
    row.J = I.J;
    row.G = I.G;
    row.H = I.H;
    row.h = fit.h;
    row.d0 = fit.d0;
    row.orth_residual = fit.orth_residual;
    row.orth_certified = std::abs(fit.orth_residual) <= orth_tol;
    row.bracket_hit = fit.bracket_hit;

    const std::size_t n = s.size();
    const double dy = s.spacing();
    long double grad2 = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const double y = s.y(k) - fit.h;
      row.sup_dev = std::max(row.sup_dev, distance(s.values[k], sample_profile(ref, y)));
      if (k + 1 < n) {
        const Vec2 e0 = s.values[k] - sample_profile(ref, y);
        const Vec2 e1 = s.values[k + 1] - sample_profile(ref, y + dy);
        grad2 += norm2(e1 - e0);
      }
      if (k > 0 && k + 1 < n) {
        const Vec2 uy = (s.values[k + 1] - s.values[k - 1]) / (2.0 * dy);
        row.sup_dev_grad = std::max(row.sup_dev_grad, distance(uy, sample_derivative(ref, y)));
      }
    }
    row.h1_dist = std::sqrt(fit.d0 * fit.d0 + static_cast<double>(grad2 / dy));
    row.in_bad_set = row.h1_dist >= eps;
    const double d_plus = std::sqrt(distance2(s, ref, fit.h + dy));
    const double d_minus = std::sqrt(distance2(s, ref, fit.h - dy));
    row.shift_optimal = d_plus >= fit.d0 - 1e-12 && d_minus >= fit.d0 - 1e-12;
    rep.rows.push_back(row);
  }

  SliceSummary& sm = rep.summary;
  sm.sigma_ref = sigma_ref;
  const std::size_t m = rep.rows.size();
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < m; ++q) {
    double w = 0.0;
    if (m > 1) {
      const double lo = q == 0 ? rep.rows[0].x : 0.5 * (rep.rows[q - 1].x + rep.rows[q].x);
      const double hi = q + 1 == m ? rep.rows[m - 1].x : 0.5 * (rep.rows[q].x + rep.rows[q + 1].x);
      w = hi - lo;
    }
    const SliceRow& r = rep.rows[q];
    if (r.in_bad_set) sm.badset_measure += w;
    sm.excess_total += w * (r.J - sigma_ref);
    if (q > 0) sm.h_total_variation += std::abs(r.h - rep.rows[q - 1].h);
    if (!r.in_bad_set && r.d0 > 1e-12) alpha = std::min(alpha, (r.J - sigma_ref) / (r.d0 * r.d0));
  }
  sm.alpha_hat = std::isfinite(alpha) ? alpha : kNaN;
  if (m > 0) {
    const std::size_t first = (3 * m) / 4;
    double acc = 0.0;
    for (std::size_t q = first; q < m; ++q) acc += rep.rows[q].h;
    sm.h_limit = acc / static_cast<double>(m - first);
  }
  return rep;
}

HPrimeCheck h_prime_check(const Field2D& f, const Profile1D& ref, double x, double dx) {
  if (!(dx > 0.0)) throw DiagnosticError("h_prime_check: dx must be positive");
  const double L = f.grid().halfwidth;
  if (std::abs(x) + dx > L) throw DiagnosticError("h_prime_check: x +- dx outside the domain");
  const double bracket = 0.5 * L;
  const double hp = optimal_shift(slice(f, x + dx), ref, bracket).h;
  const double hm = optimal_shift(slice(f, x - dx), ref, bracket).h;
  const Slice s = slice(f, x);
  const double h = optimal_shift(s, ref, bracket).h;

  const std::size_t n = s.size();
  long double num = 0.0L, den = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = s.y(k) - h;
    const Vec2 d1 = sample_derivative(ref, y), d2 = sample_second_derivative(ref, y);
    const Vec2 e = s.values[k] - sample_profile(ref, y);
    const double w = trap_weight(k, n);
    num += w * dot(s.dx[k], d1);
    den += w * (norm2(d1) - dot(d2, e));
  }
  HPrimeCheck out;
  out.x = x;
  out.dx = dx;
  out.fd = (hp - hm) / (2.0 * dx);
  out.denominator = static_cast<double>(den * s.spacing());
  out.formula = -static_cast<double>(num * s.spacing()) / out.denominator;
  out.abs_diff = std::abs(out.fd - out.formula);
  out.denominator_ok = out.denominator >= 0.5 * ref_l2_norm2_derivative(ref);
  return out;
}

// ---------------------------------------------------------------------------

DecayFit decay_fit(const Field2D& f, const Potential& p, const TriodGeometry& triod, const RaySpec& ray, double lo,
                   double hi) {
  if (!(lo > 0.0) || !(hi > lo)) throw DiagnosticError("decay_fit: need 0 < lo < hi");
  const GridSpec& g = f.grid();
  const double h = g.spacing();
  const double inner = g.inner_radius();
  const Vec2 dir = unit_at_angle(ray.angle);
  const Vec2 nrm = perp(dir);
  std::vector<std::pair<double, double>> pts;
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const Vec2 z{g.coord(i), g.coord(j)};
      if (norm(z) > inner) continue;
      const Vec2 rel = z - ray.origin;
      if (dot(rel, dir) < 0.0 || std::abs(dot(rel, nrm)) > h) continue;
      const double m = well_distance(p.wells(), f.at(i, j));
      if (m < lo || m > hi) continue;
      pts.emplace_back(distance_to_triod(triod, z), std::log(m));
    }
  }
  if (pts.size() < 20) {
    std::ostringstream os;
    os << "decay_fit: only " << pts.size() << " usable points (need 20)";
    throw DiagnosticError(os.str());
  }
  const double cnt = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= cnt;
  my /= cnt;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw DiagnosticError("decay_fit: degenerate distance range");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (icpt + slope * x);
    ssr += r * r;
  }
  DecayFit out;
  out.k = -slope;
  out.K = std::exp(icpt);
  out.rms_log_residual = std::sqrt(ssr / cnt);
  out.k_stderr = pts.size() > 2 ? std::sqrt(ssr / (cnt - 2.0) / sxx) : kNaN;
  out.count = static_cast<int>(pts.size());
  out.ray = ray;
  out.lo = lo;
  out.hi = hi;
  return out;
}

MaxPrincipleResult max_principle_check(const Field2D& f, const WellTriple& wells, const Region& rect, int i,
                                       double r) {
  if (i < 0 || i > 2) throw DiagnosticError("max_principle_check: well index out of range");
  const GridSpec& g = f.grid();
  const Vec2 a = wells[i];
  MaxPrincipleResult out;
  bool any = false;
  auto in = [&](int ii, int jj) {
    return ii >= 0 && jj >= 0 && ii < g.n && jj < g.n && rect.contains({g.coord(ii), g.coord(jj)});
  };
  for (int j = 0; j < g.n; ++j) {
    for (int ii = 0; ii < g.n; ++ii) {
      if (!in(ii, j)) continue;
      any = true;
      const double dev = distance(f.at(ii, j), a);
      const bool boundary = !in(ii + 1, j) || !in(ii - 1, j) || !in(ii, j + 1) || !in(ii, j - 1);
      if (boundary)
        out.max_boundary_deviation = std::max(out.max_boundary_deviation, dev);
      else
        out.max_interior_deviation = std::max(out.max_interior_deviation, dev);
    }
  }
  if (!any) throw DiagnosticError("max_principle_check: region contains no grid nodes");
  out.hypothesis_met = out.max_boundary_deviation <= r;
  out.holds = out.hypothesis_met && out.max_interior_deviation <= r;
  return out;
}

}  // namespace tj
