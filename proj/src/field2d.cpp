#include "tj/field2d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tj {

void GridSpec::validate() const {
  if (n < 3) throw FieldError("grid needs n >= 3");
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) throw FieldError("grid halfwidth must be positive");
}

Field2D::Field2D(GridSpec grid, Vec2 value) : grid_(grid) {
  grid_.validate();
  const std::size_t nodes = static_cast<std::size_t>(grid.n) * static_cast<std::size_t>(grid.n);
  data_.resize(2 * nodes);
  frozen_.assign(nodes, 0);
  for (std::size_t k = 0; k < nodes; ++k) {
    data_[2 * k] = value.x;
    data_[2 * k + 1] = value.y;
  }
  const int n = grid.n;
  for (int k = 0; k < n; ++k) {
    set_frozen(k, 0, true);
    set_frozen(k, n - 1, true);
    set_frozen(0, k, true);
    set_frozen(n - 1, k, true);
  }
}

Field2D Field2D::from_function(GridSpec grid, const std::function<Vec2(Vec2)>& f) {
  Field2D out(grid, Vec2{});
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i) out.set(i, j, f({grid.coord(i), grid.coord(j)}));
  return out;
}

bool Field2D::boundary_frozen() const {
  const int n = grid_.n;
  for (int k = 0; k < n; ++k)
    if (!frozen(k, 0) || !frozen(k, n - 1) || !frozen(0, k) || !frozen(n - 1, k)) return false;
  return true;
}

bool Field2D::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vec2 Field2D::sample(Vec2 z) const {
  const double h = grid_.spacing();
  const double px = (z.x + grid_.halfwidth) / h, py = (z.y + grid_.halfwidth) / h;
  const double last = grid_.n - 1;
  if (px < -1e-9 || py < -1e-9 || px > last + 1e-9 || py > last + 1e-9)
    throw FieldError("sample point outside the domain");
  int i = std::clamp(static_cast<int>(std::floor(px)), 0, grid_.n - 2);
  int j = std::clamp(static_cast<int>(std::floor(py)), 0, grid_.n - 2);
  const double tx = std::clamp(px - i, 0.0, 1.0), ty = std::clamp(py - j, 0.0, 1.0);
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
         tx * ty * at(i + 1, j + 1);
}

Vec2 reflect_a1_a3(const WellTriple& wells, Vec2 u) {
  const Vec2 m = 0.5 * (wells[0] + wells[2]);
  const Vec2 nh = (wells[0] - wells[2]) / distance(wells[0], wells[2]);
  return u - (2.0 * dot(u - m, nh)) * nh;
}

// ---------------------------------------------------------------------------
// Boundary data and competitor

namespace {

void check_junction(const GridSpec& grid, const JunctionData& jd) {
  for (int k = 0; k < 3; ++k) {
    const auto w = ray_wells(k);
    const Profile1D& pr = jd.profiles[static_cast<std::size_t>(k)];
    if (pr.size() < 2 || pr.left_well != w[0] || pr.right_well != w[1]) {
      std::ostringstream os;
      os << "profile for ray " << k << " must connect a" << w[0] + 1 << " to a" << w[1] + 1;
      throw FieldError(os.str());
    }
  }
  const Vec2 c = jd.triod.center;
  const double Lx = grid.halfwidth;
  if (std::abs(c.x) > Lx / 3.0 || std::abs(c.y) > Lx / 3.0)
    throw FieldError("triod center must lie in the middle third of the domain");
  const double margin = Lx - std::max(std::abs(c.x), std::abs(c.y));
  if (margin < 2.0 * jd.interface_width) throw FieldError("triod center within 2 interface widths of the boundary");
}

Vec2 ray_rule(const JunctionData& jd, int k, Vec2 z) {
  const RayProjection r = project_on_ray(jd.triod, k, z);
  return sample_profile(jd.profiles[static_cast<std::size_t>(k)], r.signed_dist);
}

Vec2 competitor_value(const JunctionData& jd, Vec2 z) {
  const Vec2 nearest = heteroclinic_rule(jd, z);
  const double rb = 2.0 * jd.interface_width;
  const Vec2 v = z - jd.triod.center;
  const double r = norm(v);
  if (r >= rb) return nearest;
  const Vec2 centroid = (jd.wells[0] + jd.wells[1] + jd.wells[2]) / 3.0;
  if (r == 0.0) return centroid;
  const double t = r / rb;
  const double ang = wrap_angle(std::atan2(v.y, v.x) - jd.triod.theta);
  Vec2 blend;
  double wsum = 0.0;
  for (int k = 0; k < 3; ++k) {
    double psi = std::abs(ang - k * kThirdTurn);
    psi = std::min(psi, kTwoPi - psi);
    const double w = std::max(0.0, 1.0 - psi / kThirdTurn);
    if (w == 0.0) continue;
    blend += w * ray_rule(jd, k, z);
    wsum += w;
  }
  blend = blend / wsum;
  const Vec2 inner = (1.0 - t) * centroid + t * blend;
  const double s = t * t;
  return (1.0 - s) * inner + s * nearest;
}

}  // namespace

Vec2 heteroclinic_rule(const JunctionData& jd, Vec2 z) {
  const RayProjection r = nearest_ray(jd.triod, z);
  if (r.dist > 5.0 * jd.interface_width) return jd.wells[sector_of(SectorPartition{jd.triod}, z)];
  return sample_profile(jd.profiles[static_cast<std::size_t>(r.ray)], r.signed_dist);
}

std::vector<BoundaryValue> boundary_data(const GridSpec& grid, const JunctionData& jd) {
  grid.validate();
  check_junction(grid, jd);
  std::vector<BoundaryValue> out;
  const int n = grid.n;
  out.reserve(static_cast<std::size_t>(4 * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i != 0 && j != 0 && i != n - 1 && j != n - 1) continue;
      out.push_back({i, j, heteroclinic_rule(jd, {grid.coord(i), grid.coord(j)})});
    }
  }
  return out;
}

Field2D competitor_init(const GridSpec& grid, const JunctionData& jd) {
  const auto ring = boundary_data(grid, jd);
  Field2D f(grid, Vec2{});
  for (int j = 1; j + 1 < grid.n; ++j)
    for (int i = 1; i + 1 < grid.n; ++i) f.set(i, j, competitor_value(jd, {grid.coord(i), grid.coord(j)}));
  for (const BoundaryValue& b : ring) f.set(b.i, b.j, b.value);
  return f;
}

// ---------------------------------------------------------------------------
// Energies

EnergyBreakdown energy(const Field2D& f, const Potential& p, const Region& region, Vec2 polar_origin) {
  const GridSpec& g = f.grid();
  const double h = g.spacing();
  const double Lx = g.halfwidth;
  const auto b = region.bounds();
  const double tol = 1e-9 * Lx;
  if (b[0] < -Lx - tol || b[1] > Lx + tol || b[2] < -Lx - tol || b[3] > Lx + tol) {
    std::ostringstream os;
    os << "energy: " << region.describe() << " region exceeds the domain [-" << Lx << ", " << Lx << "]^2";
    throw FieldError(os.str());
  }
  const int n = g.n;
  // Cell (i, j) has center x_i + h/2; restrict to index ranges overlapping the bounds.
  auto lo_index = [&](double v) { return std::clamp(static_cast<int>(std::floor((v + Lx) / h - 0.5)) - 1, 0, n - 2); };
  auto hi_index = [&](double v) { return std::clamp(static_cast<int>(std::ceil((v + Lx) / h - 0.5)) + 1, 0, n - 2); };
  const int i0 = lo_index(b[0]), i1 = hi_index(b[1]);
  const int j0 = lo_index(b[2]), j1 = hi_index(b[3]);
  const double area = h * h;
  const double inv2h = 1.0 / (2.0 * h);

  long double tot_d = 0, tot_p = 0, tot_t = 0, tot_r = 0, tot_h = 0, tot_e = 0;
  std::size_t cells = 0;
  for (int j = j0; j <= j1; ++j) {
    double rd = 0, rp = 0, rt = 0, rr = 0, rh = 0, re = 0;
    const double yc = g.coord(j) + 0.5 * h;
    for (int i = i0; i <= i1; ++i) {
      const Vec2 c{g.coord(i) + 0.5 * h, yc};
      if (!region.contains(c)) continue;
      ++cells;
      const Vec2 u00 = f.at(i, j), u10 = f.at(i + 1, j), u01 = f.at(i, j + 1), u11 = f.at(i + 1, j + 1);
      const Vec2 ux = ((u10 - u00) + (u11 - u01)) * inv2h;
      const Vec2 uy = ((u01 - u00) + (u11 - u10)) * inv2h;
      const double w = p.value(0.25 * ((u00 + u10) + (u01 + u11)));
      const double grad2 = norm2(ux) + norm2(uy);
      const Vec2 rel = c - polar_origin;
      const double rn = norm(rel);
      double radial2 = 0.0;
      if (rn > 0.0) {
        const Vec2 er = rel / rn;
        radial2 = norm2(er.x * ux + er.y * uy);
      }
      rd += 0.5 * grad2;
      rp += w;
      rr += 0.5 * radial2;
      rt += 0.5 * (grad2 - radial2);
      rh += norm2(ux);
      re += std::abs(w - 0.5 * grad2);
    }
    tot_d += rd;
    tot_p += rp;
    tot_t += rt;
    tot_r += rr;
    tot_h += rh;
    tot_e += re;
  }
  EnergyBreakdown e;
  e.dirichlet = static_cast<double>(tot_d * area);
  e.potential = static_cast<double>(tot_p * area);
  e.total = static_cast<double>((tot_d + tot_p) * area);
  e.tangential = static_cast<double>(tot_t * area);
  e.radial = static_cast<double>(tot_r * area);
  e.horizontal = static_cast<double>(tot_h * area);
  e.equipartition_defect = static_cast<double>(tot_e * area);
  e.cells = cells;
  return e;
}

RescaledWeights rescaled_weights(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("rescaled energy needs R > 0");
  return {1.0 / (2.0 * R), R};
}

double rescaled_energy(const Field2D& f, const Potential& p, double R, const Region& region) {
  const RescaledWeights w = rescaled_weights(R);
  // With v(z) = u(R z): |grad v|^2 = R^2 |grad u|^2 and dz = dz' / R^2.
  const EnergyBreakdown e = energy(f, p, region.scaled(R));
  const double grad_u2 = 2.0 * e.dirichlet;
  return (w.gradient * R * R * grad_u2 + w.potential * e.potential) / (R * R);
}

// ---------------------------------------------------------------------------
// Relaxation

namespace {

class RelaxObjective {
 public:
  RelaxObjective(const Field2D& f, const Potential& p, bool symmetrize)
      : p_(p), n_(f.n()), h_(f.grid().spacing()), mask_(f.mask()), symmetrize_(symmetrize) {
    const WellTriple& w = p.wells();
    m_ = 0.5 * (w[0] + w[2]);
    nh_ = (w[0] - w[2]) / distance(w[0], w[2]);
  }

  std::size_t size() const { return 2 * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  long double evaluate(std::span<const double> x, std::span<double> g) const {
    const double h2 = h_ * h_;
    const std::size_t n = static_cast<std::size_t>(n_);
    long double total = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = j * n + i;
        const double ux = x[2 * k], uy = x[2 * k + 1];
        const auto [w, gw] = p_.value_gradient({ux, uy});
        row += h2 * w;
        if (i + 1 < n) {
          const double ex = x[2 * k + 2] - ux, ey = x[2 * k + 3] - uy;
          row += 0.5 * (ex * ex + ey * ey);
        }
        if (j + 1 < n) {
          const double ex = x[2 * (k + n)] - ux, ey = x[2 * (k + n) + 1] - uy;
          row += 0.5 * (ex * ex + ey * ey);
        }
        if (mask_[k] != 0) {
          g[2 * k] = 0.0;
          g[2 * k + 1] = 0.0;
          continue;
        }
        const std::size_t e = 2 * (k + 1), wv = 2 * (k - 1), nn = 2 * (k + n), s = 2 * (k - n);
        g[2 * k] = 4.0 * ux - (x[e] + x[wv] + x[nn] + x[s]) + h2 * gw.x;
        g[2 * k + 1] = 4.0 * uy - (x[e + 1] + x[wv + 1] + x[nn + 1] + x[s + 1]) + h2 * gw.y;
      }
      total += row;
    }
    return total;
  }

  double curvature(std::span<const double> x, std::span<const double> d) const {
    const double h2 = h_ * h_;
    const std::size_t n = static_cast<std::size_t>(n_);
    long double total = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      double row = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = j * n + i;
        const double dx = d[2 * k], dy = d[2 * k + 1];
        if (mask_[k] == 0) row += h2 * p_.hessian({x[2 * k], x[2 * k + 1]}).quad({dx, dy});
        if (i + 1 < n) {
          const double ex = d[2 * k + 2] - dx, ey = d[2 * k + 3] - dy;
          row += ex * ex + ey * ey;
        }
        if (j + 1 < n) {
          const double ex = d[2 * (k + n)] - dx, ey = d[2 * (k + n) + 1] - dy;
          row += ex * ex + ey * ey;
        }
      }
      total += row;
    }
    return static_cast<double>(total);
  }

  LinePolynomial line_polynomial(std::span<const double> x, std::span<const double> d) const {
    const double h2 = h_ * h_;
    const std::size_t n = static_cast<std::size_t>(n_);
    std::array<long double, 7> acc{};
    for (std::size_t j = 0; j < n; ++j) {
      std::array<double, 7> row{};
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = j * n + i;
        const double dx = d[2 * k], dy = d[2 * k + 1];
        if (mask_[k] == 0 && (dx != 0.0 || dy != 0.0)) {
          const auto c = p_.line_coefficients({x[2 * k], x[2 * k + 1]}, {dx, dy});
          for (std::size_t q = 1; q < 7; ++q) row[q] += h2 * c[q];
        }
        auto edge = [&](std::size_t o) {
          const double ex = x[2 * o] - x[2 * k], ey = x[2 * o + 1] - x[2 * k + 1];
          const double fx = d[2 * o] - dx, fy = d[2 * o + 1] - dy;
          row[1] += ex * fx + ey * fy;
          row[2] += 0.5 * (fx * fx + fy * fy);
        };
        if (i + 1 < n) edge(k + 1);
        if (j + 1 < n) edge(k + n);
      }
      for (std::size_t q = 1; q < 7; ++q) acc[q] += row[q];
    }
    LinePolynomial out{};
    for (std::size_t q = 1; q < 7; ++q) out[q] = static_cast<double>(acc[q]);
    return out;
  }

  void project(std::span<double> v) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    for (std::size_t k = 0; k < n * n; ++k) {
      if (mask_[k] != 0) v[2 * k] = v[2 * k + 1] = 0.0;
    }
    if (!symmetrize_) return;
    // v <- (v + S v o P) / 2 with the linear part of the a1 <-> a3 reflection.
    for (std::size_t j = 0; 2 * j + 1 <= n; ++j) {
      const std::size_t jr = n - 1 - j;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = 2 * (j * n + i), b = 2 * (jr * n + i);
        const Vec2 va{v[a], v[a + 1]}, vb{v[b], v[b + 1]};
        const Vec2 sym = 0.5 * (va + reflect_linear(vb));
        const Vec2 img = reflect_linear(sym);
        v[a] = sym.x;
        v[a + 1] = sym.y;
        v[b] = img.x;
        v[b + 1] = img.y;
      }
    }
  }

  double residual(std::span<const double> g) const {
    double r = 0.0;
    for (double v : g) r = std::max(r, std::abs(v));
    return r / (h_ * h_);
  }

  double step_hint() const { return 1.0 / (8.0 + h_ * h_ * std::max(1.0, 2.0 * p_.c2())); }

  /// Symmetrizes the free nodes of a field in place (affine reflection).
  void symmetrize_field(std::vector<double>& x) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    for (std::size_t j = 0; 2 * j + 1 <= n; ++j) {
      const std::size_t jr = n - 1 - j;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ka = j * n + i, kb = jr * n + i;
        if (mask_[ka] != 0 || mask_[kb] != 0) continue;
        const Vec2 va{x[2 * ka], x[2 * ka + 1]}, vb{x[2 * kb], x[2 * kb + 1]};
        const Vec2 sym = 0.5 * (va + reflect_affine(vb));
        const Vec2 img = reflect_affine(sym);
        x[2 * ka] = sym.x;
        x[2 * ka + 1] = sym.y;
        x[2 * kb] = img.x;
        x[2 * kb + 1] = img.y;
      }
    }
  }

 private:
  Vec2 reflect_linear(Vec2 v) const { return v - (2.0 * dot(v, nh_)) * nh_; }
  Vec2 reflect_affine(Vec2 u) const { return m_ + reflect_linear(u - m_); }

  const Potential& p_;
  int n_;
  double h_;
  const std::vector<std::uint8_t>& mask_;
  bool symmetrize_;
  Vec2 m_;
  Vec2 nh_;
};

}  // namespace

long double discrete_energy(const Field2D& f, const Potential& p) {
  RelaxObjective obj(f, p, false);
  std::vector<double> g(obj.size());
  return obj.evaluate(f.data(), g);
}

ResidualField residual(const Field2D& f, const Potential& p) {
  const int n = f.n();
  const double h2 = f.grid().spacing() * f.grid().spacing();
  ResidualField out;
  out.values.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), Vec2{});
  for (int j = 1; j + 1 < n; ++j) {
    for (int i = 1; i + 1 < n; ++i) {
      if (f.frozen(i, j)) continue;
      const Vec2 u = f.at(i, j);
      const Vec2 lap = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * u) / h2;
      const Vec2 r = p.gradient(u) - lap;
      out.values[f.index(i, j)] = r;
      out.max_norm = std::max({out.max_norm, std::abs(r.x), std::abs(r.y)});
    }
  }
  return out;
}

RelaxResult relax(Field2D f, const Potential& p, const RelaxOptions& opt, const NcgObserver& observer) {
  if (!f.boundary_frozen()) throw FieldError("relax: the boundary ring must be frozen");
  if (!f.all_finite()) throw FieldError("relax: initial field has non-finite values");
  if (opt.symmetrize) {
    const WellTriple& w = p.wells();
    if (distance(reflect_a1_a3(w, w[1]), w[1]) > 1e-12)
      throw FieldError("relax: symmetrization needs wells symmetric under a1 <-> a3");
  }
  RelaxObjective obj(f, p, opt.symmetrize);
  NcgOptions nopt;
  nopt.tol = opt.tol;
  nopt.max_iter = opt.max_iter;
  nopt.restart_period = opt.restart_period;

  RelaxResult out;
  {
    std::vector<double> g(obj.size());
    const long double e0 = obj.evaluate(f.data(), g);
    obj.project(g);
    const double r0 = obj.residual(g);
    if (r0 <= opt.tol) {
      out.residual = r0;
      out.energy = static_cast<double>(e0);
      out.status = SolverStatus::Converged;
      out.field = std::move(f);
      return out;
    }
  }
  std::vector<double> x = f.data();
  if (opt.symmetrize) obj.symmetrize_field(x);
  const NcgResult r = minimize_ncg(obj, x, nopt, observer);
  f.data() = std::move(x);
  out.field = std::move(f);
  out.iterations = r.iterations;
  out.residual = r.residual;
  out.energy = static_cast<double>(r.energy);
  out.status = r.status;
  return out;
}

Field2D prolongate(const Field2D& coarse) {
  const int nc = coarse.n();
  GridSpec fine{coarse.grid().halfwidth, 2 * (nc - 1) + 1};
  Field2D f(fine, Vec2{});
  for (int j = 0; j < fine.n; ++j) {
    for (int i = 0; i < fine.n; ++i) {
      const int I = i / 2, J = j / 2;
      const bool oi = (i % 2) != 0, oj = (j % 2) != 0;
      Vec2 v;
      if (!oi && !oj)
        v = coarse.at(I, J);
      else if (oi && !oj)
        v = 0.5 * (coarse.at(I, J) + coarse.at(I + 1, J));
      else if (!oi && oj)
        v = 0.5 * (coarse.at(I, J) + coarse.at(I, J + 1));
      else
        v = 0.25 * ((coarse.at(I, J) + coarse.at(I + 1, J)) + (coarse.at(I, J + 1) + coarse.at(I + 1, J + 1)));
      f.set(i, j, v);
    }
  }
  return f;
}

RelaxResult relax_nested(const GridSpec& grid, const JunctionData& jd, const Potential& p, const RelaxOptions& opt,
                         int levels, const NcgObserver& observer) {
  grid.validate();
  if (levels < 1) throw FieldError("relax_nested: levels must be >= 1");
  const int factor = 1 << (levels - 1);
  if ((grid.n - 1) % factor != 0 || (grid.n - 1) / factor < 4)
    throw FieldError("relax_nested: n - 1 must be divisible by 2^(levels - 1) with a coarse grid of >= 5 nodes");

  long offset = 0;
  NcgObserver chained;
  if (observer) chained = [&](long it, double e, double r) { observer(offset + it, e, r); };

  GridSpec coarse{grid.halfwidth, (grid.n - 1) / factor + 1};
  RelaxResult res = relax(competitor_init(coarse, jd), p, opt, chained);
  long total = res.iterations;
  for (int l = levels - 2; l >= 0; --l) {
    Field2D f = prolongate(res.field);
    for (const BoundaryValue& b : boundary_data(f.grid(), jd)) f.set(b.i, b.j, b.value);
    offset = total;
    res = relax(std::move(f), p, opt, chained);
    total += res.iterations;
  }
  res.iterations = total;
  return res;
}

Slice slice(const Field2D& f, double x) {
  const GridSpec& g = f.grid();
  const double h = g.spacing();
  const int n = g.n;
  if (!(std::abs(x) <= g.halfwidth * (1.0 + 1e-12))) throw FieldError("slice: x outside the domain");
  double pos = (x + g.halfwidth) / h;
  int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 1);
  double t = pos - i0;
  if (std::abs(t) < 1e-9) t = 0.0;
  if (i0 == n - 1) {
    if (t > 0.0) t = 0.0;
  }
  auto column_dx = [&](int i, int j) {
    if (i == 0) return (f.at(1, j) - f.at(0, j)) / h;
    if (i == n - 1) return (f.at(n - 1, j) - f.at(n - 2, j)) / h;
    return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h);
  };
  Slice s;
  s.x = x;
  s.halfwidth = g.halfwidth;
  s.values.resize(static_cast<std::size_t>(n));
  s.dx.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (t == 0.0) {
      s.values[static_cast<std::size_t>(j)] = f.at(i0, j);
      s.dx[static_cast<std::size_t>(j)] = column_dx(i0, j);
    } else {
      s.values[static_cast<std::size_t>(j)] = (1.0 - t) * f.at(i0, j) + t * f.at(i0 + 1, j);
      s.dx[static_cast<std::size_t>(j)] = (1.0 - t) * column_dx(i0, j) + t * column_dx(i0 + 1, j);
    }
  }
  return s;
}

}  // namespace tj
