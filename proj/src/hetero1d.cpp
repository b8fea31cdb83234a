#include "tj/hetero1d.hpp"

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace tj {

namespace {

// Clamped-end trapezoid discretization of J on a uniform lattice, with one
// linear gauge constraint c . ((1 - t) U_m + t U_{m+1}) = b.
class ConnectionObjective {
 public:
  ConnectionObjective(const Potential& p, std::size_t nodes, double dy, std::size_t gauge_node, double gauge_t,
                      Vec2 gauge_normal)
      : p_(p), nodes_(nodes), dy_(dy), m_(gauge_node), t_(gauge_t), c_(gauge_normal) {
    nn_ = ((1.0 - t_) * (1.0 - t_) + t_ * t_) * norm2(c_);
  }

  std::size_t size() const { return 2 * nodes_; }

  long double evaluate(std::span<const double> x, std::span<double> g) const {
    const double inv = 1.0 / dy_;
    long double grad_part = 0.0L, pot_part = 0.0L;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t k = 0; k < nodes_; ++k) {
      const Vec2 u{x[2 * k], x[2 * k + 1]};
      const auto s = p_.evaluate(u);
      const double wgt = (k == 0 || k + 1 == nodes_) ? 0.5 : 1.0;
      pot_part += wgt * s.value;
      g[2 * k] += dy_ * wgt * s.grad.x;
      g[2 * k + 1] += dy_ * wgt * s.grad.y;
      if (k + 1 < nodes_) {
        const double dx0 = x[2 * k + 2] - x[2 * k], dx1 = x[2 * k + 3] - x[2 * k + 1];
        grad_part += dx0 * dx0 + dx1 * dx1;
        g[2 * k] -= inv * dx0;
        g[2 * k + 1] -= inv * dx1;
        g[2 * k + 2] += inv * dx0;
        g[2 * k + 3] += inv * dx1;
      }
    }
    return 0.5L * grad_part / dy_ + dy_ * pot_part;
  }

  double curvature(std::span<const double> x, std::span<const double> d) const {
    long double acc = 0.0L;
    for (std::size_t k = 1; k + 1 < nodes_; ++k) {
      const Vec2 u{x[2 * k], x[2 * k + 1]};
      const Vec2 v{d[2 * k], d[2 * k + 1]};
      acc += dy_ * p_.hessian(u).quad(v);
    }
    for (std::size_t k = 0; k + 1 < nodes_; ++k) {
      const double e0 = d[2 * k + 2] - d[2 * k], e1 = d[2 * k + 3] - d[2 * k + 1];
      acc += (e0 * e0 + e1 * e1) / dy_;
    }
    return static_cast<double>(acc);
  }

  void project(std::span<double> v) const {
    v[0] = v[1] = 0.0;
    v[2 * nodes_ - 2] = v[2 * nodes_ - 1] = 0.0;
    const double w0 = 1.0 - t_, w1 = t_;
    const double proj = w0 * (c_.x * v[2 * m_] + c_.y * v[2 * m_ + 1]) +
                        w1 * (c_.x * v[2 * m_ + 2] + c_.y * v[2 * m_ + 3]);
    const double f = proj / nn_;
    v[2 * m_] -= f * w0 * c_.x;
    v[2 * m_ + 1] -= f * w0 * c_.y;
    v[2 * m_ + 2] -= f * w1 * c_.x;
    v[2 * m_ + 3] -= f * w1 * c_.y;
  }

  /// Max norm of the gradient divided by dy, i.e. of -U'' + W_u at interior
  /// nodes, with the constraint direction removed.
  double residual(std::span<const double> g) const {
    double r = 0.0;
    for (std::size_t k = 2; k + 2 < 2 * nodes_; ++k) r = std::max(r, std::abs(g[k]));
    return r / dy_;
  }

  double step_hint() const { return 1.0 / (4.0 / dy_ + dy_ * std::max(1.0, p_.c2())); }

  /// Moves x onto the constraint plane.
  void enforce(std::vector<double>& x, double b) const {
    const double w0 = 1.0 - t_, w1 = t_;
    const double val = w0 * (c_.x * x[2 * m_] + c_.y * x[2 * m_ + 1]) +
                       w1 * (c_.x * x[2 * m_ + 2] + c_.y * x[2 * m_ + 3]);
    const double f = (val - b) / nn_;
    x[2 * m_] -= f * w0 * c_.x;
    x[2 * m_ + 1] -= f * w0 * c_.y;
    x[2 * m_ + 2] -= f * w1 * c_.x;
    x[2 * m_ + 3] -= f * w1 * c_.y;
  }

 private:
  const Potential& p_;
  std::size_t nodes_;
  double dy_;
  std::size_t m_;
  double t_;
  Vec2 c_;
  double nn_;
};

constexpr double kDescentTol = 1e-4;

// Newton iterations on grad J + lambda C = 0, C.U = b, for the interior
// nodes. The KKT matrix is banded once the multiplier is ordered right after
// node m + 1. Returns the final projected residual.
double newton_polish(const Potential& p, const ConnectionObjective& obj, std::vector<double>& x, std::size_t nodes,
                     double dy, std::size_t m, double t, Vec2 c, double tol) {
  const std::size_t interior = nodes - 2;
  const auto dim = static_cast<lapack_int>(2 * interior + 1);
  // Unknown index of dof d (0/1) of node k (1..nodes-2); lambda sits after node m + 1.
  auto pos = [&](std::size_t k, int d) {
    const std::size_t base = 2 * (k - 1) + static_cast<std::size_t>(d);
    return static_cast<lapack_int>(k > m + 1 ? base + 1 : base);
  };
  const lapack_int lam = pos(m + 1, 1) + 1;
  const lapack_int kl = 4, ku = 4, ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * static_cast<std::size_t>(dim));
  std::vector<double> rhs(static_cast<std::size_t>(dim));
  std::vector<lapack_int> piv(static_cast<std::size_t>(dim));
  std::vector<double> g(2 * nodes), trial(x.size());
  auto put = [&](lapack_int r, lapack_int col, double v) {
    ab[static_cast<std::size_t>(kl + ku + r - col + col * ldab)] += v;
  };
  const double w0 = 1.0 - t, w1 = t;

  obj.evaluate(x, g);
  obj.project(g);
  double res = obj.residual(g);
  for (int it = 0; it < 30 && res > tol; ++it) {
    obj.evaluate(x, g);
    std::fill(ab.begin(), ab.end(), 0.0);
    for (std::size_t k = 1; k + 1 < nodes; ++k) {
      const Sym2 h = p.hessian({x[2 * k], x[2 * k + 1]});
      const lapack_int a = pos(k, 0), b2 = pos(k, 1);
      put(a, a, 2.0 / dy + dy * h.xx);
      put(b2, b2, 2.0 / dy + dy * h.yy);
      put(a, b2, dy * h.xy);
      put(b2, a, dy * h.xy);
      if (k + 2 < nodes) {
        for (int d = 0; d < 2; ++d) {
          put(pos(k, d), pos(k + 1, d), -1.0 / dy);
          put(pos(k + 1, d), pos(k, d), -1.0 / dy);
        }
      }
      rhs[static_cast<std::size_t>(a)] = -g[2 * k];
      rhs[static_cast<std::size_t>(b2)] = -g[2 * k + 1];
    }
    const std::array<std::pair<lapack_int, double>, 4> crow{
        {{pos(m, 0), w0 * c.x}, {pos(m, 1), w0 * c.y}, {pos(m + 1, 0), w1 * c.x}, {pos(m + 1, 1), w1 * c.y}}};
    for (const auto& [col, v] : crow) {
      put(lam, col, v);
      put(col, lam, v);
    }
    rhs[static_cast<std::size_t>(lam)] = 0.0;
    if (LAPACKE_dgbsv(LAPACK_COL_MAJOR, dim, kl, ku, 1, ab.data(), ldab, piv.data(), rhs.data(), dim) != 0) break;

    // Damped step: accept the first step length that reduces the residual.
    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-4; alpha *= 0.5) {
      trial = x;
      for (std::size_t k = 1; k + 1 < nodes; ++k) {
        trial[2 * k] += alpha * rhs[static_cast<std::size_t>(pos(k, 0))];
        trial[2 * k + 1] += alpha * rhs[static_cast<std::size_t>(pos(k, 1))];
      }
      obj.evaluate(trial, g);
      obj.project(g);
      const double r = obj.residual(g);
      if (std::isfinite(r) && r < res) {
        x.swap(trial);
        res = r;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return res;
}

struct LatticeSolution {
  std::vector<Vec2> samples;
  double energy = 0.0;
  SolverStatus status = SolverStatus::NonConverged;
  double residual = 0.0;
};

Vec2 interpolate(const std::vector<Vec2>& s, double y0, double dy, double y) {
  const double pos = (y - y0) / dy;
  if (pos <= 0.0) return s.front();
  const double last = static_cast<double>(s.size() - 1);
  if (pos >= last) return s.back();
  const auto k = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(k);
  if (k + 1 >= s.size()) return s.back();
  return (1.0 - t) * s[k] + t * s[k + 1];
}

// Where along the lattice the interpolated profile crosses the bisector of
// a_i a_j, given as a y coordinate; nullopt when it never does.
std::optional<double> gauge_crossing(const std::vector<Vec2>& s, double y0, double dy, Vec2 ai, Vec2 aj) {
  auto f = [&](Vec2 u) { return norm2(u - ai) - norm2(u - aj); };
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double f0 = f(s[k]), f1 = f(s[k + 1]);
    if (f0 == 0.0) return y0 + static_cast<double>(k) * dy;
    if ((f0 < 0.0) != (f1 < 0.0)) {
      const double t = f0 / (f0 - f1);
      return y0 + (static_cast<double>(k) + t) * dy;
    }
  }
  return std::nullopt;
}

LatticeSolution solve_on_lattice(const Potential& p, int i, int j, double y0, double dy, std::size_t nodes,
                                 const ConnectionOptions& opt, const std::vector<Vec2>* init, double init_y0,
                                 double init_dy) {
  const Vec2 ai = p.wells()[i], aj = p.wells()[j];
  const double gauge_pos = -y0 / dy;
  if (gauge_pos < 1.0 || gauge_pos > static_cast<double>(nodes) - 2.0)
    throw std::invalid_argument("lattice does not contain the gauge point y = 0");
  auto m = static_cast<std::size_t>(gauge_pos);
  if (m + 2 >= nodes) m = nodes - 3;
  const double t = gauge_pos - static_cast<double>(m);
  const Vec2 c = aj - ai;
  const double b = 0.5 * (norm2(aj) - norm2(ai));

  std::vector<double> x(2 * nodes);
  if (init != nullptr) {
    const double shift = gauge_crossing(*init, init_y0, init_dy, ai, aj).value_or(0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
      const Vec2 u = interpolate(*init, init_y0, init_dy, y0 + static_cast<double>(k) * dy + shift);
      x[2 * k] = u.x;
      x[2 * k + 1] = u.y;
    }
  } else {
    // Straight segment a_i -> a_j traversed along a tanh ramp.
    const double w = 2.0 / std::sqrt(std::max(p.c1(), 1e-12));
    for (std::size_t k = 0; k < nodes; ++k) {
      const double s = 0.5 * (1.0 + std::tanh((y0 + static_cast<double>(k) * dy) / w));
      const Vec2 u = ai + s * (aj - ai);
      x[2 * k] = u.x;
      x[2 * k + 1] = u.y;
    }
  }
  x[0] = ai.x;
  x[1] = ai.y;
  x[2 * nodes - 2] = aj.x;
  x[2 * nodes - 1] = aj.y;

  ConnectionObjective obj(p, nodes, dy, m, t, c);
  obj.enforce(x, b);
  // Descent into the minimizer's basin, then Newton on the constrained
  // Euler-Lagrange system for the last digits.
  NcgOptions nopt;
  nopt.tol = std::max(opt.tol, kDescentTol);
  nopt.max_iter = opt.max_iter;
  nopt.restart_period = 0;
  NcgResult r = minimize_ncg(obj, x, nopt);
  if (r.status != SolverStatus::NanDetected && r.residual > opt.tol) {
    std::vector<double> trial = x;
    const double rn = newton_polish(p, obj, trial, nodes, dy, m, t, c, opt.tol);
    std::vector<double> g(2 * nodes);
    const long double e = obj.evaluate(trial, g);
    obj.project(g);
    if (std::isfinite(rn) && rn < r.residual) {
      x.swap(trial);
      r.energy = e;
      r.residual = obj.residual(g);
      r.status = r.residual <= opt.tol ? SolverStatus::Converged : SolverStatus::NonConverged;
    }
  }

  LatticeSolution out;
  out.samples.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) out.samples[k] = {x[2 * k], x[2 * k + 1]};
  out.energy = static_cast<double>(r.energy);
  out.status = r.status;
  out.residual = r.residual;
  return out;
}

void check_wells(int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2) throw std::invalid_argument("well index out of range");
  if (i == j) throw std::invalid_argument("a connection needs two distinct wells");
}

}  // namespace

Profile1D solve_connection(const Potential& p, int i, int j, double L, int n, const ConnectionOptions& opt,
                           const std::optional<Profile1D>& init) {
  check_wells(i, j);
  if (!(L > 0.0)) throw std::invalid_argument("solve_connection: L must be positive");
  if (n < 5) throw std::invalid_argument("solve_connection: need at least 5 nodes");
  const double dy = 2.0 * L / (n - 1);
  const std::vector<Vec2>* init_samples = init ? &init->samples : nullptr;
  const double iy0 = init ? -init->halfwidth : 0.0;
  const double idy = init ? init->spacing() : 1.0;
  auto sol = solve_on_lattice(p, i, j, -L, dy, static_cast<std::size_t>(n), opt, init_samples, iy0, idy);

  Profile1D prof;
  prof.halfwidth = L;
  prof.samples = std::move(sol.samples);
  prof.left_well = i;
  prof.right_well = j;
  prof.sigma = sol.energy;
  if (sol.status != SolverStatus::Converged) {
    std::ostringstream os;
    os << "solve_connection(" << i + 1 << j + 1 << "): " << to_string(sol.status) << ", residual " << sol.residual;
    throw ConnectionError(os.str(), sol.status, std::move(prof), sol.residual);
  }
  return prof;
}

Profile1D lattice_connection(const Potential& p, int i, int j, double spacing, double L, int subdivisions,
                             const ConnectionOptions& opt) {
  check_wells(i, j);
  if (subdivisions < 1) throw std::invalid_argument("lattice_connection: subdivisions must be >= 1");
  const double cells = 2.0 * L / spacing;
  const auto m = static_cast<std::size_t>(std::llround(cells));
  if (std::abs(cells - static_cast<double>(m)) > 1e-9 * cells)
    throw std::invalid_argument("lattice_connection: 2L must be a multiple of the spacing");
  const std::size_t nodes = m + 1;
  const double fine = spacing / subdivisions;
  const std::size_t total = m * static_cast<std::size_t>(subdivisions) + 1;

  Profile1D prof;
  prof.halfwidth = L;
  prof.left_well = i;
  prof.right_well = j;
  prof.samples.resize(total);

  std::vector<Vec2> base;
  for (int s = 0; s < subdivisions; ++s) {
    const double offset = s * fine;
    auto sol = solve_on_lattice(p, i, j, -L + offset, spacing, nodes, opt, s == 0 ? nullptr : &base, -L, spacing);
    if (sol.status != SolverStatus::Converged) {
      std::ostringstream os;
      os << "lattice_connection sub-lattice " << s << ": " << to_string(sol.status) << ", residual " << sol.residual;
      throw ConnectionError(os.str(), sol.status, prof, sol.residual);
    }
    if (s == 0) {
      base = sol.samples;
      prof.sigma = sol.energy;
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      const std::size_t q = k * static_cast<std::size_t>(subdivisions) + static_cast<std::size_t>(s);
      if (q < total) prof.samples[q] = sol.samples[k];
    }
  }
  return prof;
}

double profile_energy(const Profile1D& prof, const Potential& p) {
  const std::size_t n = prof.size();
  if (n < 2) return 0.0;
  const double dy = prof.spacing();
  long double grad_part = 0.0L, pot_part = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const double wgt = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    pot_part += wgt * p.value(prof.samples[k]);
    if (k + 1 < n) grad_part += norm2(prof.samples[k + 1] - prof.samples[k]);
  }
  return static_cast<double>(0.5L * grad_part / dy + dy * pot_part);
}

double truncated_energy(const Profile1D& prof, const Potential& p, double s_minus, double s_plus) {
  const double L = prof.halfwidth;
  if (s_minus < -L - 1e-12 || s_plus > L + 1e-12 || s_minus > s_plus)
    throw std::invalid_argument("truncated_energy: need -L <= s_minus <= s_plus <= L");
  if (s_plus == s_minus) return 0.0;
  const double dy = prof.spacing();
  long double total = 0.0L;
  const auto n = prof.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double ya = prof.y(k), yb = prof.y(k + 1);
    const double lo = std::max(ya, s_minus), hi = std::min(yb, s_plus);
    if (hi <= lo) continue;
    const Vec2 slope = (prof.samples[k + 1] - prof.samples[k]) / dy;
    const Vec2 ulo = sample_profile(prof, lo), uhi = sample_profile(prof, hi);
    const double len = hi - lo;
    total += len * (0.5 * norm2(slope) + 0.5 * (p.value(ulo) + p.value(uhi)));
  }
  return static_cast<double>(total);
}

double equipartition_residual(const Profile1D& prof, const Potential& p) {
  const std::size_t n = prof.size();
  const double dy = prof.spacing();
  double r = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 d = (prof.samples[k + 1] - prof.samples[k - 1]) / (2.0 * dy);
    r = std::max(r, std::abs(0.5 * norm2(d) - p.value(prof.samples[k])));
  }
  return r;
}

double scheme_first_integral_residual(const Profile1D& prof, const Potential& p) {
  const std::size_t n = prof.size();
  const double dy = prof.spacing();
  double r = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 d = (prof.samples[k + 1] - prof.samples[k - 1]) / (2.0 * dy);
    const auto s = p.evaluate(prof.samples[k]);
    const double corr = dy * dy * (s.hess.quad(d) / 12.0 + norm2(s.grad) / 24.0);
    r = std::max(r, std::abs(0.5 * norm2(d) - s.value - corr));
  }
  return r;
}

double euler_lagrange_residual(const Profile1D& prof, const Potential& p) {
  const std::size_t n = prof.size();
  const double dy = prof.spacing();
  double r = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 lap = (prof.samples[k + 1] - 2.0 * prof.samples[k] + prof.samples[k - 1]) / (dy * dy);
    const Vec2 res = p.gradient(prof.samples[k]) - lap;
    r = std::max({r, std::abs(res.x), std::abs(res.y)});
  }
  return r;
}

Vec2 sample_profile(const Profile1D& prof, double y) {
  return interpolate(prof.samples, -prof.halfwidth, prof.spacing(), y);
}

namespace {

Vec2 node_derivative(const Profile1D& prof, std::size_t k) {
  const std::size_t n = prof.size();
  const double dy = prof.spacing();
  if (k == 0) return (prof.samples[1] - prof.samples[0]) / dy;
  if (k + 1 == n) return (prof.samples[n - 1] - prof.samples[n - 2]) / dy;
  return (prof.samples[k + 1] - prof.samples[k - 1]) / (2.0 * dy);
}

Vec2 node_second_derivative(const Profile1D& prof, std::size_t k) {
  const std::size_t n = prof.size();
  const double dy = prof.spacing();
  k = std::clamp<std::size_t>(k, 1, n - 2);
  return (prof.samples[k + 1] - 2.0 * prof.samples[k] + prof.samples[k - 1]) / (dy * dy);
}

template <class F>
Vec2 interpolate_nodes(const Profile1D& prof, double y, F node_value) {
  const double pos = (y + prof.halfwidth) / prof.spacing();
  const double last = static_cast<double>(prof.size() - 1);
  if (pos <= 0.0 || pos >= last) return Vec2{};
  const auto k = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(k);
  return (1.0 - t) * node_value(k) + t * node_value(std::min(k + 1, prof.size() - 1));
}

}  // namespace

Vec2 sample_derivative(const Profile1D& prof, double y) {
  return interpolate_nodes(prof, y, [&](std::size_t k) { return node_derivative(prof, k); });
}

Vec2 sample_second_derivative(const Profile1D& prof, double y) {
  return interpolate_nodes(prof, y, [&](std::size_t k) { return node_second_derivative(prof, k); });
}

SpectrumReport linearized_spectrum(const Profile1D& prof, const Potential& p, int m) {
  if (m < 1) throw std::invalid_argument("linearized_spectrum: m must be >= 1");
  const std::size_t n = prof.size();
  if (n < 4) throw std::invalid_argument("linearized_spectrum: profile too short");
  const std::size_t interior = n - 2;
  const auto dim = static_cast<lapack_int>(2 * interior);
  const lapack_int kd = 2;
  const double dy = prof.spacing();
  const double off = -1.0 / (dy * dy);
  const double diag = 2.0 / (dy * dy);

  // Upper band storage, row-major: ab[(kd + r - c) ... ] handled by LAPACKE with
  // LAPACK_COL_MAJOR and ldab = kd + 1: entry (r, c), r <= c, at ab[kd + r - c + c * ldab].
  const lapack_int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * static_cast<std::size_t>(dim), 0.0);
  auto put = [&](lapack_int r, lapack_int c, double v) {
    ab[static_cast<std::size_t>(kd + r - c + c * ldab)] = v;
  };
  for (std::size_t k = 0; k < interior; ++k) {
    const Sym2 h = p.hessian(prof.samples[k + 1]);
    const auto r0 = static_cast<lapack_int>(2 * k);
    put(r0, r0, diag + h.xx);
    put(r0 + 1, r0 + 1, diag + h.yy);
    put(r0, r0 + 1, h.xy);
    if (k + 1 < interior) {
      put(r0, r0 + 2, off);
      put(r0 + 1, r0 + 3, off);
    }
  }

  const lapack_int count = std::min<lapack_int>(m, dim);
  const std::vector<double> band = ab;
  std::vector<double> w(static_cast<std::size_t>(dim));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(dim));
  lapack_int found = 0;
  double unused = 0.0;
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', dim, kd, ab.data(), ldab, &unused, 1, 0.0,
                                         0.0, 1, count, 2.0 * LAPACKE_dlamch('S'), &found, w.data(), &unused, 1,
                                         ifail.data());
  if (info != 0 || found != count) {
    std::ostringstream os;
    os << "linearized_spectrum: eigensolver failed (info " << info << ")";
    throw std::runtime_error(os.str());
  }

  SpectrumReport rep;
  rep.eigenvalues.assign(w.begin(), w.begin() + count);

  // Ground eigenvector by inverse iteration with a banded LU of A - mu I.
  const lapack_int kl = kd, ku = kd, ldg = 2 * kl + ku + 1;
  const double gap = count > 1 ? rep.eigenvalues[1] - rep.eigenvalues[0] : 1.0;
  const double mu = rep.eigenvalues[0] - 1e-3 * std::max(gap, 1e-6);
  std::vector<double> gb(static_cast<std::size_t>(ldg) * static_cast<std::size_t>(dim), 0.0);
  for (lapack_int c = 0; c < dim; ++c) {
    for (lapack_int r = std::max<lapack_int>(0, c - kd); r <= c; ++r) {
      double v = band[static_cast<std::size_t>(kd + r - c + c * ldab)];
      if (r == c) v -= mu;
      gb[static_cast<std::size_t>(kl + ku + r - c + c * ldg)] = v;
      gb[static_cast<std::size_t>(kl + ku + c - r + r * ldg)] = v;
    }
  }
  std::vector<lapack_int> piv(static_cast<std::size_t>(dim));
  if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, dim, dim, kl, ku, gb.data(), ldg, piv.data()) != 0)
    throw std::runtime_error("linearized_spectrum: factorization for the ground mode failed");
  std::vector<double> z(static_cast<std::size_t>(dim), 1.0);
  for (int it = 0; it < 4; ++it) {
    LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', dim, kl, ku, 1, gb.data(), ldg, piv.data(), z.data(), dim);
    double zn = 0.0;
    for (double v : z) zn += v * v;
    zn = std::sqrt(zn);
    for (double& v : z) v /= zn;
  }

  // Translation mode U' on interior nodes.
  double nrm = 0.0, ov = 0.0;
  for (std::size_t k = 0; k < interior; ++k) {
    const Vec2 d = node_derivative(prof, k + 1);
    nrm += norm2(d);
    ov += d.x * z[2 * k] + d.y * z[2 * k + 1];
  }
  rep.ground_mode_overlap = nrm > 0.0 ? std::min(1.0, std::abs(ov) / std::sqrt(nrm)) : 0.0;
  return rep;
}

double tail_decay_rate(const Profile1D& prof, bool right_tail, double lo, double hi) {
  const Vec2 end = right_tail ? prof.samples.back() : prof.samples.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < prof.size(); ++k) {
    const double y = prof.y(k);
    if (right_tail ? y <= 0.0 : y >= 0.0) continue;
    const double d = distance(prof.samples[k], end);
    if (d < lo || d > hi) continue;
    const double t = std::abs(y), v = std::log(d);
    sx += t;
    sy += v;
    sxx += t * t;
    sxy += t * v;
    ++cnt;
  }
  if (cnt < 3) throw std::runtime_error("tail_decay_rate: fewer than 3 usable tail points");
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return -slope;
}

}  // namespace tj
