#include "tj/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace tj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::function<void(const std::string&)>& progress_sink() {
  static std::function<void(const std::string&)> sink;
  return sink;
}

void progress(const std::string& msg) {
  if (progress_sink()) progress_sink()(msg);
}

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Wells of ray k, clockwise side first: U_31, U_12, U_23.
constexpr std::array<std::array<int, 2>, 3> kRayPairs{{{2, 0}, {0, 1}, {1, 2}}};

std::string pair_name(int k) {
  const auto& pr = kRayPairs[static_cast<std::size_t>(k)];
  return std::to_string(pr[0] + 1) + std::to_string(pr[1] + 1);
}

std::vector<std::pair<std::string, std::string>> meta(const RunDir& dir, double sigma = kNaN) {
  std::vector<std::pair<std::string, std::string>> m{{"run_id", dir.id()}};
  if (!std::isnan(sigma)) m.emplace_back("sigma", fmt(sigma));
  return m;
}

Criterion make(std::string id, std::string name, bool pass, std::string detail) {
  return {std::move(id), std::move(name), pass ? Criterion::Status::Pass : Criterion::Status::Fail, std::move(detail)};
}

Criterion skip(std::string id, std::string name, std::string why) {
  return {std::move(id), std::move(name), Criterion::Status::Skipped, std::move(why)};
}

void write_error_record(const RunDir& dir, const std::string& stage, const std::string& status, double residual,
                        const std::string& message) {
  CsvTable t;
  t.meta = meta(dir);
  t.header = {"stage", "status", "residual", "message"};
  std::string clean = message;
  std::replace(clean.begin(), clean.end(), ',', ';');
  std::replace(clean.begin(), clean.end(), '\n', ' ');
  t.rows.push_back({stage, status, fmt(residual), clean});
  write_text(dir.path("error"), render_csv(t));
}

}  // namespace

void set_progress(std::function<void(const std::string&)> sink) { progress_sink() = std::move(sink); }

std::string to_string(Criterion::Status s) {
  switch (s) {
    case Criterion::Status::Pass:
      return "PASS";
    case Criterion::Status::Fail:
      return "FAIL";
    case Criterion::Status::Skipped:
      return "SKIPPED";
  }
  return "?";
}

Potential potential_from(const RunConfig& cfg) {
  return Potential(WellTriple{cfg.potential.wells}, cfg.potential.scale);
}

GridSpec grid_from(const RunConfig& cfg) { return GridSpec{cfg.field.Lx, cfg.field.n_2d}; }

RunDir::RunDir(const std::string& out_dir, const std::string& id) : id_(id) {
  std::filesystem::path d = std::filesystem::path(out_dir) / id;
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw IoError("cannot create run directory '" + d.string() + "': " + ec.message());
  dir_ = d.string();
}

std::string RunDir::path(const std::string& report, const std::string& ext) const {
  return (std::filesystem::path(dir_) / (id_ + "." + report + "." + ext)).string();
}

// ---------------------------------------------------------------------------
// hetero

HeteroOutcome run_hetero(const RunConfig& cfg, const RunDir& dir) {
  const Potential p = potential_from(cfg);
  HeteroOutcome out;
  out.hypotheses = check_hypotheses(p, cfg.potential.hypothesis_samples);
  const ConnectionOptions opt{cfg.profile.tol_1d, cfg.profile.max_iter};

  auto solve = [&](int i, int j, int n) {
    try {
      return solve_connection(p, i, j, cfg.profile.L, n, opt);
    } catch (const ConnectionError& e) {
      write_error_record(dir, "hetero", std::string(to_string(e.status())), e.residual(), e.what());
      throw SolverFailure(e.what());
    }
  };

  for (int k = 0; k < 3; ++k) {
    progress("hetero: solving U_" + pair_name(k));
    out.profiles[static_cast<std::size_t>(k)] = solve(kRayPairs[k][0], kRayPairs[k][1], cfg.profile.n_1d);
    out.euler_lagrange[static_cast<std::size_t>(k)] = euler_lagrange_residual(out.profiles[k], p);
  }
  const Profile1D& u31 = out.profiles[0];
  out.sigma = u31.sigma;
  double smin = out.sigma, smax = out.sigma;
  for (const auto& pr : out.profiles) {
    smin = std::min(smin, pr.sigma);
    smax = std::max(smax, pr.sigma);
  }
  out.sigma_spread = (smax - smin) / smax;
  out.equipartition = equipartition_residual(u31, p);
  out.scheme_residual = scheme_first_integral_residual(u31, p);
  out.tail_rate = tail_decay_rate(u31, true);

  progress("hetero: grid convergence");
  for (int n : cfg.profile.convergence_n) {
    const Profile1D prof = n == cfg.profile.n_1d ? u31 : solve(2, 0, n);
    ConvergenceRow row;
    row.n = n;
    row.dy = prof.spacing();
    row.sigma = prof.sigma;
    row.equipartition = equipartition_residual(prof, p);
    row.scheme_residual = scheme_first_integral_residual(prof, p);
    row.richardson = row.order = row.equipartition_ratio = kNaN;
    if (!out.convergence.empty()) {
      const ConvergenceRow& a = out.convergence.back();
      const double r = a.dy / row.dy;
      row.richardson = row.sigma + (row.sigma - a.sigma) / (r * r - 1.0);
      row.equipartition_ratio = a.equipartition / row.equipartition;
      if (out.convergence.size() >= 2) {
        const ConvergenceRow& b = out.convergence[out.convergence.size() - 2];
        const double r1 = b.dy / a.dy;
        if (std::abs(r - r1) < 1e-9 * r && std::abs(row.sigma - a.sigma) > 0.0)
          row.order = std::log(std::abs(a.sigma - b.sigma) / std::abs(row.sigma - a.sigma)) / std::log(r);
      }
    }
    out.convergence.push_back(row);
  }

  progress("hetero: linearized spectrum");
  out.spectrum = linearized_spectrum(u31, p, 4);

  for (int k = 0; k < 3; ++k) {
    const std::string name = "profile_" + pair_name(k);
    write_profile(dir.path(name, "acp1"), out.profiles[static_cast<std::size_t>(k)]);
    CsvTable t = profile_csv(out.profiles[static_cast<std::size_t>(k)]);
    t.meta.insert(t.meta.begin(), {"run_id", dir.id()});
    write_text(dir.path(name), render_csv(t));
  }
  {
    CsvTable t;
    t.meta = meta(dir, out.sigma);
    t.meta.emplace_back("relative_spread", fmt(out.sigma_spread));
    t.header = {"pair", "sigma", "euler_lagrange_residual", "equipartition_residual"};
    for (int k = 0; k < 3; ++k)
      t.rows.push_back({pair_name(k), fmt(out.profiles[k].sigma), fmt(out.euler_lagrange[k]),
                        fmt(equipartition_residual(out.profiles[k], p))});
    write_text(dir.path("sigma"), render_csv(t));
  }
  {
    CsvTable t;
    t.meta = meta(dir, out.sigma);
    t.header = {"n", "dy", "sigma", "richardson", "order", "equipartition", "equipartition_ratio", "scheme_residual"};
    for (const auto& r : out.convergence)
      t.add(r.n, r.dy, r.sigma, r.richardson, r.order, r.equipartition, r.equipartition_ratio, r.scheme_residual);
    write_text(dir.path("convergence"), render_csv(t));
  }
  {
    CsvTable t;
    t.meta = meta(dir, out.sigma);
    t.meta.emplace_back("ground_mode_overlap", fmt(out.spectrum.ground_mode_overlap));
    t.meta.emplace_back("tail_rate", fmt(out.tail_rate));
    t.header = {"index", "eigenvalue"};
    for (std::size_t k = 0; k < out.spectrum.eigenvalues.size(); ++k) t.add(k, out.spectrum.eigenvalues[k]);
    write_text(dir.path("spectrum"), render_csv(t));
  }
  {
    const HypothesisReport& h = out.hypotheses;
    CsvTable t;
    t.meta = meta(dir);
    t.header = {"check", "passed", "extreme", "witness_u1", "witness_u2"};
    t.rows.push_back({"zeros_only_at_wells", fmt(h.zeros_only_at_wells.passed), fmt(h.zeros_only_at_wells.extreme),
                      fmt(h.zeros_only_at_wells.witness.x), fmt(h.zeros_only_at_wells.witness.y)});
    t.rows.push_back({"coercivity", fmt(h.coercivity.passed), fmt(h.coercivity.extreme),
                      fmt(h.coercivity.witness.x), fmt(h.coercivity.witness.y)});
    t.rows.push_back({"comparability_c_hat", fmt(h.comparability_ok), fmt(h.c_hat), "nan", "nan"});
    t.rows.push_back({"comparability_C_hat", fmt(h.comparability_ok), fmt(h.C_hat), "nan", "nan"});
    write_text(dir.path("hypotheses"), render_csv(t));
  }
  return out;
}

std::optional<std::array<Profile1D, 3>> load_profiles(const RunDir& dir) {
  std::array<Profile1D, 3> out;
  for (int k = 0; k < 3; ++k) {
    const std::string path = dir.path("profile_" + pair_name(k), "acp1");
    if (!std::filesystem::exists(path)) return std::nullopt;
    out[static_cast<std::size_t>(k)] = read_profile(path);
    const auto& pr = kRayPairs[static_cast<std::size_t>(k)];
    if (out[k].left_well != pr[0] || out[k].right_well != pr[1])
      throw IoError(path + ": profile connects the wrong wells");
  }
  return out;
}

JunctionData junction_from(const RunConfig& cfg, const Potential& p, const std::array<Profile1D, 3>& profiles) {
  JunctionData jd;
  jd.triod = TriodGeometry{{0.0, 0.0}, cfg.field.theta};
  jd.profiles = profiles;
  jd.wells = p.wells();
  jd.interface_width = p.interface_width();
  return jd;
}

// ---------------------------------------------------------------------------
// competitor and relax

CompetitorOutcome run_competitor(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, double sigma,
                                 const RunDir& dir) {
  const Potential p = potential_from(cfg);
  const JunctionData jd = junction_from(cfg, p, profiles);
  CompetitorOutcome out;
  out.field = competitor_init(grid_from(cfg), jd);
  out.discrete_energy = static_cast<double>(discrete_energy(out.field, p));
  std::vector<ShapeSpec> shapes;
  for (double R : cfg.diagnostics.radii) shapes.push_back({ShapeSpec::Kind::Disk, R});
  out.growth = energy_growth(out.field, p, shapes, sigma, jd.triod);
  write_checkpoint(dir.path("competitor", "acf2"), out.field);
  CsvTable t;
  t.meta = meta(dir, sigma);
  t.meta.emplace_back("discrete_energy", fmt(out.discrete_energy));
  t.header = {"shape", "R", "energy", "excess"};
  for (const auto& r : out.growth) t.rows.push_back({r.shape, fmt(r.R), fmt(r.energy), fmt(r.excess)});
  write_text(dir.path("competitor"), render_csv(t));
  return out;
}

RelaxOutcome run_relax(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, const RunDir& dir,
                       const std::optional<std::string>& resume) {
  const Potential p = potential_from(cfg);
  const GridSpec grid = grid_from(cfg);
  grid.validate();
  const JunctionData jd = junction_from(cfg, p, profiles);
  RelaxOutcome out;
  const Field2D competitor = competitor_init(grid, jd);
  out.competitor_energy = static_cast<double>(discrete_energy(competitor, p));

  RelaxOptions opt;
  opt.tol = cfg.field.tol_2d;
  opt.max_iter = cfg.field.max_iter;
  opt.restart_period = cfg.field.restart_period;
  opt.symmetrize = cfg.field.symmetrize;

  struct LogRow {
    long it;
    double e, r;
  };
  std::vector<LogRow> log;
  auto observer = [&](long it, double e, double r) {
    log.push_back({it, e, r});
    if (it % 500 == 0) progress("relax: iteration " + std::to_string(it) + " energy " + num(e, 12) + " residual " + num(r, 4));
  };

  Field2D start;
  if (resume) {
    start = read_checkpoint(*resume);
    if (!(start.grid() == grid))
      throw IoError(*resume + ": checkpoint grid (n = " + std::to_string(start.n()) + ") does not match the config");
    out.resumed = true;
  } else {
    start = competitor;
  }
  out.start_energy = static_cast<double>(discrete_energy(start, p));
  log.push_back({0, out.start_energy, residual(start, p).max_norm});

  progress("relax: n = " + std::to_string(grid.n) + ", Lx = " + num(grid.halfwidth) + (resume ? " (resumed)" : ""));
  try {
    if (!resume && cfg.field.levels > 1)
      out.result = relax_nested(grid, jd, p, opt, cfg.field.levels, observer);
    else
      out.result = relax(std::move(start), p, opt, observer);
  } catch (const FieldError& e) {
    write_error_record(dir, "relax", "FieldError", kNaN, e.what());
    throw SolverFailure(e.what());
  }
  const RelaxResult& r = out.result;
  write_checkpoint(dir.path("field", "acf2"), r.field);

  CsvTable t;
  t.meta = meta(dir);
  t.header = {"iteration", "energy", "residual"};
  for (const auto& row : log) t.add(row.it, row.e, row.r);
  write_text(dir.path("energy_log"), render_csv(t));

  CsvTable s;
  s.meta = meta(dir);
  s.header = {"key", "value"};
  s.rows.push_back({"status", std::string(to_string(r.status))});
  s.rows.push_back({"iterations", fmt(r.iterations)});
  s.rows.push_back({"residual", fmt(r.residual)});
  s.rows.push_back({"competitor_energy", fmt(out.competitor_energy)});
  s.rows.push_back({"start_energy", fmt(out.start_energy)});
  s.rows.push_back({"final_energy", fmt(r.energy)});
  s.rows.push_back({"resumed", fmt(out.resumed)});
  write_text(dir.path("relax"), render_csv(s));

  if (r.status != SolverStatus::Converged) {
    const std::string msg = "relax: " + std::string(to_string(r.status)) + " after " + std::to_string(r.iterations) +
                            " iterations, residual " + num(r.residual, 4);
    write_error_record(dir, "relax", std::string(to_string(r.status)), r.residual, msg);
    throw SolverFailure(msg);
  }
  progress("relax: converged in " + std::to_string(r.iterations) + " iterations, energy " + num(r.energy, 12));
  return out;
}

// ---------------------------------------------------------------------------
// diagnose

FieldDiagnostics diagnose_field(const RunConfig& cfg, const Field2D& f, const std::array<Profile1D, 3>& profiles,
                                double sigma, double tail_rate) {
  const Potential p = potential_from(cfg);
  const auto& dc = cfg.diagnostics;
  const GridSpec& g = f.grid();
  FieldDiagnostics d;
  d.Lx = g.halfwidth;
  d.n = g.n;
  d.sigma = sigma;
  d.interface_width = p.interface_width();
  d.tail_rate = tail_rate;
  auto guard = [&](const std::string& stage, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      d.skipped.emplace_back(stage, e.what());
    }
  };

  progress("diagnose: interface");
  TriodGeometry frame{{0.0, 0.0}, cfg.field.theta};
  guard("interface", [&] {
    d.localization = interface_report(f, p, dc.delta, dc.radii);
    frame = d.localization->triod;
  });
  d.frame = frame;

  progress("diagnose: energy growth");
  std::vector<ShapeSpec> shapes;
  for (double R : dc.radii) shapes.push_back({ShapeSpec::Kind::Disk, R});
  for (double R : dc.triangle_radii) shapes.push_back({ShapeSpec::Kind::Triangle, R});
  for (const ShapeSpec& s : shapes) {
    guard("energy_growth", [&] {
      const auto rows = energy_growth(f, p, {s}, sigma, frame);
      d.growth.insert(d.growth.end(), rows.begin(), rows.end());
    });
  }

  progress("diagnose: equipartition and deformation");
  guard("equipartition", [&] { d.equipartition = equipartition_report(f, p, dc.equipartition_radii); });
  guard("deformation", [&] { d.deformation = global_deformation(f, p, dc.strip_radii, sigma, frame); });
  guard("hamiltonian", [&] { d.hamiltonian = hamiltonian_profile(f, p, dc.xs, sigma); });

  progress("diagnose: slices");
  guard("slices", [&] {
    const ConnectionOptions opt{cfg.profile.tol_1d, cfg.profile.max_iter};
    const Profile1D ref = lattice_connection(p, 2, 0, g.spacing(), dc.lattice_L, dc.lattice_subdivisions, opt);
    d.slices = slice_analysis(f, p, ref, dc.xs, dc.eps, ref.sigma);
    guard("h_prime", [&] { d.h_prime = h_prime_check(f, ref, dc.h_prime_x, 2.0 * g.spacing()); });
  });

  progress("diagnose: decay and maximum principle");
  guard("decay", [&] {
    d.decay = decay_fit(f, p, frame, RaySpec{frame.center, frame.theta + std::numbers::pi}, 1e-6, dc.delta);
  });

  const double inner = g.inner_radius();
  const double half = 0.1 * inner;
  const double r = std::min(0.1, 0.5 * dc.r0);
  auto square = [&](Vec2 c) { return Region::rectangle(c.x - half, c.x + half, c.y - half, c.y + half); };
  for (int k = 0; k < 3; ++k) {
    const Vec2 c = frame.center + 0.5 * inner * unit_at_angle(frame.theta + (2 * k + 1) * std::numbers::pi / 3.0);
    guard("maxprinciple", [&] {
      d.max_principle.push_back({"sector_" + std::to_string(k + 1), k, square(c),
                                 max_principle_check(f, p.wells(), square(c), k, r)});
    });
  }
  {
    const Vec2 c = frame.center + 0.5 * inner * unit_at_angle(frame.theta);
    guard("maxprinciple", [&] {
      d.max_principle.push_back({"straddle_31", 0, square(c), max_principle_check(f, p.wells(), square(c), 0, r)});
    });
  }
  (void)profiles;
  return d;
}

void write_diagnostics(const FieldDiagnostics& d, const RunDir& dir) {
  auto status_of = [&](const std::string& stage) -> std::string {
    for (const auto& [s, m] : d.skipped)
      if (s == stage) {
        std::string clean = m;
        std::replace(clean.begin(), clean.end(), '\n', ' ');
        return "SKIPPED: " + clean;
      }
    return "OK";
  };
  auto base = [&](const std::string& stage) {
    CsvTable t;
    t.meta = meta(dir, d.sigma);
    t.meta.emplace_back("status", status_of(stage));
    return t;
  };
  {
    CsvTable t = base("energy_growth");
    t.header = {"shape", "R", "energy", "excess"};
    for (const auto& r : d.growth) t.rows.push_back({r.shape, fmt(r.R), fmt(r.energy), fmt(r.excess)});
    write_text(dir.path("energy_growth"), render_csv(t));
  }
  {
    CsvTable t = base("equipartition");
    t.meta.emplace_back("three_sigma_over_2", fmt(1.5 * d.sigma));
    t.header = {"R", "potential_over_R", "gradient_over_2R", "tangential_over_2R", "annulus_radial_over_R",
                "annulus_radial_fraction", "annulus_defect_over_R"};
    for (const auto& r : d.equipartition)
      t.add(r.R, r.potential_over_R, r.gradient_over_2R, r.tangential_over_2R, r.annulus_radial_over_R,
            r.annulus_radial_fraction, r.annulus_defect_over_R);
    write_text(dir.path("equipartition"), render_csv(t));
  }
  {
    CsvTable t = base("deformation");
    t.meta.emplace_back("frame_cx", fmt(d.frame.center.x));
    t.meta.emplace_back("frame_cy", fmt(d.frame.center.y));
    t.meta.emplace_back("frame_theta", fmt(d.frame.theta));
    t.header = {"radial_total", "horizontal_total", "horizontal_origin"};
    if (d.deformation)
      t.add(d.deformation->radial_total, d.deformation->horizontal_total, d.deformation->horizontal_origin);
    write_text(dir.path("deformation"), render_csv(t));
    CsvTable s = base("deformation");
    s.header = {"R", "energy", "excess"};
    if (d.deformation)
      for (const auto& r : d.deformation->strips) s.add(r.R, r.energy, r.excess);
    write_text(dir.path("strips"), render_csv(s));
  }
  {
    CsvTable t = base("hamiltonian");
    t.header = {"x", "G", "H", "G_rel_dev", "H_rel"};
    for (const auto& r : d.hamiltonian) t.add(r.x, r.G, r.H, r.G_rel_dev, r.H_rel);
    write_text(dir.path("hamiltonian"), render_csv(t));
  }
  {
    CsvTable t = base("interface");
    t.header = {"delta", "cx", "cy", "theta", "max_dist", "count"};
    CsvTable w = base("interface");
    w.header = {"x", "width", "count"};
    CsvTable th = base("interface");
    th.header = {"R", "theta", "cx", "cy", "count"};
    if (d.localization) {
      const auto& L = *d.localization;
      t.add(L.delta, L.triod.center.x, L.triod.center.y, L.triod.theta, L.max_dist, L.count);
      for (const auto& r : L.width_by_x) w.add(r.x, r.width, r.count);
      for (const auto& r : L.theta_by_R) th.add(r.R, r.theta, r.center.x, r.center.y, r.count);
    }
    write_text(dir.path("interface"), render_csv(t));
    write_text(dir.path("interface_width"), render_csv(w));
    write_text(dir.path("interface_theta"), render_csv(th));
  }
  {
    CsvTable t = base("slices");
    if (d.slices) {
      const auto& s = d.slices->summary;
      t.meta.emplace_back("sigma_ref", fmt(s.sigma_ref));
      t.meta.emplace_back("badset_measure", fmt(s.badset_measure));
      t.meta.emplace_back("h_total_variation", fmt(s.h_total_variation));
      t.meta.emplace_back("h_limit", fmt(s.h_limit));
      t.meta.emplace_back("alpha_hat", fmt(s.alpha_hat));
      t.meta.emplace_back("excess_total", fmt(s.excess_total));
    }
    t.header = {"x", "J", "d0", "h", "orth_residual", "orth_certified", "G", "H", "sup_dev", "sup_dev_grad",
                "h1_dist", "in_bad_set", "bracket_hit", "shift_optimal"};
    if (d.slices)
      for (const auto& r : d.slices->rows)
        t.add(r.x, r.J, r.d0, r.h, r.orth_residual, r.orth_certified, r.G, r.H, r.sup_dev, r.sup_dev_grad, r.h1_dist,
              r.in_bad_set, r.bracket_hit, r.shift_optimal);
    write_text(dir.path("slices"), render_csv(t));
  }
  {
    CsvTable t = base("h_prime");
    if (status_of("h_prime") == "OK" && status_of("slices") != "OK") t.meta.back().second = status_of("slices");
    t.header = {"x", "dx", "fd", "formula", "abs_diff", "denominator", "denominator_ok"};
    if (d.h_prime) {
      const auto& h = *d.h_prime;
      t.add(h.x, h.dx, h.fd, h.formula, h.abs_diff, h.denominator, h.denominator_ok);
    }
    write_text(dir.path("hprime"), render_csv(t));
  }
  {
    CsvTable t = base("decay");
    t.meta.emplace_back("tail_rate_1d", fmt(d.tail_rate));
    t.header = {"origin_x", "origin_y", "angle", "K", "k", "k_stderr", "rms_log_residual", "count", "lo", "hi"};
    if (d.decay) {
      const auto& f = *d.decay;
      t.add(f.ray.origin.x, f.ray.origin.y, f.ray.angle, f.K, f.k, f.k_stderr, f.rms_log_residual, f.count, f.lo,
            f.hi);
    }
    write_text(dir.path("decay"), render_csv(t));
  }
  {
    CsvTable t = base("maxprinciple");
    t.header = {"label", "well", "xmin", "xmax", "ymin", "ymax", "hypothesis_met", "holds", "max_boundary_deviation",
                "max_interior_deviation"};
    for (const auto& r : d.max_principle) {
      const auto b = r.rect.bounds();
      t.rows.push_back({r.label, fmt(r.well + 1), fmt(b[0]), fmt(b[1]), fmt(b[2]), fmt(b[3]),
                        fmt(r.result.hypothesis_met), fmt(r.result.holds), fmt(r.result.max_boundary_deviation),
                        fmt(r.result.max_interior_deviation)});
    }
    write_text(dir.path("maxprinciple"), render_csv(t));
  }
}

// ---------------------------------------------------------------------------
// Acceptance rows

std::vector<Criterion> hetero_criteria(const HeteroOutcome& h) {
  std::vector<Criterion> rows;
  {
    double order = kNaN, rich = kNaN;
    for (const auto& r : h.convergence) {
      if (!std::isnan(r.order)) order = r.order;
      if (!std::isnan(r.richardson)) rich = r.richardson;
    }
    const bool spread_ok = h.sigma_spread <= 1e-6;
    const bool order_ok = !std::isnan(order) && order >= 1.8;
    rows.push_back(make("sigma", "sigma consistency", spread_ok && order_ok,
                        "spread " + num(h.sigma_spread, 3) + " (<= 1e-6), observed order " + num(order, 4) +
                            " (>= 1.8), sigma " + num(h.sigma, 12) + ", Richardson " + num(rich, 12)));
  }
  {
    double at2001 = kNaN;
    bool ratios_ok = true;
    std::string ratios;
    for (const auto& r : h.convergence) {
      if (r.n == 2001) at2001 = r.equipartition;
      if (!std::isnan(r.equipartition_ratio)) {
        ratios += (ratios.empty() ? "" : " ") + num(r.equipartition_ratio, 4);
        ratios_ok = ratios_ok && r.equipartition_ratio >= 3.5 && r.equipartition_ratio <= 4.5;
      }
    }
    if (std::isnan(at2001))
      rows.push_back(skip("equipartition_1d", "1D equipartition", "n = 2001 not in profile.convergence_n"));
    else
      rows.push_back(make("equipartition_1d", "1D equipartition", at2001 <= 1e-4 && ratios_ok && !ratios.empty(),
                          "residual at n = 2001 " + num(at2001, 4) + " (<= 1e-4), doubling ratios [" + ratios +
                              "] (in [3.5, 4.5])"));
  }
  {
    const auto& ev = h.spectrum.eigenvalues;
    if (ev.size() < 2) {
      rows.push_back(skip("nondegeneracy", "non-degeneracy", "fewer than two eigenvalues"));
    } else {
      const bool ok = std::abs(ev[0]) <= 1e-3 && h.spectrum.ground_mode_overlap >= 0.999 && ev[1] >= 10.0 * std::abs(ev[0]) &&
                      ev[1] > 0.0;
      rows.push_back(make("nondegeneracy", "non-degeneracy", ok,
                          "lambda0 " + num(ev[0], 3) + " (|.| <= 1e-3), overlap " +
                              num(h.spectrum.ground_mode_overlap, 8) + " (>= 0.999), lambda1 " + num(ev[1], 6) +
                              " (>= 10 |lambda0|)"));
    }
  }
  return rows;
}

namespace {

std::string skipped_reason(const FieldDiagnostics& d, const std::string& stage) {
  for (const auto& [s, m] : d.skipped)
    if (s == stage) return stage + " skipped: " + m;
  return stage + " unavailable";
}

}  // namespace

std::vector<Criterion> field_criteria(const FieldDiagnostics& d) {
  std::vector<Criterion> rows;
  const double s = d.sigma;
  const std::string tag = " (Lx " + num(d.Lx) + ")";

  // Equipartition at R = 20 and the annulus radial fraction.
  {
    const EquipartitionRow* at20 = nullptr;
    for (const auto& r : d.equipartition)
      if (std::abs(r.R - 20.0) < 1e-9) at20 = &r;
    if (!at20) {
      rows.push_back(skip("equipartition_2d", "equipartition" + tag, "R = 20 not among equipartition radii"));
    } else {
      const double ref = 1.5 * s;
      const double dp = at20->potential_over_R / ref - 1.0;
      const double dg = at20->gradient_over_2R / ref - 1.0;
      std::string fr;
      bool dec = true, small = true;
      double prev = std::numeric_limits<double>::infinity();
      int count = 0;
      for (const auto& r : d.equipartition) {
        if (std::isnan(r.annulus_radial_fraction)) continue;
        fr += (fr.empty() ? "" : " ") + num(r.annulus_radial_fraction, 3);
        small = small && r.annulus_radial_fraction <= 0.05;
        dec = dec && r.annulus_radial_fraction < prev;
        prev = r.annulus_radial_fraction;
        ++count;
      }
      const bool ok = std::abs(dp) <= 0.05 && std::abs(dg) <= 0.05 && small && dec && count >= 2;
      rows.push_back(make("equipartition_2d", "equipartition" + tag, ok,
                          "R = 20: potential/R rel dev " + num(dp, 3) + ", Dirichlet/(2R) rel dev " + num(dg, 3) +
                              " (|.| <= 0.05); annulus radial fractions [" + fr + "] (<= 0.05, decreasing)"));
    }
  }

  // Hamiltonian identities on x in [5, 25].
  {
    double gmax = 0.0, hmax = 0.0;
    int count = 0;
    for (const auto& r : d.hamiltonian) {
      if (r.x < 5.0 - 1e-9 || r.x > 25.0 + 1e-9) continue;
      gmax = std::max(gmax, std::abs(r.G_rel_dev));
      hmax = std::max(hmax, std::abs(r.H_rel));
      ++count;
    }
    if (count == 0)
      rows.push_back(skip("hamiltonian", "Hamiltonian identities" + tag, "no slice x in [5, 25]"));
    else
      rows.push_back(make("hamiltonian", "Hamiltonian identities" + tag, gmax <= 0.03 && hmax <= 0.03,
                          "max |G/sigma - 1| " + num(gmax, 3) + ", max |H|/sigma " + num(hmax, 3) + " (<= 0.03) over " +
                              std::to_string(count) + " slices"));
  }

  // Slice convergence.
  if (!d.slices) {
    rows.push_back(skip("slices", "slice convergence" + tag, skipped_reason(d, "slices")));
  } else {
    const SliceRow *r5 = nullptr, *r25 = nullptr;
    double tv = 0.0;
    const SliceRow* prev = nullptr;
    for (const auto& r : d.slices->rows) {
      if (std::abs(r.x - 5.0) < 1e-9) r5 = &r;
      if (std::abs(r.x - 25.0) < 1e-9) r25 = &r;
      if (r.x >= 15.0 - 1e-9 && r.x <= 25.0 + 1e-9) {
        if (prev) tv += std::abs(r.h - prev->h);
        prev = &r;
      }
    }
    if (!r5 || !r25) {
      rows.push_back(skip("slices", "slice convergence" + tag, "xs must contain 5 and 25"));
    } else {
      const bool ok = r25->d0 <= 0.5 * r5->d0 && tv <= 0.1 * d.interface_width && r25->sup_dev <= 0.05;
      rows.push_back(make("slices", "slice convergence" + tag, ok,
                          "d0(25)/d0(5) " + num(r25->d0 / r5->d0, 4) + " (<= 0.5), TV h on [15, 25] " + num(tv, 3) +
                              " (<= " + num(0.1 * d.interface_width, 4) + "), sup_dev(25) " + num(r25->sup_dev, 3) +
                              " (<= 0.05)"));
    }
  }

  // h' identity on the relaxed field.
  if (!d.h_prime) {
    rows.push_back(skip("h_prime", "h' identity on the relaxed field" + tag,
                        skipped_reason(d, d.slices ? "h_prime" : "slices")));
  } else {
    const auto& h = *d.h_prime;
    const double tol = 1e-2 * (std::abs(h.fd) + 1e-3);
    rows.push_back(make("h_prime", "h' identity on the relaxed field" + tag, h.abs_diff <= tol && h.denominator_ok,
                        "x " + num(h.x) + ": fd " + num(h.fd, 4) + ", formula " + num(h.formula, 4) + ", |diff| " +
                            num(h.abs_diff, 3) + " (<= " + num(tol, 3) + ")" +
                            (h.denominator_ok ? "" : ", denominator below 1/2 ||U'||^2")));
  }

  // Decay on the D_2 bisector.
  if (!d.decay) {
    rows.push_back(skip("decay", "decay on the D_2 bisector" + tag, skipped_reason(d, "decay")));
  } else {
    const auto& f = *d.decay;
    const double rel = f.k / d.tail_rate - 1.0;
    rows.push_back(make("decay", "decay on the D_2 bisector" + tag,
                        f.k > 0.0 && f.rms_log_residual <= 0.2 && std::abs(rel) <= 0.3,
                        "k " + num(f.k, 4) + " vs 1D tail rate " + num(d.tail_rate, 4) + " (rel " + num(rel, 3) +
                            ", |.| <= 0.3), rms log residual " + num(f.rms_log_residual, 3) + " (<= 0.2), " +
                            std::to_string(f.count) + " nodes"));
  }
  return rows;
}

namespace {

// max |E - 3 sigma R| over the shapes of one kind.
double growth_constant(const FieldDiagnostics& d, const std::string& shape, std::string& radii) {
  double c = kNaN;
  for (const auto& r : d.growth) {
    if (r.shape != shape) continue;
    c = std::isnan(c) ? std::abs(r.excess) : std::max(c, std::abs(r.excess));
    radii += (radii.empty() ? "" : " ") + num(r.R);
  }
  return c;
}

}  // namespace

// Relative spread of the growth constants allowed across Lx.
constexpr double kGrowthSpread = 0.25;

std::vector<Criterion> study_criteria(const std::vector<FieldDiagnostics>& scaling,
                                      const std::optional<FieldDiagnostics>& doubled) {
  std::vector<Criterion> rows;
  const std::string growth_name = "sharp energy growth";
  if (scaling.size() < 2) {
    rows.push_back(skip("growth", growth_name, "needs relaxed fields at two or more Lx"));
  } else {
    for (const std::string shape : {"disk", "triangle"}) {
      // Small domains may have no shape of this kind inside their inner disk.
      std::string detail;
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      int used = 0;
      for (const auto& d : scaling) {
        std::string radii;
        const double c = growth_constant(d, shape, radii);
        if (std::isnan(c)) {
          detail += (detail.empty() ? "" : "; ") + std::string("Lx ") + num(d.Lx) + ": no " + shape + " fits";
          continue;
        }
        detail += (detail.empty() ? "" : "; ") + std::string("Lx ") + num(d.Lx) + ": C " + num(c, 4) + " over R [" +
                  radii + "]";
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        ++used;
      }
      if (used < 2) {
        rows.push_back(skip("growth", growth_name + " (" + shape + ")", "fewer than two runs with " + shape + " rows: " + detail));
        continue;
      }
      const double spread = (hi - lo) / hi;
      rows.push_back(make("growth", growth_name + " (" + shape + ")", spread <= kGrowthSpread,
                          detail + "; relative spread " + num(spread, 3) + " (<= " + num(kGrowthSpread, 2) + ")"));
    }
  }

  const std::string hname = "horizontal deformation";
  {
    bool have = scaling.size() >= 2;
    for (const auto& d : scaling) have = have && d.deformation.has_value();
    if (!have) {
      rows.push_back(skip("horizontal", hname + " vs Lx", "needs deformation reports at two or more Lx"));
    } else {
      std::string detail;
      bool ok = true;
      for (std::size_t k = 0; k < scaling.size(); ++k) {
        const double H = scaling[k].deformation->horizontal_total;
        detail += (k ? "; " : "") + std::string("Lx ") + num(scaling[k].Lx) + ": " + num(H, 5);
        ok = ok && std::isfinite(H);
        if (k > 0) ok = ok && H <= 1.1 * scaling[k - 1].deformation->horizontal_total;
      }
      rows.push_back(make("horizontal", hname + " vs Lx", ok, detail + " (each <= 1.1 x the previous)"));
    }
    const FieldDiagnostics* base = nullptr;
    if (doubled)
      for (const auto& d : scaling)
        if (std::abs(d.Lx - doubled->Lx) < 1e-9) base = &d;
    if (!doubled || !base || !base->deformation || !doubled->deformation) {
      rows.push_back(skip("horizontal", hname + " under grid doubling", "needs the grid-doubling run"));
    } else {
      const double a = base->deformation->horizontal_total, b = doubled->deformation->horizontal_total;
      const double rel = b / a - 1.0;
      rows.push_back(make("horizontal", hname + " under grid doubling", std::abs(rel) <= 0.1,
                          "n " + std::to_string(base->n) + ": " + num(a, 5) + ", n " + std::to_string(doubled->n) +
                              ": " + num(b, 5) + " (rel " + num(rel, 3) + ", |.| <= 0.1)"));
    }
  }

  {
    const FieldDiagnostics *a = nullptr, *b = nullptr;
    for (const auto& d : scaling) {
      if (std::abs(d.Lx - 40.0) < 1e-9) a = &d;
      if (std::abs(d.Lx - 80.0) < 1e-9) b = &d;
    }
    if (!a || !b || !a->localization || !b->localization) {
      rows.push_back(skip("localization", "localization", "needs interface reports at Lx = 40 and 80"));
    } else {
      const double diff = b->localization->max_dist - a->localization->max_dist;
      rows.push_back(make("localization", "localization", std::abs(diff) <= a->interface_width,
                          "max_dist Lx 40: " + num(a->localization->max_dist, 4) + ", Lx 80: " +
                              num(b->localization->max_dist, 4) + " (|diff| " + num(std::abs(diff), 3) + " <= " +
                              num(a->interface_width, 4) + ")"));
    }
  }
  return rows;
}

std::vector<Criterion> oracle_criteria(const Potential& p, const GridSpec& grid, const Profile1D& u31,
                                       double tail_rate) {
  std::vector<Criterion> rows;
  const std::string id = "oracles";
  const WellTriple& w = p.wells();
  const double sigma = u31.sigma;
  const double inner = grid.inner_radius();
  const double R = 0.5 * inner;

  // Constant well: every energy vanishes, Gamma_delta is empty, decay has no points.
  {
    const Field2D f(grid, w[0]);
    const auto growth = energy_growth(f, p, {{ShapeSpec::Kind::Disk, R}, {ShapeSpec::Kind::Triangle, 0.4 * inner}},
                                      sigma, TriodGeometry{});
    const auto ham = hamiltonian_profile(f, p, {R}, sigma);
    const auto def = global_deformation(f, p, {R}, sigma);
    bool gamma_empty = false, decay_empty = false;
    try {
      interface_report(f, p, 0.3);
    } catch (const DiagnosticError&) {
      gamma_empty = true;
    }
    try {
      decay_fit(f, p, TriodGeometry{}, RaySpec{{}, std::numbers::pi});
    } catch (const DiagnosticError&) {
      decay_empty = true;
    }
    const auto mp = max_principle_check(f, w, Region::rectangle(-R, R, -R, R), 0, 1e-3);
    const bool ok = growth[0].energy == 0.0 && growth[1].energy == 0.0 && ham[0].G == 0.0 && ham[0].H == 0.0 &&
                    def.horizontal_total == 0.0 && def.radial_total == 0.0 && gamma_empty && decay_empty &&
                    mp.hypothesis_met && mp.holds;
    rows.push_back(make(id, "oracle: constant well", ok,
                        "E(B_R) " + num(growth[0].energy) + ", E(S_R) " + num(growth[1].energy) + ", G " +
                            num(ham[0].G) + ", H " + num(ham[0].H) + ", Gamma empty " + fmt(gamma_empty) +
                            ", decay rejected " + fmt(decay_empty) + ", max principle " + fmt(mp.holds)));
  }

  // Exact 1D field u = U_31(y).
  {
    const Field2D f = Field2D::from_function(grid, [&](Vec2 z) { return sample_profile(u31, z.y); });
    const auto ham = hamiltonian_profile(f, p, {R}, sigma);
    const auto def = global_deformation(f, p, {}, sigma);
    const auto sl = slice_analysis(f, p, u31, {R}, 0.1, sigma);
    const auto hp = h_prime_check(f, u31, R, 2.0 * grid.spacing());
    // A triod whose other two rays are far away: the distance is |y|.
    const TriodGeometry line{{-1e4, 0.0}, 0.0};
    const DecayFit fit = decay_fit(f, p, line, RaySpec{{0.0, 0.0}, 0.5 * std::numbers::pi}, 1e-6, 0.1);
    const double g_dev = std::abs(ham[0].G / sigma - 1.0);
    const double k_dev = std::abs(fit.k / tail_rate - 1.0);
    // O(h^2) quadrature of the sampled profile on the field grid.
    const double quad_tol = 0.25 * grid.spacing() * grid.spacing();
    const bool ok = g_dev <= quad_tol && ham[0].H == 0.0 && def.horizontal_total == 0.0 && def.radial_total > 0.0 &&
                    sl.rows[0].d0 <= 1e-8 && std::abs(sl.rows[0].h) <= 1e-8 && hp.fd == 0.0 && hp.formula == 0.0 &&
                    k_dev <= 0.1;
    rows.push_back(make(id, "oracle: exact U_31(y)", ok,
                        "|G/sigma - 1| " + num(g_dev, 3) + " (<= " + num(quad_tol, 3) + "), H " + num(ham[0].H) +
                            ", horizontal " + num(def.horizontal_total) + ", radial " + num(def.radial_total, 4) +
                            ", d0 " + num(sl.rows[0].d0, 3) + ", h " + num(sl.rows[0].h, 3) + ", h' fd " + num(hp.fd) +
                            " formula " + num(hp.formula) + ", decay k/k_1D - 1 " + num(k_dev, 3) + " (<= 0.1)"));
  }

  // Shifted profile u = U_31(y - 0.7).
  {
    const Field2D f = Field2D::from_function(grid, [&](Vec2 z) { return sample_profile(u31, z.y - 0.7); });
    const ShiftFit fit = optimal_shift(slice(f, R), u31, 0.5 * grid.halfwidth);
    const double orth_tol = 1e-6 * std::sqrt(sigma);  // ||U'||^2 = sigma by equipartition
    const bool ok = fit.d0 <= 1e-8 && std::abs(fit.h - 0.7) <= 1e-8 && std::abs(fit.orth_residual) <= orth_tol;
    rows.push_back(make(id, "oracle: shifted U_31(y - 0.7)", ok,
                        "h " + num(fit.h, 10) + " (0.7), d0 " + num(fit.d0, 3) + ", orth residual " +
                            num(fit.orth_residual, 3)));
  }

  // Translating profile u = U_31(y - 0.01 x): h(x) = 0.01 x.
  {
    const Field2D f = Field2D::from_function(grid, [&](Vec2 z) { return sample_profile(u31, z.y - 0.01 * z.x); });
    const auto hp = h_prime_check(f, u31, std::min(15.0, R), 2.0 * grid.spacing());
    const bool ok = hp.abs_diff <= 1e-2 && std::abs(hp.fd / 0.01 - 1.0) <= 0.05 && std::abs(hp.formula / 0.01 - 1.0) <= 0.05;
    rows.push_back(make("h_prime", "h' identity on the translating profile", ok,
                        "fd " + num(hp.fd, 6) + ", formula " + num(hp.formula, 6) + " (0.01 within 5%), |diff| " +
                            num(hp.abs_diff, 3) + " (<= 1e-2)"));
  }
  return rows;
}

int write_summary(const std::vector<Criterion>& rows, const RunDir& dir) {
  CsvTable t;
  t.meta = meta(dir);
  t.header = {"id", "criterion", "status", "detail"};
  int failed = 0;
  for (const auto& r : rows) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::string name = r.name;
    std::replace(name.begin(), name.end(), ',', ';');
    t.rows.push_back({r.id, name, to_string(r.status), detail});
    if (r.status == Criterion::Status::Fail) ++failed;
  }
  write_text(dir.path("summary"), render_csv(t));
  return failed;
}

FieldDiagnostics run_diagnose(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, const Field2D& f,
                              const RunDir& dir, std::vector<Criterion>* rows) {
  const Potential p = potential_from(cfg);
  const double sigma = profile_energy(profiles[0], p);
  const double tail = tail_decay_rate(profiles[0], true);
  FieldDiagnostics d = diagnose_field(cfg, f, profiles, sigma, tail);
  write_diagnostics(d, dir);
  std::vector<Criterion> local = field_criteria(d);
  if (rows) {
    rows->insert(rows->end(), local.begin(), local.end());
  } else {
    write_summary(local, dir);
  }
  return d;
}

RunConfig scaled_config(const RunConfig& cfg, double Lx, double spacing) {
  RunConfig c = cfg;
  c.study.enabled = false;
  c.field.Lx = Lx;
  c.field.n_2d = static_cast<int>(std::lround(2.0 * Lx / spacing)) + 1;
  const double inner = 0.75 * Lx;
  auto keep = [&](std::vector<double>& v, double reach) {
    v.erase(std::remove_if(v.begin(), v.end(), [&](double R) { return reach * R > inner * (1.0 + 1e-12); }), v.end());
  };
  auto& d = c.diagnostics;
  keep(d.radii, 1.0);
  keep(d.equipartition_radii, 1.0);
  keep(d.strip_radii, 1.0);
  keep(d.triangle_radii, 2.0);
  keep(d.xs, 1.0);
  if (d.h_prime_x > inner) d.h_prime_x = 0.5 * inner;
  const int factor = 1 << (c.field.levels - 1);
  if ((c.field.n_2d - 1) % factor != 0) c.field.levels = 1;
  return c;
}

std::vector<Criterion> run_all(const RunConfig& cfg, const RunDir& dir) {
  const Potential p = potential_from(cfg);
  std::vector<Criterion> rows;
  const HeteroOutcome h = run_hetero(cfg, dir);
  const auto hrows = hetero_criteria(h);
  rows.insert(rows.end(), hrows.begin(), hrows.end());

  const RelaxOutcome r = run_relax(cfg, h.profiles, dir);
  const FieldDiagnostics main = run_diagnose(cfg, h.profiles, r.result.field, dir, &rows);

  std::vector<FieldDiagnostics> scaling;
  std::optional<FieldDiagnostics> doubled;
  if (cfg.study.enabled) {
    const double hx = field_spacing(cfg.field);
    auto companion = [&](const RunConfig& c) {
      const RunDir sub(cfg.out_dir, dir.id() + "-Lx" + std::to_string(static_cast<int>(std::lround(c.field.Lx))) + "-n" +
                                        std::to_string(c.field.n_2d));
      progress("study: Lx = " + num(c.field.Lx) + ", n = " + std::to_string(c.field.n_2d));
      const RelaxOutcome rr = run_relax(c, h.profiles, sub);
      return run_diagnose(c, h.profiles, rr.result.field, sub, nullptr);
    };
    std::vector<double> lxs = cfg.study.scaling_Lx;
    std::sort(lxs.begin(), lxs.end());
    for (double Lx : lxs) {
      if (std::abs(Lx - cfg.field.Lx) < 1e-9)
        scaling.push_back(main);
      else
        scaling.push_back(companion(scaled_config(cfg, Lx, hx)));
    }
    if (cfg.study.grid_doubling) doubled = companion(scaled_config(cfg, cfg.field.Lx, 0.5 * hx));
  } else {
    scaling.push_back(main);
  }
  const auto srows = study_criteria(scaling, doubled);
  rows.insert(rows.end(), srows.begin(), srows.end());
  const auto orows = oracle_criteria(p, grid_from(cfg), h.profiles[0], h.tail_rate);
  rows.insert(rows.end(), orows.begin(), orows.end());
  write_summary(rows, dir);
  return rows;
}

}  // namespace tj
