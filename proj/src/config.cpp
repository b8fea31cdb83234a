#include "tj/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tj/field2d.hpp"
#include "tj/potential.hpp"

namespace tj {

using nlohmann::json;

namespace {

template <class T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json wells_json(const std::array<Vec2, 3>& w) {
  json a = json::array();
  for (const Vec2& v : w) a.push_back({v.x, v.y});
  return a;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(section + ": unknown key '" + k + "'");
  }
}

json to_json(const RunConfig& c, bool with_out_dir) {
  json j;
  j["potential"] = {{"wells", wells_json(c.potential.wells)},
                    {"scale", c.potential.scale},
                    {"hypothesis_samples", c.potential.hypothesis_samples}};
  j["profile"] = {{"L", c.profile.L},
                  {"n_1d", c.profile.n_1d},
                  {"tol_1d", c.profile.tol_1d},
                  {"max_iter", c.profile.max_iter},
                  {"convergence_n", c.profile.convergence_n}};
  j["field"] = {{"Lx", c.field.Lx},
                {"n_2d", c.field.n_2d},
                {"theta", c.field.theta},
                {"tol_2d", c.field.tol_2d},
                {"max_iter", c.field.max_iter},
                {"symmetrize", c.field.symmetrize},
                {"restart_period", c.field.restart_period},
                {"levels", c.field.levels}};
  j["diagnostics"] = {{"delta", c.diagnostics.delta},
                      {"eps", c.diagnostics.eps},
                      {"radii", c.diagnostics.radii},
                      {"triangle_radii", c.diagnostics.triangle_radii},
                      {"equipartition_radii", c.diagnostics.equipartition_radii},
                      {"strip_radii", c.diagnostics.strip_radii},
                      {"xs", c.diagnostics.xs},
                      {"r0", c.diagnostics.r0},
                      {"h_prime_x", c.diagnostics.h_prime_x},
                      {"lattice_subdivisions", c.diagnostics.lattice_subdivisions},
                      {"lattice_L", c.diagnostics.lattice_L}};
  j["study"] = {{"enabled", c.study.enabled},
                {"scaling_Lx", c.study.scaling_Lx},
                {"grid_doubling", c.study.grid_doubling}};
  j["seed"] = c.seed;
  if (with_out_dir) j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  try {
    check_keys(j, {"potential", "profile", "field", "diagnostics", "study", "seed", "out_dir"}, "config");
    if (j.contains("potential")) {
      const json& p = j["potential"];
      check_keys(p, {"wells", "scale", "hypothesis_samples"}, "potential");
      if (p.contains("wells")) {
        const json& w = p["wells"];
        if (!w.is_array() || w.size() != 3) throw ConfigError("potential.wells: expected three [x, y] pairs");
        for (std::size_t k = 0; k < 3; ++k) {
          if (!w[k].is_array() || w[k].size() != 2) throw ConfigError("potential.wells: expected [x, y]");
          c.potential.wells[k] = {w[k][0].get<double>(), w[k][1].get<double>()};
        }
      }
      get(p, "scale", c.potential.scale);
      get(p, "hypothesis_samples", c.potential.hypothesis_samples);
    }
    if (j.contains("profile")) {
      const json& p = j["profile"];
      check_keys(p, {"L", "n_1d", "tol_1d", "max_iter", "convergence_n"}, "profile");
      get(p, "L", c.profile.L);
      get(p, "n_1d", c.profile.n_1d);
      get(p, "tol_1d", c.profile.tol_1d);
      get(p, "max_iter", c.profile.max_iter);
      get(p, "convergence_n", c.profile.convergence_n);
    }
    if (j.contains("field")) {
      const json& p = j["field"];
      check_keys(p, {"Lx", "n_2d", "theta", "tol_2d", "max_iter", "symmetrize", "restart_period", "levels"}, "field");
      get(p, "Lx", c.field.Lx);
      get(p, "n_2d", c.field.n_2d);
      get(p, "theta", c.field.theta);
      get(p, "tol_2d", c.field.tol_2d);
      get(p, "max_iter", c.field.max_iter);
      get(p, "symmetrize", c.field.symmetrize);
      get(p, "restart_period", c.field.restart_period);
      get(p, "levels", c.field.levels);
    }
    if (j.contains("diagnostics")) {
      const json& p = j["diagnostics"];
      check_keys(p,
                 {"delta", "eps", "radii", "triangle_radii", "equipartition_radii", "strip_radii", "xs", "r0",
                  "h_prime_x", "lattice_subdivisions", "lattice_L"},
                 "diagnostics");
      get(p, "delta", c.diagnostics.delta);
      get(p, "eps", c.diagnostics.eps);
      get(p, "radii", c.diagnostics.radii);
      get(p, "triangle_radii", c.diagnostics.triangle_radii);
      get(p, "equipartition_radii", c.diagnostics.equipartition_radii);
      get(p, "strip_radii", c.diagnostics.strip_radii);
      get(p, "xs", c.diagnostics.xs);
      get(p, "r0", c.diagnostics.r0);
      get(p, "h_prime_x", c.diagnostics.h_prime_x);
      get(p, "lattice_subdivisions", c.diagnostics.lattice_subdivisions);
      get(p, "lattice_L", c.diagnostics.lattice_L);
    }
    if (j.contains("study")) {
      const json& p = j["study"];
      check_keys(p, {"enabled", "scaling_Lx", "grid_doubling"}, "study");
      get(p, "enabled", c.study.enabled);
      get(p, "scaling_Lx", c.study.scaling_Lx);
      get(p, "grid_doubling", c.study.grid_doubling);
    }
    get(j, "seed", c.seed);
    get(j, "out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out =
      "// Units: lengths (profile.L, field.Lx, diagnostics radii, xs, h_prime_x,\n"
      "// lattice_L) in the nondimensional variable of the Allen-Cahn energy, in which the\n"
      "// interface width is 4/sqrt(c1) (0.943 for the default wells). theta in radians.\n"
      "// Wells and delta, eps, r0 are order-parameter distances. tol_1d and tol_2d bound\n"
      "// the max norm of -Laplacian(u) + W_u(u). Energies are reported in units of the\n"
      "// energy functional; sigma is the 1D connection energy.\n";
  out += to_json(cfg, true).dump(2);
  out += "\n";
  return out;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  const auto& p = c.profile;
  const auto& f = c.field;
  const auto& d = c.diagnostics;
  if (!(c.potential.scale > 0.0)) fail("potential.scale must be > 0");
  if (c.potential.hypothesis_samples < 1000) fail("potential.hypothesis_samples must be >= 1000");
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (distance(c.potential.wells[a], c.potential.wells[b]) <= 0.0) fail("potential.wells must be distinct");
  if (p.n_1d < 401) fail("profile.n_1d must be >= 401");
  if (!(p.L > 0.0)) fail("profile.L must be > 0");
  if (!(p.tol_1d > 0.0)) fail("profile.tol_1d must be > 0");
  if (p.max_iter < 1) fail("profile.max_iter must be >= 1");
  for (int n : p.convergence_n)
    if (n < 401) fail("profile.convergence_n entries must be >= 401");
  if (f.n_2d < 3) fail("field.n_2d must be >= 3");
  if (!(f.Lx > 0.0)) fail("field.Lx must be > 0");
  if (!(f.tol_2d > 0.0)) fail("field.tol_2d must be > 0");
  if (f.max_iter < 1) fail("field.max_iter must be >= 1");
  if (f.restart_period < 0) fail("field.restart_period must be >= 0");
  if (f.levels < 1) fail("field.levels must be >= 1");
  if (f.levels > 1 && (f.n_2d - 1) % (1 << (f.levels - 1)) != 0)
    fail("field.n_2d - 1 must be divisible by 2^(levels - 1)");
  if (!std::isfinite(f.theta)) fail("field.theta must be finite");
  const double inner = 0.75 * f.Lx;
  if (!(d.delta > 0.0)) fail("diagnostics.delta must be > 0");
  if (!(d.eps > 0.0)) fail("diagnostics.eps must be > 0");
  if (!(d.r0 > 0.0)) fail("diagnostics.r0 must be > 0");
  for (const auto* list : {&d.radii, &d.equipartition_radii, &d.strip_radii})
    for (double R : *list)
      if (!(R > 0.0) || R > inner) fail("diagnostics radii must lie in (0, 3Lx/4]");
  for (double R : d.triangle_radii)
    if (!(R > 0.0) || 2.0 * R > inner) fail("diagnostics.triangle_radii must satisfy 0 < 2R <= 3Lx/4");
  for (double x : d.xs)
    if (!(x > 0.0) || x > inner) fail("diagnostics.xs must lie in (0, 3Lx/4]");
  for (std::size_t k = 1; k < d.xs.size(); ++k)
    if (!(d.xs[k] > d.xs[k - 1])) fail("diagnostics.xs must be increasing");
  if (!(d.h_prime_x > 0.0) || d.h_prime_x > inner) fail("diagnostics.h_prime_x must lie in (0, 3Lx/4]");
  if (d.lattice_subdivisions < 1) fail("diagnostics.lattice_subdivisions must be >= 1");
  if (!(d.lattice_L > 0.0)) fail("diagnostics.lattice_L must be > 0");
  const double h = field_spacing(f);
  try {
    const Potential pot(WellTriple{c.potential.wells}, c.potential.scale);
    if (!GridSpec{f.Lx, f.n_2d}.resolves(pot))
      fail("field: spacing 2Lx/(n_2d - 1) must be at most a quarter of the interface width 4/sqrt(c1)");
  } catch (const PotentialError& e) {
    fail(std::string("potential: ") + e.what());
  }
  const double cells = 2.0 * d.lattice_L / h;
  if (std::abs(cells - std::round(cells)) > 1e-9 * cells) fail("diagnostics.lattice_L must be a multiple of the grid spacing / 2");
  for (double Lx : c.study.scaling_Lx)
    if (!(Lx > 0.0)) fail("study.scaling_Lx entries must be > 0");
}

std::string run_id(const RunConfig& cfg) {
  const std::string canon = to_json(cfg, false).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double field_spacing(const FieldConfig& f) { return 2.0 * f.Lx / (f.n_2d - 1); }

}  // namespace tj
