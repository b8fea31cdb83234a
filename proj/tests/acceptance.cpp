// Acceptance run: the default configuration with the scaling study, one
// PASS/FAIL line per criterion. Usage: acceptance <output root>

#include <cstdio>
#include <string>
#include <vector>

#include "tj/pipeline.hpp"

namespace {

struct Item {
  const char* id;
  const char* title;
};

// Tolerances live with the rows in pipeline.cpp; this binary only aggregates.
const Item kItems[] = {
    {"sigma", "connection energies agree and converge"},
    {"equipartition_1d", "1D equipartition at n = 2001"},
    {"nondegeneracy", "simple zero eigenvalue with kernel U'"},
    {"growth", "energy excess over 3 sigma R stays bounded"},
    {"equipartition_2d", "potential and Dirichlet parts each near 3 sigma R / 2"},
    {"hamiltonian", "G constant and H zero along the a1-a3 ray"},
    {"horizontal", "horizontal energy bounded in Lx"},
    {"localization", "diffuse interface stays near the triod"},
    {"slices", "slices converge to a fixed translate of U_31"},
    {"h_prime", "shift derivative formula"},
    {"decay", "exponential decay off the interface"},
    {"oracles", "analytic oracle fields"},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "acceptance_runs";
  tj::RunConfig cfg;
  cfg.study.enabled = true;
  cfg.out_dir = out;
  tj::set_progress([](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); });

  std::vector<tj::Criterion> rows;
  try {
    tj::validate(cfg);
    const tj::RunDir dir(cfg.out_dir, tj::run_id(cfg));
    rows = tj::run_all(cfg, dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
  }

  int failed = 0;
  for (const Item& it : kItems) {
    bool any = false, ok = true;
    std::string detail;
    for (const auto& r : rows) {
      if (r.id != it.id) continue;
      any = true;
      if (r.status != tj::Criterion::Status::Pass) {
        ok = false;
        if (!detail.empty()) detail += "; ";
        detail += r.name + " " + tj::to_string(r.status) + " (" + r.detail + ")";
      }
    }
    if (!any) {
      ok = false;
      detail = "no rows produced";
    }
    if (!ok) ++failed;
    std::printf("%s %-17s %s%s%s\n", ok ? "PASS" : "FAIL", it.id, it.title, detail.empty() ? "" : ": ",
                detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, sizeof(kItems) / sizeof(kItems[0]));
  return failed == 0 ? 0 : 1;
}
