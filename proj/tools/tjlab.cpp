// tjlab: driver for the triple-junction lab.
//
//   tjlab hetero     --config run.json --out runs
//   tjlab competitor --config run.json
//   tjlab relax      --config run.json [--resume field.acf2]
//   tjlab diagnose   --config run.json [checkpoint]
//   tjlab all        --config run.json
//   tjlab config     [--config run.json]     print the (default) config
//
// Exit codes: 0 success, 2 config error, 3 solver failure, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tj/pipeline.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kIoError = 4;

std::array<tj::Profile1D, 3> profiles_for(const tj::RunConfig& cfg, const tj::RunDir& dir) {
  if (auto p = tj::load_profiles(dir)) return *p;
  std::cerr << "profiles missing in " << dir.dir() << ", running hetero first\n";
  return tj::run_hetero(cfg, dir).profiles;
}

void print_rows(const std::vector<tj::Criterion>& rows) {
  for (const auto& r : rows) std::printf("%-8s %s: %s\n", tj::to_string(r.status).c_str(), r.name.c_str(), r.detail.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triple-junction Allen-Cahn lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir, resume, checkpoint;
  bool quiet = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output root (overrides out_dir)");
    sub->add_flag("-q,--quiet", quiet, "no progress messages");
  };
  CLI::App* hetero = app.add_subcommand("hetero", "heteroclinic connections, sigma table, spectrum");
  CLI::App* competitor = app.add_subcommand("competitor", "competitor field and its energy");
  CLI::App* relax = app.add_subcommand("relax", "relax the triple-junction field");
  CLI::App* diagnose = app.add_subcommand("diagnose", "diagnostics of a relaxed field");
  CLI::App* all = app.add_subcommand("all", "hetero, relax, diagnose and the configured study");
  CLI::App* show = app.add_subcommand("config", "print the configuration with its units block");
  for (CLI::App* s : {hetero, competitor, relax, diagnose, all, show}) common(s);
  relax->add_option("--resume", resume, "continue from an ACF2 checkpoint")->check(CLI::ExistingFile);
  diagnose->add_option("checkpoint", checkpoint, "ACF2 checkpoint (default: the run's field)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  tj::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = tj::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    tj::validate(cfg);
  } catch (const tj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (*show) {
    std::cout << tj::serialize_config(cfg);
    return 0;
  }
  if (!quiet) tj::set_progress([](const std::string& m) { std::cerr << m << "\n"; });

  try {
    const tj::RunDir dir(cfg.out_dir, tj::run_id(cfg));
    std::cerr << "run directory " << dir.dir() << "\n";
    tj::write_text(dir.path("config", "json"), tj::serialize_config(cfg));

    if (*hetero) {
      const tj::HeteroOutcome h = tj::run_hetero(cfg, dir);
      for (int k = 0; k < 3; ++k)
        std::printf("sigma_%d%d = %.12f\n", h.profiles[k].left_well + 1, h.profiles[k].right_well + 1,
                    h.profiles[k].sigma);
      print_rows(tj::hetero_criteria(h));
    } else if (*competitor) {
      const auto profiles = profiles_for(cfg, dir);
      const tj::Potential p = tj::potential_from(cfg);
      const auto c = tj::run_competitor(cfg, profiles, tj::profile_energy(profiles[0], p), dir);
      std::printf("competitor discrete energy %.10f\n", c.discrete_energy);
    } else if (*relax) {
      const auto profiles = profiles_for(cfg, dir);
      const auto r = tj::run_relax(cfg, profiles, dir, resume.empty() ? std::nullopt : std::optional(resume));
      std::printf("competitor %.10f start %.10f final %.10f iterations %ld residual %.3e\n", r.competitor_energy,
                  r.start_energy, r.result.energy, r.result.iterations, r.result.residual);
    } else if (*diagnose) {
      const auto profiles = tj::load_profiles(dir);
      if (!profiles) throw tj::IoError("profile files missing in " + dir.dir() + " (run hetero first)");
      const std::string path = checkpoint.empty() ? dir.path("field", "acf2") : checkpoint;
      const tj::Field2D f = tj::read_checkpoint(path);
      if (!(f.grid() == tj::grid_from(cfg))) throw tj::IoError(path + ": checkpoint grid does not match the config");
      std::vector<tj::Criterion> rows;
      tj::run_diagnose(cfg, *profiles, f, dir, &rows);
      tj::write_summary(rows, dir);
      print_rows(rows);
    } else if (*all) {
      print_rows(tj::run_all(cfg, dir));
    }
  } catch (const tj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const tj::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const tj::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return 0;
}
