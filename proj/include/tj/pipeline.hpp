#pragma once

// Experiment driver shared by the tjlab CLI and the acceptance binary: the
// hetero, competitor, relax and diagnose stages, their CSV outputs, and the
// evaluation of the acceptance rows.

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tj/config.hpp"
#include "tj/diagnostics.hpp"
#include "tj/field2d.hpp"
#include "tj/hetero1d.hpp"
#include "tj/io.hpp"
#include "tj/potential.hpp"

namespace tj {

/// A solver stage failed; any best iterate has already been written.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Potential potential_from(const RunConfig& cfg);
GridSpec grid_from(const RunConfig& cfg);

/// out_dir/<run-id>, created if missing. Files inside are <run-id>.<report>.<ext>.
class RunDir {
 public:
  RunDir(const std::string& out_dir, const std::string& id);
  std::string path(const std::string& report, const std::string& ext = "csv") const;
  const std::string& dir() const { return dir_; }
  const std::string& id() const { return id_; }

 private:
  std::string dir_;
  std::string id_;
};

struct ConvergenceRow {
  int n = 0;
  double dy = 0.0;
  double sigma = 0.0;
  double equipartition = 0.0;
  double scheme_residual = 0.0;
  double richardson = 0.0;  // NaN on the first row
  double order = 0.0;       // observed order from this and the two previous rows, NaN before
  double equipartition_ratio = 0.0;  // previous equipartition over this one, NaN on the first row
};

struct HeteroOutcome {
  /// Indexed by ray: U_31, U_12, U_23.
  std::array<Profile1D, 3> profiles;
  std::array<double, 3> euler_lagrange{};
  double sigma = 0.0;          // sigma_31 at n_1d
  double sigma_spread = 0.0;   // (max - min) / max over the three connections
  double equipartition = 0.0;  // of U_31 at n_1d
  double scheme_residual = 0.0;
  double tail_rate = 0.0;
  SpectrumReport spectrum;
  std::vector<ConvergenceRow> convergence;
  HypothesisReport hypotheses;
};

HeteroOutcome run_hetero(const RunConfig& cfg, const RunDir& dir);

/// Profiles of a previous hetero stage in `dir`, or nullopt when absent.
std::optional<std::array<Profile1D, 3>> load_profiles(const RunDir& dir);

JunctionData junction_from(const RunConfig& cfg, const Potential& p, const std::array<Profile1D, 3>& profiles);

struct CompetitorOutcome {
  Field2D field;
  double discrete_energy = 0.0;
  std::vector<EnergyGrowthRow> growth;  // disks of the config radii
};

CompetitorOutcome run_competitor(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, double sigma,
                                 const RunDir& dir);

struct RelaxOutcome {
  RelaxResult result;
  double competitor_energy = 0.0;
  double start_energy = 0.0;
  bool resumed = false;
};

/// Relaxes from the competitor (or from `resume`) and always writes the final
/// iterate; throws SolverFailure afterwards when the run did not converge.
RelaxOutcome run_relax(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, const RunDir& dir,
                       const std::optional<std::string>& resume = std::nullopt);

/// One acceptance check. Several rows may share an id; the criterion passes
/// when all of its rows pass.
struct Criterion {
  std::string id;
  std::string name;
  enum class Status { Pass, Fail, Skipped } status = Status::Skipped;
  std::string detail;
};

std::string to_string(Criterion::Status s);

/// Everything the diagnose stage measures on one relaxed field.
struct FieldDiagnostics {
  double Lx = 0.0;
  int n = 0;
  double sigma = 0.0;
  double interface_width = 0.0;
  double tail_rate = 0.0;
  /// Fitted triod (or the configured one when the fit failed); frame of the
  /// triangles, the horizontal energy and the decay ray.
  TriodGeometry frame;
  std::vector<EnergyGrowthRow> growth;
  std::vector<EquipartitionRow> equipartition;
  std::optional<DeformationReport> deformation;
  std::vector<HamiltonianRow> hamiltonian;
  std::optional<LocalizationReport> localization;
  std::optional<SliceReport> slices;
  std::optional<HPrimeCheck> h_prime;
  std::optional<DecayFit> decay;
  struct MaxPrincipleRow {
    std::string label;
    int well = 0;
    Region rect;
    MaxPrincipleResult result;
  };
  std::vector<MaxPrincipleRow> max_principle;
  /// stage -> error message for stages that could not run.
  std::vector<std::pair<std::string, std::string>> skipped;
};

/// Runs every diagnostic on `f`; a failing stage is recorded as skipped.
FieldDiagnostics diagnose_field(const RunConfig& cfg, const Field2D& f, const std::array<Profile1D, 3>& profiles,
                                double sigma, double tail_rate);

/// Writes the diagnostic CSVs of `d` into `dir`.
void write_diagnostics(const FieldDiagnostics& d, const RunDir& dir);

/// Acceptance rows that a single run can decide.
std::vector<Criterion> hetero_criteria(const HeteroOutcome& h);
std::vector<Criterion> field_criteria(const FieldDiagnostics& d);

/// Rows comparing relaxed fields across domain sizes and grids: `scaling` at
/// increasing Lx with a common spacing, `doubled` the reference run (the
/// scaling entry with the same Lx) on twice as many cells.
std::vector<Criterion> study_criteria(const std::vector<FieldDiagnostics>& scaling,
                                      const std::optional<FieldDiagnostics>& doubled);

/// Rows on the analytic oracle fields, evaluated on `grid` with the given U_31.
std::vector<Criterion> oracle_criteria(const Potential& p, const GridSpec& grid, const Profile1D& u31,
                                       double tail_rate);

/// Writes <id>.summary.csv and returns the number of failed rows.
int write_summary(const std::vector<Criterion>& rows, const RunDir& dir);

/// Diagnoses `f`, writes its CSVs and the summary of the single-run rows.
/// sigma and the tail rate are recomputed from the U_31 profile.
FieldDiagnostics run_diagnose(const RunConfig& cfg, const std::array<Profile1D, 3>& profiles, const Field2D& f,
                              const RunDir& dir, std::vector<Criterion>* rows = nullptr);

/// The configuration of a companion run on [-Lx, Lx]^2 at grid spacing
/// `spacing`; radii, xs and h_prime_x outside its inner region are dropped.
RunConfig scaled_config(const RunConfig& cfg, double Lx, double spacing);

/// hetero, relax and diagnose, plus the scaling study when enabled. Returns
/// every acceptance row, also written to the summary.
std::vector<Criterion> run_all(const RunConfig& cfg, const RunDir& dir);

/// Progress messages (stage starts, relaxation progress); silent by default.
void set_progress(std::function<void(const std::string&)> sink);

}  // namespace tj
