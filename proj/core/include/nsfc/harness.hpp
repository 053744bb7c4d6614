#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsfc/fields.hpp"
#include "nsfc/functionals.hpp"
#include "nsfc/shift.hpp"
#include "nsfc/solver.hpp"
#include "nsfc/thermo.hpp"

namespace nsfc::harness {

// Everything needed to set up and evolve one perturbed-contact run.
struct Experiment {
  thermo::ThermoParams params;
  func::ContactState contact;
  int dim = 1;
  int n = 512;
  solver::SolverConfig solver_cfg;
  shift::ShiftConfig shift_cfg;
  double width = 8.0 / 512.0;  // initial jump smoothing width (0 = sharp)
  double alpha = 0.05;
  int mode = 1;
  int frame_stride = 4;
  int diag_stride = 4;
};

fields::Field initial_state(const Experiment& ex);
solver::RunRecord run_experiment(const Experiment& ex);

// Relative entropy against the sharp two-sided reference, integrated over
// the torus. The "split" path goes through the four-term decomposition; both
// paths must agree to 1e-10 relative.
double initial_relent(const thermo::ThermoParams& params, const func::ContactState& contact,
                      const fields::Field& conserved, bool via_decomposition = false);

// sup_t (excursion_int + kinetic_int) + sup_t energy_l1 over the stored frames.
double sup_perturbation(const thermo::ThermoParams& params, const func::ContactState& contact,
                        const solver::RunRecord& rec);

struct DiagnosticsRow {
  double t = 0.0;
  double weighted_relent = 0.0;  // two-sided relative entropy under the shift weight
  double excursion_int = 0.0;
  double kinetic_int = 0.0;
  double gauge_int = 0.0;
  double energy_l1 = 0.0;
  double dissipation = 0.0;      // kappa |grad theta/theta|^2 + nu |grad u|^2, instantaneous
  double heat_flux_term = 0.0;   // kappa (|grad theta|/theta) |grad psi_bar|, instantaneous
  double transport_term = 0.0;   // (beta_jump rho + theta_jump (-rho s)) R, instantaneous
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsRow> rows;
  double epsilon = 0.0;
  double initial_relent = 0.0;
  double h = 0.0;
  double dt_max = 0.0;
};

// Evaluates the weighted functionals on every diag_stride-th stored frame
// (plus the final one). Cross-checks the two initial-relent paths.
DiagnosticsSeries diagnostics(const solver::RunRecord& rec, const func::ContactState& contact,
                              const shift::ShiftConfig& shift_cfg, int diag_stride);

struct MonitorReport {
  bool pass = false;
  double max_violation = 0.0;   // max over recorded times of LHS - RHS
  double min_dissipation = 0.0;
  double tol = 0.0;
  double constant = 0.0;
};

// Checks, at every recorded time,
//   excursion + gauge + kinetic + int_0^t dissipation
//     <= C (epsilon + E0) + |cum heat_flux_term| + |cum transport_term| + tol
// with tol = 5 max(h, dt)(1 + E0), and that the instantaneous dissipation
// never goes negative (a flipped sign must trip the verdict).
MonitorReport monitor_inequality(const DiagnosticsSeries& series, double fitted_constant);

struct SweepRun {
  double alpha = 0.0;
  double nu = 0.0;
  double kappa = 0.0;
  double initial_relent = 0.0;
  double sup_perturbation = 0.0;
  double ratio = 0.0;  // sup_perturbation / (sqrt(E0) + E0)
  double bound_pri_mass = 0.0;
  double bound_pri_ent = 0.0;
  double bound_pri_v = 0.0;
  std::string error;  // nonempty when the run failed
};

struct SweepResult {
  std::vector<SweepRun> runs;
  double fitted_constant = 0.0;  // smallest C with ratio <= C on every run
};

// Cartesian sweep over perturbation sizes and dissipation levels (nu = kappa).
// Failed runs are recorded and skipped by the fit. The observer, when given,
// sees each run as it completes (record is null for failed runs) so callers
// can persist frames without holding the whole sweep in memory.
using SweepObserver = std::function<void(std::size_t index, const Experiment& ex,
                                         const solver::RunRecord* rec, const SweepRun& run)>;
SweepResult dissipation_sweep(const Experiment& base, const std::vector<double>& alphas,
                              const std::vector<double>& nus,
                              const SweepObserver& observer = {});

struct ConvergenceResult {
  std::vector<double> alphas;
  std::vector<double> e0;
  std::vector<double> phi;
  double slope = 0.0;  // least-squares slope of log phi vs log e0
  bool strictly_decreasing = false;
};

ConvergenceResult convergence_study(const Experiment& base, double alpha0, int levels);

struct StaticLimitResult {
  double worst_ratio = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Weak-in-time control of the density moments: for Fourier test functions up
// to max_mode per axis, |int Phi (rho(t) - rho(0))| must stay under
// ||grad Phi||_L4 sup_tau ||m||_L4/3 t, up to the grid tolerance.
StaticLimitResult static_limit_check(const solver::RunRecord& rec, int max_mode);

// Run directory: config.txt, series.csv, frames/*.bin, shift/*.bin,
// manifest.txt. The manifest carries the run id, per-file content hashes,
// frame times, the two scalar summaries, and the wall time.
void persist_run(const std::string& dir, const std::string& config_text,
                 const func::ContactState& contact, const solver::RunRecord& rec,
                 const shift::ShiftField* shift_field, double wall_seconds);

void write_diagnostics_csv(std::ostream& os, const DiagnosticsSeries& series);

}  // namespace nsfc::harness
