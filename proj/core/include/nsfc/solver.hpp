#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsfc/fields.hpp"
#include "nsfc/functionals.hpp"
#include "nsfc/thermo.hpp"

namespace nsfc::solver {

enum class Reconstruction { first_order, minmod };

Reconstruction reconstruction_from_string(const std::string& s);
std::string to_string(Reconstruction r);

struct SolverConfig {
  double nu = 1e-3;
  double kappa = 1e-3;
  double cfl = 0.4;
  double t_end = 0.2;
  double rho_floor = 1e-10;
  Reconstruction reconstruction = Reconstruction::minmod;
  long max_steps = 2000000;

  void validate() const;
};

// One scalar diagnostics row per step. The first ten entries form the
// series.csv schema: t, dt, mass, mom1..momd, energy, entropy_total,
// min_rho, min_theta, diss_visc, diss_heat. The trailing monitors feed the
// admissibility report and the experiment harness.
struct SeriesRow {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  std::array<double, 3> mom{0.0, 0.0, 0.0};
  double energy = 0.0;
  double entropy_total = 0.0;
  double min_rho = 0.0;
  double min_theta = 0.0;
  double diss_visc = 0.0;  // nu * integral of S : grad u / theta
  double diss_heat = 0.0;  // kappa * integral of |grad theta|^2 / theta^2

  double rho_l2 = 0.0;
  double rhos_l2 = 0.0;
  double grad_u_sq = 0.0;         // integral of |grad u|^2
  double grad_theta_rel_sq = 0.0; // integral of |grad theta / theta|^2
};

struct RunRecord {
  fields::PeriodicGrid grid;
  thermo::ThermoParams params;
  SolverConfig config;
  int frame_stride = 4;
  long steps = 0;
  std::vector<SeriesRow> series;       // rows at t_0 = 0 .. t_end
  std::vector<double> frame_times;
  std::vector<long> frame_steps;       // step index of each frame; indexes series
  std::vector<fields::Field> frames;   // conserved snapshots every stride
};

struct AdmissibilityReport {
  double mass_drift = 0.0;
  std::array<double, 3> momentum_drift{0.0, 0.0, 0.0};
  double energy_drift = 0.0;
  // min over time of  S(t) - S(0) - int_0^t (diss_visc + diss_heat);
  // nonnegative for an entropy-consistent discretization, up to O(h, dt).
  double entropy_balance_min = 0.0;
  double min_rho = 0.0;
  double min_theta = 0.0;
  double bound_pri_mass = 0.0;  // sup_t ||rho||_L2
  double bound_pri_ent = 0.0;   // sup_t ||rho s||_L2
  double bound_pri_v = 0.0;     // nu ||grad u||^2 + kappa ||grad theta/theta||^2, time integrated
};

// Planar contact profile with both jump planes (x1 = 1/2 and the periodic
// seam x1 = 0) smoothed over width w, plus a sinusoidal velocity
// perturbation u1 = alpha sin(2 pi k x1) (times cos(2 pi x2) for dim >= 2).
// w = 0 keeps the sharp jumps; otherwise w must resolve to >= 4 cells.
fields::Field init_contact_perturbed(const fields::PeriodicGrid& grid,
                                     const thermo::ThermoParams& params,
                                     const func::ContactState& contact, double width, double alpha,
                                     int mode);

// Cell-wise conversion; failures name the offending cell.
fields::Field primitives(const thermo::ThermoParams& params, const fields::Field& conserved);

// One Heun step with the CFL-limited dt (capped by dt_cap when positive).
// Returns the dt taken.
double step(fields::Field& U, const thermo::ThermoParams& params, const SolverConfig& config,
            long step_index = 0, double dt_cap = -1.0);

RunRecord run(const fields::Field& initial, const thermo::ThermoParams& params,
              const SolverConfig& config, int frame_stride);

AdmissibilityReport admissibility(const RunRecord& rec);

void write_series_csv(std::ostream& os, const RunRecord& rec);

}  // namespace nsfc::solver
