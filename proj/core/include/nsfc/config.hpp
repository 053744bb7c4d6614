#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsfc/functionals.hpp"
#include "nsfc/harness.hpp"
#include "nsfc/shift.hpp"
#include "nsfc/solver.hpp"
#include "nsfc/thermo.hpp"

namespace nsfc::cli {

// Plain-text, line-oriented configuration: `key = value` lines grouped under
// bracketed section headers, `#` starts a comment line. Unknown sections or
// keys are rejected with the offending line number, as are values that break
// any module invariant.
struct Config {
  // [thermo]
  double R = 1.0;
  double a = 1.0;
  double gamma = 3.0;
  double theta_star = 0.1;
  double mu1 = 1.0;
  double lambda1 = 0.0;

  // [contact]
  double rho_minus = 1.0;
  double theta_minus = 2.0;
  double rho_plus = 0.5;

  // [grid]
  int dim = 1;
  int n = 512;

  // [solver]
  double nu = 1e-3;
  double kappa = 1e-3;
  double cfl = 0.4;
  double t_end = 0.2;
  double rho_floor = 1e-10;
  std::string reconstruction = "minmod";
  long max_steps = 2000000;

  // [init]; width < 0 means "8 cells", resolved against n at load time.
  double alpha = 0.05;
  double width = -1.0;
  int mode = 1;

  // [shift]
  double delta = 0.05;
  double epsilon = 0.05;
  int substeps = 2;
  int frame_stride = 4;
  int diag_stride = 4;

  // [sweep]
  std::vector<double> alphas{0.02, 0.04, 0.08};
  std::vector<double> nus{4e-3, 2e-3, 1e-3};
  double alpha0 = 0.1;
  int levels = 5;

  // top level
  std::uint64_t seed = 42;

  thermo::ThermoParams thermo_params() const;
  func::ContactState contact_state() const;
  solver::SolverConfig solver_config() const;
  shift::ShiftConfig shift_config() const;
  harness::Experiment experiment() const;
};

// Parses and fully validates; throws ConfigError with a line reference for
// anything wrong. An empty string yields the defaults.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// Canonical echo: parsing the result reproduces the same Config, so the text
// doubles as the persisted config.txt of a run.
std::string canonical_text(const Config& c);

}  // namespace nsfc::cli
