#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsfc {

// All failures surface as typed exceptions so callers can map them to
// distinct process exit codes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State outside the admissible region (rho <= 0, thermal energy <= 0, ...).
struct NonPhysicalState : Error {
  std::size_t cell = static_cast<std::size_t>(-1);
  explicit NonPhysicalState(const std::string& what) : Error(what) {}
  NonPhysicalState(const std::string& what, std::size_t cell_index)
      : Error(what + " (cell " + std::to_string(cell_index) + ")"), cell(cell_index) {}
};

// Requested contact endstate leaves the warm branch.
struct ContactOutOfRegime : Error {
  using Error::Error;
};

// Mollifier radius not representable on the grid.
struct UnresolvableKernel : Error {
  using Error::Error;
};

// Non-finite values produced while stepping.
struct NumericalBlowup : Error {
  long step = -1;
  NumericalBlowup(const std::string& what, long step_index)
      : Error(what + " (step " + std::to_string(step_index) + ")"), step(step_index) {}
};

// Density fell below the configured floor.
struct VacuumApproach : Error {
  long step = -1;
  VacuumApproach(const std::string& what, long step_index)
      : Error(what + " (step " + std::to_string(step_index) + ")"), step(step_index) {}
};

// Bad configuration file or option values.
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem trouble while persisting or reading a run directory.
struct IoError : Error {
  using Error::Error;
};

}  // namespace nsfc
