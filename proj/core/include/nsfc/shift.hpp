#pragma once

#include <array>
#include <vector>

#include "nsfc/fields.hpp"
#include "nsfc/functionals.hpp"
#include "nsfc/solver.hpp"

namespace nsfc::shift {

struct ShiftConfig {
  double delta = 0.05;    // velocity mollification radius (0 = use raw frames)
  double epsilon = 0.05;  // shift-field mollification radius
  int substeps = 2;       // RK4 substeps per frame interval

  void validate(const fields::PeriodicGrid& grid) const;
};

// Velocity frames at increasing times. Space lookups are multilinear and
// periodic; time lookups interpolate linearly between neighboring frames.
struct VelocityHistory {
  std::vector<double> times;
  std::vector<fields::Field> frames;  // dim components each

  std::array<double, 3> velocity(const std::array<double, 3>& x, double t) const;
};

// u = m / rho extracted from every stored frame, each frame mollified once
// with radius delta.
VelocityHistory velocity_history(const solver::RunRecord& rec, double delta);

// Backward RK4 trace of dX/dtau = u(X, tau) from (x, t) down to tau = 0,
// taking `substeps` stages per frame interval. Returns the unwrapped foot
// point; reduce mod 1 to land on the torus.
std::array<double, 3> trace_characteristic(const VelocityHistory& hist,
                                           const std::array<double, 3>& x, double t, int substeps);

// Transported interface indicator and its mollification, one entry per
// velocity frame. psi takes the exact initial values {0, 1}; psi_bar stays in
// [0, 1]; weight stays between the two contact temperatures.
struct ShiftField {
  std::vector<double> times;
  std::vector<fields::Field> psi;
  std::vector<fields::Field> psi_bar;
  std::vector<fields::Field> weight;
};

ShiftField build_shift(const VelocityHistory& hist, const func::ContactState& contact,
                       const ShiftConfig& cfg);

// Residual of the mollified transport identity,
//   R = u . grad psi_bar - (div(u_delta psi))_eps + ((div u_delta) psi)_eps,
// with psi_bar = (psi)_eps. Vanishes for constant u; decays with epsilon at
// a rate controlled by ||u||_H1 for bounded psi.
fields::Field commutator_residual(const fields::Field& u, const fields::Field& psi, double delta,
                                  double epsilon);

}  // namespace nsfc::shift
