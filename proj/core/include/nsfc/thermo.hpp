#pragma once

#include <array>
#include <cstddef>

#include "nsfc/errors.hpp"

namespace nsfc::thermo {

// Gas with pressure p = R rho theta + a rho^gamma and a two-branch thermal
// energy: quadratic in theta below theta_star, linear above. c_star is fixed
// by continuity of the slope at the junction, c_star = R / ((gamma-1) theta_star).
// Shear and bulk viscosity are linear in theta with slopes mu1, lambda1.
struct ThermoParams {
  double R = 1.0;
  double a = 1.0;
  double gamma = 3.0;
  double theta_star = 0.1;
  double c_star = 5.0;
  double mu1 = 1.0;
  double lambda1 = 0.0;

  static ThermoParams make(double R, double a, double gamma, double theta_star, double mu1,
                           double lambda1);
  void validate() const;
};

// Velocity and momentum are padded to three components; entries past the
// grid dimension stay zero so |u|^2 sums over all three are dimension-blind.
struct PrimitiveState {
  double rho = 0.0;
  std::array<double, 3> u{0.0, 0.0, 0.0};
  double theta = 0.0;
};

struct ConservedState {
  double rho = 0.0;
  std::array<double, 3> m{0.0, 0.0, 0.0};
  double E = 0.0;
};

double pressure(const ThermoParams& p, double rho, double theta);

// Thermal part of the specific internal energy (the theta-only branch),
// its slope, and the exact inverse map q -> theta.
double thermal_energy(const ThermoParams& p, double theta);
double thermal_energy_slope(const ThermoParams& p, double theta);
double inverse_thermal_energy(const ThermoParams& p, double q);

double internal_energy(const ThermoParams& p, double rho, double theta);

// Specific entropy s = -R ln(rho) + thermal_entropy(theta). The thermal part
// integrates slope/theta from zero, so it is continuous across the branch
// junction.
double thermal_entropy(const ThermoParams& p, double theta);
double entropy(const ThermoParams& p, double rho, double theta);

// Thermal entropy reparametrized by thermal energy, S(q), with S'(q) = 1/theta(q).
// Strictly concave in q.
double entropy_of_thermal(const ThermoParams& p, double q);
double entropy_of_thermal_slope(const ThermoParams& p, double q);

ConservedState prim_to_cons(const ThermoParams& p, const PrimitiveState& w);

// Throws NonPhysicalState when rho <= 0 or the thermal energy implied by E
// is not positive. cell tags the report when converting whole fields.
PrimitiveState cons_to_prim(const ThermoParams& p, const ConservedState& c);
PrimitiveState cons_to_prim(const ThermoParams& p, const ConservedState& c, std::size_t cell);

double sound_speed(const ThermoParams& p, double rho, double theta);
double max_wave_speed(const ThermoParams& p, const PrimitiveState& w);

}  // namespace nsfc::thermo
