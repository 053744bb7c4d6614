#include "nsfc/thermo.hpp"

#include <cmath>
#include <string>

namespace nsfc::thermo {

ThermoParams ThermoParams::make(double R, double a, double gamma, double theta_star, double mu1,
                                double lambda1) {
  ThermoParams p;
  p.R = R;
  p.a = a;
  p.gamma = gamma;
  p.theta_star = theta_star;
  p.c_star = R / ((gamma - 1.0) * theta_star);
  p.mu1 = mu1;
  p.lambda1 = lambda1;
  p.validate();
  return p;
}

void ThermoParams::validate() const {
  if (!(R > 0.0)) throw ConfigError("thermo: R must be positive");
  if (!(a > 0.0)) throw ConfigError("thermo: a must be positive");
  if (!(gamma > 2.0)) throw ConfigError("thermo: gamma must exceed 2");
  if (!(theta_star > 0.0)) throw ConfigError("thermo: theta_star must be positive");
  if (!(mu1 > 0.0)) throw ConfigError("thermo: mu1 must be positive");
  if (!(2.0 * mu1 + 3.0 * lambda1 > 0.0)) throw ConfigError("thermo: need 2 mu1 + 3 lambda1 > 0");
  double c = R / ((gamma - 1.0) * theta_star);
  if (std::abs(c_star - c) > 1e-12 * c)
    throw ConfigError("thermo: c_star inconsistent with R, gamma, theta_star");
}

double pressure(const ThermoParams& p, double rho, double theta) {
  return p.R * rho * theta + p.a * std::pow(rho, p.gamma);
}

double thermal_energy(const ThermoParams& p, double theta) {
  if (theta < p.theta_star) return p.c_star * theta * theta;
  return p.R * theta / (p.gamma - 1.0);
}

double thermal_energy_slope(const ThermoParams& p, double theta) {
  if (theta < p.theta_star) return 2.0 * p.c_star * theta;
  return p.R / (p.gamma - 1.0);
}

double inverse_thermal_energy(const ThermoParams& p, double q) {
  double q_star = p.R * p.theta_star / (p.gamma - 1.0);
  if (q < q_star) return std::sqrt(q / p.c_star);
  return q * (p.gamma - 1.0) / p.R;
}

double internal_energy(const ThermoParams& p, double rho, double theta) {
  return p.a * std::pow(rho, p.gamma - 1.0) / (p.gamma - 1.0) + thermal_energy(p, theta);
}

double thermal_entropy(const ThermoParams& p, double theta) {
  if (theta < p.theta_star) return 2.0 * p.c_star * theta;
  return 2.0 * p.c_star * p.theta_star + p.R / (p.gamma - 1.0) * std::log(theta / p.theta_star);
}

double entropy(const ThermoParams& p, double rho, double theta) {
  return -p.R * std::log(rho) + thermal_entropy(p, theta);
}

double entropy_of_thermal(const ThermoParams& p, double q) {
  return thermal_entropy(p, inverse_thermal_energy(p, q));
}

double entropy_of_thermal_slope(const ThermoParams& p, double q) {
  return 1.0 / inverse_thermal_energy(p, q);
}

ConservedState prim_to_cons(const ThermoParams& p, const PrimitiveState& w) {
  ConservedState c;
  c.rho = w.rho;
  double ke = 0.0;
  for (int k = 0; k < 3; ++k) {
    c.m[k] = w.rho * w.u[k];
    ke += w.u[k] * w.u[k];
  }
  c.E = w.rho * internal_energy(p, w.rho, w.theta) + 0.5 * w.rho * ke;
  return c;
}

namespace {

PrimitiveState cons_to_prim_impl(const ThermoParams& p, const ConservedState& c,
                                 const std::size_t* cell) {
  auto fail = [&](const std::string& what) -> NonPhysicalState {
    if (cell) return NonPhysicalState(what, *cell);
    return NonPhysicalState(what);
  };
  if (!(c.rho > 0.0)) throw fail("non-positive density");
  PrimitiveState w;
  w.rho = c.rho;
  double m2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    w.u[k] = c.m[k] / c.rho;
    m2 += c.m[k] * c.m[k];
  }
  double q = c.E / c.rho - 0.5 * m2 / (c.rho * c.rho) -
             p.a * std::pow(c.rho, p.gamma - 1.0) / (p.gamma - 1.0);
  if (!(q > 0.0)) throw fail("total energy at or below the elastic floor");
  w.theta = inverse_thermal_energy(p, q);
  return w;
}

}  // namespace

PrimitiveState cons_to_prim(const ThermoParams& p, const ConservedState& c) {
  return cons_to_prim_impl(p, c, nullptr);
}

PrimitiveState cons_to_prim(const ThermoParams& p, const ConservedState& c, std::size_t cell) {
  return cons_to_prim_impl(p, c, &cell);
}

double sound_speed(const ThermoParams& p, double rho, double theta) {
  // c^2 = dp/drho|_theta + theta (dp/dtheta)^2 / (rho^2 Q'(theta)); equals
  // gamma p / rho on the linear branch.
  double c2 = p.R * theta + p.a * p.gamma * std::pow(rho, p.gamma - 1.0) +
              theta * p.R * p.R / thermal_energy_slope(p, theta);
  return std::sqrt(c2);
}

double max_wave_speed(const ThermoParams& p, const PrimitiveState& w) {
  double u2 = 0.0;
  for (int k = 0; k < 3; ++k) u2 += w.u[k] * w.u[k];
  return std::sqrt(u2) + sound_speed(p, w.rho, w.theta);
}

}  // namespace nsfc::thermo
