#pragma once

#include <cstdint>

#include "nsfc/fields.hpp"
#include "nsfc/thermo.hpp"

namespace nsfc::func {

// Planar two-state contact: equal pressure on both sides, zero velocity,
// equal total energy density E_bar = p_bar / (gamma - 1). beta_minus/plus are
// the affine coefficients that turn the weighted relative entropy into the
// linear-plus-convex split used by the monitor; beta_jump and theta_jump are
// their differences across the interface.
struct ContactState {
  double rho_minus = 0.0, rho_plus = 0.0;
  double theta_minus = 0.0, theta_plus = 0.0;
  double p_bar = 0.0;
  double E_bar = 0.0;
  double beta_minus = 0.0, beta_plus = 0.0;
  double beta_jump = 0.0;   // beta_plus - beta_minus
  double theta_jump = 0.0;  // theta_plus - theta_minus
  double rho_lo = 0.0, rho_hi = 0.0;

  thermo::ConservedState state_minus() const;
  thermo::ConservedState state_plus() const;
  void validate(const thermo::ThermoParams& p) const;
};

// Builds the contact from the left state and the right density; the right
// temperature balances the pressure. Throws ContactOutOfRegime when that
// temperature leaves the linear branch.
ContactState make_contact(const thermo::ThermoParams& p, double rho_minus, double theta_minus,
                          double rho_plus);

// Relative entropy density eta(U | Uref) for eta = -rho s and a zero-velocity
// reference. Nonnegative, zero iff U = Uref.
double rel_entropy(const thermo::ThermoParams& p, const thermo::ConservedState& U,
                   const thermo::ConservedState& Uref);

// theta_ref * rel_entropy split into four nonnegative pieces.
struct RelEntropyParts {
  double log_density = 0.0;  // theta_ref R (rho ln rho)(rho | rho_ref)
  double thermal = 0.0;      // theta_ref rho (-S)(q | q_ref)
  double elastic = 0.0;      // (p_el)(rho | rho_ref) / (gamma - 1)
  double kinetic = 0.0;      // |m|^2 / (2 rho)
  double sum() const { return log_density + thermal + elastic + kinetic; }
};

// Requires a zero-velocity reference on the linear branch (theta_ref above
// the junction).
RelEntropyParts rel_entropy_decomposition(const thermo::ThermoParams& p,
                                          const thermo::ConservedState& U,
                                          const thermo::ConservedState& Uref);

// Squared distance of rho to the plateau [rho_lo, rho_hi]; zero inside.
double density_excursion(const ContactState& contact, double rho);

// min(|y|, y^2): quadratic near zero, linear in the tails.
double deviation_gauge(double y);

struct SampleSpec {
  std::size_t count = 100000;
  std::uint64_t seed = 1;
  double rho_lo = 0.05, rho_hi = 4.0;
  double u_max = 2.0;
  double theta_lo = 0.2, theta_hi = 8.0;
};

// Smallest constant C with
//   excursion + gauge(E - E_bar) + |m|^2/(2 rho) <= C min_{+/-} theta_pm rel_entropy(U | U_pm)
// over the sampled state box (sup of the ratio; 0/0 counts as 0).
double fit_gauge_constant(const thermo::ThermoParams& p, const ContactState& contact,
                          const SampleSpec& spec);

// Minimum over samples of rel_entropy(z | z0) / gauge(|z - z0|); positive
// because the entropy is strictly convex and grows at least linearly far out.
double relent_coercivity_min_ratio(const thermo::ThermoParams& p,
                                   const thermo::ConservedState& z0, const SampleSpec& spec);

struct PerturbationIntegrals {
  double excursion_int = 0.0;  // integral of density_excursion(rho)
  double kinetic_int = 0.0;    // integral of |m|^2 / (2 rho)
  double gauge_int = 0.0;      // integral of deviation_gauge(E - E_bar)
  double energy_l1 = 0.0;      // integral of |E - E_bar|
};

// conserved must carry dim+2 components (rho, m, E).
PerturbationIntegrals perturbation_integrals(const thermo::ThermoParams& p,
                                             const ContactState& contact,
                                             const fields::Field& conserved);

}  // namespace nsfc::func
