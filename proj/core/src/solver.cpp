#include "nsfc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "nsfc/parallel.hpp"

namespace nsfc::solver {

using fields::Field;
using fields::PeriodicGrid;
using thermo::ThermoParams;

Reconstruction reconstruction_from_string(const std::string& s) {
  if (s == "first-order") return Reconstruction::first_order;
  if (s == "minmod") return Reconstruction::minmod;
  throw ConfigError("solver: unknown reconstruction '" + s + "' (first-order | minmod)");
}

std::string to_string(Reconstruction r) {
  return r == Reconstruction::first_order ? "first-order" : "minmod";
}

void SolverConfig::validate() const {
  if (nu < 0.0 || kappa < 0.0) throw ConfigError("solver: nu and kappa must be nonnegative");
  if (!(cfl > 0.0) || cfl > 1.0) throw ConfigError("solver: cfl must lie in (0, 1]");
  if (!(t_end > 0.0)) throw ConfigError("solver: t_end must be positive");
  if (!(rho_floor > 0.0)) throw ConfigError("solver: rho_floor must be positive");
  if (max_steps <= 0) throw ConfigError("solver: max_steps must be positive");
}

Field primitives(const ThermoParams& params, const Field& conserved) {
  const PeriodicGrid& g = conserved.grid();
  const int dim = g.dim;
  Field prim(g, dim + 2);
  par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      thermo::ConservedState c;
      c.rho = conserved(0, i);
      for (int a = 0; a < dim; ++a) c.m[a] = conserved(1 + a, i);
      c.E = conserved(dim + 1, i);
      thermo::PrimitiveState w = thermo::cons_to_prim(params, c, i);
      prim(0, i) = w.rho;
      for (int a = 0; a < dim; ++a) prim(1 + a, i) = w.u[a];
      prim(dim + 1, i) = w.theta;
    }
  });
  return prim;
}

namespace {

double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

// Fluxes through the faces i -> i + e_axis for every cell i, written into
// face(c, i). Convective part is Rusanov on (optionally minmod-reconstructed)
// primitive traces; diffusive parts are compact differences in flux form, so
// every conserved total telescopes.
void axis_fluxes(const ThermoParams& tp, const SolverConfig& cfg, const Field& prim, int axis,
                 Field& face) {
  const PeriodicGrid& g = prim.grid();
  const int dim = g.dim;
  const int ncomp = dim + 2;
  const double h = g.h;
  const bool limited = cfg.reconstruction == Reconstruction::minmod;
  const bool viscous = cfg.nu > 0.0;
  const bool heat = cfg.kappa > 0.0;

  Field slope(g, limited ? ncomp : 0);
  if (limited) {
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        std::size_t im = g.neighbor(i, axis, -1);
        std::size_t ip = g.neighbor(i, axis, +1);
        for (int c = 0; c < ncomp; ++c)
          slope(c, i) = minmod(prim(c, i) - prim(c, im), prim(c, ip) - prim(c, i));
      }
    });
  }

  par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t j = g.neighbor(i, axis, +1);

      thermo::PrimitiveState wl, wr;
      wl.rho = prim(0, i);
      wr.rho = prim(0, j);
      for (int b = 0; b < dim; ++b) {
        wl.u[b] = prim(1 + b, i);
        wr.u[b] = prim(1 + b, j);
      }
      wl.theta = prim(dim + 1, i);
      wr.theta = prim(dim + 1, j);
      if (limited) {
        wl.rho += 0.5 * slope(0, i);
        wr.rho -= 0.5 * slope(0, j);
        for (int b = 0; b < dim; ++b) {
          wl.u[b] += 0.5 * slope(1 + b, i);
          wr.u[b] -= 0.5 * slope(1 + b, j);
        }
        wl.theta += 0.5 * slope(dim + 1, i);
        wr.theta -= 0.5 * slope(dim + 1, j);
      }

      thermo::ConservedState Ul = thermo::prim_to_cons(tp, wl);
      thermo::ConservedState Ur = thermo::prim_to_cons(tp, wr);
      double pl = thermo::pressure(tp, wl.rho, wl.theta);
      double pr = thermo::pressure(tp, wr.rho, wr.theta);
      double sl = std::abs(wl.u[axis]) + thermo::sound_speed(tp, wl.rho, wl.theta);
      double sr = std::abs(wr.u[axis]) + thermo::sound_speed(tp, wr.rho, wr.theta);
      double smax = std::max(sl, sr);

      double F[5];
      F[0] = 0.5 * (Ul.m[axis] + Ur.m[axis]) - 0.5 * smax * (Ur.rho - Ul.rho);
      for (int b = 0; b < dim; ++b) {
        double fl = Ul.m[b] * wl.u[axis] + (b == axis ? pl : 0.0);
        double fr = Ur.m[b] * wr.u[axis] + (b == axis ? pr : 0.0);
        F[1 + b] = 0.5 * (fl + fr) - 0.5 * smax * (Ur.m[b] - Ul.m[b]);
      }
      F[dim + 1] = 0.5 * ((Ul.E + pl) * wl.u[axis] + (Ur.E + pr) * wr.u[axis]) -
                   0.5 * smax * (Ur.E - Ul.E);

      if (viscous || heat) {
        double theta_f = 0.5 * (prim(dim + 1, i) + prim(dim + 1, j));
        if (viscous) {
          double mu = tp.mu1 * theta_f;
          double lam = tp.lambda1 * theta_f;
          // grad u at the face: compact along the face normal, averaged
          // central differences transversally.
          double du[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
          for (int b = 0; b < dim; ++b) {
            du[b][axis] = (prim(1 + b, j) - prim(1 + b, i)) / h;
            for (int c = 0; c < dim; ++c) {
              if (c == axis) continue;
              double gi = (prim(1 + b, g.neighbor(i, c, +1)) - prim(1 + b, g.neighbor(i, c, -1))) /
                          (2.0 * h);
              double gj = (prim(1 + b, g.neighbor(j, c, +1)) - prim(1 + b, g.neighbor(j, c, -1))) /
                          (2.0 * h);
              du[b][c] = 0.5 * (gi + gj);
            }
          }
          double divu = 0.0;
          for (int b = 0; b < dim; ++b) divu += du[b][b];
          for (int b = 0; b < dim; ++b) {
            double S_ba = mu * (du[b][axis] + du[axis][b]) + (b == axis ? lam * divu : 0.0);
            F[1 + b] -= cfg.nu * S_ba;
            double uf = 0.5 * (prim(1 + b, i) + prim(1 + b, j));
            F[dim + 1] -= cfg.nu * S_ba * uf;
          }
        }
        if (heat) F[dim + 1] -= cfg.kappa * (prim(dim + 1, j) - prim(dim + 1, i)) / h;
      }

      for (int c = 0; c < ncomp; ++c) face(c, i) = F[c];
    }
  });
}

void compute_rhs(const ThermoParams& tp, const SolverConfig& cfg, const Field& U, Field& rhs) {
  const PeriodicGrid& g = U.grid();
  const int ncomp = g.dim + 2;
  Field prim = primitives(tp, U);
  Field face(g, ncomp);
  std::fill(rhs.raw().begin(), rhs.raw().end(), 0.0);
  for (int axis = 0; axis < g.dim; ++axis) {
    axis_fluxes(tp, cfg, prim, axis, face);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        std::size_t im = g.neighbor(i, axis, -1);
        for (int c = 0; c < ncomp; ++c) rhs(c, i) += (face(c, im) - face(c, i)) / g.h;
      }
    });
  }
}

void validate_state(const Field& U, const SolverConfig& cfg, long step_index) {
  const PeriodicGrid& g = U.grid();
  const int ncomp = g.dim + 2;
  par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (int c = 0; c < ncomp; ++c)
        if (!std::isfinite(U(c, i)))
          throw NumericalBlowup("non-finite state in cell " + std::to_string(i), step_index);
      if (U(0, i) < cfg.rho_floor)
        throw VacuumApproach("density " + std::to_string(U(0, i)) + " under the floor in cell " +
                                 std::to_string(i),
                             step_index);
    }
  });
}

double cfl_dt(const ThermoParams& tp, const SolverConfig& cfg, const Field& prim) {
  const PeriodicGrid& g = prim.grid();
  const int dim = g.dim;
  // 10% safety factor on the acoustic speed.
  double maxwave = par::deterministic_max(g.cells(), [&](std::size_t i) {
    double u2 = 0.0;
    for (int b = 0; b < dim; ++b) u2 += prim(1 + b, i) * prim(1 + b, i);
    return std::sqrt(u2) + thermo::sound_speed(tp, prim(0, i), prim(dim + 1, i));
  });
  double dt = g.h / (1.1 * maxwave);
  double min_rho = 1.0;
  if (cfg.nu > 0.0 || cfg.kappa > 0.0)
    min_rho = par::deterministic_min(g.cells(), [&](std::size_t i) { return prim(0, i); });
  if (cfg.nu > 0.0) {
    double max_theta =
        par::deterministic_max(g.cells(), [&](std::size_t i) { return prim(dim + 1, i); });
    double coeff = 2.0 * tp.mu1 + std::abs(tp.lambda1);
    // Momentum diffuses velocity with coefficient nu*(2mu1+|lambda1|)*theta/rho,
    // so light cells tighten the parabolic limit just as they do for heat.
    dt = std::min(dt, g.h * g.h * min_rho / (2.0 * dim * cfg.nu * coeff * max_theta));
  }
  if (cfg.kappa > 0.0) {
    double min_slope = par::deterministic_min(g.cells(), [&](std::size_t i) {
      return thermo::thermal_energy_slope(tp, prim(dim + 1, i));
    });
    dt = std::min(dt, g.h * g.h * min_rho * min_slope / (2.0 * dim * cfg.kappa));
  }
  return cfg.cfl * dt;
}

}  // namespace

namespace {

void heun_step(Field& U, const ThermoParams& params, const SolverConfig& config, long step_index,
               double dt) {
  const PeriodicGrid& g = U.grid();
  const int ncomp = g.dim + 2;
  try {
    Field rhs0(g, ncomp), rhs1(g, ncomp);
    compute_rhs(params, config, U, rhs0);
    Field stage(g, ncomp);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        for (int c = 0; c < ncomp; ++c) stage(c, i) = U(c, i) + dt * rhs0(c, i);
    });
    validate_state(stage, config, step_index);
    compute_rhs(params, config, stage, rhs1);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        for (int c = 0; c < ncomp; ++c)
          U(c, i) = U(c, i) + 0.5 * dt * (rhs0(c, i) + rhs1(c, i));
    });
    validate_state(U, config, step_index);
  } catch (const NonPhysicalState& e) {
    throw NumericalBlowup(std::string("state left the physical region: ") + e.what(), step_index);
  }
}

}  // namespace

double step(Field& U, const ThermoParams& params, const SolverConfig& config, long step_index,
            double dt_cap) {
  double dt;
  try {
    Field prim = primitives(params, U);
    dt = cfl_dt(params, config, prim);
  } catch (const NonPhysicalState& e) {
    throw NumericalBlowup(std::string("state left the physical region: ") + e.what(), step_index);
  }
  if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
  heun_step(U, params, config, step_index, dt);
  return dt;
}

namespace {

SeriesRow diagnostics_row(const ThermoParams& tp, const SolverConfig& cfg, const Field& U,
                          double t, double dt) {
  const PeriodicGrid& g = U.grid();
  const int dim = g.dim;
  double hd = 1.0;
  for (int a = 0; a < dim; ++a) hd *= g.h;

  SeriesRow row;
  row.t = t;
  row.dt = dt;
  row.mass = fields::integrate(U, 0);
  for (int a = 0; a < dim; ++a) row.mom[a] = fields::integrate(U, 1 + a);
  row.energy = fields::integrate(U, dim + 1);

  Field prim = primitives(tp, U);
  row.min_rho = par::deterministic_min(g.cells(), [&](std::size_t i) { return prim(0, i); });
  row.min_theta =
      par::deterministic_min(g.cells(), [&](std::size_t i) { return prim(dim + 1, i); });
  row.entropy_total = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    return prim(0, i) * thermo::entropy(tp, prim(0, i), prim(dim + 1, i));
  });
  row.rho_l2 = fields::lp_norm(prim, 2.0, 0);
  row.rhos_l2 = std::sqrt(hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    double rs = prim(0, i) * thermo::entropy(tp, prim(0, i), prim(dim + 1, i));
    return rs * rs;
  }));

  std::vector<Field> gu;
  gu.reserve(dim);
  for (int b = 0; b < dim; ++b) gu.push_back(fields::gradient(prim, 1 + b));
  Field gt = fields::gradient(prim, dim + 1);

  double visc_prod = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int b = 0; b < dim; ++b)
      for (int a = 0; a < dim; ++a) A[b][a] = gu[b](a, i);
    double tr = 0.0, dsq = 0.0;
    for (int b = 0; b < dim; ++b) {
      tr += A[b][b];
      for (int a = 0; a < dim; ++a) {
        double d = 0.5 * (A[b][a] + A[a][b]);
        dsq += d * d;
      }
    }
    return 2.0 * tp.mu1 * dsq + tp.lambda1 * tr * tr;
  });
  double gusq = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    double s = 0.0;
    for (int b = 0; b < dim; ++b)
      for (int a = 0; a < dim; ++a) s += gu[b](a, i) * gu[b](a, i);
    return s;
  });
  double gtrel = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    double s = 0.0;
    double th = prim(dim + 1, i);
    for (int a = 0; a < dim; ++a) s += gt(a, i) * gt(a, i);
    return s / (th * th);
  });
  row.diss_visc = cfg.nu * visc_prod;
  row.diss_heat = cfg.kappa * gtrel;
  row.grad_u_sq = gusq;
  row.grad_theta_rel_sq = gtrel;
  return row;
}

}  // namespace

Field init_contact_perturbed(const PeriodicGrid& grid, const ThermoParams& params,
                             const func::ContactState& contact, double width, double alpha,
                             int mode) {
  if (alpha < 0.0) throw ConfigError("init: alpha must be nonnegative");
  if (mode < 1) throw ConfigError("init: mode must be a positive integer");
  if (width < 0.0) throw ConfigError("init: width must be nonnegative");
  if (width > 0.0 && width < 4.0 * grid.h - 1e-13)
    throw ConfigError("init: width must be zero (sharp) or at least four cells");

  // Planar profile along axis 1: indicator of (1/2, 1), optionally smoothed.
  PeriodicGrid line = PeriodicGrid::make(1, grid.n);
  Field prof(line, 1);
  for (int i = 0; i < grid.n; ++i) {
    double x = line.center(i);
    prof(0, i) = (x > 0.5 && x < 1.0) ? 1.0 : 0.0;
  }
  if (width > 0.0) {
    fields::MollifierKernel k = fields::MollifierKernel::make(line, 0.5 * width);
    prof = fields::mollify(prof, k);
  }

  const int dim = grid.dim;
  Field U(grid, dim + 2);
  const double two_pi = 6.283185307179586476925286766559;
  par::parallel_for(grid.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t cell = lo; cell < hi; ++cell) {
      auto idx = grid.coords(cell);
      double s = prof(0, idx[0]);
      thermo::PrimitiveState w;
      w.rho = contact.rho_minus + (contact.rho_plus - contact.rho_minus) * s;
      w.theta = contact.theta_minus + (contact.theta_plus - contact.theta_minus) * s;
      double x1 = grid.center(idx[0]);
      w.u[0] = alpha * std::sin(two_pi * mode * x1);
      if (dim >= 2) w.u[0] *= std::cos(two_pi * grid.center(idx[1]));
      thermo::ConservedState c = thermo::prim_to_cons(params, w);
      U(0, cell) = c.rho;
      for (int a = 0; a < dim; ++a) U(1 + a, cell) = c.m[a];
      U(dim + 1, cell) = c.E;
    }
  });
  return U;
}

RunRecord run(const Field& initial, const ThermoParams& params, const SolverConfig& config,
              int frame_stride) {
  config.validate();
  params.validate();
  if (frame_stride < 1) throw ConfigError("run: frame stride must be positive");

  RunRecord rec;
  rec.grid = initial.grid();
  rec.params = params;
  rec.config = config;
  rec.frame_stride = frame_stride;

  Field U = initial;
  validate_state(U, config, 0);
  double t = 0.0;
  rec.frames.push_back(U);
  rec.frame_times.push_back(0.0);
  rec.frame_steps.push_back(0);

  const double t_end = config.t_end;
  long n = 0;
  while (t < t_end * (1.0 - 1e-12)) {
    if (n >= config.max_steps)
      throw NumericalBlowup("exceeded max_steps before reaching t_end", n);
    double dt;
    try {
      Field prim = primitives(params, U);
      dt = cfl_dt(params, config, prim);
    } catch (const NonPhysicalState& e) {
      throw NumericalBlowup(std::string("state left the physical region: ") + e.what(), n);
    }
    dt = std::min(dt, t_end - t);
    // Row k describes the state at t_k; its dt column is the step taken from there.
    rec.series.push_back(diagnostics_row(params, config, U, t, dt));
    heun_step(U, params, config, n, dt);
    ++n;
    t = std::min(t + dt, t_end);
    if (n % frame_stride == 0 || t >= t_end * (1.0 - 1e-12)) {
      rec.frames.push_back(U);
      rec.frame_times.push_back(t);
      rec.frame_steps.push_back(n);
    }
  }
  rec.series.push_back(diagnostics_row(params, config, U, t_end, 0.0));
  rec.steps = n;
  return rec;
}

AdmissibilityReport admissibility(const RunRecord& rec) {
  if (rec.series.empty()) throw Error("admissibility: empty series");
  AdmissibilityReport rep;
  const SeriesRow& first = rec.series.front();
  double mass_scale = std::max(std::abs(first.mass), 1e-300);
  rep.min_rho = std::numeric_limits<double>::infinity();
  rep.min_theta = std::numeric_limits<double>::infinity();
  double diss_cum = 0.0;
  double priv_cum = 0.0;
  rep.entropy_balance_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rec.series.size(); ++k) {
    const SeriesRow& r = rec.series[k];
    rep.mass_drift = std::max(rep.mass_drift, std::abs(r.mass - first.mass) / mass_scale);
    for (int a = 0; a < rec.grid.dim; ++a) {
      double scale = std::max(std::abs(first.mom[a]), mass_scale);
      rep.momentum_drift[a] =
          std::max(rep.momentum_drift[a], std::abs(r.mom[a] - first.mom[a]) / scale);
    }
    rep.energy_drift = std::max(rep.energy_drift, std::abs(r.energy - first.energy) /
                                                      std::max(std::abs(first.energy), 1e-300));
    if (k > 0) {
      const SeriesRow& q = rec.series[k - 1];
      double w = 0.5 * (r.t - q.t);
      diss_cum += w * (q.diss_visc + q.diss_heat + r.diss_visc + r.diss_heat);
      priv_cum += w * (rec.config.nu * (q.grad_u_sq + r.grad_u_sq) +
                       rec.config.kappa * (q.grad_theta_rel_sq + r.grad_theta_rel_sq));
    }
    rep.entropy_balance_min =
        std::min(rep.entropy_balance_min, r.entropy_total - first.entropy_total - diss_cum);
    rep.min_rho = std::min(rep.min_rho, r.min_rho);
    rep.min_theta = std::min(rep.min_theta, r.min_theta);
    rep.bound_pri_mass = std::max(rep.bound_pri_mass, r.rho_l2);
    rep.bound_pri_ent = std::max(rep.bound_pri_ent, r.rhos_l2);
  }
  rep.bound_pri_v = priv_cum;
  return rep;
}

void write_series_csv(std::ostream& os, const RunRecord& rec) {
  os << "t,dt,mass";
  for (int a = 0; a < rec.grid.dim; ++a) os << ",mom" << (a + 1);
  os << ",energy,entropy_total,min_rho,min_theta,diss_visc,diss_heat\n";
  os.precision(17);
  for (const SeriesRow& r : rec.series) {
    os << r.t << ',' << r.dt << ',' << r.mass;
    for (int a = 0; a < rec.grid.dim; ++a) os << ',' << r.mom[a];
    os << ',' << r.energy << ',' << r.entropy_total << ',' << r.min_rho << ',' << r.min_theta
       << ',' << r.diss_visc << ',' << r.diss_heat << '\n';
  }
}

}  // namespace nsfc::solver
