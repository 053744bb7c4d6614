#include "nsfc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nsfc/parallel.hpp"
#include "nsfc/sha1.hpp"

namespace nsfc::harness {

using fields::Field;
using fields::PeriodicGrid;
using thermo::ConservedState;

fields::Field initial_state(const Experiment& ex) {
  PeriodicGrid grid = PeriodicGrid::make(ex.dim, ex.n);
  return solver::init_contact_perturbed(grid, ex.params, ex.contact, ex.width, ex.alpha, ex.mode);
}

double initial_relent(const thermo::ThermoParams& params, const func::ContactState& contact,
                      const Field& conserved, bool via_decomposition) {
  const PeriodicGrid& g = conserved.grid();
  const int dim = g.dim;
  double hd = 1.0;
  for (int a = 0; a < dim; ++a) hd *= g.h;
  ConservedState um = contact.state_minus();
  ConservedState up = contact.state_plus();

  return hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
    ConservedState U;
    U.rho = conserved(0, i);
    for (int a = 0; a < dim; ++a) U.m[a] = conserved(1 + a, i);
    U.E = conserved(dim + 1, i);
    bool plus = g.center(g.coords(i)[0]) > 0.5;
    const ConservedState& ref = plus ? up : um;
    if (via_decomposition) {
      double theta_ref = plus ? contact.theta_plus : contact.theta_minus;
      return func::rel_entropy_decomposition(params, U, ref).sum() / theta_ref;
    }
    return func::rel_entropy(params, U, ref);
  });
}

solver::RunRecord run_experiment(const Experiment& ex) {
  Field U0 = initial_state(ex);
  double e0_direct = initial_relent(ex.params, ex.contact, U0, false);
  double e0_split = initial_relent(ex.params, ex.contact, U0, true);
  if (std::abs(e0_direct - e0_split) > 1e-10 * (1.0 + std::abs(e0_direct)))
    throw Error("run_experiment: initial relative-entropy paths disagree");
  return solver::run(U0, ex.params, ex.solver_cfg, ex.frame_stride);
}

double sup_perturbation(const thermo::ThermoParams& params, const func::ContactState& contact,
                        const solver::RunRecord& rec) {
  double sup_fk = 0.0;
  double sup_l1 = 0.0;
  for (const Field& U : rec.frames) {
    func::PerturbationIntegrals pi = func::perturbation_integrals(params, contact, U);
    sup_fk = std::max(sup_fk, pi.excursion_int + pi.kinetic_int);
    sup_l1 = std::max(sup_l1, pi.energy_l1);
  }
  return sup_fk + sup_l1;
}

DiagnosticsSeries diagnostics(const solver::RunRecord& rec, const func::ContactState& contact,
                              const shift::ShiftConfig& shift_cfg, int diag_stride) {
  if (diag_stride < 1) throw ConfigError("diagnostics: diag stride must be positive");
  const PeriodicGrid& g = rec.grid;
  const int dim = g.dim;
  double hd = 1.0;
  for (int a = 0; a < dim; ++a) hd *= g.h;

  shift::VelocityHistory hist = shift::velocity_history(rec, shift_cfg.delta);
  shift::ShiftField sf = shift::build_shift(hist, contact, shift_cfg);

  DiagnosticsSeries out;
  out.epsilon = shift_cfg.epsilon;
  out.h = g.h;
  for (const auto& row : rec.series) out.dt_max = std::max(out.dt_max, row.dt);
  out.initial_relent = initial_relent(rec.params, contact, rec.frames.front(), false);
  double e0_split = initial_relent(rec.params, contact, rec.frames.front(), true);
  if (std::abs(out.initial_relent - e0_split) > 1e-10 * (1.0 + std::abs(out.initial_relent)))
    throw Error("diagnostics: initial relative-entropy paths disagree");

  ConservedState um = contact.state_minus();
  ConservedState up = contact.state_plus();

  std::vector<std::size_t> picks;
  for (std::size_t j = 0; j < rec.frames.size(); j += diag_stride) picks.push_back(j);
  if (picks.back() != rec.frames.size() - 1) picks.push_back(rec.frames.size() - 1);

  for (std::size_t j : picks) {
    const Field& U = rec.frames[j];
    const solver::SeriesRow& srow = rec.series.at(rec.frame_steps[j]);
    DiagnosticsRow row;
    row.t = rec.frame_times[j];

    func::PerturbationIntegrals pi = func::perturbation_integrals(rec.params, contact, U);
    row.excursion_int = pi.excursion_int;
    row.kinetic_int = pi.kinetic_int;
    row.gauge_int = pi.gauge_int;
    row.energy_l1 = pi.energy_l1;
    row.dissipation =
        rec.config.kappa * srow.grad_theta_rel_sq + rec.config.nu * srow.grad_u_sq;

    const Field& psi_bar = sf.psi_bar[j];
    row.weighted_relent = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
      ConservedState Uc;
      Uc.rho = U(0, i);
      for (int a = 0; a < dim; ++a) Uc.m[a] = U(1 + a, i);
      Uc.E = U(dim + 1, i);
      double pb = psi_bar(0, i);
      return (1.0 - pb) * contact.theta_minus * func::rel_entropy(rec.params, Uc, um) +
             pb * contact.theta_plus * func::rel_entropy(rec.params, Uc, up);
    });

    Field prim = solver::primitives(rec.params, U);
    Field grad_theta = fields::gradient(prim, dim + 1);
    Field grad_pb = fields::gradient(psi_bar, 0);
    row.heat_flux_term =
        rec.config.kappa * hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
          double gt2 = 0.0, gp2 = 0.0;
          for (int a = 0; a < dim; ++a) {
            gt2 += grad_theta(a, i) * grad_theta(a, i);
            gp2 += grad_pb(a, i) * grad_pb(a, i);
          }
          return std::sqrt(gt2) / prim(dim + 1, i) * std::sqrt(gp2);
        });

    Field u_raw(g, dim);
    for (int a = 0; a < dim; ++a) {
      auto dst = u_raw.comp(a);
      par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) dst[i] = U(1 + a, i) / U(0, i);
      });
    }
    Field R = shift::commutator_residual(u_raw, sf.psi[j], shift_cfg.delta, shift_cfg.epsilon);
    row.transport_term = hd * par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
      double rho = U(0, i);
      double rs = rho * thermo::entropy(rec.params, prim(0, i), prim(dim + 1, i));
      return (contact.beta_jump * rho + contact.theta_jump * (-rs)) * R(0, i);
    });

    out.rows.push_back(row);
  }
  return out;
}

MonitorReport monitor_inequality(const DiagnosticsSeries& series, double fitted_constant) {
  MonitorReport rep;
  rep.constant = fitted_constant;
  rep.tol = 5.0 * std::max(series.h, series.dt_max) * (1.0 + series.initial_relent);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.min_dissipation = std::numeric_limits<double>::infinity();

  double diss_cum = 0.0;
  double heat_cum = 0.0;
  double transport_cum = 0.0;
  bool ok = true;
  double diss_scale = 0.0;
  for (const auto& r : series.rows) diss_scale = std::max(diss_scale, std::abs(r.dissipation));

  for (std::size_t k = 0; k < series.rows.size(); ++k) {
    const DiagnosticsRow& r = series.rows[k];
    if (k > 0) {
      const DiagnosticsRow& q = series.rows[k - 1];
      double w = 0.5 * (r.t - q.t);
      diss_cum += w * (q.dissipation + r.dissipation);
      heat_cum += w * (q.heat_flux_term + r.heat_flux_term);
      transport_cum += w * (q.transport_term + r.transport_term);
    }
    double lhs = r.excursion_int + r.gauge_int + r.kinetic_int + diss_cum;
    double rhs = fitted_constant * (series.epsilon + series.initial_relent) +
                 std::abs(heat_cum) + std::abs(transport_cum) + rep.tol;
    rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    rep.min_dissipation = std::min(rep.min_dissipation, r.dissipation);
    if (lhs > rhs) ok = false;
  }
  // The dissipation functional is a sum of squares; a negative value means
  // the data fed to the monitor is not an admissible balance.
  if (rep.min_dissipation < -1e-12 * (1.0 + diss_scale)) ok = false;
  rep.pass = ok && !series.rows.empty();
  return rep;
}

SweepResult dissipation_sweep(const Experiment& base, const std::vector<double>& alphas,
                              const std::vector<double>& nus, const SweepObserver& observer) {
  SweepResult result;
  std::size_t index = 0;
  for (double nu : nus) {
    for (double alpha : alphas) {
      Experiment ex = base;
      ex.alpha = alpha;
      ex.solver_cfg.nu = nu;
      ex.solver_cfg.kappa = nu;
      SweepRun run;
      run.alpha = alpha;
      run.nu = nu;
      run.kappa = nu;
      try {
        solver::RunRecord rec = run_experiment(ex);
        run.initial_relent = initial_relent(ex.params, ex.contact, rec.frames.front(), false);
        run.sup_perturbation = sup_perturbation(ex.params, ex.contact, rec);
        double denom = std::sqrt(run.initial_relent) + run.initial_relent;
        if (denom <= 0.0) throw Error("sweep: vanishing initial relative entropy");
        run.ratio = run.sup_perturbation / denom;
        solver::AdmissibilityReport rep = solver::admissibility(rec);
        run.bound_pri_mass = rep.bound_pri_mass;
        run.bound_pri_ent = rep.bound_pri_ent;
        run.bound_pri_v = rep.bound_pri_v;
        if (observer) observer(index, ex, &rec, run);
      } catch (const Error& e) {
        run.error = e.what();
        if (observer) observer(index, ex, nullptr, run);
      }
      result.runs.push_back(std::move(run));
      ++index;
    }
  }
  result.fitted_constant = 0.0;
  for (const SweepRun& r : result.runs)
    if (r.error.empty()) result.fitted_constant = std::max(result.fitted_constant, r.ratio);
  return result;
}

ConvergenceResult convergence_study(const Experiment& base, double alpha0, int levels) {
  if (levels < 2) throw ConfigError("convergence_study: need at least two levels");
  ConvergenceResult res;
  for (int nl = 0; nl < levels; ++nl) {
    Experiment ex = base;
    ex.alpha = alpha0 * std::pow(0.5, nl);
    solver::RunRecord rec = run_experiment(ex);
    res.alphas.push_back(ex.alpha);
    res.e0.push_back(initial_relent(ex.params, ex.contact, rec.frames.front(), false));
    res.phi.push_back(sup_perturbation(ex.params, ex.contact, rec));
  }
  res.strictly_decreasing = true;
  for (std::size_t k = 1; k < res.phi.size(); ++k)
    if (!(res.phi[k] < res.phi[k - 1])) res.strictly_decreasing = false;

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = res.e0.size();
  for (std::size_t k = 0; k < n; ++k) {
    double x = std::log(res.e0[k]);
    double y = std::log(res.phi[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return res;
}

StaticLimitResult static_limit_check(const solver::RunRecord& rec, int max_mode) {
  if (max_mode < 1) throw ConfigError("static_limit_check: need max_mode >= 1");
  const PeriodicGrid& g = rec.grid;
  const int dim = g.dim;
  double hd = 1.0;
  for (int a = 0; a < dim; ++a) hd *= g.h;
  const double two_pi = 6.283185307179586476925286766559;

  // ||m||_{L^{4/3}} per frame, then running sup in time.
  std::vector<double> m_norm(rec.frames.size());
  for (std::size_t j = 0; j < rec.frames.size(); ++j) {
    const Field& U = rec.frames[j];
    double s = par::deterministic_map_sum(g.cells(), [&](std::size_t i) {
      double m2 = 0.0;
      for (int a = 0; a < dim; ++a) m2 += U(1 + a, i) * U(1 + a, i);
      return std::pow(std::sqrt(m2), 4.0 / 3.0);
    });
    m_norm[j] = std::pow(s * hd, 0.75);
  }
  std::vector<double> m_sup(m_norm);
  for (std::size_t j = 1; j < m_sup.size(); ++j) m_sup[j] = std::max(m_sup[j - 1], m_norm[j]);

  double dt_max = 0.0;
  for (const auto& row : rec.series) dt_max = std::max(dt_max, row.dt);

  StaticLimitResult res;
  res.tol = 5.0 * std::max(g.h, dt_max);

  for (int axis = 0; axis < dim; ++axis) {
    for (int k = 1; k <= max_mode; ++k) {
      for (int trig = 0; trig < 2; ++trig) {
        std::vector<double> phi(g.cells());
        std::vector<double> gphi(g.cells());
        for (std::size_t i = 0; i < g.cells(); ++i) {
          double xa = g.center(g.coords(i)[axis]);
          double arg = two_pi * k * xa;
          phi[i] = trig == 0 ? std::cos(arg) : std::sin(arg);
          gphi[i] = two_pi * k * (trig == 0 ? -std::sin(arg) : std::cos(arg));
        }
        double g4 = std::pow(
            hd * par::deterministic_map_sum(g.cells(),
                                            [&](std::size_t i) { return std::pow(std::abs(gphi[i]), 4.0); }),
            0.25);
        auto moment = [&](const Field& U) {
          return hd * par::deterministic_map_sum(
                          g.cells(), [&](std::size_t i) { return phi[i] * U(0, i); });
        };
        double m0 = moment(rec.frames.front());
        for (std::size_t j = 1; j < rec.frames.size(); ++j) {
          double t = rec.frame_times[j];
          double lhs = std::abs(moment(rec.frames[j]) - m0);
          double rhs = g4 * m_sup[j] * t;
          if (rhs <= 1e-300) continue;
          res.worst_ratio = std::max(res.worst_ratio, lhs / rhs);
        }
      }
    }
  }
  res.pass = res.worst_ratio <= 1.0 + res.tol;
  return res;
}

namespace {

std::string snapshot_bytes(const Field& f) {
  std::ostringstream os(std::ios::binary);
  fields::write_snapshot(os, f);
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("persist: cannot open " + p.string());
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw IoError("persist: write failed for " + p.string());
}

std::string frame_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.bin", k);
  return buf;
}

}  // namespace

void persist_run(const std::string& dir, const std::string& config_text,
                 const func::ContactState& contact, const solver::RunRecord& rec,
                 const shift::ShiftField* shift_field, double wall_seconds) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "frames", ec);
  if (ec) throw IoError("persist: cannot create " + (root / "frames").string());
  if (shift_field) {
    fs::create_directories(root / "shift", ec);
    if (ec) throw IoError("persist: cannot create " + (root / "shift").string());
  }

  std::ostringstream manifest;
  manifest.precision(17);
  manifest << "format nsfc-run 1\n";
  manifest << "run_id " << util::git_blob_sha1(config_text) << "\n";
  manifest << "dim " << rec.grid.dim << " n " << rec.grid.n << "\n";
  manifest << "steps " << rec.steps << "\n";

  write_file(root / "config.txt", config_text);
  manifest << "file config.txt sha1 " << util::git_blob_sha1(config_text) << "\n";

  std::ostringstream series;
  solver::write_series_csv(series, rec);
  write_file(root / "series.csv", series.str());
  manifest << "file series.csv sha1 " << util::git_blob_sha1(series.str()) << "\n";

  double e0 = initial_relent(rec.params, contact, rec.frames.front(), false);
  double phi = sup_perturbation(rec.params, contact, rec);
  manifest << "e0 " << e0 << "\n";
  manifest << "phi_sup " << phi << "\n";

  manifest << "frame_count " << rec.frames.size() << "\n";
  for (std::size_t k = 0; k < rec.frames.size(); ++k) {
    std::string bytes = snapshot_bytes(rec.frames[k]);
    std::string name = frame_name(k);
    write_file(root / "frames" / name, bytes);
    manifest << "frame " << k << " step " << rec.frame_steps[k] << " t " << rec.frame_times[k]
             << " file frames/" << name << " sha1 " << util::git_blob_sha1(bytes) << "\n";
  }

  if (shift_field) {
    manifest << "shift_count " << shift_field->times.size() << "\n";
    for (std::size_t k = 0; k < shift_field->times.size(); ++k) {
      const char* kinds[3] = {"psi", "psi_bar", "weight"};
      const Field* fs3[3] = {&shift_field->psi[k], &shift_field->psi_bar[k],
                             &shift_field->weight[k]};
      for (int q = 0; q < 3; ++q) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s_%04zu.bin", kinds[q], k);
        std::string bytes = snapshot_bytes(*fs3[q]);
        write_file(root / "shift" / buf, bytes);
        manifest << "shift " << k << " t " << shift_field->times[k] << " file shift/" << buf
                 << " sha1 " << util::git_blob_sha1(bytes) << "\n";
      }
    }
  } else {
    manifest << "shift_count 0\n";
  }

  manifest << "wall_seconds " << wall_seconds << "\n";
  write_file(root / "manifest.txt", manifest.str());
}

void write_diagnostics_csv(std::ostream& os, const DiagnosticsSeries& series) {
  os << "t,weighted_relent,excursion_int,kinetic_int,gauge_int,energy_l1,dissipation,"
        "heat_flux_term,transport_term\n";
  os.precision(17);
  for (const DiagnosticsRow& r : series.rows) {
    os << r.t << ',' << r.weighted_relent << ',' << r.excursion_int << ',' << r.kinetic_int << ','
       << r.gauge_int << ',' << r.energy_l1 << ',' << r.dissipation << ',' << r.heat_flux_term
       << ',' << r.transport_term << '\n';
  }
}

}  // namespace nsfc::harness
