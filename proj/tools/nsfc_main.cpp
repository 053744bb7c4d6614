#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsfc/config.hpp"
#include "nsfc/parallel.hpp"
#include "nsfc/sha1.hpp"

namespace fs = std::filesystem;
using namespace nsfc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerdict = 4;
constexpr int kExitIo = 5;

std::string fnum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open " + p.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& data) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  os << data;
  if (!os) throw IoError("write failed for " + p.string());
}

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// verify: seeded property suite over the state functions and functionals.

struct VerifyReporter {
  bool all_ok = true;
  void line(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : "  " + detail)
              << "\n";
    all_ok = all_ok && ok;
  }
};

double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int cmd_verify(const cli::Config& cfg) {
  thermo::ThermoParams p = cfg.thermo_params();
  func::ContactState contact = cfg.contact_state();
  VerifyReporter rep;

  {
    double below = thermo::thermal_energy(p, p.theta_star * (1.0 - 1e-13));
    double above = thermo::thermal_energy(p, p.theta_star * (1.0 + 1e-13));
    double err = std::abs(below - above) / thermo::thermal_energy(p, p.theta_star);
    rep.line(err < 1e-10, "thermal-energy-branch-continuity", "rel_err=" + sci(err));
    double sb = thermo::thermal_entropy(p, p.theta_star * (1.0 - 1e-13));
    double sa = thermo::thermal_entropy(p, p.theta_star * (1.0 + 1e-13));
    double serr = std::abs(sb - sa);
    rep.line(serr < 1e-10, "thermal-entropy-branch-continuity", "abs_err=" + sci(serr));
  }
  {
    bool ok = true;
    double worst = 0.0;
    double prev = thermo::thermal_energy(p, 1e-4);
    for (int k = 1; k <= 1000; ++k) {
      double theta = 1e-4 * std::pow(1e6, k / 1000.0);
      double q = thermo::thermal_energy(p, theta);
      if (!(q > prev)) ok = false;
      double back = thermo::inverse_thermal_energy(p, q);
      worst = std::max(worst, std::abs(back - theta) / theta);
      prev = q;
    }
    rep.line(ok, "thermal-energy-monotone", "");
    rep.line(worst < 1e-12, "thermal-energy-inverse-roundtrip", "rel_err=" + sci(worst));
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      double q = 1e-4 * std::pow(1e6, (k + 0.5) / 1000.0);
      double dq = 1e-6 * q;
      double fd = (thermo::entropy_of_thermal(p, q + dq) - thermo::entropy_of_thermal(p, q - dq)) /
                  (2.0 * dq);
      double exact = thermo::entropy_of_thermal_slope(p, q);
      double err = std::abs(fd - exact) / std::abs(exact);
      worst = std::max(worst, err);
      double second = thermo::entropy_of_thermal(p, q + dq) -
                      2.0 * thermo::entropy_of_thermal(p, q) +
                      thermo::entropy_of_thermal(p, q - dq);
      if (!(second < 0.0)) ok = false;
    }
    rep.line(worst < 1e-6, "entropy-slope-identity", "rel_err=" + sci(worst));
    rep.line(ok, "entropy-of-thermal-concavity", "");
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      double theta = p.theta_star * (1.0 + k);
      double q = thermo::thermal_energy(p, theta);
      worst = std::max(worst,
                       std::abs(p.R * theta - (p.gamma - 1.0) * q) / (p.R * theta));
    }
    rep.line(worst < 1e-14, "warm-ideal-gas-identity", "rel_err=" + sci(worst));
  }
  {
    std::mt19937_64 eng(cfg.seed);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      thermo::PrimitiveState w;
      w.rho = 0.05 + 3.95 * uniform01(eng);
      for (int a = 0; a < 3; ++a) w.u[a] = -2.0 + 4.0 * uniform01(eng);
      w.theta = 0.2 + 7.8 * uniform01(eng);
      thermo::PrimitiveState back = thermo::cons_to_prim(p, thermo::prim_to_cons(p, w));
      worst = std::max(worst, std::abs(back.rho - w.rho) / w.rho);
      worst = std::max(worst, std::abs(back.theta - w.theta) / w.theta);
      for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(back.u[a] - w.u[a]));
    }
    rep.line(worst < 1e-12, "conserved-primitive-roundtrip", "worst=" + sci(worst));
  }
  {
    std::mt19937_64 eng(cfg.seed + 1);
    bool nonneg = true;
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      thermo::PrimitiveState w;
      w.rho = 0.1 + 3.0 * uniform01(eng);
      for (int a = 0; a < 3; ++a) w.u[a] = -2.0 + 4.0 * uniform01(eng);
      w.theta = 0.3 + 6.0 * uniform01(eng);
      thermo::ConservedState U = thermo::prim_to_cons(p, w);
      bool plus = uniform01(eng) < 0.5;
      thermo::ConservedState ref = plus ? contact.state_plus() : contact.state_minus();
      double theta_ref = plus ? contact.theta_plus : contact.theta_minus;
      double direct = theta_ref * func::rel_entropy(p, U, ref);
      if (direct < 0.0) nonneg = false;
      double split = func::rel_entropy_decomposition(p, U, ref).sum();
      worst = std::max(worst, std::abs(direct - split) / (1.0 + std::abs(direct)));
    }
    rep.line(nonneg, "relative-entropy-nonnegative", "");
    rep.line(worst < 1e-10, "decomposition-identity", "worst=" + sci(worst));
  }
  {
    thermo::ConservedState ref = contact.state_minus();
    double h0 = 1e-5;
    double worst = 0.0;
    for (int c = 0; c < 5; ++c) {
      thermo::ConservedState up = ref, dn = ref;
      double* pu[5] = {&up.rho, &up.m[0], &up.m[1], &up.m[2], &up.E};
      double* pd[5] = {&dn.rho, &dn.m[0], &dn.m[1], &dn.m[2], &dn.E};
      *pu[c] += h0;
      *pd[c] -= h0;
      double g = (func::rel_entropy(p, up, ref) - func::rel_entropy(p, dn, ref)) / (2.0 * h0);
      worst = std::max(worst, std::abs(g));
    }
    rep.line(worst < 1e-6, "relative-entropy-zero-gradient", "grad_norm=" + sci(worst));
  }
  {
    std::mt19937_64 eng(cfg.seed + 2);
    bool okf = true, okg = true;
    for (int k = 0; k < 10000; ++k) {
      double x = 5.0 * uniform01(eng);
      double y = 5.0 * uniform01(eng);
      double fm = func::density_excursion(contact, 0.5 * (x + y));
      if (fm > 0.5 * (func::density_excursion(contact, x) + func::density_excursion(contact, y)) +
                   1e-12)
        okf = false;
      // The gauge is convex on each branch, not across the junction at 1.
      double q1 = -1.0 + 2.0 * uniform01(eng);
      double q2 = -1.0 + 2.0 * uniform01(eng);
      if (func::deviation_gauge(0.5 * (q1 + q2)) >
          0.5 * (func::deviation_gauge(q1) + func::deviation_gauge(q2)) + 1e-12)
        okg = false;
      double l1 = 1.0 + 5.0 * uniform01(eng);
      double l2 = 1.0 + 5.0 * uniform01(eng);
      if (func::deviation_gauge(0.5 * (l1 + l2)) >
          0.5 * (func::deviation_gauge(l1) + func::deviation_gauge(l2)) + 1e-12)
        okg = false;
    }
    rep.line(okf, "density-excursion-convex", "");
    rep.line(okg, "deviation-gauge-branch-convex", "");
  }
  {
    func::SampleSpec s1;
    s1.seed = cfg.seed + 3;
    func::SampleSpec s2;
    s2.seed = cfg.seed + 40003;
    double c1 = func::fit_gauge_constant(p, contact, s1);
    double c2 = func::fit_gauge_constant(p, contact, s2);
    bool finite = std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && c2 > 0.0;
    double spread = std::abs(c1 - c2) / std::max(c1, c2);
    rep.line(finite, "gauge-constant-finite", "c1=" + sci(c1) + " c2=" + sci(c2));
    rep.line(spread < 0.2, "gauge-constant-seed-stability", "spread=" + sci(spread));
  }
  {
    func::SampleSpec s;
    s.seed = cfg.seed + 4;
    s.count = 20000;
    double r1 = func::relent_coercivity_min_ratio(p, contact.state_minus(), s);
    double r2 = func::relent_coercivity_min_ratio(p, contact.state_plus(), s);
    rep.line(r1 > 0.0 && r2 > 0.0, "relative-entropy-coercivity",
             "min_ratio=" + sci(std::min(r1, r2)));
  }
  {
    std::mt19937_64 eng(cfg.seed + 5);
    fields::PeriodicGrid g = fields::PeriodicGrid::make(1, 64);
    bool ok = true;
    for (int rep_k = 0; rep_k < 20; ++rep_k) {
      fields::Field U(g, 3);
      for (std::size_t i = 0; i < g.cells(); ++i) {
        thermo::PrimitiveState w;
        w.rho = 0.3 + 2.0 * uniform01(eng);
        w.u[0] = -1.0 + 2.0 * uniform01(eng);
        w.theta = 0.5 + 4.0 * uniform01(eng);
        thermo::ConservedState Uc = thermo::prim_to_cons(p, w);
        U(0, i) = Uc.rho;
        U(1, i) = Uc.m[0];
        U(2, i) = Uc.E;
      }
      func::PerturbationIntegrals pi = func::perturbation_integrals(p, contact, U);
      if (pi.energy_l1 > std::sqrt(pi.gauge_int) + pi.gauge_int + 1e-12) ok = false;
    }
    rep.line(ok, "energy-l1-gauge-bound", "");
  }

  std::cout << (rep.all_ok ? "verify PASS" : "verify FAIL") << "\n";
  return rep.all_ok ? 0 : kExitVerdict;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const cli::Config& cfg, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  harness::Experiment ex = cfg.experiment();
  solver::RunRecord rec = harness::run_experiment(ex);
  solver::AdmissibilityReport adm = solver::admissibility(rec);
  harness::DiagnosticsSeries diag = harness::diagnostics(rec, ex.contact, ex.shift_cfg,
                                                         ex.diag_stride);
  func::SampleSpec spec;
  spec.seed = cfg.seed;
  double cfit = func::fit_gauge_constant(ex.params, ex.contact, spec);
  harness::MonitorReport mon = harness::monitor_inequality(diag, cfit);
  harness::StaticLimitResult stat = harness::static_limit_check(rec, 3);

  double tol_ent = 5.0 * std::max(rec.grid.h, diag.dt_max);
  bool entropy_ok = adm.entropy_balance_min >= -tol_ent;

  std::cout.precision(12);
  std::cout << "steps " << rec.steps << "\n";
  std::cout << "e0 " << diag.initial_relent << "\n";
  std::cout << "mass_drift " << adm.mass_drift << "\n";
  std::cout << "momentum_drift " << adm.momentum_drift[0];
  for (int a = 1; a < rec.grid.dim; ++a) std::cout << ' ' << adm.momentum_drift[a];
  std::cout << "\n";
  std::cout << "energy_drift " << adm.energy_drift << "\n";
  std::cout << "entropy_balance_min " << adm.entropy_balance_min << " "
            << (entropy_ok ? "PASS" : "FAIL") << "\n";
  std::cout << "min_rho " << adm.min_rho << "\n";
  std::cout << "min_theta " << adm.min_theta << "\n";
  std::cout << "bound_pri_mass " << adm.bound_pri_mass << "\n";
  std::cout << "bound_pri_ent " << adm.bound_pri_ent << "\n";
  std::cout << "bound_pri_v " << adm.bound_pri_v << "\n";
  std::cout << "gauge_constant " << cfit << "\n";
  std::cout << "monitor " << (mon.pass ? "PASS" : "FAIL") << " margin " << -mon.max_violation
            << " tol " << mon.tol << "\n";
  std::cout << "static_limit " << (stat.pass ? "PASS" : "FAIL") << " worst_ratio "
            << stat.worst_ratio << " tol " << stat.tol << "\n";

  if (!out.empty()) {
    shift::VelocityHistory hist = shift::velocity_history(rec, ex.shift_cfg.delta);
    shift::ShiftField sf = shift::build_shift(hist, ex.contact, ex.shift_cfg);
    harness::persist_run(out, cli::canonical_text(cfg), ex.contact, rec, &sf, wall_since(t0));
    std::ostringstream dcsv;
    harness::write_diagnostics_csv(dcsv, diag);
    write_text(fs::path(out) / "diagnostics.csv", dcsv.str());
  }

  bool ok = mon.pass && stat.pass && entropy_ok;
  std::cout << "verdict " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : kExitVerdict;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const cli::Config& cfg, const std::string& out) {
  harness::Experiment base = cfg.experiment();
  std::ostringstream runlines;
  runlines.precision(17);

  harness::SweepObserver observer;
  if (!out.empty()) {
    fs::create_directories(out);
    observer = [&](std::size_t index, const harness::Experiment& ex,
                   const solver::RunRecord* rec, const harness::SweepRun& run) {
      char name[16];
      std::snprintf(name, sizeof name, "run_%02zu", index);
      if (rec) {
        auto t0 = std::chrono::steady_clock::now();
        cli::Config per = cfg;
        per.alpha = run.alpha;
        per.nu = run.nu;
        per.kappa = run.kappa;
        harness::persist_run((fs::path(out) / name).string(), cli::canonical_text(per),
                             ex.contact, *rec, nullptr, wall_since(t0));
        runlines << "run " << index << " alpha " << run.alpha << " nu " << run.nu << " kappa "
                 << run.kappa << " e0 " << run.initial_relent << " phi_sup "
                 << run.sup_perturbation << " ratio " << run.ratio << " dir " << name << "\n";
      } else {
        runlines << "run " << index << " alpha " << run.alpha << " nu " << run.nu << " kappa "
                 << run.kappa << " error " << run.error << "\n";
      }
    };
  }

  auto t0 = std::chrono::steady_clock::now();
  harness::SweepResult res = harness::dissipation_sweep(base, cfg.alphas, cfg.nus, observer);

  std::cout.precision(12);
  bool all_ok = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const harness::SweepRun& r : res.runs) {
    std::cout << "alpha " << r.alpha << " nu " << r.nu;
    if (r.error.empty()) {
      std::cout << " e0 " << r.initial_relent << " phi_sup " << r.sup_perturbation << " ratio "
                << r.ratio << "\n";
      min_ratio = std::min(min_ratio, r.ratio);
    } else {
      std::cout << " error " << r.error << "\n";
      all_ok = false;
    }
  }
  std::cout << "fitted_constant " << res.fitted_constant << "\n";
  bool factor2 = min_ratio * 2.0 >= res.fitted_constant;
  std::cout << "ratio_spread " << (factor2 ? "PASS" : "FAIL") << "\n";

  if (!out.empty()) {
    std::string config_text = cli::canonical_text(cfg);
    write_text(fs::path(out) / "config.txt", config_text);
    std::ostringstream man;
    man.precision(17);
    man << "format nsfc-sweep 1\n";
    man << "run_id " << util::git_blob_sha1(config_text) << "\n";
    man << "file config.txt sha1 " << util::git_blob_sha1(config_text) << "\n";
    man << "fitted_constant " << res.fitted_constant << "\n";
    man << "run_count " << res.runs.size() << "\n";
    man << runlines.str();
    man << "wall_seconds " << wall_since(t0) << "\n";
    write_text(fs::path(out) / "manifest.txt", man.str());
  }

  bool ok = all_ok && factor2;
  std::cout << "verdict " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : kExitVerdict;
}

// ---------------------------------------------------------------------------
// converge

int cmd_converge(const cli::Config& cfg, const std::string& out) {
  harness::Experiment base = cfg.experiment();
  harness::ConvergenceResult res = harness::convergence_study(base, cfg.alpha0, cfg.levels);

  std::cout.precision(12);
  for (std::size_t k = 0; k < res.alphas.size(); ++k)
    std::cout << "alpha " << res.alphas[k] << " e0 " << res.e0[k] << " phi_sup " << res.phi[k]
              << "\n";
  std::cout << "slope " << res.slope << "\n";
  std::cout << "monotone " << (res.strictly_decreasing ? "PASS" : "FAIL") << "\n";
  bool slope_ok = res.slope >= 0.45 && res.slope <= 1.1;
  std::cout << "slope_window " << (slope_ok ? "PASS" : "FAIL") << "\n";

  if (!out.empty()) {
    fs::create_directories(out);
    std::ostringstream csv;
    csv.precision(17);
    csv << "alpha,e0,phi_sup\n";
    for (std::size_t k = 0; k < res.alphas.size(); ++k)
      csv << res.alphas[k] << ',' << res.e0[k] << ',' << res.phi[k] << '\n';
    write_text(fs::path(out) / "converge.csv", csv.str());
    write_text(fs::path(out) / "config.txt", cli::canonical_text(cfg));
  }

  bool ok = res.strictly_decreasing && slope_ok;
  std::cout << "verdict " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : kExitVerdict;
}

// ---------------------------------------------------------------------------
// commutator

int cmd_commutator(const cli::Config& cfg) {
  fields::PeriodicGrid g = fields::PeriodicGrid::make(cfg.dim, cfg.n);
  fields::Field u(g, cfg.dim);
  fields::Field psi(g, 1);
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double x1 = g.center(g.coords(i)[0]);
    // Odd about both interface planes with cubic zeros there, so the decay
    // in epsilon is clean and free of the delta-mismatch floor.
    double s = std::sin(two_pi * cfg.mode * x1);
    u(0, i) = s * s * s;
    double frac = x1 - std::floor(x1);
    psi(0, i) = (frac > 0.5 && frac < 1.0) ? 1.0 : 0.0;
  }

  std::vector<double> eps = {2.0 * cfg.epsilon, cfg.epsilon, 0.5 * cfg.epsilon};
  std::vector<double> norms;
  std::cout.precision(12);
  for (double e : eps) {
    fields::Field R = shift::commutator_residual(u, psi, cfg.delta, e);
    double n2 = fields::lp_norm(R, 2.0);
    norms.push_back(n2);
    std::cout << "epsilon " << e << " residual_l2 " << n2 << "\n";
  }
  bool decreasing = norms[1] < norms[0] && norms[2] < norms[1];
  bool halved = norms.back() <= 0.5 * norms.front();
  std::cout << "decay " << (decreasing ? "PASS" : "FAIL") << "\n";
  std::cout << "final_over_initial " << norms.back() / norms.front() << " "
            << (halved ? "PASS" : "FAIL") << "\n";
  bool ok = decreasing && halved;
  std::cout << "verdict " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : kExitVerdict;
}

// ---------------------------------------------------------------------------
// report

struct Manifest {
  std::string format;
  std::vector<std::string> lines;

  static Manifest load(const fs::path& dir) {
    Manifest m;
    std::istringstream is(read_file(dir / "manifest.txt"));
    std::string line;
    while (std::getline(is, line))
      if (!line.empty()) m.lines.push_back(line);
    if (m.lines.empty()) throw IoError("empty manifest in " + dir.string());
    m.format = m.lines.front();
    return m;
  }

  // First line starting with `key `; empty string when absent.
  std::string value(const std::string& key) const {
    for (const std::string& l : lines)
      if (l.rfind(key + " ", 0) == 0) return l.substr(key.size() + 1);
    return "";
  }
};

bool check_hashes(const fs::path& dir, const Manifest& man, std::ostream& log) {
  bool ok = true;
  for (const std::string& l : man.lines) {
    std::istringstream ls(l);
    std::string tok;
    ls >> tok;
    std::string file, sha;
    if (tok == "file") {
      ls >> file >> tok >> sha;
    } else if (tok == "frame" || tok == "shift") {
      std::string w;
      while (ls >> w && w != "file") {
      }
      ls >> file >> tok >> sha;
    } else {
      continue;
    }
    std::string got = util::git_blob_sha1(read_file(dir / file));
    if (got != sha) {
      log << "hash mismatch " << file << "\n";
      ok = false;
    }
  }
  return ok;
}

struct LoadedRun {
  cli::Config cfg;
  thermo::ThermoParams params;
  func::ContactState contact;
  solver::RunRecord rec;
  double e0_recorded = 0.0;
  double phi_recorded = 0.0;
};

LoadedRun load_run_dir(const fs::path& dir, const Manifest& man) {
  LoadedRun lr;
  lr.cfg = cli::parse_config(read_file(dir / "config.txt"));
  lr.params = lr.cfg.thermo_params();
  lr.contact = lr.cfg.contact_state();
  lr.e0_recorded = std::strtod(man.value("e0").c_str(), nullptr);
  lr.phi_recorded = std::strtod(man.value("phi_sup").c_str(), nullptr);
  for (const std::string& l : man.lines) {
    std::istringstream ls(l);
    std::string tok;
    ls >> tok;
    if (tok != "frame") continue;
    std::size_t k;
    long step;
    double t;
    std::string file, sha;
    ls >> k >> tok >> step >> tok >> t >> tok >> file >> tok >> sha;
    lr.rec.frames.push_back(fields::read_snapshot_file((dir / file).string()));
    lr.rec.frame_times.push_back(t);
    lr.rec.frame_steps.push_back(step);
  }
  if (lr.rec.frames.empty()) throw IoError("no frames listed in " + dir.string());
  lr.rec.grid = lr.rec.frames.front().grid();
  lr.rec.params = lr.params;
  return lr;
}

int report_run_dir(const fs::path& dir, const Manifest& man, const fs::path& out_dir) {
  if (!check_hashes(dir, man, std::cout)) return kExitVerdict;
  LoadedRun lr = load_run_dir(dir, man);

  double e0 = harness::initial_relent(lr.params, lr.contact, lr.rec.frames.front(), false);
  double phi = harness::sup_perturbation(lr.params, lr.contact, lr.rec);

  std::ostringstream csv;
  csv.precision(17);
  csv << "t,excursion_int,kinetic_int,gauge_int,energy_l1\n";
  for (std::size_t k = 0; k < lr.rec.frames.size(); ++k) {
    func::PerturbationIntegrals pi =
        func::perturbation_integrals(lr.params, lr.contact, lr.rec.frames[k]);
    csv << lr.rec.frame_times[k] << ',' << pi.excursion_int << ',' << pi.kinetic_int << ','
        << pi.gauge_int << ',' << pi.energy_l1 << '\n';
  }
  write_text(out_dir / "report.csv", csv.str());

  bool match = e0 == lr.e0_recorded && phi == lr.phi_recorded;
  std::cout.precision(17);
  std::cout << "e0 " << e0 << (e0 == lr.e0_recorded ? " (reproduced)" : " (manifest mismatch)")
            << "\n";
  std::cout << "phi_sup " << phi
            << (phi == lr.phi_recorded ? " (reproduced)" : " (manifest mismatch)") << "\n";
  std::cout << "verdict " << (match ? "PASS" : "FAIL") << "\n";
  return match ? 0 : kExitVerdict;
}

int report_sweep_dir(const fs::path& dir, const Manifest& man, const fs::path& out_dir) {
  if (!check_hashes(dir, man, std::cout)) return kExitVerdict;
  double fitted_recorded = std::strtod(man.value("fitted_constant").c_str(), nullptr);

  std::ostringstream csv;
  csv.precision(17);
  csv << "alpha,nu,kappa,e0,phi_sup,ratio\n";
  double fitted = 0.0;
  for (const std::string& l : man.lines) {
    std::istringstream ls(l);
    std::string tok;
    ls >> tok;
    if (tok != "run") continue;
    if (l.find(" error ") != std::string::npos) continue;
    std::size_t idx;
    double alpha, nu, kappa, e0_rec, phi_rec, ratio_rec;
    std::string sub;
    ls >> idx >> tok >> alpha >> tok >> nu >> tok >> kappa >> tok >> e0_rec >> tok >> phi_rec >>
        tok >> ratio_rec >> tok >> sub;

    Manifest rman = Manifest::load(dir / sub);
    if (!check_hashes(dir / sub, rman, std::cout)) return kExitVerdict;
    LoadedRun lr = load_run_dir(dir / sub, rman);
    double e0 = harness::initial_relent(lr.params, lr.contact, lr.rec.frames.front(), false);
    double phi = harness::sup_perturbation(lr.params, lr.contact, lr.rec);
    double ratio = phi / (std::sqrt(e0) + e0);
    fitted = std::max(fitted, ratio);
    csv << alpha << ',' << nu << ',' << kappa << ',' << e0 << ',' << phi << ',' << ratio << '\n';
    if (e0 != e0_rec || phi != phi_rec) {
      std::cout << "run " << idx << " recomputation mismatch\n";
      std::cout << "verdict FAIL\n";
      return kExitVerdict;
    }
  }
  write_text(out_dir / "sweep_report.csv", csv.str());

  bool match = fitted == fitted_recorded;
  std::cout.precision(17);
  std::cout << "fitted_constant " << fitted
            << (match ? " (reproduced)" : " (manifest mismatch)") << "\n";
  std::cout << "verdict " << (match ? "PASS" : "FAIL") << "\n";
  return match ? 0 : kExitVerdict;
}

int cmd_report(const std::string& dir_arg, const std::string& out) {
  fs::path dir(dir_arg);
  Manifest man = Manifest::load(dir);
  fs::path out_dir = out.empty() ? dir : fs::path(out);
  if (!out.empty()) fs::create_directories(out_dir);
  if (man.format == "format nsfc-run 1") return report_run_dir(dir, man, out_dir);
  if (man.format == "format nsfc-sweep 1") return report_sweep_dir(dir, man, out_dir);
  throw IoError("unrecognized manifest format in " + dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic compressible Navier-Stokes-Fourier runs and stability diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  app.add_option("--config", config_path, "configuration file (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "worker threads (0 = automatic)");

  CLI::App* c_run = app.add_subcommand("run", "one simulation plus the inequality monitor");
  CLI::App* c_sweep = app.add_subcommand("sweep", "dissipation sweep and constant fit");
  CLI::App* c_conv = app.add_subcommand("converge", "perturbation-size convergence study");
  CLI::App* c_verify = app.add_subcommand("verify", "seeded property suite");
  CLI::App* c_comm = app.add_subcommand("commutator", "commutator residual decay study");
  CLI::App* c_report = app.add_subcommand("report", "re-read a run or sweep directory");
  std::string report_dir;
  c_report->add_option("dir", report_dir, "run or sweep directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  seed_given = seed_opt->count() > 0;

  try {
    par::set_threads(threads);
    cli::Config cfg = config_path.empty() ? cli::Config{} : cli::load_config(config_path);
    if (seed_given) cfg.seed = seed;

    if (c_run->parsed()) return cmd_run(cfg, out_dir);
    if (c_sweep->parsed()) return cmd_sweep(cfg, out_dir);
    if (c_conv->parsed()) return cmd_converge(cfg, out_dir);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_comm->parsed()) return cmd_commutator(cfg);
    if (c_report->parsed()) return cmd_report(report_dir, out_dir);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContactOutOfRegime& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnresolvableKernel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
