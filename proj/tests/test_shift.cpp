#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nsfc/fields.hpp"
#include "nsfc/functionals.hpp"
#include "nsfc/shift.hpp"
#include "nsfc/solver.hpp"
#include "nsfc/thermo.hpp"

using namespace nsfc;
using fields::Field;
using fields::PeriodicGrid;
using shift::VelocityHistory;

namespace {

const double two_pi = 6.283185307179586476925286766559;

double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Static velocity history: the same field at both endpoint times.
VelocityHistory static_history(const Field& u, double t_end) {
  VelocityHistory h;
  h.times = {0.0, t_end};
  h.frames = {u, u};
  return h;
}

Field constant_velocity(const PeriodicGrid& g, const std::array<double, 3>& u0) {
  Field u(g, g.dim);
  for (int a = 0; a < g.dim; ++a)
    for (std::size_t i = 0; i < g.cells(); ++i) u(a, i) = u0[a];
  return u;
}

double l2(const Field& f) { return fields::lp_norm(f, 2.0); }

}  // namespace

TEST_CASE("characteristic tracing") {
  SUBCASE("zero velocity holds every point fixed") {
    PeriodicGrid g = PeriodicGrid::make(2, 32);
    VelocityHistory h = static_history(constant_velocity(g, {0.0, 0.0, 0.0}), 1.0);
    for (double t : {0.3, 1.0}) {
      auto y = shift::trace_characteristic(h, {0.37, 0.81, 0.0}, t, 4);
      CHECK(y[0] == 0.37);
      CHECK(y[1] == 0.81);
    }
  }

  SUBCASE("constant velocity translates exactly") {
    PeriodicGrid g = PeriodicGrid::make(1, 64);
    VelocityHistory h = static_history(constant_velocity(g, {0.3, 0.0, 0.0}), 1.0);
    for (double x : {0.05, 0.4, 0.93}) {
      auto y = shift::trace_characteristic(h, {x, 0.0, 0.0}, 1.0, 2);
      CHECK(std::abs(y[0] - (x - 0.3)) <= 1e-10);  // unwrapped foot point
    }
  }

  SUBCASE("fourth-order rate on a rotation field") {
    // Affine velocity: the multilinear interpolation reproduces it exactly
    // away from the seam, so substep refinement exposes the ODE error alone.
    PeriodicGrid g = PeriodicGrid::make(2, 64);
    const double omega = 1.3;
    Field u(g, 2);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      auto x = g.center(i);
      u(0, i) = -omega * (x[1] - 0.5);
      u(1, i) = omega * (x[0] - 0.5);
    }
    const double t = 0.8;
    VelocityHistory h = static_history(u, t);

    std::array<double, 3> start{0.65, 0.5, 0.0};
    double c = std::cos(-omega * t), s = std::sin(-omega * t);
    double ex = 0.5 + c * (start[0] - 0.5) - s * (start[1] - 0.5);
    double ey = 0.5 + s * (start[0] - 0.5) + c * (start[1] - 0.5);

    double err[3];
    int sub[3] = {4, 8, 16};
    for (int k = 0; k < 3; ++k) {
      auto y = shift::trace_characteristic(h, start, t, sub[k]);
      err[k] = std::hypot(y[0] - ex, y[1] - ey);
    }
    CHECK(std::log2(err[0] / err[1]) >= 3.5);
    CHECK(std::log2(err[1] / err[2]) >= 3.5);
  }
}

TEST_CASE("transported indicator") {
  func::ContactState ct =
      func::make_contact(thermo::ThermoParams::make(1, 1, 3, 0.1, 1, 0), 1.0, 2.0, 0.5);

  SUBCASE("zero velocity reproduces the initial indicator at every frame") {
    PeriodicGrid g = PeriodicGrid::make(1, 128);
    VelocityHistory h;
    h.times = {0.0, 0.25, 0.5};
    Field zero = constant_velocity(g, {0.0, 0.0, 0.0});
    h.frames = {zero, zero, zero};
    shift::ShiftConfig cfg;
    shift::ShiftField sf = shift::build_shift(h, ct, cfg);
    REQUIRE(sf.psi.size() == 3);
    for (const Field& psi : sf.psi)
      for (std::size_t i = 0; i < g.cells(); ++i) {
        double x = g.center(g.coords(i)[0]);
        CHECK(psi(0, i) == ((x > 0.5 && x < 1.0) ? 1.0 : 0.0));
      }
  }

  SUBCASE("constant velocity translates the indicator") {
    PeriodicGrid g = PeriodicGrid::make(1, 128);
    VelocityHistory h;
    h.times = {0.0, 0.5, 1.0};
    Field c = constant_velocity(g, {0.3, 0.0, 0.0});
    h.frames = {c, c, c};
    shift::ShiftConfig cfg;
    shift::ShiftField sf = shift::build_shift(h, ct, cfg);

    for (std::size_t j = 0; j < sf.times.size(); ++j) {
      double shift_by = 0.3 * sf.times[j];
      for (std::size_t i = 0; i < g.cells(); ++i) {
        double foot = g.center(g.coords(i)[0]) - shift_by;
        foot -= std::floor(foot);
        double expected = (foot > 0.5 && foot < 1.0) ? 1.0 : 0.0;
        CHECK(sf.psi[j](0, i) == expected);
      }
    }
  }

  SUBCASE("values, bounds, and the temperature weight") {
    PeriodicGrid g = PeriodicGrid::make(1, 128);
    std::mt19937_64 eng(21);
    Field u(g, 1);
    for (std::size_t i = 0; i < g.cells(); ++i)
      u(0, i) = 0.4 * std::sin(two_pi * g.center(g.coords(i)[0])) + 0.1 * uniform01(eng);
    fields::MollifierKernel k = fields::MollifierKernel::make(g, 0.05);
    u = fields::mollify(u, k);
    VelocityHistory h;
    h.times = {0.0, 0.2, 0.4};
    h.frames = {u, u, u};
    shift::ShiftConfig cfg;
    shift::ShiftField sf = shift::build_shift(h, ct, cfg);

    double th_lo = std::min(ct.theta_minus, ct.theta_plus);
    double th_hi = std::max(ct.theta_minus, ct.theta_plus);
    for (std::size_t j = 0; j < sf.times.size(); ++j)
      for (std::size_t i = 0; i < g.cells(); ++i) {
        double p = sf.psi[j](0, i);
        CHECK((p == 0.0 || p == 1.0));
        CHECK(sf.psi_bar[j](0, i) >= 0.0);
        CHECK(sf.psi_bar[j](0, i) <= 1.0);
        CHECK(sf.weight[j](0, i) >= th_lo);
        CHECK(sf.weight[j](0, i) <= th_hi);
      }
  }

  SUBCASE("divergence-free flow preserves the indicator mass") {
    PeriodicGrid g = PeriodicGrid::make(2, 64);
    Field u(g, 2);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      auto x = g.center(i);
      // Stream function sin(2 pi x) sin(2 pi y) / (2 pi).
      u(0, i) = 0.3 * std::sin(two_pi * x[0]) * std::cos(two_pi * x[1]);
      u(1, i) = -0.3 * std::cos(two_pi * x[0]) * std::sin(two_pi * x[1]);
    }
    VelocityHistory h;
    h.times = {0.0, 0.25, 0.5};
    h.frames = {u, u, u};
    shift::ShiftConfig cfg;
    cfg.substeps = 4;
    shift::ShiftField sf = shift::build_shift(h, ct, cfg);

    double m0 = fields::integrate(sf.psi.front());
    for (const Field& psi : sf.psi)
      CHECK(std::abs(fields::integrate(psi) - m0) <= 40.0 * g.h * g.h);
  }

  SUBCASE("config validation") {
    PeriodicGrid g = PeriodicGrid::make(1, 64);
    shift::ShiftConfig cfg;
    cfg.delta = -0.01;
    CHECK_THROWS_AS(cfg.validate(g), ConfigError);
    cfg = shift::ShiftConfig{};
    cfg.epsilon = g.h;
    CHECK_THROWS_AS(cfg.validate(g), ConfigError);
    cfg = shift::ShiftConfig{};
    cfg.substeps = 0;
    CHECK_THROWS_AS(cfg.validate(g), ConfigError);
  }
}

TEST_CASE("shift built from a solver run") {
  thermo::ThermoParams p = thermo::ThermoParams::make(1, 1, 3, 0.1, 1, 0);
  func::ContactState ct = func::make_contact(p, 1.0, 2.0, 0.5);
  PeriodicGrid g = PeriodicGrid::make(1, 128);
  Field U = solver::init_contact_perturbed(g, p, ct, 8.0 * g.h, 0.05, 1);
  solver::SolverConfig cfg;
  cfg.t_end = 0.05;
  solver::RunRecord rec = solver::run(U, p, cfg, 4);

  VelocityHistory hist = shift::velocity_history(rec, 0.05);
  CHECK(hist.frames.size() == rec.frames.size());
  CHECK(hist.times == rec.frame_times);

  shift::ShiftConfig scfg;
  shift::ShiftField sf = shift::build_shift(hist, ct, scfg);
  CHECK(sf.times == rec.frame_times);
  CHECK(sf.psi.size() == rec.frames.size());
  for (std::size_t j = 0; j < sf.psi.size(); ++j) {
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double v = sf.psi[j](0, i);
      CHECK((v == 0.0 || v == 1.0));
    }
    // The perturbation is tiny; the interface cannot wander far in t = 0.05.
    CHECK(std::abs(fields::integrate(sf.psi[j]) - 0.5) < 0.02);
  }
}

TEST_CASE("commutator residual") {
  SUBCASE("constant velocity commutes") {
    PeriodicGrid g = PeriodicGrid::make(1, 256);
    Field u = constant_velocity(g, {0.7, 0.0, 0.0});
    Field psi(g, 1);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double x = g.center(g.coords(i)[0]);
      psi(0, i) = (x > 0.5 && x < 1.0) ? 1.0 : 0.0;
    }
    Field R = shift::commutator_residual(u, psi, 0.05, 0.05);
    CHECK(l2(R) <= 1e-12);
  }

  SUBCASE("sine velocity: square-root decay, matched against the closed form") {
    // Both interface planes sit at zeros of sin(2 pi x), so the residual is
    // u grad psi_bar concentrated where u vanishes linearly. In the continuum
    //   ||R||^2(eps) = (2 / (eps Z^2)) int sin^2(2 pi eps z) eta(z)^2 dz,
    // eta the bump and Z its mass: a sqrt(eps) rate, so a 4x range of eps
    // contracts the norm by one half, approached from above.
    PeriodicGrid g = PeriodicGrid::make(1, 1024);
    Field u(g, 1);
    Field psi(g, 1);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double x = g.center(g.coords(i)[0]);
      u(0, i) = std::sin(two_pi * x);
      psi(0, i) = (x > 0.5 && x < 1.0) ? 1.0 : 0.0;
    }

    auto bump = [](double z) { return std::exp(-1.0 / (1.0 - z * z)); };
    const int nq = 4000;
    double z1 = 0.0;
    for (int q = 0; q < nq; ++q) z1 += bump(-1.0 + 2.0 * (q + 0.5) / nq) * (2.0 / nq);
    auto predicted = [&](double eps) {
      double j = 0.0;
      for (int q = 0; q < nq; ++q) {
        double z = -1.0 + 2.0 * (q + 0.5) / nq;
        double s = std::sin(two_pi * eps * z);
        j += s * s * bump(z) * bump(z) * (2.0 / nq);
      }
      return std::sqrt(2.0 * j / (eps * z1 * z1));
    };

    double norms[3];
    double eps[3] = {0.1, 0.05, 0.025};
    for (int k = 0; k < 3; ++k) {
      norms[k] = l2(shift::commutator_residual(u, psi, 0.05, eps[k]));
      CHECK(std::abs(norms[k] - predicted(eps[k])) <= 0.03 * predicted(eps[k]));
    }
    CHECK(norms[1] < norms[0]);
    CHECK(norms[2] < norms[1]);
    CHECK(norms[1] / norms[0] <= 0.75);
    CHECK(norms[2] / norms[1] <= 0.75);
    CHECK(norms[2] <= 0.52 * norms[0]);  // exact limit is 1/2 from above
  }

  SUBCASE("cubic zeros at the interfaces decay fast and stay floor-free") {
    // u odd about both planes keeps the mollified velocity exactly zero
    // there, so no delta-mismatch floor appears; the cubic zero upgrades the
    // rate from sqrt(eps) to eps^(5/2).
    PeriodicGrid g = PeriodicGrid::make(1, 1024);
    Field u(g, 1);
    Field psi(g, 1);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      double x = g.center(g.coords(i)[0]);
      double s = std::sin(two_pi * x);
      u(0, i) = s * s * s;
      psi(0, i) = (x > 0.5 && x < 1.0) ? 1.0 : 0.0;
    }
    double norms[3];
    double eps[3] = {0.1, 0.05, 0.025};
    for (int k = 0; k < 3; ++k) norms[k] = l2(shift::commutator_residual(u, psi, 0.05, eps[k]));
    CHECK(norms[1] < norms[0]);
    CHECK(norms[2] < norms[1]);
    CHECK(norms[2] <= 0.5 * norms[0]);
  }

  SUBCASE("uniform bound by the velocity H1 norm, fit then verify") {
    PeriodicGrid g = PeriodicGrid::make(1, 256);
    auto random_pair = [&](std::mt19937_64& eng) {
      Field u(g, 1), psi(g, 1);
      double au[4], bu[4], ap[4], bp[4];
      for (int k = 0; k < 4; ++k) {
        au[k] = (2.0 * uniform01(eng) - 1.0) / (k + 1);
        bu[k] = (2.0 * uniform01(eng) - 1.0) / (k + 1);
        ap[k] = (2.0 * uniform01(eng) - 1.0) / (k + 1);
        bp[k] = (2.0 * uniform01(eng) - 1.0) / (k + 1);
      }
      for (std::size_t i = 0; i < g.cells(); ++i) {
        double x = g.center(g.coords(i)[0]);
        double uv = 0.0, pv = 0.0;
        for (int k = 0; k < 4; ++k) {
          uv += au[k] * std::sin(two_pi * (k + 1) * x) + bu[k] * std::cos(two_pi * (k + 1) * x);
          pv += ap[k] * std::sin(two_pi * (k + 1) * x) + bp[k] * std::cos(two_pi * (k + 1) * x);
        }
        u(0, i) = uv;
        psi(0, i) = pv;
      }
      return std::make_pair(u, psi);
    };

    auto ratio = [&](const Field& u, const Field& psi) {
      double h1 = std::hypot(l2(u), fields::lp_norm(fields::gradient(u, 0), 2.0));
      double pinf = fields::lp_norm(psi, std::numeric_limits<double>::infinity());
      return l2(shift::commutator_residual(u, psi, 0.05, 0.05)) / (h1 * pinf);
    };

    std::mt19937_64 fit_eng(1001);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      auto [u, psi] = random_pair(fit_eng);
      worst = std::max(worst, ratio(u, psi));
    }
    double C = 1.5 * worst;

    std::mt19937_64 hold_eng(404040);
    for (int k = 0; k < 20; ++k) {
      auto [u, psi] = random_pair(hold_eng);
      CHECK(ratio(u, psi) <= C);
    }
  }
}
