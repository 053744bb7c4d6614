#include "nsfc/shift.hpp"

#include <algorithm>
#include <cmath>

#include "nsfc/parallel.hpp"

namespace nsfc::shift {

using fields::Field;
using fields::PeriodicGrid;

void ShiftConfig::validate(const PeriodicGrid& grid) const {
  if (delta < 0.0) throw ConfigError("shift: delta must be nonnegative");
  if (epsilon < 2.0 * grid.h - 1e-13)
    throw ConfigError("shift: epsilon must cover at least two cells");
  if (substeps < 1) throw ConfigError("shift: substeps must be positive");
}

std::array<double, 3> VelocityHistory::velocity(const std::array<double, 3>& x, double t) const {
  std::array<double, 3> u{0.0, 0.0, 0.0};
  if (frames.empty()) return u;
  const int dim = frames.front().grid().dim;
  auto hi = std::upper_bound(times.begin(), times.end(), t);
  std::size_t j1 = std::min<std::size_t>(hi - times.begin(), times.size() - 1);
  std::size_t j0 = j1 > 0 ? j1 - 1 : 0;
  double w = 0.0;
  if (j1 > j0 && times[j1] > times[j0])
    w = std::clamp((t - times[j0]) / (times[j1] - times[j0]), 0.0, 1.0);
  for (int a = 0; a < dim; ++a) {
    double v0 = fields::sample_interpolate(frames[j0], a, x);
    double v1 = j1 == j0 ? v0 : fields::sample_interpolate(frames[j1], a, x);
    u[a] = (1.0 - w) * v0 + w * v1;
  }
  return u;
}

VelocityHistory velocity_history(const solver::RunRecord& rec, double delta) {
  VelocityHistory hist;
  hist.times = rec.frame_times;
  hist.frames.reserve(rec.frames.size());
  const int dim = rec.grid.dim;
  for (const Field& U : rec.frames) {
    Field u(rec.grid, dim);
    for (int a = 0; a < dim; ++a) {
      auto rho = U.comp(0);
      auto m = U.comp(1 + a);
      auto dst = u.comp(a);
      par::parallel_for(rec.grid.cells(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) dst[i] = m[i] / rho[i];
      });
    }
    if (delta > 0.0) {
      fields::MollifierKernel k = fields::MollifierKernel::make(rec.grid, delta);
      u = fields::mollify(u, k);
    }
    hist.frames.push_back(std::move(u));
  }
  return hist;
}

namespace {

std::array<double, 3> rk4_segment(const VelocityHistory& hist, std::array<double, 3> x,
                                  double t_from, double t_to, int substeps) {
  double dt = (t_to - t_from) / substeps;
  double tau = t_from;
  for (int s = 0; s < substeps; ++s) {
    auto eval = [&](double tq, const std::array<double, 3>& xq) {
      return hist.velocity(xq, tq);
    };
    std::array<double, 3> k1 = eval(tau, x);
    std::array<double, 3> x2{x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1],
                             x[2] + 0.5 * dt * k1[2]};
    std::array<double, 3> k2 = eval(tau + 0.5 * dt, x2);
    std::array<double, 3> x3{x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1],
                             x[2] + 0.5 * dt * k2[2]};
    std::array<double, 3> k3 = eval(tau + 0.5 * dt, x3);
    std::array<double, 3> x4{x[0] + dt * k3[0], x[1] + dt * k3[1], x[2] + dt * k3[2]};
    std::array<double, 3> k4 = eval(tau + dt, x4);
    for (int a = 0; a < 3; ++a)
      x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    tau += dt;
  }
  return x;
}

double wrap01(double x) { return x - std::floor(x); }

double psi0_at(double x1) {
  double f = wrap01(x1);
  return (f > 0.5 && f < 1.0) ? 1.0 : 0.0;
}

}  // namespace

std::array<double, 3> trace_characteristic(const VelocityHistory& hist,
                                           const std::array<double, 3>& x, double t,
                                           int substeps) {
  if (hist.times.empty() || t <= 0.0) return x;
  std::array<double, 3> pos = x;
  // Walk the frame intervals backward so the time interpolation inside each
  // RK4 stage stays linear.
  double tau = t;
  for (std::size_t j = hist.times.size(); j-- > 1 && tau > 0.0;) {
    double lo = hist.times[j - 1];
    double hi = hist.times[j];
    if (lo >= tau) continue;
    double from = std::min(tau, hi);
    double to = std::max(lo, 0.0);
    if (from > to) {
      pos = rk4_segment(hist, pos, from, to, substeps);
      tau = to;
    }
  }
  if (tau > 0.0 && !hist.times.empty() && hist.times.front() > 0.0)
    pos = rk4_segment(hist, pos, tau, 0.0, substeps);
  return pos;
}

ShiftField build_shift(const VelocityHistory& hist, const func::ContactState& contact,
                       const ShiftConfig& cfg) {
  if (hist.frames.empty()) throw Error("build_shift: empty velocity history");
  const PeriodicGrid& g = hist.frames.front().grid();
  cfg.validate(g);
  fields::MollifierKernel ke = fields::MollifierKernel::make(g, cfg.epsilon);

  ShiftField out;
  out.times = hist.times;
  const double th_lo = std::min(contact.theta_minus, contact.theta_plus);
  const double th_hi = std::max(contact.theta_minus, contact.theta_plus);

  auto push_frame = [&](const Field& psi) {
    Field psi_bar = fields::mollify(psi, ke);
    Field w(g, 1);
    auto pb = psi_bar.comp(0);
    auto wv = w.comp(0);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double v = contact.theta_minus * (1.0 - pb[i]) + contact.theta_plus * pb[i];
        wv[i] = std::clamp(v, th_lo, th_hi);
      }
    });
    out.psi.push_back(psi);
    out.psi_bar.push_back(std::move(psi_bar));
    out.weight.push_back(std::move(w));
  };

  // Frame 0: the indicator itself.
  Field psi(g, 1);
  {
    auto pv = psi.comp(0);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) pv[i] = psi0_at(g.center(g.coords(i)[0]));
    });
  }
  push_frame(psi);

  // The backward flow map is composed one frame interval at a time: trace to
  // the previous frame, then look the accumulated displacement up there. The
  // indicator is always evaluated at the composed foot point, so psi keeps
  // the exact initial values.
  Field disp(g, g.dim, 0.0);
  for (std::size_t j = 1; j < hist.times.size(); ++j) {
    Field next_disp(g, g.dim);
    Field psi_j(g, 1);
    auto pv = psi_j.comp(0);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        std::array<double, 3> x = g.center(i);
        std::array<double, 3> y =
            rk4_segment(hist, x, hist.times[j], hist.times[j - 1], cfg.substeps);
        std::array<double, 3> ywrap{wrap01(y[0]), wrap01(y[1]), wrap01(y[2])};
        double foot1 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
          double d = (y[a] - x[a]) + fields::sample_interpolate(disp, a, ywrap);
          next_disp(a, i) = d;
          if (a == 0) foot1 = x[0] + d;
        }
        pv[i] = psi0_at(foot1);
      }
    });
    disp = std::move(next_disp);
    push_frame(psi_j);
  }
  return out;
}

fields::Field commutator_residual(const Field& u, const Field& psi, double delta,
                                  double epsilon) {
  const PeriodicGrid& g = u.grid();
  if (u.ncomp() != g.dim) throw Error("commutator_residual: velocity needs dim components");
  if (psi.ncomp() != 1) throw Error("commutator_residual: psi must be scalar");

  fields::MollifierKernel ke = fields::MollifierKernel::make(g, epsilon);
  Field u_delta = delta > 0.0 ? fields::mollify(u, fields::MollifierKernel::make(g, delta)) : u;

  Field psi_bar = fields::mollify(psi, ke);
  Field grad_pb = fields::gradient(psi_bar, 0);

  Field prod(g, g.dim);
  for (int a = 0; a < g.dim; ++a) {
    auto ud = u_delta.comp(a);
    auto pv = psi.comp(0);
    auto dst = prod.comp(a);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) dst[i] = ud[i] * pv[i];
    });
  }
  Field div_prod_eps = fields::mollify(fields::divergence(prod), ke);

  Field divu = fields::divergence(u_delta);
  {
    auto dv = divu.comp(0);
    auto pv = psi.comp(0);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) dv[i] *= pv[i];
    });
  }
  Field divu_psi_eps = fields::mollify(divu, ke);

  Field R(g, 1);
  auto rv = R.comp(0);
  par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double adv = 0.0;
      for (int a = 0; a < g.dim; ++a) adv += u(a, i) * grad_pb(a, i);
      rv[i] = adv - div_prod_eps(0, i) + divu_psi_eps(0, i);
    }
  });
  return R;
}

}  // namespace nsfc::shift
