#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nsfc/fields.hpp"
#include "nsfc/parallel.hpp"

using namespace nsfc;
using fields::Field;
using fields::MollifierKernel;
using fields::PeriodicGrid;

namespace {

const double two_pi = 6.283185307179586476925286766559;

double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

Field smooth_random(const PeriodicGrid& g, std::mt19937_64& eng, int ncomp = 1) {
  Field f(g, ncomp);
  for (int c = 0; c < ncomp; ++c) {
    double a1 = -1.0 + 2.0 * uniform01(eng);
    double a2 = -1.0 + 2.0 * uniform01(eng);
    double a3 = -1.0 + 2.0 * uniform01(eng);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      auto x = g.center(i);
      double v = a1 * std::sin(two_pi * x[0]) + a2 * std::cos(two_pi * 2.0 * x[0]);
      if (g.dim >= 2) v += a3 * std::sin(two_pi * x[1]) * std::cos(two_pi * x[0]);
      if (g.dim >= 3) v += 0.5 * std::cos(two_pi * x[2]);
      f(c, i) = v;
    }
  }
  return f;
}

}  // namespace

TEST_CASE("grid indexing") {
  PeriodicGrid g = PeriodicGrid::make(3, 8);
  CHECK(g.cells() == 512);
  CHECK(g.h == doctest::Approx(0.125).epsilon(1e-15));
  for (std::size_t lin = 0; lin < g.cells(); ++lin)
    CHECK(g.index(g.coords(lin)) == lin);

  // Axis 1 fastest.
  CHECK(g.index({1, 0, 0}) == 1);
  CHECK(g.index({0, 1, 0}) == 8);
  CHECK(g.index({0, 0, 1}) == 64);

  std::size_t lin = g.index({7, 3, 5});
  CHECK(g.neighbor(lin, 0, +1) == g.index({0, 3, 5}));
  CHECK(g.neighbor(lin, 1, -4) == g.index({7, 7, 5}));
  CHECK(g.neighbor(lin, 2, +3) == g.index({7, 3, 0}));

  CHECK(g.center(0) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK_THROWS_AS(PeriodicGrid::make(4, 8), ConfigError);
  CHECK_THROWS_AS(PeriodicGrid::make(1, 4), ConfigError);
}

TEST_CASE("mollifier kernel") {
  PeriodicGrid g = PeriodicGrid::make(1, 256);

  CHECK_THROWS_AS(MollifierKernel::make(g, 1.5 * g.h), UnresolvableKernel);
  CHECK_THROWS_AS(MollifierKernel::make(g, 0.3), UnresolvableKernel);
  CHECK_NOTHROW(MollifierKernel::make(g, 2.0 * g.h));

  MollifierKernel k = MollifierKernel::make(g, 0.05);
  double sum = 0.0;
  for (double w : k.weights()) {
    CHECK(w >= 0.0);
    sum += w * g.h;
  }
  CHECK(sum == 1.0);  // the center weight is nudged until this is exact

  PeriodicGrid g3 = PeriodicGrid::make(3, 32);
  MollifierKernel k3 = MollifierKernel::make(g3, 0.1);
  double sum3 = 0.0;
  for (double w : k3.weights()) sum3 += w * g3.h * g3.h * g3.h;
  CHECK(sum3 == 1.0);
}

TEST_CASE("mollify preserves constants and bounds") {
  PeriodicGrid g = PeriodicGrid::make(2, 64);
  MollifierKernel k = MollifierKernel::make(g, 0.06);

  Field c(g, 1, 0.7331);
  Field mc = fields::mollify(c, k);
  for (std::size_t i = 0; i < g.cells(); ++i) CHECK(mc(0, i) == 0.7331);

  std::mt19937_64 eng(3);
  Field f(g, 1);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    f(0, i) = -5.0 + 10.0 * uniform01(eng);
    lo = std::min(lo, f(0, i));
    hi = std::max(hi, f(0, i));
  }
  Field mf = fields::mollify(f, k);
  for (std::size_t i = 0; i < g.cells(); ++i) {
    CHECK(mf(0, i) >= lo);
    CHECK(mf(0, i) <= hi);
  }
  CHECK(std::abs(fields::integrate(mf) - fields::integrate(f)) <=
        1e-12 * (1.0 + std::abs(fields::integrate(f))));
}

TEST_CASE("mollified indicator against the analytic profile") {
  PeriodicGrid g = PeriodicGrid::make(1, 512);
  const double radius = 0.05;
  MollifierKernel k = MollifierKernel::make(g, radius);

  Field psi(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double x = g.center(g.coords(i)[0]);
    psi(0, i) = (x > 0.5 && x < 1.0) ? 1.0 : 0.0;
  }
  Field mp = fields::mollify(psi, k);

  // Continuous convolution of the bump with a half-line step, by quadrature.
  auto bump = [](double r) { return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
  const int nq = 20000;
  double z = 0.0;
  for (int q = 0; q < nq; ++q) z += bump(-1.0 + 2.0 * (q + 0.5) / nq);
  auto profile = [&](double c) {
    if (c <= -1.0) return 0.0;
    double acc = 0.0;
    for (int q = 0; q < nq; ++q) {
      double r = -1.0 + 2.0 * (q + 0.5) / nq;
      if (r <= c) acc += bump(r);
    }
    return acc / z;
  };

  double prev = -1.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    double x = g.center(g.coords(i)[0]);
    double v = mp(0, i);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (x > 0.3 && x < 0.7) {
      CHECK(std::abs(v - profile((x - 0.5) / radius)) < 0.03);
      if (x > 0.5 - radius && x < 0.5 + radius) {
        CHECK(v >= prev - 1e-12);  // monotone through the transition
      }
      prev = v;
      // Support ends exactly one kernel footprint from the jump.
      if (x < 0.5 - radius - g.h) CHECK(v == 0.0);
      if (x > 0.5 + radius + g.h) CHECK(v == 1.0);
    }
  }
}

TEST_CASE("mollify damps the lowest Fourier mode") {
  PeriodicGrid g = PeriodicGrid::make(1, 256);
  MollifierKernel k = MollifierKernel::make(g, 0.08);

  Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i)
    f(0, i) = std::sin(two_pi * g.center(g.coords(i)[0]));
  Field mf = fields::mollify(f, k);

  // Discrete convolution theorem: the mode is an eigenvector with eigenvalue
  // sum_o w_o h cos(2 pi o h).
  double mu = 0.0;
  for (std::size_t t = 0; t < k.weights().size(); ++t)
    mu += k.weights()[t] * g.h * std::cos(two_pi * k.offsets()[t][0] * g.h);
  CHECK(mu > 0.0);
  CHECK(mu < 1.0);
  for (std::size_t i = 0; i < g.cells(); ++i)
    CHECK(mf(0, i) == doctest::Approx(mu * f(0, i)).epsilon(1e-12));
}

TEST_CASE("mollification commutes with whole-cell translation") {
  PeriodicGrid g = PeriodicGrid::make(1, 128);
  MollifierKernel k = MollifierKernel::make(g, 0.05);
  std::mt19937_64 eng(5);
  Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) f(0, i) = uniform01(eng);

  const int shift = 37;
  Field fs(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i)
    fs(0, i) = f(0, g.neighbor(i, 0, shift));
  Field a = fields::mollify(fs, k);
  Field b = fields::mollify(f, k);
  for (std::size_t i = 0; i < g.cells(); ++i)
    CHECK(a(0, i) == b(0, g.neighbor(i, 0, shift)));
}

TEST_CASE("integration and norms") {
  PeriodicGrid g = PeriodicGrid::make(1, 256);
  Field ones(g, 1, 1.0);
  CHECK(fields::integrate(ones) == 1.0);

  Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i)
    f(0, i) = std::sin(two_pi * g.center(g.coords(i)[0]));
  CHECK(fields::lp_norm(f, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(fields::lp_norm(f, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("reductions are thread-count independent") {
  PeriodicGrid g = PeriodicGrid::make(1, 10000);
  std::mt19937_64 eng(7);
  Field f(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) f(0, i) = -1.0 + 2.0 * uniform01(eng);

  par::set_threads(1);
  double s1 = fields::integrate(f);
  double n1 = fields::lp_norm(f, 2.0);
  par::set_threads(8);
  double s8 = fields::integrate(f);
  double n8 = fields::lp_norm(f, 2.0);
  par::set_threads(3);
  double s3 = fields::integrate(f);
  par::set_threads(0);

  CHECK(s1 == s8);
  CHECK(s1 == s3);
  CHECK(n1 == n8);
}

TEST_CASE("gradient and divergence") {
  SUBCASE("constants are annihilated") {
    PeriodicGrid g = PeriodicGrid::make(2, 32);
    Field c(g, 1, 4.2);
    Field gc = fields::gradient(c);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      CHECK(gc(0, i) == 0.0);
      CHECK(gc(1, i) == 0.0);
    }
  }

  SUBCASE("trig derivative with second-order convergence") {
    double err[2];
    int ns[2] = {128, 256};
    for (int level = 0; level < 2; ++level) {
      PeriodicGrid g = PeriodicGrid::make(1, ns[level]);
      Field f(g, 1);
      for (std::size_t i = 0; i < g.cells(); ++i)
        f(0, i) = std::sin(two_pi * g.center(g.coords(i)[0]));
      Field df = fields::gradient(f);
      double worst = 0.0;
      for (std::size_t i = 0; i < g.cells(); ++i) {
        double exact = two_pi * std::cos(two_pi * g.center(g.coords(i)[0]));
        worst = std::max(worst, std::abs(df(0, i) - exact));
      }
      err[level] = worst;
    }
    CHECK(err[0] < 5e-3);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
  }

  SUBCASE("discrete adjointness") {
    PeriodicGrid g = PeriodicGrid::make(2, 48);
    std::mt19937_64 eng(9);
    Field scalar = smooth_random(g, eng);
    Field vec = smooth_random(g, eng, 2);

    Field grad = fields::gradient(scalar);
    Field div = fields::divergence(vec);

    Field lhs(g, 1), rhs(g, 1);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      lhs(0, i) = scalar(0, i) * div(0, i);
      rhs(0, i) = grad(0, i) * vec(0, i) + grad(1, i) * vec(1, i);
    }
    CHECK(std::abs(fields::integrate(lhs) + fields::integrate(rhs)) < 1e-12);
  }
}

TEST_CASE("multilinear interpolation") {
  PeriodicGrid g = PeriodicGrid::make(2, 64);
  Field c(g, 1, 2.5);
  CHECK(fields::sample_interpolate(c, 0, {0.1234, 0.777, 0.0}) == 2.5);

  // Per-axis affine data reproduced exactly away from the wrap seam.
  Field aff(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) {
    auto x = g.center(i);
    aff(0, i) = 2.0 + 3.0 * x[0] - 1.5 * x[1];
  }
  std::mt19937_64 eng(11);
  for (int k = 0; k < 200; ++k) {
    double x = 0.5 * g.h + (1.0 - 2.0 * g.h) * uniform01(eng);
    double y = 0.5 * g.h + (1.0 - 2.0 * g.h) * uniform01(eng);
    double v = fields::sample_interpolate(aff, 0, {x, y, 0.0});
    CHECK(v == doctest::Approx(2.0 + 3.0 * x - 1.5 * y).epsilon(1e-13));
  }

  // Cell centers are reproduced exactly.
  for (std::size_t i = 0; i < 50; ++i) {
    auto x = g.center(i * 73 % g.cells());
    CHECK(fields::sample_interpolate(aff, 0, x) ==
          doctest::Approx(aff(0, i * 73 % g.cells())).epsilon(1e-14));
  }

  SUBCASE("second-order on smooth data") {
    double err[2];
    int ns[2] = {128, 256};
    std::mt19937_64 pe(13);
    std::vector<double> pts;
    for (int k = 0; k < 400; ++k) pts.push_back(uniform01(pe));
    for (int level = 0; level < 2; ++level) {
      PeriodicGrid g1 = PeriodicGrid::make(1, ns[level]);
      Field f(g1, 1);
      for (std::size_t i = 0; i < g1.cells(); ++i)
        f(0, i) = std::sin(two_pi * g1.center(g1.coords(i)[0]));
      double worst = 0.0;
      for (double x : pts)
        worst = std::max(worst, std::abs(fields::sample_interpolate(f, 0, {x, 0.0, 0.0}) -
                                         std::sin(two_pi * x)));
      err[level] = worst;
    }
    CHECK(err[0] / err[1] > 3.0);
    CHECK(err[0] / err[1] < 5.0);
  }

  SUBCASE("unwrapped coordinates land on the torus") {
    Field aff1(g, 1, 0.0);
    for (std::size_t i = 0; i < g.cells(); ++i) aff1(0, i) = std::sin(two_pi * g.center(i)[0]);
    double a = fields::sample_interpolate(aff1, 0, {0.3, 0.2, 0.0});
    double b = fields::sample_interpolate(aff1, 0, {0.3 + 2.0, 0.2 - 3.0, 0.0});
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
  }
}

TEST_CASE("snapshot round trip") {
  PeriodicGrid g = PeriodicGrid::make(2, 16);
  std::mt19937_64 eng(15);
  Field f(g, 4);
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < g.cells(); ++i) f(c, i) = -3.0 + 6.0 * uniform01(eng);

  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  fields::write_snapshot(buf, f);
  std::string bytes = buf.str();
  CHECK(bytes.size() == 4 + 4 * 4 + 8 * f.size());
  CHECK(bytes.substr(0, 4) == "NSFC");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version, little endian
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // dim
  CHECK(static_cast<unsigned char>(bytes[12]) == 16);  // n
  CHECK(static_cast<unsigned char>(bytes[16]) == 4);  // components

  Field back = fields::read_snapshot(buf);
  CHECK(back.grid() == g);
  CHECK(back.ncomp() == 4);
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < g.cells(); ++i) CHECK(back(c, i) == f(c, i));

  auto path = std::filesystem::temp_directory_path() / "nsfc_snapshot_test.bin";
  fields::write_snapshot_file(path.string(), f);
  Field fromfile = fields::read_snapshot_file(path.string());
  for (int c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < g.cells(); ++i) CHECK(fromfile(c, i) == f(c, i));
  std::filesystem::remove(path);

  std::stringstream bad(std::ios::in | std::ios::out | std::ios::binary);
  bad << "JUNK";
  CHECK_THROWS_AS(fields::read_snapshot(bad), IoError);
}
