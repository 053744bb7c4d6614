#include "nsfc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

#include "nsfc/parallel.hpp"

namespace nsfc::fields {

PeriodicGrid PeriodicGrid::make(int dim, int n) {
  if (dim < 1 || dim > 3) throw ConfigError("grid: dim must be 1, 2, or 3");
  if (n < 8) throw ConfigError("grid: need at least 8 cells per axis");
  PeriodicGrid g;
  g.dim = dim;
  g.n = n;
  g.h = 1.0 / n;
  g.cells_ = 1;
  for (int a = 0; a < dim; ++a) g.cells_ *= static_cast<std::size_t>(n);
  return g;
}

std::size_t PeriodicGrid::index(const std::array<int, 3>& i) const {
  std::size_t lin = 0;
  for (int a = dim - 1; a >= 0; --a) lin = lin * n + static_cast<std::size_t>(i[a]);
  return lin;
}

std::array<int, 3> PeriodicGrid::coords(std::size_t lin) const {
  std::array<int, 3> i{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    i[a] = static_cast<int>(lin % n);
    lin /= n;
  }
  return i;
}

std::array<double, 3> PeriodicGrid::center(std::size_t lin) const {
  auto i = coords(lin);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = center(i[a]);
  return x;
}

std::size_t PeriodicGrid::neighbor(std::size_t lin, int axis, int step) const {
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(n);
  int ia = static_cast<int>((lin / stride) % n);
  int ja = wrap(ia + step);
  return lin + (static_cast<std::size_t>(ja) - static_cast<std::size_t>(ia)) * stride;
}

Field::Field(const PeriodicGrid& grid, int ncomp, double fill)
    : grid_(grid), ncomp_(ncomp), data_(grid.cells() * ncomp, fill) {}

std::span<double> Field::comp(int c) {
  return std::span<double>(data_.data() + c * grid_.cells(), grid_.cells());
}

std::span<const double> Field::comp(int c) const {
  return std::span<const double>(data_.data() + c * grid_.cells(), grid_.cells());
}

void Field::require_finite(const std::string& context) const {
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw Error(context + ": non-finite value at flat index " + std::to_string(i));
}

MollifierKernel MollifierKernel::make(const PeriodicGrid& grid, double radius) {
  const double h = grid.h;
  if (radius < 2.0 * h - 1e-13)
    throw UnresolvableKernel("mollifier radius " + std::to_string(radius) +
                             " below two cells at h = " + std::to_string(h));
  if (radius > 0.25 + 1e-13)
    throw UnresolvableKernel("mollifier radius " + std::to_string(radius) +
                             " exceeds a quarter of the torus");

  MollifierKernel k;
  k.radius_ = radius;
  int m = static_cast<int>(std::floor(radius / h));
  std::array<int, 2> lohi{-m, m};
  auto bump = [](double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; };

  std::array<int, 3> o{0, 0, 0};
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < grid.dim; ++a) {
    lo[a] = lohi[0];
    hi[a] = lohi[1];
  }
  for (o[2] = lo[2]; o[2] <= hi[2]; ++o[2])
    for (o[1] = lo[1]; o[1] <= hi[1]; ++o[1])
      for (o[0] = lo[0]; o[0] <= hi[0]; ++o[0]) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) r2 += double(o[a]) * o[a];
        double w = bump(std::sqrt(r2) * h / radius);
        if (w > 0.0) {
          k.offsets_.push_back(o);
          k.weights_.push_back(w);
        }
      }

  double hd = 1.0;
  for (int a = 0; a < grid.dim; ++a) hd *= h;
  auto total = [&] {
    double s = 0.0;
    for (double w : k.weights_) s += w * hd;
    return s;
  };
  double z = total();
  for (double& w : k.weights_) w /= z;
  // Nudge the center weight until the accumulated normalization is exact.
  std::size_t center = 0;
  while (center < k.offsets_.size() && k.offsets_[center] != std::array<int, 3>{0, 0, 0}) ++center;
  for (int pass = 0; pass < 8 && center < k.weights_.size(); ++pass) {
    double s = total();
    if (s == 1.0) break;
    k.weights_[center] += (1.0 - s) / hd;
  }
  return k;
}

Field mollify(const Field& f, const MollifierKernel& k) {
  const PeriodicGrid& g = f.grid();
  Field out(g, f.ncomp());
  double hd = 1.0;
  for (int a = 0; a < g.dim; ++a) hd *= g.h;
  const auto& offs = k.offsets();
  const auto& wts = k.weights();

  for (int c = 0; c < f.ncomp(); ++c) {
    auto in = f.comp(c);
    auto dst = out.comp(c);
    par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t cell = lo; cell < hi; ++cell) {
        auto i = g.coords(cell);
        double acc = 0.0;
        double vmin = std::numeric_limits<double>::infinity();
        double vmax = -vmin;
        for (std::size_t t = 0; t < offs.size(); ++t) {
          std::array<int, 3> j{0, 0, 0};
          for (int a = 0; a < g.dim; ++a) j[a] = g.wrap(i[a] - offs[t][a]);
          double v = in[g.index(j)];
          acc += wts[t] * hd * v;
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
        // Convex weights: pin any last-ulp overshoot back into the data range.
        dst[cell] = std::clamp(acc, vmin, vmax);
      }
    });
  }
  return out;
}

double integrate(const Field& f, int c) {
  double hd = 1.0;
  for (int a = 0; a < f.grid().dim; ++a) hd *= f.grid().h;
  auto v = f.comp(c);
  return par::deterministic_sum(v) * hd;
}

double lp_norm(const Field& f, double p, int c) {
  auto v = f.comp(c);
  if (std::isinf(p))
    return par::deterministic_max(v.size(), [&](std::size_t i) { return std::abs(v[i]); });
  double hd = 1.0;
  for (int a = 0; a < f.grid().dim; ++a) hd *= f.grid().h;
  double s = par::deterministic_map_sum(v.size(),
                                        [&](std::size_t i) { return std::pow(std::abs(v[i]), p); });
  return std::pow(s * hd, 1.0 / p);
}

Field gradient(const Field& f, int c) {
  const PeriodicGrid& g = f.grid();
  Field out(g, g.dim);
  auto in = f.comp(c);
  const double inv2h = 1.0 / (2.0 * g.h);
  for (int a = 0; a < g.dim; ++a) {
    auto dst = out.comp(a);
    par::parallel_for(g.cells(), [&, a](std::size_t lo, std::size_t hi) {
      for (std::size_t cell = lo; cell < hi; ++cell)
        dst[cell] = (in[g.neighbor(cell, a, +1)] - in[g.neighbor(cell, a, -1)]) * inv2h;
    });
  }
  return out;
}

Field divergence(const Field& v) {
  const PeriodicGrid& g = v.grid();
  if (v.ncomp() != g.dim) throw Error("divergence: field must carry dim components");
  Field out(g, 1);
  auto dst = out.comp(0);
  const double inv2h = 1.0 / (2.0 * g.h);
  par::parallel_for(g.cells(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t cell = lo; cell < hi; ++cell) {
      double acc = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        auto in = v.comp(a);
        acc += (in[g.neighbor(cell, a, +1)] - in[g.neighbor(cell, a, -1)]) * inv2h;
      }
      dst[cell] = acc;
    }
  });
  return out;
}

double sample_interpolate(const Field& f, int c, const std::array<double, 3>& x) {
  const PeriodicGrid& g = f.grid();
  auto in = f.comp(c);
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    double s = x[a] / g.h - 0.5;
    double fl = std::floor(s);
    i0[a] = g.wrap(static_cast<int>(fl));
    t[a] = s - fl;
  }
  double acc = 0.0;
  int corners = 1 << g.dim;
  for (int corner = 0; corner < corners; ++corner) {
    std::array<int, 3> j{0, 0, 0};
    double w = 1.0;
    for (int a = 0; a < g.dim; ++a) {
      int bit = (corner >> a) & 1;
      j[a] = bit ? g.wrap(i0[a] + 1) : i0[a];
      w *= bit ? t[a] : 1.0 - t[a];
    }
    acc += w * in[g.index(j)];
  }
  return acc;
}

namespace {

constexpr std::uint32_t snapshot_version = 1;
constexpr char snapshot_magic[4] = {'N', 'S', 'F', 'C'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int k = 0; k < 8; ++k) u |= std::uint64_t(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& f) {
  os.write(snapshot_magic, 4);
  put_u32(os, snapshot_version);
  put_u32(os, static_cast<std::uint32_t>(f.grid().dim));
  put_u32(os, static_cast<std::uint32_t>(f.grid().n));
  put_u32(os, static_cast<std::uint32_t>(f.ncomp()));
  for (double v : f.raw()) put_f64(os, v);
  if (!os) throw IoError("snapshot: write failed");
}

Field read_snapshot(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, snapshot_magic, 4) != 0)
    throw IoError("snapshot: bad magic");
  std::uint32_t version = get_u32(is);
  if (version != snapshot_version)
    throw IoError("snapshot: unsupported version " + std::to_string(version));
  std::uint32_t dim = get_u32(is);
  std::uint32_t n = get_u32(is);
  std::uint32_t ncomp = get_u32(is);
  PeriodicGrid g = PeriodicGrid::make(static_cast<int>(dim), static_cast<int>(n));
  Field f(g, static_cast<int>(ncomp));
  for (double& v : f.raw()) v = get_f64(is);
  if (!is) throw IoError("snapshot: truncated data");
  return f;
}

void write_snapshot_file(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("snapshot: cannot open " + path + " for writing");
  write_snapshot(os, f);
}

Field read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("snapshot: cannot open " + path);
  return read_snapshot(is);
}

}  // namespace nsfc::fields
