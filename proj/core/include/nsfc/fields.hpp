#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsfc/errors.hpp"

namespace nsfc::fields {

// Uniform cell-centered grid on the periodic unit torus, n cells per axis.
struct PeriodicGrid {
  int dim = 1;
  int n = 0;
  double h = 0.0;

  static PeriodicGrid make(int dim, int n);

  std::size_t cells() const { return cells_; }
  // Linear index with axis 1 fastest.
  std::size_t index(const std::array<int, 3>& i) const;
  std::array<int, 3> coords(std::size_t lin) const;
  // Center of cell i along one axis: (i + 1/2) h.
  double center(int i) const { return (i + 0.5) * h; }
  std::array<double, 3> center(std::size_t lin) const;
  int wrap(int i) const {
    int r = i % n;
    return r < 0 ? r + n : r;
  }
  // Neighbor of lin shifted by step (+1/-1) along axis.
  std::size_t neighbor(std::size_t lin, int axis, int step) const;

  bool operator==(const PeriodicGrid&) const = default;

 private:
  std::size_t cells_ = 0;
};

// Multi-component scalar data over a grid, stored component-major; inside a
// component the layout is row-major with axis 1 fastest.
class Field {
 public:
  Field() = default;
  Field(const PeriodicGrid& grid, int ncomp, double fill = 0.0);

  const PeriodicGrid& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int c, std::size_t lin) { return data_[c * grid_.cells() + lin]; }
  double operator()(int c, std::size_t lin) const { return data_[c * grid_.cells() + lin]; }

  std::span<double> comp(int c);
  std::span<const double> comp(int c) const;
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  void require_finite(const std::string& context) const;

 private:
  PeriodicGrid grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

// Radial bump exp(-1/(1-r^2)) sampled at cell centers inside the support
// ball and renormalized so that sum(w) h^d = 1 exactly.
class MollifierKernel {
 public:
  // radius in torus units; must resolve to >= 2 cells and stay below 1/4.
  static MollifierKernel make(const PeriodicGrid& grid, double radius);

  double radius() const { return radius_; }
  const std::vector<std::array<int, 3>>& offsets() const { return offsets_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  double radius_ = 0.0;
  std::vector<std::array<int, 3>> offsets_;
  std::vector<double> weights_;
};

// Discrete convolution with the kernel, one output component per input
// component. Exact on constants; bounded by the input bounds.
Field mollify(const Field& f, const MollifierKernel& k);

// Integral of one component over the torus (deterministic reduction).
double integrate(const Field& f, int c = 0);

// L^p norm over the torus; p in {1, 4/3, 2, 4} or infinity.
double lp_norm(const Field& f, double p, int c = 0);

// Second-order central differences, periodic. gradient maps one component
// to dim components; divergence maps dim components to one.
Field gradient(const Field& f, int c = 0);
Field divergence(const Field& v);

// Multilinear periodic interpolation of component c at point x.
double sample_interpolate(const Field& f, int c, const std::array<double, 3>& x);

// Binary snapshot: magic "NSFC", then u32 version, dim, n, ncomp, followed by
// the component-major cell data as little-endian doubles.
void write_snapshot(std::ostream& os, const Field& f);
Field read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const Field& f);
Field read_snapshot_file(const std::string& path);

}  // namespace nsfc::fields
