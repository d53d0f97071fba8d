#pragma once

#include <complex>
#include <vector>

#include "sinhq/grid.hpp"

namespace sinhq {

// Real scalar field sampled on the sites of a lattice, row major, x axes
// outermost for rank 4.
struct Field {
  Shape shape;
  std::vector<double> v;

  Field() = default;
  explicit Field(const Shape& s, double fill = 0.0) : shape(s), v(s.sites(), fill) {}

  std::int64_t size() const { return std::int64_t(v.size()); }
  double& operator[](std::int64_t i) { return v[i]; }
  double operator[](std::int64_t i) const { return v[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  std::int64_t index4(int a, int b, int c, int d) const {
    return ((std::int64_t(a) * shape.n[1] + b) * shape.n[2] + c) * shape.n[3] + d;
  }
  std::int64_t index2(int a, int b) const { return std::int64_t(a) * shape.n[1] + b; }

  double sum() const;
  double sup_norm() const;
  double l2_norm(double weight_measure) const;  // sqrt(sum v^2 * weight_measure)
};

// Complex field on the dual lattice, same index layout as the site lattice.
// Real site data has Hermitian spectra: F(-k) = conj(F(k)).
struct SpectralField {
  Shape shape;
  std::vector<std::complex<double>> v;

  SpectralField() = default;
  explicit SpectralField(const Shape& s) : shape(s), v(s.sites()) {}

  std::int64_t size() const { return std::int64_t(v.size()); }
  std::complex<double>& operator[](std::int64_t i) { return v[i]; }
  const std::complex<double>& operator[](std::int64_t i) const { return v[i]; }
};

// Per-mode data handed to spectral symbols: discrete Laplacian symbol and
// euclidean |k|^2, split into the x and z dual planes (sx = k2x = 0 in rank 2).
struct ModeData {
  double sx = 0.0, sz = 0.0;
  double k2x = 0.0, k2z = 0.0;
  double sigma() const { return sx + sz; }
  double k2() const { return k2x + k2z; }
};

}  // namespace sinhq
