#pragma once

#include <cstdint>

#include "sinhq/besov.hpp"
#include "sinhq/fft.hpp"
#include "sinhq/field.hpp"

namespace sinhq {

// Site-wise standard normal from a counter-based hash of (seed, stream,
// site), so any site of any stream can be generated independently and
// ensembles are reproducible regardless of evaluation order.
double normal_at(std::uint64_t seed, std::uint64_t stream, std::int64_t site);

// White noise: iid centered Gaussians of variance 1/cell_vol per site, the
// lattice density of a unit-intensity noise measure.
struct NoiseSample {
  Field field;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

NoiseSample sample_noise(const Shape& shape, std::uint64_t seed, std::uint64_t stream);

// Exact on-torus variance data for Wick ordering: sigma2 = E[W^2] from the
// mode sum, c = alpha^2 sigma2 / 2.
struct WickData {
  Shape shape;
  double m = 0;
  double alpha = 0;
  double sigma2 = 0;
  double c = 0;
};

// Covariance table of the free field: inverse transform of (m^2+sigma)^{-2},
// exact on the torus. values[0] is E[W(0)^2].
struct GreenTable {
  Field values;
  double m = 0;
};

GreenTable green_table(const Shape& shape, double m);

WickData wick_constant(const Shape& shape, double m, double alpha);

// Free field W = (m^2 - Laplacian)^{-1} xi.
Field solve_gff(const NoiseSample& xi, double m);

// Wick-ordered exponential measure per cell: mass = cell_vol exp(alpha W - c).
// Warns (once per call, stderr) outside the subcritical window alpha^2 < (4 pi)^2.
CellMeasure gmc(const Field& w, double alpha, const WickData& wick);

// Wick power :W^n: by the Hermite recursion
// :W^{n+1}: = W :W^n: - n sigma2 :W^{n-1}:.
Field wick_power(const Field& w, int n, const WickData& wick);

// Periodization in the z variables with period `window` sites (both axes for
// rank 2): out(x, z) = xi(x, [z]), with [z] the centered remainder, so the
// result is window-periodic and agrees with the source on the fundamental
// window. window must be even and divide the axis size.
NoiseSample periodize(const NoiseSample& xi, int window);

}  // namespace sinhq
