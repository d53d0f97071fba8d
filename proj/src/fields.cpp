#include "sinhq/fields.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sinhq/ops.hpp"

namespace sinhq {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Strictly inside (0,1) so the Box-Muller log is always finite.
double unit_open(std::uint64_t x) {
  return (double(mix(x) >> 11) + 0.5) * 0x1.0p-53;
}

std::int64_t flat_index(const Shape& s, const std::array<int, 4>& idx) {
  std::int64_t flat = 0;
  for (int a = 0; a < s.rank; ++a) flat = flat * s.n[a] + idx[a];
  return flat;
}

}  // namespace

double normal_at(std::uint64_t seed, std::uint64_t stream, std::int64_t site) {
  std::uint64_t base = mix(seed ^ 0x517cc1b727220a95ull);
  base = mix(base ^ stream);
  base = mix(base ^ std::uint64_t(site));
  const double u1 = unit_open(base);
  const double u2 = unit_open(base ^ 0x6a09e667f3bcc909ull);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

NoiseSample sample_noise(const Shape& shape, std::uint64_t seed, std::uint64_t stream) {
  NoiseSample out{Field(shape), seed, stream};
  const double scale = 1.0 / std::sqrt(shape.cell_vol());
  for (std::int64_t i = 0; i < out.field.size(); ++i)
    out.field[i] = scale * normal_at(seed, stream, i);
  return out;
}

GreenTable green_table(const Shape& shape, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("green_table: m must be positive");
  const double m2 = m * m;
  SpectralField spec = make_spectrum(shape, [m2](const ModeData& md) {
    const double d = m2 + md.sigma();
    return 1.0 / (d * d);
  });
  return GreenTable{fft_inverse(spec), m};
}

WickData wick_constant(const Shape& shape, double m, double alpha) {
  if (!(m > 0.0)) throw std::invalid_argument("wick_constant: m must be positive");
  const double m2 = m * m;
  double acc = 0.0;
  for_each_mode(shape, [&](std::int64_t, const ModeData& md) {
    const double d = m2 + md.sigma();
    acc += 1.0 / (d * d);
  });
  WickData out;
  out.shape = shape;
  out.m = m;
  out.alpha = alpha;
  out.sigma2 = acc / shape.torus_vol();
  out.c = 0.5 * alpha * alpha * out.sigma2;
  return out;
}

Field solve_gff(const NoiseSample& xi, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("solve_gff: m must be positive");
  return poisson_solve(xi.field, m * m);
}

CellMeasure gmc(const Field& w, double alpha, const WickData& wick) {
  if (!(w.shape == wick.shape))
    throw std::invalid_argument("gmc: field and wick data on different grids");
  if (wick.alpha != alpha)
    throw std::invalid_argument("gmc: wick data computed for a different alpha");
  if (alpha * alpha >= 16.0 * std::numbers::pi * std::numbers::pi)
    std::cerr << "gmc: alpha^2 = " << alpha * alpha
              << " is outside the subcritical window alpha^2 < (4 pi)^2; "
                 "no correctness claims apply\n";
  CellMeasure out(w.shape);
  const double cell = w.shape.cell_vol();
  for (std::int64_t i = 0; i < w.size(); ++i)
    out.mass[i] = cell * std::exp(alpha * w[i] - wick.c);
  out.validate();
  return out;
}

Field wick_power(const Field& w, int n, const WickData& wick) {
  if (!(w.shape == wick.shape))
    throw std::invalid_argument("wick_power: field and wick data on different grids");
  if (n < 0) throw std::invalid_argument("wick_power: order must be nonnegative");
  Field prev(w.shape, 1.0);
  if (n == 0) return prev;
  Field cur = w;
  for (int k = 1; k < n; ++k) {
    Field next(w.shape);
    for (std::int64_t i = 0; i < w.size(); ++i)
      next[i] = w[i] * cur[i] - double(k) * wick.sigma2 * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

NoiseSample periodize(const NoiseSample& xi, int window) {
  const Shape& s = xi.field.shape;
  const int first_axis = s.rank == 4 ? 2 : 0;
  if (window <= 0 || window % 2 != 0)
    throw std::invalid_argument("periodize: window must be a positive even count");
  if (s.n[first_axis] % window != 0)
    throw std::invalid_argument("periodize: window must divide the axis size");

  NoiseSample out{Field(s), xi.seed, xi.stream};
  std::array<int, 4> idx{0, 0, 0, 0};
  for (std::int64_t flat = 0; flat < s.sites(); ++flat) {
    std::array<int, 4> src = idx;
    for (int a = first_axis; a < s.rank; ++a) {
      const int sg = s.signed_index(a, idx[a]);
      // Centered remainder in [-window/2, window/2).
      const int r = ((sg % window) + window + window / 2) % window - window / 2;
      src[a] = (r + s.n[a]) % s.n[a];
    }
    out.field[flat] = xi.field[flat_index(s, src)];
    for (int a = s.rank - 1; a >= 0; --a) {
      if (++idx[a] < s.n[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace sinhq
