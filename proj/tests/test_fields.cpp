#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sinhq/fields.hpp"
#include "sinhq/ops.hpp"

using namespace sinhq;

namespace {

double mean_product(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc / double(a.size());
}

double sample_sd(const std::vector<double>& xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / double(xs.size() - 1));
}

double max_abs_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("white noise is reproducible with matching first moments") {
  Shape sh = Grid2(16, 0.25).shape();
  NoiseSample a = sample_noise(sh, 7, 3);
  NoiseSample b = sample_noise(sh, 7, 3);
  CHECK(max_abs_diff(a.field, b.field) == 0.0);
  CHECK(a.seed == 7);
  CHECK(a.stream == 3);
  NoiseSample c = sample_noise(sh, 7, 4);
  CHECK(max_abs_diff(a.field, c.field) > 0.1);

  // Mean over ~1e6 draws; site sd is 1/sqrt(cell).
  Shape big = Grid2(64, 0.125).shape();
  const int streams = 250;
  double acc = 0.0;
  for (int s = 0; s < streams; ++s) {
    NoiseSample xi = sample_noise(big, 2024, std::uint64_t(s));
    acc += xi.field.sum();
  }
  const double draws = double(big.sites()) * streams;
  const double se = (1.0 / std::sqrt(big.cell_vol())) / std::sqrt(draws);
  CHECK(std::abs(acc / draws) <= 4.0 * se);

  // Pairing isometry: Var(<xi, f> cell) = cell sum f^2.
  Field f(sh);
  for (int i0 = 0; i0 < 16; ++i0)
    for (int i1 = 0; i1 < 16; ++i1)
      f[f.index2(i0, i1)] =
          std::cos(two_pi * sh.coord(0, i0) / 4.0) + 0.3 * sh.coord(1, i1);
  double l2 = 0.0;
  for (std::int64_t i = 0; i < f.size(); ++i) l2 += f[i] * f[i];
  l2 *= sh.cell_vol();
  const int ns = 800;
  double var = 0.0;
  for (int s = 0; s < ns; ++s) {
    NoiseSample xi = sample_noise(sh, 55, std::uint64_t(s));
    double pair = 0.0;
    for (std::int64_t i = 0; i < f.size(); ++i) pair += xi.field[i] * f[i];
    pair *= sh.cell_vol();
    var += pair * pair;
  }
  var /= ns;
  CHECK(std::abs(var - l2) <= 4.0 * l2 * std::sqrt(2.0 / ns));
}

TEST_CASE("free field solves its equation and matches the green table") {
  Shape sh = Grid4(8, 0.25, 16, 0.125).shape();
  const double m = 1.0;
  NoiseSample xi = sample_noise(sh, 11, 0);
  Field w = solve_gff(xi, m);
  Field lap = apply_laplacian(w);
  double worst = 0.0;
  for (std::int64_t i = 0; i < w.size(); ++i)
    worst = std::max(worst, std::abs(m * m * w[i] - lap[i] - xi.field[i]));
  CHECK(worst <= 1e-9 * xi.field.sup_norm());

  GreenTable table = green_table(sh, m);
  WickData wick = wick_constant(sh, m, 1.0);
  CHECK(table.values[0] == doctest::Approx(wick.sigma2).epsilon(1e-12));

  const int streams = 200;
  std::vector<double> var0, covz, covx1, covx2;
  for (int s = 0; s < streams; ++s) {
    Field ws = solve_gff(sample_noise(sh, 500, std::uint64_t(s)), m);
    var0.push_back(mean_product(ws, ws));
    covz.push_back(mean_product(ws, shift(ws, {0, 0, 2, 1})));
    covx1.push_back(mean_product(ws, shift(ws, {1, 0, 0, 0})));
    covx2.push_back(mean_product(ws, shift(ws, {0, 1, 0, 0})));
  }
  auto check_close = [&](const std::vector<double>& xs, double target) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    const double se = sample_sd(xs, mean) / std::sqrt(double(xs.size()));
    CHECK(std::abs(mean - target) <= 4.0 * se);
  };
  check_close(var0, wick.sigma2);
  check_close(covz, table.values[table.values.index4(0, 0, 2, 1)]);
  check_close(covx1, table.values[table.values.index4(1, 0, 0, 0)]);
  // Four-fold rotation symmetry of the plane: same table entry serves both.
  check_close(covx2, table.values[table.values.index4(1, 0, 0, 0)]);
}

TEST_CASE("green table is even and matches direct mode sums") {
  Shape sh = Grid4(4, 0.5, 4, 0.5).shape();
  const double m = 1.3;
  GreenTable table = green_table(sh, m);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double g = table.values[table.values.index4(a, b, c, d)];
          const double gm = table.values[table.values.index4(
              (4 - a) % 4, (4 - b) % 4, (4 - c) % 4, (4 - d) % 4)];
          CHECK(g == doctest::Approx(gm).epsilon(1e-12));
        }

  // Direct sum over all 256 modes with the sine symbol written out.
  double direct = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          auto sig = [&](int j) {
            const int sgn = j < 2 ? j : j - 4;
            const double k = two_pi * sgn / 2.0;
            const double s = std::sin(0.25 * k);
            return 4.0 / 0.25 * s * s;
          };
          const double den = m * m + sig(a) + sig(b) + sig(c) + sig(d);
          direct += 1.0 / (den * den);
        }
  direct /= sh.torus_vol();
  CHECK(table.values[0] == doctest::Approx(direct).epsilon(1e-12));

  CHECK_THROWS(green_table(sh, 0.0));
}

TEST_CASE("green function has the expected short-distance log coefficient") {
  Shape sh = Grid4(32, 0.0625, 32, 0.0625).shape();
  GreenTable table = green_table(sh, 1.0);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::int64_t count = 0;
  std::array<int, 4> idx{0, 0, 0, 0};
  for (std::int64_t flat = 0; flat < sh.sites(); ++flat) {
    double r2 = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double y = sh.coord(a, idx[a]);
      r2 += y * y;
    }
    const double r = std::sqrt(r2);
    if (r >= 0.125 && r <= 0.45) {
      const double lx = std::log(r);
      const double g = table.values[flat];
      sx += lx;
      sy += g;
      sxx += lx * lx;
      sxy += lx * g;
      ++count;
    }
    for (int a = 3; a >= 0; --a) {
      if (++idx[a] < sh.n[a]) break;
      idx[a] = 0;
    }
  }
  const double n = double(count);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double cfit = -slope;
  const double target = 2.0 / std::pow(4.0 * std::numbers::pi, 2.0);
  CHECK(cfit == doctest::Approx(target).epsilon(0.15));
}

TEST_CASE("wick constants are quadratic with an enumerable mode sum") {
  Shape tiny = Grid4(2, 1.0, 2, 1.0).shape();
  WickData w0 = wick_constant(tiny, 1.0, 0.0);
  CHECK(w0.c == 0.0);
  CHECK(w0.sigma2 > 0.0);
  WickData w1 = wick_constant(tiny, 1.0, 0.7);
  WickData w2 = wick_constant(tiny, 1.0, 1.4);
  CHECK(w2.c == doctest::Approx(4.0 * w1.c).epsilon(1e-14));

  // 16 modes by hand: sigma per axis is 0 or 4 at unit spacing.
  double direct = 0.0;
  for (int t = 0; t <= 4; ++t) {
    const double binom[5] = {1, 4, 6, 4, 1};
    const double den = 1.0 + 4.0 * t;
    direct += binom[t] / (den * den);
  }
  direct /= tiny.torus_vol();
  CHECK(w1.sigma2 == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("gmc has lebesgue mean and the exact second moment") {
  Shape sh = Grid4(8, 0.25, 8, 0.25).shape();
  const double m = 1.0;
  const double alpha = 2.0 * std::numbers::pi;  // alpha^2/(4 pi)^2 = 1/4
  WickData wick = wick_constant(sh, m, alpha);

  NoiseSample xi = sample_noise(sh, 31, 0);
  Field w = solve_gff(xi, m);
  WickData wick0 = wick_constant(sh, m, 0.0);
  CellMeasure leb = gmc(w, 0.0, wick0);
  for (std::int64_t i = 0; i < sh.sites(); ++i)
    CHECK(leb.mass[i] == sh.cell_vol());

  GreenTable table = green_table(sh, m);
  double pairsum = 0.0;
  for (std::int64_t d = 0; d < sh.sites(); ++d)
    pairsum += std::exp(alpha * alpha * table.values[d]);
  const double second_exact =
      sh.cell_vol() * sh.cell_vol() * double(sh.sites()) * pairsum;

  const int streams = 100;
  std::vector<double> totals, squares;
  for (int s = 0; s < streams; ++s) {
    Field ws = solve_gff(sample_noise(sh, 808, std::uint64_t(s)), m);
    const double t = gmc(ws, alpha, wick).total();
    totals.push_back(t);
    squares.push_back(t * t);
  }
  auto mean_of = [](const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / double(xs.size());
  };
  const double mt = mean_of(totals);
  const double set = sample_sd(totals, mt) / std::sqrt(double(streams));
  CHECK(std::abs(mt - sh.torus_vol()) <= 4.0 * set);
  const double ms = mean_of(squares);
  const double ses = sample_sd(squares, ms) / std::sqrt(double(streams));
  CHECK(std::abs(ms - second_exact) <= 4.0 * ses);

  // Outside the subcritical window the measure is still produced (with a
  // warning); the data contracts still reject mismatched inputs.
  WickData wick_big = wick_constant(sh, m, 13.0);
  CellMeasure rough = gmc(w, 13.0, wick_big);
  CHECK(std::isfinite(rough.total()));
  CHECK_THROWS(gmc(w, alpha, wick_big));
  Shape other = Grid4(4, 0.5, 4, 0.5).shape();
  WickData wick_other = wick_constant(other, m, alpha);
  CHECK_THROWS(gmc(w, alpha, wick_other));
}

TEST_CASE("wick powers follow the hermite recursion to the exponential") {
  Shape sh = Grid4(4, 0.5, 4, 0.5).shape();
  const double m = 1.0, alpha = 1.3;
  WickData wick = wick_constant(sh, m, alpha);
  Field w = solve_gff(sample_noise(sh, 99, 5), m);

  Field p0 = wick_power(w, 0, wick);
  CHECK(p0.sup_norm() == 1.0);
  Field p1 = wick_power(w, 1, wick);
  CHECK(max_abs_diff(p1, w) == 0.0);
  Field p2 = wick_power(w, 2, wick);
  for (std::int64_t i = 0; i < w.size(); ++i)
    CHECK(p2[i] == doctest::Approx(w[i] * w[i] - wick.sigma2).epsilon(1e-14));

  Field partial(sh, 0.0);
  double fact = 1.0;
  for (int n = 0; n <= 40; ++n) {
    if (n > 0) fact *= n;
    Field pn = wick_power(w, n, wick);
    const double coef = std::pow(alpha, n) / fact;
    for (std::int64_t i = 0; i < partial.size(); ++i) partial[i] += coef * pn[i];
  }
  double worst = 0.0;
  for (std::int64_t i = 0; i < w.size(); ++i) {
    const double exact = std::exp(alpha * w[i] - wick.c);
    worst = std::max(worst, std::abs(partial[i] - exact) / exact);
  }
  CHECK(worst <= 1e-6);

  CHECK_THROWS(wick_power(w, -1, wick));
}

TEST_CASE("periodization repeats the fundamental window") {
  Shape sh = Grid2(16, 0.25).shape();
  NoiseSample xi = sample_noise(sh, 404, 1);
  NoiseSample per = periodize(xi, 8);
  CHECK(max_abs_diff(per.field, shift(per.field, {8, 0, 0, 0})) == 0.0);
  CHECK(max_abs_diff(per.field, shift(per.field, {0, 8, 0, 0})) == 0.0);
  for (int i0 = 0; i0 < 16; ++i0)
    for (int i1 = 0; i1 < 16; ++i1) {
      const bool in0 = sh.signed_index(0, i0) >= -4 && sh.signed_index(0, i0) < 4;
      const bool in1 = sh.signed_index(1, i1) >= -4 && sh.signed_index(1, i1) < 4;
      if (in0 && in1)
        CHECK(per.field[per.field.index2(i0, i1)] == xi.field[xi.field.index2(i0, i1)]);
    }
  CHECK_THROWS(periodize(xi, 6));
  CHECK_THROWS(periodize(xi, 5));

  Shape s4 = Grid4(4, 0.5, 8, 0.25).shape();
  NoiseSample xi4 = sample_noise(s4, 11, 2);
  NoiseSample per4 = periodize(xi4, 4);
  CHECK(max_abs_diff(per4.field, shift(per4.field, {0, 0, 4, 0})) == 0.0);
  CHECK(max_abs_diff(per4.field, shift(per4.field, {0, 0, 0, 4})) == 0.0);

  // Covariance of the periodized free field against the coarse mode sum.
  const double m = 1.0;
  const int window = 8, rep = 16 / window;
  auto oracle = [&](int d0, int d1) {
    double acc = 0.0;
    for (int j0 = 0; j0 < 16; ++j0)
      for (int j1 = 0; j1 < 16; ++j1) {
        if (j0 % rep != 0 || j1 % rep != 0) continue;
        const double k0 = sh.freq(0, j0), k1 = sh.freq(1, j1);
        const double s0 = std::sin(0.125 * k0), s1 = std::sin(0.125 * k1);
        const double den = m * m + 4.0 / 0.0625 * (s0 * s0 + s1 * s1);
        acc += std::cos(k0 * d0 * 0.25 + k1 * d1 * 0.25) / (den * den);
      }
    return double(rep * rep) * acc / sh.torus_vol();
  };
  const int streams = 400;
  std::vector<double> c00, c10, c22;
  for (int s = 0; s < streams; ++s) {
    NoiseSample raw = sample_noise(sh, 7070, std::uint64_t(s));
    Field wn = solve_gff(periodize(raw, window), m);
    c00.push_back(mean_product(wn, wn));
    c10.push_back(mean_product(wn, shift(wn, {1, 0, 0, 0})));
    c22.push_back(mean_product(wn, shift(wn, {2, 2, 0, 0})));
  }
  auto check_close = [&](const std::vector<double>& xs, double target) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    const double se = sample_sd(xs, mean) / std::sqrt(double(xs.size()));
    CHECK(std::abs(mean - target) <= 4.0 * se);
  };
  check_close(c00, oracle(0, 0));
  check_close(c10, oracle(1, 0));
  check_close(c22, oracle(2, 2));
}
