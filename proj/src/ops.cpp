#include "sinhq/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace sinhq {

double laplacian_symbol(const ModeData& md) { return md.sx + md.sz; }

namespace {

// Row-major strides; stride of axis a.
std::array<std::int64_t, 4> strides(const Shape& s) {
  std::array<std::int64_t, 4> st{0, 0, 0, 0};
  std::int64_t acc = 1;
  for (int a = s.rank - 1; a >= 0; --a) {
    st[a] = acc;
    acc *= s.n[a];
  }
  return st;
}

}  // namespace

Field apply_laplacian(const Field& f) {
  const Shape& s = f.shape;
  Field out(s);
  auto st = strides(s);
  std::array<int, 4> idx{0, 0, 0, 0};
  std::int64_t flat = 0;
  while (true) {
    double acc = 0.0;
    for (int a = 0; a < s.rank; ++a) {
      int ip = idx[a] + 1 == s.n[a] ? 0 : idx[a] + 1;
      int im = idx[a] == 0 ? s.n[a] - 1 : idx[a] - 1;
      std::int64_t base = flat - std::int64_t(idx[a]) * st[a];
      double up = f.v[base + std::int64_t(ip) * st[a]];
      double dn = f.v[base + std::int64_t(im) * st[a]];
      acc += (up + dn - 2.0 * f.v[flat]) / (s.h[a] * s.h[a]);
    }
    out.v[flat] = acc;
    ++flat;
    int a = s.rank - 1;
    while (a >= 0 && ++idx[a] == s.n[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

Field shift(const Field& f, const std::array<int, 4>& steps) {
  const Shape& s = f.shape;
  Field out(s);
  auto st = strides(s);
  std::array<int, 4> idx{0, 0, 0, 0};
  std::int64_t flat = 0;
  while (true) {
    std::int64_t src = 0;
    for (int a = 0; a < s.rank; ++a) {
      int j = (idx[a] + steps[a]) % s.n[a];
      if (j < 0) j += s.n[a];
      src += std::int64_t(j) * st[a];
    }
    out.v[flat] = f.v[src];
    ++flat;
    int a = s.rank - 1;
    while (a >= 0 && ++idx[a] == s.n[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

Field finite_difference(const Field& f, int axis, int steps) {
  if (axis < 0 || axis >= f.shape.rank) throw std::invalid_argument("bad axis");
  if (steps == 0) throw std::invalid_argument("steps must be nonzero");
  std::array<int, 4> sv{0, 0, 0, 0};
  sv[axis] = steps;
  Field out = shift(f, sv);
  double inv = 1.0 / (steps * f.shape.h[axis]);
  for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] - f.v[i]) * inv;
  return out;
}

std::vector<Field> gradient(const Field& f) {
  std::vector<Field> g;
  g.reserve(f.shape.rank);
  for (int a = 0; a < f.shape.rank; ++a) g.push_back(finite_difference(f, a, 1));
  return g;
}

double dirichlet_energy(const Field& f) {
  double acc = 0.0;
  for (int a = 0; a < f.shape.rank; ++a) {
    Field d = finite_difference(f, a, 1);
    for (double x : d.v) acc += x * x;
  }
  return acc * f.shape.cell_vol();
}

Field apply_fractional(const Field& f, double c, double s) {
  return apply_multiplier(
      f, [c, s](const ModeData& md) { return std::pow(c + md.sigma(), s); });
}

Field poisson_solve(const Field& rhs, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("poisson_solve needs c > 0");
  return apply_multiplier(rhs,
                          [c](const ModeData& md) { return 1.0 / (c + md.sigma()); });
}

}  // namespace sinhq
