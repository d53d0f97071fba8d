#include "sinhq/besov.hpp"

#include <cmath>
#include <stdexcept>

#include "sinhq/ops.hpp"

namespace sinhq {

namespace {

std::int64_t flat_index(const Shape& sh, const std::array<int, 4>& idx) {
  std::int64_t f = 0;
  for (int a = 0; a < sh.rank; ++a) f = f * sh.n[a] + idx[a];
  return f;
}

template <class F>
void for_each_site(const Shape& sh, F&& fn) {
  std::array<int, 4> idx{0, 0, 0, 0};
  const std::int64_t total = sh.sites();
  for (std::int64_t flat = 0; flat < total; ++flat) {
    fn(flat, idx);
    for (int a = sh.rank - 1; a >= 0; --a) {
      if (++idx[a] < sh.n[a]) break;
      idx[a] = 0;
    }
  }
}

// Squared coordinate radius split into the shape's planes: rank 4 puts axes
// 0,1 into x2 and 2,3 into z2; rank 2 is all z.
void plane_radii(const Shape& sh, const std::array<int, 4>& idx, double& x2, double& z2) {
  x2 = z2 = 0.0;
  for (int a = 0; a < sh.rank; ++a) {
    const double c = sh.coord(a, idx[a]);
    if (sh.rank == 4 && a < 2) x2 += c * c;
    else z2 += c * c;
  }
}

void check_order(double p) {
  if (std::isnan(p) || p < 1.0) throw std::invalid_argument("integrability order must be >= 1");
}

// Raw L^p integral piece over sites: cell sum of |g|^p for finite p (no final
// root), sup |g| for p = inf.
double lp_integral(const Field& g, double p, double cell) {
  double acc = 0.0;
  if (std::isinf(p)) {
    for (std::int64_t i = 0; i < g.size(); ++i) acc = std::max(acc, std::abs(g[i]));
    return acc;
  }
  for (std::int64_t i = 0; i < g.size(); ++i) acc += std::pow(std::abs(g[i]), p);
  return cell * acc;
}

// l^q accumulator over shell terms.
struct ShellAccum {
  double q;
  double acc = 0.0;
  void add(double t) {
    if (std::isinf(q)) acc = std::max(acc, t);
    else acc += std::pow(t, q);
  }
  double value() const { return std::isinf(q) ? acc : std::pow(acc, 1.0 / q); }
};

}  // namespace

void BesovParams::validate() const {
  check_order(p);
  check_order(q);
  if (!(a > 0.0)) throw std::invalid_argument("kernel scale a must be positive");
  if (!(b_ker > 0.0 && b_ker < 1.0))
    throw std::invalid_argument("kernel exponent b_ker must lie in (0, 1)");
}

Field weight_field(const Shape& shape, double ell) {
  Field w(shape);
  for_each_site(shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    double r2 = 0.0;
    for (int a = 0; a < shape.rank; ++a) {
      const double c = shape.coord(a, idx[a]);
      r2 += c * c;
    }
    w[flat] = std::pow(1.0 + r2, -0.5 * ell);
  });
  return w;
}

Field weight_field_split(const Shape& shape, double ell_x, double ell_z) {
  Field w(shape);
  for_each_site(shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    double x2, z2;
    plane_radii(shape, idx, x2, z2);
    w[flat] = std::pow(1.0 + x2, -0.5 * ell_x) * std::pow(1.0 + z2, -0.5 * ell_z);
  });
  return w;
}

Field clustering_weight_field(const Shape& shape, double kappa, double npow) {
  Field w(shape);
  for_each_site(shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    double x2, z2;
    plane_radii(shape, idx, x2, z2);
    w[flat] = std::pow(1.0 + kappa * std::sqrt(1.0 + x2), -npow) *
              std::exp(kappa * std::sqrt(1.0 + z2));
  });
  return w;
}

double lp_norm_weighted(const Field& f, double p, const Field& weight) {
  check_order(p);
  if (f.shape != weight.shape) throw std::invalid_argument("weight built for another grid");
  if (std::isinf(p)) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < f.size(); ++i)
      acc = std::max(acc, weight[i] * std::abs(f[i]));
    return acc;
  }
  double acc = 0.0;
  for (std::int64_t i = 0; i < f.size(); ++i)
    acc += std::pow(weight[i] * std::abs(f[i]), p);
  return std::pow(f.shape.cell_vol() * acc, 1.0 / p);
}

double lp_norm(const Field& f, double p, double ell) {
  return lp_norm_weighted(f, p, weight_field(f.shape, ell));
}

NormReport besov_norm_report(const Field& f, const BesovParams& prm) {
  prm.validate();
  const DyadicPartition part = build_partition(f.shape);
  const Field w = weight_field(f.shape, prm.ell);
  NormReport rep;
  ShellAccum outer{prm.q};
  if (f.shape.rank == 2) {
    rep.shell_cut_z = part.jz_max;
    for (int j = -1; j <= part.jz_max; ++j)
      outer.add(std::exp2(prm.s * j) * lp_norm_weighted(lp_block(f, part, j), prm.p, w));
  } else {
    rep.shell_cut_x = part.jx_max;
    rep.shell_cut_z = part.jz_max;
    for (int r = -1; r <= part.j_tilde_max(); ++r)
      outer.add(std::exp2(prm.s * r) * lp_norm_weighted(lp_block_tilde(f, part, r), prm.p, w));
  }
  rep.value = outer.value();
  return rep;
}

double besov_norm(const Field& f, const BesovParams& prm) {
  return besov_norm_report(f, prm).value;
}

NormReport besov_norm_mixed_report(const Field& f, const BesovParams& prm) {
  prm.validate();
  if (f.shape.rank != 4) throw std::invalid_argument("mixed norm needs a rank-4 field");
  const DyadicPartition part = build_partition(f.shape);
  const Field w = weight_field_split(f.shape, prm.ellx, prm.ellz);
  NormReport rep;
  rep.shell_cut_x = part.jx_max;
  rep.shell_cut_z = part.jz_max;
  ShellAccum outer{prm.p};
  for (int i = -1; i <= part.jx_max; ++i)
    for (int j = -1; j <= part.jz_max; ++j)
      outer.add(std::exp2(prm.sx * i + prm.sz * j) *
                lp_norm_weighted(lp_block_mixed(f, part, i, j), prm.p, w));
  rep.value = outer.value();
  return rep;
}

double besov_norm_mixed(const Field& f, const BesovParams& prm) {
  return besov_norm_mixed_report(f, prm).value;
}

double difference_norm(const Field& f, double s, double p, double ell, int shift_cap) {
  if (f.shape.rank != 2) throw std::invalid_argument("difference norm acts on rank-2 fields");
  if (!(s > 0.0 && s <= 2.0))
    throw std::invalid_argument("difference order s must lie in (0, 2]");
  check_order(p);
  if (shift_cap < 1) throw std::invalid_argument("shift cap must be >= 1");
  const double eps = f.shape.h[0];
  const Field w = weight_field(f.shape, ell);
  double total = lp_norm_weighted(f, p, w);

  const int orders = s > 1.0 ? 2 : 1;
  std::array<double, 2> sup{0.0, 0.0};
  for (int m = 1; m <= shift_cap; ++m) {
    const std::array<std::array<int, 2>, 4> dirs{{{m, 0}, {0, m}, {m, m}, {m, -m}}};
    for (const auto& d : dirs) {
      const double habs = eps * std::hypot(double(d[0]), double(d[1]));
      if (habs > 1.0 + 1e-12 && m > 1) continue;  // keep single steps always
      const Field fwd = shift(f, {d[0], d[1], 0, 0});
      Field diff(f.shape);
      for (std::int64_t i = 0; i < f.size(); ++i) diff[i] = fwd[i] - f[i];
      sup[0] = std::max(sup[0],
                        lp_norm_weighted(diff, p, w) / std::pow(habs, std::min(1.0, s)));
      if (orders == 2) {
        const Field bwd = shift(f, {-d[0], -d[1], 0, 0});
        for (std::int64_t i = 0; i < f.size(); ++i)
          diff[i] = fwd[i] - 2.0 * f[i] + bwd[i];
        sup[1] = std::max(sup[1], lp_norm_weighted(diff, p, w) / std::pow(habs, s));
      }
    }
  }
  for (int m = 0; m < orders; ++m) total += sup[m];
  return total;
}

namespace {

int refine_first_axis(const Shape& sh) { return sh.rank == 4 ? 2 : 0; }

int coarse_of_fine(int fine, int factor, int n_coarse) {
  // Centered cells, right edge included: fine sites at signed offsets
  // -(F/2 - 1)..F/2 around each coarse site land in its cell.
  return ((fine + factor / 2 - 1) / factor) % n_coarse;
}

void check_factor(int factor) {
  if (factor < 1 || !is_pow2(factor))
    throw std::invalid_argument("refinement factor must be a power of two");
}

}  // namespace

Field extend(const Field& f, int factor) {
  check_factor(factor);
  if (f.shape.rank != 2 && f.shape.rank != 4)
    throw std::invalid_argument("extension needs a rank-2 or rank-4 field");
  if (factor == 1) return f;
  const int first = refine_first_axis(f.shape);
  Shape fine = f.shape;
  for (int a = first; a < f.shape.rank; ++a) {
    fine.n[a] *= factor;
    fine.h[a] /= factor;
  }
  Field out(fine);
  for_each_site(fine, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    std::array<int, 4> src = idx;
    for (int a = first; a < f.shape.rank; ++a)
      src[a] = coarse_of_fine(idx[a], factor, f.shape.n[a]);
    out[flat] = f[flat_index(f.shape, src)];
  });
  return out;
}

Field discretize(const Field& f, int factor) {
  check_factor(factor);
  if (f.shape.rank != 2 && f.shape.rank != 4)
    throw std::invalid_argument("discretization needs a rank-2 or rank-4 field");
  if (factor == 1) return f;
  const int first = refine_first_axis(f.shape);
  Shape coarse = f.shape;
  for (int a = first; a < f.shape.rank; ++a) {
    if (coarse.n[a] % factor != 0)
      throw std::invalid_argument("site count not divisible by the factor");
    coarse.n[a] /= factor;
    coarse.h[a] *= factor;
  }
  Field out(coarse, 0.0);
  for_each_site(f.shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    std::array<int, 4> dst = idx;
    for (int a = first; a < f.shape.rank; ++a)
      dst[a] = coarse_of_fine(idx[a], factor, coarse.n[a]);
    out[flat_index(coarse, dst)] += f[flat];
  });
  const double scale = 1.0 / (double(factor) * factor);
  for (auto& v : out.v) v *= scale;
  return out;
}

CellMeasure CellMeasure::lebesgue(const Shape& s) {
  return CellMeasure(s, s.cell_vol());
}

CellMeasure CellMeasure::from_density(const Field& f) {
  CellMeasure eta(f.shape);
  const double cell = f.shape.cell_vol();
  for (std::int64_t i = 0; i < f.size(); ++i) eta.mass[i] = f[i] * cell;
  eta.validate();
  return eta;
}

Field CellMeasure::density() const {
  Field f(shape);
  const double inv = 1.0 / shape.cell_vol();
  for (std::size_t i = 0; i < mass.size(); ++i) f[std::int64_t(i)] = mass[i] * inv;
  return f;
}

double CellMeasure::total() const {
  double t = 0.0;
  for (double m : mass) t += m;
  return t;
}

void CellMeasure::validate() const {
  if (std::int64_t(mass.size()) != shape.sites())
    throw std::invalid_argument("mass array does not match the grid");
  for (double m : mass)
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("cell masses must be nonnegative and finite");
}

Field kernel_E(const Shape& shape, int i, int j, double a, double b_ker) {
  if (shape.rank != 4) throw std::invalid_argument("kernel E lives on rank-4 lattices");
  if (!(a > 0.0) || !(b_ker > 0.0 && b_ker < 1.0))
    throw std::invalid_argument("kernel parameters out of range");
  Field out(shape);
  const double ci = std::exp2(2.0 * i);
  const double cj = std::exp2(2.0 * j);
  for_each_site(shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    double x2, z2;
    plane_radii(shape, idx, x2, z2);
    out[flat] = ci * cj * std::exp(-a * std::pow(1.0 + ci * x2 + cj * z2, 0.5 * b_ker));
  });
  return out;
}

Field kernel_E_tilde(const Shape& shape, Plane plane, int i, double a, double b_ker) {
  if (shape.rank != 4) throw std::invalid_argument("kernel E~ lives on rank-4 lattices");
  if (!(a > 0.0) || !(b_ker > 0.0 && b_ker < 1.0))
    throw std::invalid_argument("kernel parameters out of range");
  Field out(shape, 0.0);
  const double ci = std::exp2(2.0 * i);
  for_each_site(shape, [&](std::int64_t flat, const std::array<int, 4>& idx) {
    const bool on_x = plane == Plane::x;
    if (on_x ? (idx[2] != 0 || idx[3] != 0) : (idx[0] != 0 || idx[1] != 0)) return;
    double x2, z2;
    plane_radii(shape, idx, x2, z2);
    const double r2 = on_x ? x2 : z2;
    out[flat] = ci * std::exp(-a * std::pow(1.0 + ci * r2, 0.5 * b_ker));
  });
  return out;
}

NormReport besov_norm_report(const CellMeasure& eta, const BesovParams& prm) {
  eta.validate();
  return besov_norm_report(eta.density(), prm);
}

double besov_norm(const CellMeasure& eta, const BesovParams& prm) {
  return besov_norm_report(eta, prm).value;
}

MeasureFunctionals measure_functionals(const CellMeasure& eta, const BesovParams& prm) {
  prm.validate();
  eta.validate();
  if (eta.shape.rank != 4)
    throw std::invalid_argument("measure functionals need a rank-4 lattice");
  const Shape& sh = eta.shape;
  const DyadicPartition part = build_partition(sh);
  const double cell = sh.cell_vol();
  const double p = prm.p;
  const bool sup = std::isinf(p);

  const Field wM = weight_field_split(sh, prm.ellx, prm.ellz);
  const Field w4 = weight_field(sh, prm.ell);
  Field etaM(sh), eta4(sh);
  for (std::int64_t i = 0; i < etaM.size(); ++i) {
    etaM[i] = eta.mass[i] * wM[i];
    eta4[i] = eta.mass[i] * w4[i];
  }

  MeasureFunctionals out;
  out.shell_cut_x = part.jx_max;
  out.shell_cut_z = part.jz_max;

  double macc = 0.0;
  for (int i = 0; i <= part.jx_max; ++i)
    for (int j = 0; j <= part.jz_max; ++j) {
      const double integ =
          lp_integral(convolve(etaM, kernel_E(sh, i, j, prm.a, prm.b_ker)), p, cell);
      if (sup) macc = std::max(macc, std::exp2(prm.sx * i + prm.sz * j) * integ);
      else macc += std::exp2((prm.sx * i + prm.sz * j) * p) * integ;
    }
  out.M = sup ? macc : std::pow(macc, 1.0 / p);

  double t1 = 0.0;
  for (int r = -1; r <= part.jz_max; ++r) {
    const double integ =
        lp_integral(convolve(eta4, kernel_E(sh, r, r, prm.a, prm.b_ker)), p, cell);
    if (sup) t1 = std::max(t1, std::exp2(prm.s * r) * integ);
    else t1 += std::exp2(prm.s * r * p) * integ;
  }

  // One-plane convolutions carry the other plane's cell area from the
  // measure pairing; dividing restores the slice density.
  const double xcell = sh.h[0] * sh.h[1];
  const double zcell = sh.h[2] * sh.h[3];
  double t2 = 0.0;
  for (int r = part.jz_max; r <= part.j_tilde_max(); ++r) {
    Field conv = convolve(eta4, kernel_E_tilde(sh, Plane::x, r, prm.a, prm.b_ker));
    for (auto& v : conv.v) v /= zcell;
    const double integ = lp_integral(conv, p, cell);
    if (sup) t2 = std::max(t2, std::exp2(prm.s * r) * integ);
    else t2 += std::exp2(prm.s * r * p) * integ;
  }

  Field conv3 = convolve(eta4, kernel_E_tilde(sh, Plane::z, part.jz_max, prm.a, prm.b_ker));
  for (auto& v : conv3.v) v /= xcell;
  const double t3 = lp_integral(conv3, p, cell);

  if (sup) out.N = t1 + t2 + t3;
  else out.N = std::pow(t1, 1.0 / p) + std::pow(t2, 1.0 / p) + std::pow(t3, 1.0 / p);
  return out;
}

}  // namespace sinhq
