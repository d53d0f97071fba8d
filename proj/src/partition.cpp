#include "sinhq/partition.hpp"

#include <cmath>
#include <stdexcept>

namespace sinhq {

namespace {

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

int plane_cap(double h) {
  const double nyquist = std::numbers::pi / h;
  // The mode at the axis Nyquist keeps the final shell nonempty because
  // 2^{cap-2} < nyquist / 2.
  return std::max(int(std::ceil(std::log2(nyquist))), 1);
}

}  // namespace

double smooth_step(double t) {
  const double up = bump(4.0 * (0.5 - t));
  if (up == 0.0) return 0.0;
  const double down = bump(4.0 * (t - 0.25));
  if (down == 0.0) return 1.0;
  return up / (up + down);
}

double shell_cumulative(int r, int j_cap, double kabs) {
  if (r < -1) return 0.0;
  if (r >= j_cap) return 1.0;
  return smooth_step(std::ldexp(kabs, -(r + 1)));
}

double shell_value(int j, int j_cap, double kabs) {
  return shell_cumulative(j, j_cap, kabs) - shell_cumulative(j - 1, j_cap, kabs);
}

double DyadicPartition::phi_x(int i, const ModeData& md) const {
  return shell_value(i, jx_max, std::sqrt(md.k2x));
}

double DyadicPartition::phi_z(int j, const ModeData& md) const {
  return shell_value(j, jz_max, std::sqrt(md.k2z));
}

double DyadicPartition::phi_tilde(int r, const ModeData& md) const {
  const double kx = std::sqrt(md.k2x);
  const double kz = std::sqrt(md.k2z);
  return shell_cumulative(r, jx_max, kx) * shell_cumulative(r, jz_max, kz) -
         shell_cumulative(r - 1, jx_max, kx) * shell_cumulative(r - 1, jz_max, kz);
}

DyadicPartition build_partition(const Shape& shape) {
  if (shape.rank != 2 && shape.rank != 4)
    throw std::invalid_argument("partition needs a rank-2 or rank-4 lattice");
  for (int a = 0; a < shape.rank; ++a)
    if (shape.n[a] < 4) throw std::invalid_argument("grid too small for two shells");
  DyadicPartition part;
  part.shape = shape;
  if (shape.rank == 2) {
    part.jz_max = plane_cap(shape.h[0]);
  } else {
    part.jx_max = plane_cap(shape.h[0]);
    part.jz_max = plane_cap(shape.h[2]);
  }
  return part;
}

Field lp_block(const Field& f, const DyadicPartition& part, int j) {
  if (f.shape.rank != 2) throw std::invalid_argument("lp_block acts on rank-2 fields");
  if (f.shape != part.shape) throw std::invalid_argument("partition built for another grid");
  if (j < -1 || j > part.jz_max) throw std::out_of_range("shell index out of range");
  return apply_multiplier(f, [&part, j](const ModeData& md) { return part.phi_z(j, md); });
}

Field lp_block_mixed(const Field& f, const DyadicPartition& part, int i, int j) {
  if (f.shape.rank != 4) throw std::invalid_argument("mixed blocks act on rank-4 fields");
  if (f.shape != part.shape) throw std::invalid_argument("partition built for another grid");
  if (i < -1 || i > part.jx_max || j < -1 || j > part.jz_max)
    throw std::out_of_range("shell index out of range");
  return apply_multiplier(
      f, [&part, i, j](const ModeData& md) { return part.phi_x(i, md) * part.phi_z(j, md); });
}

Field lp_block_tilde(const Field& f, const DyadicPartition& part, int r) {
  if (f.shape.rank != 4) throw std::invalid_argument("tilde blocks act on rank-4 fields");
  if (f.shape != part.shape) throw std::invalid_argument("partition built for another grid");
  if (r < -1 || r > part.j_tilde_max()) throw std::out_of_range("shell index out of range");
  return apply_multiplier(f, [&part, r](const ModeData& md) { return part.phi_tilde(r, md); });
}

}  // namespace sinhq
