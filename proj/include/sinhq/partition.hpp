#pragma once

#include <algorithm>

#include "sinhq/fft.hpp"

namespace sinhq {

// Smooth step built from the exp(-1/t) mollifier: exactly 1 for t <= 1/4 and
// exactly 0 for t >= 1/2, in floating point too, so partition sums telescope
// to 1 without residue.
double smooth_step(double t);

// Cumulative shell sum S_r(|k|) = sum_{-1 <= j <= r} phi_j(|k|) for a plane
// whose shells are capped at j_cap: 0 for r < -1, 1 for r >= j_cap, otherwise
// smooth_step(2^{-(r+1)} |k|).
double shell_cumulative(int r, int j_cap, double kabs);

// Single shell phi_j = S_j - S_{j-1}.  Interior shells live on the annulus
// 2^{j-2} <= |k| <= 2^j and vanish at both boundary radii; the last shell
// j = j_cap absorbs the Nyquist tail.
double shell_value(int j, int j_cap, double kabs);

// Dyadic Littlewood-Paley partition of the dual lattice, radial in each
// plane separately.  Rank-2 grids carry a single plane (the z plane); rank-4
// grids get one cap per plane.
struct DyadicPartition {
  Shape shape;
  int jx_max = -1;
  int jz_max = -1;

  // Cutoff for the product-plane shells grouped by max(i, j).
  int j_tilde_max() const { return std::max(jx_max, jz_max); }

  double phi_x(int i, const ModeData& md) const;
  double phi_z(int j, const ModeData& md) const;
  // sum_{max(i,j) = r} phi_i(k) phi_j(q), evaluated via the telescoping form
  // S_r(k) S_r(q) - S_{r-1}(k) S_{r-1}(q).
  double phi_tilde(int r, const ModeData& md) const;
};

// Each cap is the smallest shell index whose standard support reaches the
// plane's axis Nyquist frequency pi/h, which keeps the final shell nonempty.
// Requires at least 4 sites per axis.
DyadicPartition build_partition(const Shape& shape);

// Littlewood-Paley blocks as spectral multipliers.
Field lp_block(const Field& f, const DyadicPartition& part, int j);  // rank 2
Field lp_block_mixed(const Field& f, const DyadicPartition& part, int i, int j);  // rank 4
Field lp_block_tilde(const Field& f, const DyadicPartition& part, int r);  // rank 4

}  // namespace sinhq
