#pragma once

#include "sinhq/partition.hpp"

namespace sinhq {

// Norm parameters.  p and q may be infinity (sup norms).  The scalar s drives
// the single-exponent norms; sx and sz weight the x- and z-plane shells of
// the mixed norm and of the kernel functional M.  ell weights the full
// coordinate, ellx/ellz the planes separately.  a and b_ker parametrize the
// comparison kernels E; b_ker = 1/2 matches the spatial decay of kernels
// built from exp(-1/t) bumps.
struct BesovParams {
  double s = 0.0;
  double sx = 0.0, sz = 0.0;
  double p = 2.0, q = 2.0;
  double ell = 0.0;
  double ellx = 0.0, ellz = 0.0;
  double a = 1.0;
  double b_ker = 0.5;

  void validate() const;  // p, q >= 1; a > 0; 0 < b_ker < 1
};

// Polynomial weight rho_ell(y) = (1 + |y|^2)^{-ell/2} over the full
// coordinate, on the centered fundamental domain.
Field weight_field(const Shape& shape, double ell);
// rho_ellx(x) rho_ellz(z) with the plane split of the shape (rank 2: the x
// factor is 1).
Field weight_field_split(const Shape& shape, double ell_x, double ell_z);
// (1 + kappa (1 + |x|^2)^{1/2})^{-npow} exp(kappa (1 + |z|^2)^{1/2}).
Field clustering_weight_field(const Shape& shape, double kappa, double npow);

// Weighted L^p norm with cell measure, (sum rho^p |f|^p cell)^{1/p}; p = inf
// gives sup rho |f|.
double lp_norm(const Field& f, double p, double ell);
double lp_norm_weighted(const Field& f, double p, const Field& weight);

// Every shell sum truncates at the finest shell the grid resolves; reports
// carry the cut alongside the value.
struct NormReport {
  double value = 0.0;
  int shell_cut_x = -1;
  int shell_cut_z = -1;
};

// Besov norm.  Rank 2: l^q over z shells j of 2^{js} ||Delta_j f||_{L^p_ell}.
// Rank 4: the same with the product-plane tilde shells and the
// full-coordinate weight.
NormReport besov_norm_report(const Field& f, const BesovParams& prm);
double besov_norm(const Field& f, const BesovParams& prm);

// Mixed norm on rank 4 (q = p):
// (sum_{i,j} 2^{(sx i + sz j) p} ||Delta^x_i Delta^z_j f||^p with the weight
// rho_ellx(x) rho_ellz(z))^{1/p}.
NormReport besov_norm_mixed_report(const Field& f, const BesovParams& prm);
double besov_norm_mixed(const Field& f, const BesovParams& prm);

// Difference-quotient Sobolev norm on rank-2 fields, 0 < s <= 2:
// ||f||_{L^p_ell} + sum over difference orders m of
// sup_h ||D^m_h f||_{L^p_ell} / |h|^{min(m,s)}, with first differences only
// for s <= 1 and first plus centered second differences for s > 1.  The sup
// enumerates axis and diagonal lattice shifts up to shift_cap steps, capped
// at |h| <= 1 but always keeping the single-step shifts.
double difference_norm(const Field& f, double s, double p, double ell, int shift_cap = 8);

// Piecewise-constant extension to a dyadically refined lattice and the
// adjoint cell-average discretization.  Rank 2 refines both axes, rank 4 the
// z plane only.  discretize(extend(f), factor) = f exactly, and
// sum f . extend(g) . fine cell = sum discretize(f) . g . coarse cell.
Field extend(const Field& f, int factor);
Field discretize(const Field& f, int factor);

// Nonnegative measure with one mass per lattice cell.
struct CellMeasure {
  Shape shape;
  std::vector<double> mass;

  CellMeasure() = default;
  explicit CellMeasure(const Shape& s, double fill = 0.0)
      : shape(s), mass(s.sites(), fill) {}

  static CellMeasure lebesgue(const Shape& s);
  static CellMeasure from_density(const Field& f);  // mass = f * cell, needs f >= 0

  Field density() const;  // mass / cell
  double total() const;
  void validate() const;  // throws on negative or non-finite mass
};

// Comparison kernels on the centered fundamental domain (rank 4):
// E_{i,j}(x,z) = 2^{2i+2j} exp(-a (1 + 2^{2i}|x|^2 + 2^{2j}|z|^2)^{b/2}).
Field kernel_E(const Shape& shape, int i, int j, double a, double b_ker);
// One-plane variant 2^{2i} exp(-a (1 + 2^{2i}|y|^2)^{b/2}) placed on the
// named plane with a Kronecker delta on the other, so that circular
// convolution acts in that plane alone.
enum class Plane { x, z };
Field kernel_E_tilde(const Shape& shape, Plane plane, int i, double a, double b_ker);

// Besov norm of a measure: the blocks act on its density.
NormReport besov_norm_report(const CellMeasure& eta, const BesovParams& prm);
double besov_norm(const CellMeasure& eta, const BesovParams& prm);

// Shell-kernel functionals of a positive measure eta on a rank-4 lattice.
//   M = (sum_{i >= 0, 0 <= j <= cut_z} 2^{(sx i + sz j) p}
//        integral (E_{i,j} * (rho_ellx rho_ellz eta))^p)^{1/p},
// with the x-shell sum truncated at cut_x, and N the three-term functional
// with full-coordinate weight rho_ell: shells E_{r,r} for r = -1..cut_z, the
// x-plane tail E~_r *_x for r = cut_z..max(cut_x, cut_z), and the z-plane
// term E~_{cut_z} *_z.  Convolutions run over cells by FFT.
struct MeasureFunctionals {
  double M = 0.0;
  double N = 0.0;
  int shell_cut_x = -1;
  int shell_cut_z = -1;
};
MeasureFunctionals measure_functionals(const CellMeasure& eta, const BesovParams& prm);

}  // namespace sinhq
