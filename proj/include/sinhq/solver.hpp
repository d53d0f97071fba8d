#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sinhq/fields.hpp"
#include "sinhq/ops.hpp"

namespace sinhq {

// Optional perturbations of the base equation.  A nonempty zeta adds the
// source gamma * Dbar(zeta), where zeta lives on the z plane (either on the
// problem's own z lattice or on a dyadic refinement of it, in which case it
// is cell-averaged down) and Dbar extends constantly in x.  zeta must vanish
// outside the unit ball of the centered z plane.  norm_tilt instead couples
// the solution to itself through the smoothing quadratic form Q below, with
// the refinement factor standing in for the continuum z plane.
struct TiltData {
  double gamma = 0.0;
  Field zeta;
  bool norm_tilt = false;
  double ell = 2.0;
  int factor = 2;
};

// Convex elliptic problem on a rank-4 lattice:
//   (m^2 - Lap) psi + lambda alpha (e^{alpha psi} mu+ - e^{-alpha psi} mu-)
//     / cell = source + tilt terms.
struct EllipticProblem {
  Grid4 grid;
  PhysicsParams physics;
  CellMeasure mu_plus, mu_minus;
  Field source;  // empty means zero
  TiltData tilt;

  void validate() const;  // shapes consistent, measures nonnegative, m > 0
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 60;
  int restarts = 3;
  std::uint64_t seed = 0;
  double ell = 2.0;    // weight exponent of the diagnostic functionals
  double kappa = 0.3;  // clustering weight of the tilted distance
  double npow = 2.0;
  double exp_cap = 700.0;  // |alpha psi| beyond this fails the solve
};

// Diagnostic functionals of a solution psi.  The first group tests
//   |rho grad psi|^2 + |rho psi|^2 + int rho |psi| e^{+-alpha psi} d eta+-
//     <= C (rho d eta+)(all) + C (rho d eta-)(all)
// with eta+- = lambda alpha mu+- and rho = (1+|y|^2)^{-ell/2}.  The second
// group records, for beta in {1/2, 3/4} and both signs, the quantities
//   |grad e^{beta alpha psi}|^2_{ell/2} + | sqrt|psi| e^{beta alpha psi}
//   |^2_{ell/2} + int rho e^{(1+2 beta) alpha psi} d eta,
// together with the eta masses and their B^{-1/2}_{2,2,ell/2} norms; the
// bounding polynomial is left implicit upstream, so ratio2 divides by the
// default (1 + masses + norms)^2 and is only meant to be compared across
// refinements.  improved_norm is the mixed-regularity norm of psi with
// x-plane exponent 3/2 and z-plane exponent -1/2.
struct AprioriReport {
  double lhs1 = 0.0, rhs1 = 0.0, ratio1 = 0.0;
  bool ratio1_applicable = false;
  static constexpr std::array<double, 2> betas{0.5, 0.75};
  std::array<double, 2> lhs2_plus{}, lhs2_minus{};
  double eta_mass_plus = 0.0, eta_mass_minus = 0.0;
  double eta_besov_plus = 0.0, eta_besov_minus = 0.0;
  double rhs2 = 0.0, ratio2 = 0.0;
  double improved_norm = 0.0, improved_ratio = 0.0;
};

struct SolveReport {
  Field solution;
  double residual_sup = 0.0, residual_l2 = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  double restarts_agreement = 0.0;
  double weighted_distance = 0.0;  // tilted solves only
  std::vector<double> energy_trace;
  AprioriReport apriori;
};

// J(psi) = 1/2 sum (|grad psi|^2 + m^2 psi^2) cell
//          + lambda sum e^{alpha psi} mu+ + lambda sum e^{-alpha psi} mu-
//          - sum source psi cell - gamma sum Dbar(zeta) psi cell
//          - gamma/2 Q(psi).
// Strictly convex in psi; returns +inf when the exponential guard trips
// against a cell carrying mass, so line searches reject such steps.
double energy(const Field& psi, const EllipticProblem& prob,
              const SolverOptions& opt = {});

// Gradient of the energy divided by cell volume; zero at the minimizer.
Field residual(const Field& psi, const EllipticProblem& prob,
               const SolverOptions& opt = {});

// Newton iteration with (m^2 + sigma)^{-1}-preconditioned conjugate-gradient
// inner solves and a backtracking line search; deterministic given inputs.
// Restarts from scaled random free-field samples feed restarts_agreement.
// Returns converged = false with the best iterate when the budget runs out.
SolveReport solve(const EllipticProblem& prob, const SolverOptions& opt = {});

// As solve, for a problem carrying (gamma, zeta); also solves the untilted
// problem and reports the clustering-weighted distance between the two.
SolveReport solve_tilted(const EllipticProblem& prob, const SolverOptions& opt = {});

// As solve, for a problem carrying the norm tilt.  Estimates the smallest
// Hessian eigenvalue at the worst case first and throws when gamma has
// destroyed convexity.
SolveReport solve_norm_tilted(const EllipticProblem& prob,
                              const SolverOptions& opt = {});

// Diagnostics of a given field against the problem's data.
AprioriReport apriori_report(const Field& psi, const EllipticProblem& prob,
                             const SolverOptions& opt = {});

// The smoothing operator of the norm tilt and its quadratic form:
//   T f = Dbar (1 - Lap_z)^{-1/2} rho_ell(z)^2 (1 - Lap_z)^{-1/2} Ebar f,
//   Q(f) = | rho_ell(z) (1 - Lap_z)^{-1/2} Ebar f |^2 (fine cell measure),
// so that T is the gradient of Q/2 under the coarse cell pairing.
Field dimred_tilt_apply(const Field& f, double ell, int factor);
double dimred_tilt_quadratic(const Field& f, double ell, int factor);

// gamma * Dbar(zeta) as a rank-4 field; validates the support condition.
Field tilt_source(const Shape& shape, const TiltData& tilt);

}  // namespace sinhq
