#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sinhq/fields.hpp"

namespace sinhq {

// Covariance of one z-plane slice of the free field on a full lattice, as a
// symbol on the rank-2 dual lattice: Chat(q) = (1/Lx^2) sum_k
// (m^2 + sigma_x(k) + sigma_z(q))^{-2}.  values is the full spectrum in
// row-major mode order (matching for_each_mode on grid.shape()).
struct SliceCovariance {
  Grid2 grid;
  double m = 0.0;
  std::vector<double> values;

  double site_variance() const;              // (1/Lz^2) sum of values
  std::vector<double> half_table() const;    // r2c layout for multipliers
  Field real_space() const;                  // covariance table C(dz)
};

SliceCovariance exact_slice_covariance(const Grid4& grid4, double m);

// 2D cosh model: Gaussian base with spectral covariance Chat plus the
// interaction lambda cell sum_z e^{-charge^2 wick2} cosh(charge phi).
// Two bases: the standard lattice free field (charge beta), or the exact
// slice covariance of a full lattice (charge alpha).
struct CoshModel2D {
  Grid2 grid;
  double m = 0.0;
  double charge = 0.0;
  double lambda = 0.0;
  double wick2 = 0.0;                 // half the base-field site variance
  std::vector<double> prec_half;      // 1/Chat, r2c layout
  std::vector<double> cov_half;       // Chat, r2c layout

  void validate() const;  // positive covariance, wick2 > 0
};

CoshModel2D cosh_model_gff(const Grid2& grid, double m, double beta,
                           double lambda);
CoshModel2D cosh_model_slice(const Grid4& grid4, double m, double alpha,
                             double lambda);

// Real-space covariance table of the model's Gaussian base.
Field base_covariance_table(const CoshModel2D& model);

// action = (1/2) <phi, C^{-1} phi>_cell + lambda cell sum_z :cosh(charge phi):
// with :cosh: = e^{-charge^2 wick2} cosh.  Returns +infinity past the
// exponential guard instead of overflowing.
double action(const Field& phi, const CoshModel2D& model, double exp_cap = 700.0);

struct ChainConfig {
  double step_size = 0.15;  // leapfrog step
  int n_steps = 10;         // leapfrog steps per trajectory
  int burn_in = 500;        // discarded trajectories; step size adapts here
  int thin = 2;             // keep every thin-th trajectory
  bool autotune = true;
  double exp_cap = 700.0;
};

struct ObservableStat {
  std::string name;
  double tau_int = 0.0;
  double ess = 0.0;
};

struct ChainStats {
  int samples = 0;
  double acceptance = 0.0;
  double step_size_final = 0.0;
  bool mistuned = false;  // acceptance below 0.2
  std::vector<ObservableStat> observables;
};

struct ChainResult {
  std::vector<Field> samples;
  ChainStats stats;
};

// Hamiltonian Monte Carlo targeting e^{-action} with the spectral mass
// matrix M = cell C^{-1}: at lambda = 0 every mode oscillates at unit
// frequency, so one step size serves the whole spectrum.  Momentum draws and
// the accept test are counter-based in (seed, trajectory), so a chain is
// reproducible and extendable.
ChainResult sample_chain(const CoshModel2D& model, int n_samples,
                         std::uint64_t seed, const ChainConfig& cfg = {});

// Monte Carlo Schwinger function: the sample mean of prod_j <phi, f_j>_cell
// with a jackknife standard error over autocorrelation-decorrelated blocks.
// Up to four test functions; none gives S_0 = 1 exactly.
struct SchwingerEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double tau = 0.0;
  int blocks = 0;
};

SchwingerEstimate schwinger(const std::vector<Field>& samples,
                            const std::vector<Field>& fs);

// Estimator table serialization: header plus one CSV line per row.
struct EstimatorRow {
  std::string observable;
  double value = 0.0;
  double stderr_ = 0.0;
  double tau_int = 0.0;
  double ess = 0.0;
};

std::string estimator_csv(const std::vector<EstimatorRow>& rows);

}  // namespace sinhq
