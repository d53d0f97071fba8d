#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sinhq {

// Compensated accumulator; keeps long reductions accurate to O(eps) instead
// of O(N eps), which matters wherever tiny differences of large sums decide
// control flow (line searches, Metropolis tests).
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);  // unbiased, needs n >= 2

// Normalized autocorrelation rho_k for k = 0..max_lag (rho_0 = 1).
std::vector<double> autocorrelation(const std::vector<double>& v, int max_lag);

// Integrated autocorrelation time 1/2 + sum rho_k with self-consistent
// window (smallest W >= 6 tau(W)), capped at n/4; at least 1/2.
double tau_int(const std::vector<double>& v);

// Effective sample size n / (2 tau), clamped to [1, n].
double ess_from_tau(std::int64_t n, double tau);

// Means of consecutive blocks of length b (the tail shorter than b is
// dropped); needs at least two full blocks.
std::vector<double> block_means(const std::vector<double>& v, std::int64_t b);

// Delete-one jackknife standard error of the mean over the given block means.
double jackknife_stderr(const std::vector<double>& blocks);

}  // namespace sinhq
