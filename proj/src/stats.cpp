#include "sinhq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sinhq {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("stats: empty series");
  KahanSum acc;
  for (double x : v) acc.add(x);
  return acc.s / double(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("stats: need two samples");
  const double mu = mean(v);
  KahanSum acc;
  for (double x : v) acc.add((x - mu) * (x - mu));
  return acc.s / double(v.size() - 1);
}

std::vector<double> autocorrelation(const std::vector<double>& v, int max_lag) {
  const std::int64_t n = std::int64_t(v.size());
  if (n < 2) throw std::invalid_argument("stats: need two samples");
  max_lag = int(std::min<std::int64_t>(max_lag, n - 1));
  const double mu = mean(v);
  KahanSum c0;
  for (double x : v) c0.add((x - mu) * (x - mu));
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  if (c0.s == 0.0) return rho;  // constant series
  for (int k = 1; k <= max_lag; ++k) {
    KahanSum ck;
    for (std::int64_t t = 0; t + k < n; ++t)
      ck.add((v[t] - mu) * (v[t + k] - mu));
    rho[k] = ck.s / c0.s;
  }
  return rho;
}

double tau_int(const std::vector<double>& v) {
  const std::int64_t n = std::int64_t(v.size());
  if (n < 8) return 0.5;
  const int cap = int(n / 4);
  std::vector<double> rho = autocorrelation(v, cap);
  double tau = 0.5;
  for (int k = 1; k <= cap; ++k) {
    tau += rho[k];
    if (k >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

double ess_from_tau(std::int64_t n, double tau) {
  const double ess = double(n) / (2.0 * std::max(tau, 0.5));
  return std::clamp(ess, 1.0, double(n));
}

std::vector<double> block_means(const std::vector<double>& v, std::int64_t b) {
  if (b < 1) throw std::invalid_argument("stats: block length must be positive");
  const std::int64_t nb = std::int64_t(v.size()) / b;
  if (nb < 2) throw std::invalid_argument("stats: need two full blocks");
  std::vector<double> out(nb);
  for (std::int64_t i = 0; i < nb; ++i) {
    KahanSum acc;
    for (std::int64_t t = i * b; t < (i + 1) * b; ++t) acc.add(v[t]);
    out[i] = acc.s / double(b);
  }
  return out;
}

double jackknife_stderr(const std::vector<double>& blocks) {
  const std::int64_t nb = std::int64_t(blocks.size());
  if (nb < 2) throw std::invalid_argument("stats: need two blocks");
  KahanSum tot;
  for (double x : blocks) tot.add(x);
  KahanSum dev2;
  for (double x : blocks) {
    const double loo = (tot.s - x) / double(nb - 1);
    const double d = loo - tot.s / double(nb);
    dev2.add(d * d);
  }
  return std::sqrt(dev2.s * double(nb - 1) / double(nb));
}

}  // namespace sinhq
