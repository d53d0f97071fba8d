#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sinhq/gibbs2d.hpp"
#include "sinhq/solver.hpp"

namespace sinhq {

// One measured quantity; stderr_ = 0 marks a deterministic value.
struct Metric {
  std::string name;
  double value = 0.0;
  double stderr_ = 0.0;
};

// Outcome of one check suite.  Everything entering the digest is
// reproducible bit for bit from (config, seed); runtime_s is excluded.
struct CheckReport {
  std::string check;
  std::map<std::string, double> params;
  std::vector<std::string> ladder;
  std::vector<Metric> metrics;
  std::map<std::string, double> thresholds;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string git_describe;
  double runtime_s = 0.0;

  void add(const std::string& name, double value, double se = 0.0);
  double metric(const std::string& name) const;  // throws if absent

  std::string to_json(bool with_runtime = true) const;
  std::string digest() const;  // FNV-1a of to_json(false), 16 hex digits
};

// Configs default to the desk scale the acceptance gate runs at; tests may
// shrink the ensembles, which widens the self-normalizing error bands.

struct GreenCheckConfig {
  double m = 1.0;
  int rungs = 3;        // eps = 2^{-3}, 2^{-4}, ... on a fixed torus
  double torus = 2.0;
  double slack = 0.005;  // additive slack on the log coefficient in the bound
};

struct GmcCheckConfig {
  double m = 1.0;
  std::vector<double> ratios = {0.25, 0.5};  // alpha^2 / (4 pi)^2
  int n_identity = 10000;
  int n_slope = 200;
  int n_drift = 24;
};

struct BesovCheckConfig {
  int rungs = 3;
  int n_family = 4;    // fields per family per rung
  int n_measure = 100;  // GMC samples for the positive-measure bound
};

struct DimredCheckConfig {
  double m = 1.0;
  double ratio = 0.25;
  double lambda = 1.0;
  int n_solves = 200;  // at least 100
  int n_chain = 5000;
  int mx = 8;          // ensemble grid; the free trend runs its own ladder
  double hx = 0.25;
  int nz = 16;
  double eps = 0.125;
};

struct OsCheckConfig {
  double m = 1.0;
  double ratio = 0.25;  // sets beta = sqrt(4 pi * ratio)
  double lambda = 1.0;
  int n_chain = 8000;
  int n_boot = 200;
  int n_expmoment = 2000;
};

struct TiltCheckConfig {
  double m = 1.0;
  double ratio = 0.25;
  double lambda = 1.0;
  int n_solves = 24;
  double gamma = 0.05;
};

CheckReport check_green_bounds(const GreenCheckConfig& cfg, std::uint64_t seed);
CheckReport check_gmc(const GmcCheckConfig& cfg, std::uint64_t seed);
CheckReport check_besov_suite(const BesovCheckConfig& cfg, std::uint64_t seed);
CheckReport check_dimensional_reduction(const DimredCheckConfig& cfg,
                                        std::uint64_t seed);
CheckReport check_os_axioms(const OsCheckConfig& cfg, std::uint64_t seed);
CheckReport check_clustering_tilted(const TiltCheckConfig& cfg,
                                    std::uint64_t seed);

// Registry: stable ids plus a dispatcher running a check at its defaults.
std::vector<std::string> check_ids();
CheckReport run_check(const std::string& id, std::uint64_t seed);

}  // namespace sinhq
