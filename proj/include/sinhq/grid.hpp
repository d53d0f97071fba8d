#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <numbers>

namespace sinhq {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

bool is_pow2(int v);

// Lattice geometry: rank axes, each with site count n[a] and spacing h[a].
// Rank 4 axis order is x0, x1, z0, z1 with x outermost in memory (row major).
// Site coordinates live on the fundamental domain centered at 0: index i maps
// to h*i for i < n/2 and h*(i-n) otherwise.
struct Shape {
  int rank = 0;
  std::array<int, 4> n{1, 1, 1, 1};
  std::array<double, 4> h{1.0, 1.0, 1.0, 1.0};

  std::int64_t sites() const {
    std::int64_t s = 1;
    for (int a = 0; a < rank; ++a) s *= n[a];
    return s;
  }
  double cell_vol() const {
    double v = 1.0;
    for (int a = 0; a < rank; ++a) v *= h[a];
    return v;
  }
  double torus_vol() const {
    double v = 1.0;
    for (int a = 0; a < rank; ++a) v *= n[a] * h[a];
    return v;
  }
  double length(int a) const { return n[a] * h[a]; }

  int signed_index(int a, int i) const { return i < n[a] - n[a] / 2 ? i : i - n[a]; }
  // Position along axis a of site index i, centered fundamental domain.
  double coord(int a, int i) const { return h[a] * signed_index(a, i); }
  // Dual-lattice frequency of mode index j along axis a, in [-pi/h, pi/h).
  double freq(int a, int j) const { return two_pi * signed_index(a, j) / (n[a] * h[a]); }

  bool operator==(const Shape&) const = default;
};

// z-plane lattice (eps Z / Nz eps Z)^2.
struct Grid2 {
  int Nz = 0;
  double eps = 0.0;

  Grid2() = default;
  Grid2(int Nz_, double eps_);

  Shape shape() const {
    Shape s;
    s.rank = 2;
    s.n = {Nz, Nz, 1, 1};
    s.h = {eps, eps, 1.0, 1.0};
    return s;
  }
  double cell_area() const { return eps * eps; }
  double Lz() const { return Nz * eps; }
  std::int64_t sites() const { return std::int64_t(Nz) * Nz; }
};

// Full lattice: x-plane Mx^2 sites with spacing hx, z-plane Nz^2 sites with
// spacing eps.
struct Grid4 {
  int Mx = 0;
  double hx = 0.0;
  int Nz = 0;
  double eps = 0.0;

  Grid4() = default;
  Grid4(int Mx_, double hx_, int Nz_, double eps_);

  Shape shape() const {
    Shape s;
    s.rank = 4;
    s.n = {Mx, Mx, Nz, Nz};
    s.h = {hx, hx, eps, eps};
    return s;
  }
  Grid2 zgrid() const { return Grid2(Nz, eps); }
  double cell_vol() const { return hx * hx * eps * eps; }
  double Lx() const { return Mx * hx; }
  double Lz() const { return Nz * eps; }
  std::int64_t sites() const { return std::int64_t(Mx) * Mx * Nz * Nz; }
};

// Model parameters.  The charge is kept subcritical, alpha^2 < (4 pi)^2,
// unless allow_supercritical is set.  beta = alpha / sqrt(4 pi) always.
struct PhysicsParams {
  double m = 1.0;
  double alpha = 0.0;
  double lambda = 1.0;
  double beta = 0.0;

  PhysicsParams() = default;
  PhysicsParams(double m_, double alpha_, double lambda_ = 1.0,
                bool allow_supercritical = false);
};

}  // namespace sinhq
