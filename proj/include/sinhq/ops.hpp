#pragma once

#include "sinhq/fft.hpp"

namespace sinhq {

// Discrete Laplacian symbol sigma(k) = sum_a (4/h_a^2) sin^2(h_a k_a / 2),
// split into x and z planes inside ModeData.
double laplacian_symbol(const ModeData& md);

// Nearest-neighbor Laplacian, (f(y+h e_a) + f(y-h e_a) - 2 f(y)) / h_a^2
// summed over axes, periodic.
Field apply_laplacian(const Field& f);

// Forward difference along axis a with a step of `steps` sites:
// (f(y + steps*h e_a) - f(y)) / (steps*h), periodic.  steps may be negative.
Field finite_difference(const Field& f, int axis, int steps = 1);

// All forward single-step differences, one per axis.
std::vector<Field> gradient(const Field& f);

// sum_sites |grad f|^2 with unit steps, cell measure included.
double dirichlet_energy(const Field& f);

// Periodic shift by whole sites: out(y) = f(y + steps.h).
Field shift(const Field& f, const std::array<int, 4>& steps);

// (c + sigma)^s as a spectral multiplier.
Field apply_fractional(const Field& f, double c, double s);

// Solve (c + sigma) u = rhs spectrally (exact on the torus).
Field poisson_solve(const Field& rhs, double c);

}  // namespace sinhq
