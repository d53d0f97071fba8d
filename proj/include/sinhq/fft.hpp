#pragma once

#include <functional>

#include "sinhq/field.hpp"

namespace sinhq {

// Forward transform F(k) = cell_vol * sum_y f(y) e^{+i k.y}; the inverse
// divides by the torus volume, so inverse(forward(f)) = f exactly up to
// rounding.  Parseval: sum |f|^2 cell_vol = (1/torus_vol) sum |F|^2.
SpectralField fft_forward(const Field& f);
Field fft_inverse(const SpectralField& F);  // real part of the inverse transform

using Symbol = std::function<double(const ModeData&)>;

// Evaluate a symbol on every dual mode.
SpectralField make_spectrum(const Shape& shape, const Symbol& g);

// f <- inverse(g .* forward(f)).  Exact for real symbols even under k -> -k;
// all symbols used here are functions of sigma and |k|^2 per plane, which are
// even.  Uses the r2c/c2r fast path.
Field apply_multiplier(const Field& f, const Symbol& g);

// Same but the multiplier is a precomputed real table on the half spectrum
// (layout: full range on all axes except the last, which runs 0..n/2).
Field apply_multiplier_table(const Field& f, const std::vector<double>& table);
std::vector<double> make_half_spectrum_table(const Shape& shape, const Symbol& g);
std::int64_t half_spectrum_size(const Shape& shape);

// Real spectrum (e^{-} sign DFT, plain lattice sums, no volume factors) of a
// real field, tabulated on the half spectrum.  For even fields this is the
// full story; for general fields it is the real part.
std::vector<double> real_half_spectrum(const Field& f);

// Plain circular convolution c(n) = sum_m a(m) b(n-m) and correlation
// c(d) = sum_m a(m) b(m+d); no cell volume factors.
Field convolve(const Field& a, const Field& b);
Field correlate(const Field& a, const Field& b);

// Fill ModeData for mode index (i0..i3 flattened row major over shape).
ModeData mode_data(const Shape& shape, const std::array<int, 4>& idx);

// Iterate all modes of the full spectrum in row-major order.
void for_each_mode(const Shape& shape,
                   const std::function<void(std::int64_t flat, const ModeData&)>& fn);

}  // namespace sinhq
