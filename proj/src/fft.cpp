#include "sinhq/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace sinhq {

double Field::sum() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double Field::sup_norm() const {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double Field::l2_norm(double weight_measure) const {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s * weight_measure);
}

namespace {

struct PlanKey {
  int kind;  // 0 c2c fwd (e^-), 1 c2c bwd (e^+), 2 r2c, 3 c2r
  int rank;
  std::array<int, 4> n;
  auto operator<=>(const PlanKey&) const = default;
};

class Engine {
 public:
  static Engine& get() {
    static Engine e;
    return e;
  }

  fftw_plan plan_c2c(const Shape& s, int sign) {
    PlanKey key{sign == FFTW_FORWARD ? 0 : 1, s.rank, s.n};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::int64_t ns = s.sites();
    fftw_complex* a = fftw_alloc_complex(ns);
    fftw_complex* b = fftw_alloc_complex(ns);
    fftw_plan p = fftw_plan_dft(s.rank, s.n.data(), a, b, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fftw c2c planning failed");
    plans_[key] = p;
    return p;
  }

  fftw_plan plan_r2c(const Shape& s) {
    PlanKey key{2, s.rank, s.n};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    double* a = fftw_alloc_real(s.sites());
    fftw_complex* b = fftw_alloc_complex(half_size(s));
    fftw_plan p =
        fftw_plan_dft_r2c(s.rank, s.n.data(), a, b, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fftw r2c planning failed");
    plans_[key] = p;
    return p;
  }

  fftw_plan plan_c2r(const Shape& s) {
    PlanKey key{3, s.rank, s.n};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(half_size(s));
    double* b = fftw_alloc_real(s.sites());
    fftw_plan p =
        fftw_plan_dft_c2r(s.rank, s.n.data(), a, b, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fftw c2r planning failed");
    plans_[key] = p;
    return p;
  }

  static std::int64_t half_size(const Shape& s) {
    std::int64_t hs = 1;
    for (int a = 0; a < s.rank - 1; ++a) hs *= s.n[a];
    return hs * (s.n[s.rank - 1] / 2 + 1);
  }

 private:
  Engine() = default;
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

// Per-axis mode tables: discrete symbol term and k^2 term, with plane id.
struct AxisModes {
  std::vector<double> sig;
  std::vector<double> k2;
  bool x_plane;
};

std::vector<AxisModes> axis_modes(const Shape& s, bool half_last) {
  std::vector<AxisModes> out(s.rank);
  for (int a = 0; a < s.rank; ++a) {
    int count = (half_last && a == s.rank - 1) ? s.n[a] / 2 + 1 : s.n[a];
    out[a].sig.resize(count);
    out[a].k2.resize(count);
    out[a].x_plane = (s.rank == 4 && a < 2);
    for (int j = 0; j < count; ++j) {
      double k = s.freq(a, j);
      double sn = std::sin(0.5 * s.h[a] * k);
      out[a].sig[j] = 4.0 / (s.h[a] * s.h[a]) * sn * sn;
      out[a].k2[j] = k * k;
    }
  }
  return out;
}

ModeData fold(const std::vector<AxisModes>& ax, const std::array<int, 4>& idx, int rank) {
  ModeData md;
  for (int a = 0; a < rank; ++a) {
    if (ax[a].x_plane) {
      md.sx += ax[a].sig[idx[a]];
      md.k2x += ax[a].k2[idx[a]];
    } else {
      md.sz += ax[a].sig[idx[a]];
      md.k2z += ax[a].k2[idx[a]];
    }
  }
  return md;
}

void check_rank(const Shape& s) {
  if (s.rank != 2 && s.rank != 4) throw std::invalid_argument("shape rank must be 2 or 4");
}

}  // namespace

ModeData mode_data(const Shape& shape, const std::array<int, 4>& idx) {
  ModeData md;
  for (int a = 0; a < shape.rank; ++a) {
    double k = shape.freq(a, idx[a]);
    double sn = std::sin(0.5 * shape.h[a] * k);
    double sig = 4.0 / (shape.h[a] * shape.h[a]) * sn * sn;
    if (shape.rank == 4 && a < 2) {
      md.sx += sig;
      md.k2x += k * k;
    } else {
      md.sz += sig;
      md.k2z += k * k;
    }
  }
  return md;
}

void for_each_mode(const Shape& shape,
                   const std::function<void(std::int64_t, const ModeData&)>& fn) {
  check_rank(shape);
  auto ax = axis_modes(shape, false);
  std::array<int, 4> idx{0, 0, 0, 0};
  std::int64_t flat = 0;
  int r = shape.rank;
  // generic odometer over rank axes
  while (true) {
    fn(flat, fold(ax, idx, r));
    ++flat;
    int a = r - 1;
    while (a >= 0 && ++idx[a] == shape.n[a]) idx[a--] = 0;
    if (a < 0) break;
  }
}

SpectralField fft_forward(const Field& f) {
  check_rank(f.shape);
  const Shape& s = f.shape;
  std::int64_t ns = s.sites();
  std::vector<std::complex<double>> in(ns);
  for (std::int64_t i = 0; i < ns; ++i) in[i] = f.v[i];
  SpectralField out(s);
  fftw_plan p = Engine::get().plan_c2c(s, FFTW_BACKWARD);  // e^{+i k.y}
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.v.data()));
  double cv = s.cell_vol();
  for (auto& z : out.v) z *= cv;
  return out;
}

Field fft_inverse(const SpectralField& F) {
  check_rank(F.shape);
  const Shape& s = F.shape;
  std::int64_t ns = s.sites();
  std::vector<std::complex<double>> in(F.v);
  std::vector<std::complex<double>> out(ns);
  fftw_plan p = Engine::get().plan_c2c(s, FFTW_FORWARD);  // e^{-i k.y}
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  Field g(s);
  double inv = 1.0 / s.torus_vol();
  for (std::int64_t i = 0; i < ns; ++i) g.v[i] = out[i].real() * inv;
  return g;
}

SpectralField make_spectrum(const Shape& shape, const Symbol& g) {
  SpectralField F(shape);
  for_each_mode(shape, [&](std::int64_t flat, const ModeData& md) { F.v[flat] = g(md); });
  return F;
}

std::int64_t half_spectrum_size(const Shape& shape) { return Engine::half_size(shape); }

std::vector<double> make_half_spectrum_table(const Shape& shape, const Symbol& g) {
  check_rank(shape);
  auto ax = axis_modes(shape, true);
  std::vector<double> table(Engine::half_size(shape));
  std::array<int, 4> idx{0, 0, 0, 0};
  std::array<int, 4> lim = shape.n;
  lim[shape.rank - 1] = shape.n[shape.rank - 1] / 2 + 1;
  int r = shape.rank;
  std::int64_t flat = 0;
  while (true) {
    table[flat] = g(fold(ax, idx, r));
    ++flat;
    int a = r - 1;
    while (a >= 0 && ++idx[a] == lim[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  return table;
}

Field apply_multiplier_table(const Field& f, const std::vector<double>& table) {
  check_rank(f.shape);
  const Shape& s = f.shape;
  std::int64_t hs = Engine::half_size(s);
  if (std::int64_t(table.size()) != hs)
    throw std::invalid_argument("multiplier table size mismatch");
  std::vector<double> in(f.v);
  std::vector<std::complex<double>> spec(hs);
  fftw_execute_dft_r2c(Engine::get().plan_r2c(s), in.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  for (std::int64_t i = 0; i < hs; ++i) spec[i] *= table[i];
  Field out(s);
  fftw_execute_dft_c2r(Engine::get().plan_c2r(s),
                       reinterpret_cast<fftw_complex*>(spec.data()), out.v.data());
  double inv = 1.0 / double(s.sites());
  for (auto& x : out.v) x *= inv;
  return out;
}

Field apply_multiplier(const Field& f, const Symbol& g) {
  return apply_multiplier_table(f, make_half_spectrum_table(f.shape, g));
}

std::vector<double> real_half_spectrum(const Field& f) {
  check_rank(f.shape);
  const Shape& s = f.shape;
  std::int64_t hs = Engine::half_size(s);
  std::vector<double> in(f.v);
  std::vector<std::complex<double>> spec(hs);
  fftw_execute_dft_r2c(Engine::get().plan_r2c(s), in.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  std::vector<double> out(hs);
  for (std::int64_t i = 0; i < hs; ++i) out[i] = spec[i].real();
  return out;
}

namespace {

Field spectral_combine(const Field& a, const Field& b, bool conj_a) {
  if (!(a.shape == b.shape)) throw std::invalid_argument("shape mismatch");
  const Shape& s = a.shape;
  std::int64_t hs = Engine::half_size(s);
  std::vector<double> ta(a.v), tb(b.v);
  std::vector<std::complex<double>> sa(hs), sb(hs);
  fftw_plan pr = Engine::get().plan_r2c(s);
  fftw_execute_dft_r2c(pr, ta.data(), reinterpret_cast<fftw_complex*>(sa.data()));
  fftw_execute_dft_r2c(pr, tb.data(), reinterpret_cast<fftw_complex*>(sb.data()));
  for (std::int64_t i = 0; i < hs; ++i)
    sa[i] = (conj_a ? std::conj(sa[i]) : sa[i]) * sb[i];
  Field out(s);
  fftw_execute_dft_c2r(Engine::get().plan_c2r(s),
                       reinterpret_cast<fftw_complex*>(sa.data()), out.v.data());
  double inv = 1.0 / double(s.sites());
  for (auto& x : out.v) x *= inv;
  return out;
}

}  // namespace

Field convolve(const Field& a, const Field& b) { return spectral_combine(a, b, false); }

Field correlate(const Field& a, const Field& b) { return spectral_combine(a, b, true); }

}  // namespace sinhq
