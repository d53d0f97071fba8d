#include "sinhq/gibbs2d.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sinhq/stats.hpp"

namespace sinhq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counter-based uniform on [0,1).  Streams are disjoint from the even
// streams normal_at consumes in the chain, so the two never alias.
double uniform_at(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + stream + 0x632be59bd9b4e019ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  x ^= x >> 31;
  return double(x >> 11) * 0x1.0p-53;
}

double dot_cell(const Field& a, const Field& b) {
  KahanSum acc;
  for (std::int64_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.s * a.shape.cell_vol();
}

// Map the r2c half layout (last active axis truncated to 0..n/2) back to
// full-spectrum flat indices of a rank-2 shape.
std::vector<double> half_from_full(const Shape& sh,
                                   const std::vector<double>& full) {
  const int n0 = sh.n[0], n1 = sh.n[1];
  std::vector<double> half(std::size_t(n0) * (n1 / 2 + 1));
  std::size_t at = 0;
  for (int j0 = 0; j0 < n0; ++j0)
    for (int j1 = 0; j1 <= n1 / 2; ++j1)
      half[at++] = full[std::size_t(j0) * n1 + j1];
  return half;
}

Field delta_over_cell(const Shape& sh) {
  Field f(sh, 0.0);
  f[0] = 1.0 / sh.cell_vol();
  return f;
}

}  // namespace

double SliceCovariance::site_variance() const {
  KahanSum acc;
  for (double v : values) acc.add(v);
  return acc.s / grid.shape().torus_vol();
}

std::vector<double> SliceCovariance::half_table() const {
  return half_from_full(grid.shape(), values);
}

Field SliceCovariance::real_space() const {
  return apply_multiplier_table(delta_over_cell(grid.shape()), half_table());
}

SliceCovariance exact_slice_covariance(const Grid4& grid4, double m) {
  if (grid4.sites() <= 0)
    throw std::invalid_argument("slice covariance: empty lattice");
  if (m <= 0.0) throw std::invalid_argument("slice covariance: m must be positive");
  SliceCovariance sc;
  sc.grid = grid4.zgrid();
  sc.m = m;

  Shape xsh;
  xsh.rank = 2;
  xsh.n = {grid4.Mx, grid4.Mx, 1, 1};
  xsh.h = {grid4.hx, grid4.hx, 1.0, 1.0};
  std::vector<double> xsym(xsh.sites());
  for_each_mode(xsh, [&](std::int64_t flat, const ModeData& md) {
    xsym[flat] = md.sigma();
  });

  const double inv_lx2 = 1.0 / (grid4.Lx() * grid4.Lx());
  const Shape zsh = sc.grid.shape();
  sc.values.resize(zsh.sites());
  for_each_mode(zsh, [&](std::int64_t flat, const ModeData& md) {
    KahanSum acc;
    for (double sx : xsym) {
      const double d = m * m + sx + md.sigma();
      acc.add(1.0 / (d * d));
    }
    sc.values[flat] = acc.s * inv_lx2;
  });
  return sc;
}

void CoshModel2D::validate() const {
  const Shape sh = grid.shape();
  if (sh.sites() <= 0) throw std::invalid_argument("cosh model: empty lattice");
  if (m <= 0.0) throw std::invalid_argument("cosh model: m must be positive");
  if (lambda < 0.0)
    throw std::invalid_argument("cosh model: lambda must be nonnegative");
  if (!(wick2 > 0.0))
    throw std::invalid_argument("cosh model: wick2 must be positive");
  const std::size_t hs = std::size_t(half_spectrum_size(sh));
  if (cov_half.size() != hs || prec_half.size() != hs)
    throw std::invalid_argument("cosh model: spectral tables mismatch the grid");
  for (std::size_t i = 0; i < hs; ++i)
    if (!(cov_half[i] > 0.0) || !std::isfinite(cov_half[i]))
      throw std::invalid_argument("cosh model: covariance not positive definite");
}

CoshModel2D cosh_model_gff(const Grid2& grid, double m, double beta,
                           double lambda) {
  CoshModel2D model;
  model.grid = grid;
  model.m = m;
  model.charge = beta;
  model.lambda = lambda;
  const Shape sh = grid.shape();
  model.cov_half = make_half_spectrum_table(sh, [m](const ModeData& md) {
    return 1.0 / (m * m + md.sigma());
  });
  model.prec_half = make_half_spectrum_table(sh, [m](const ModeData& md) {
    return m * m + md.sigma();
  });
  KahanSum acc;
  for_each_mode(sh, [&](std::int64_t, const ModeData& md) {
    acc.add(1.0 / (m * m + md.sigma()));
  });
  model.wick2 = 0.5 * acc.s / sh.torus_vol();
  model.validate();
  return model;
}

CoshModel2D cosh_model_slice(const Grid4& grid4, double m, double alpha,
                             double lambda) {
  SliceCovariance sc = exact_slice_covariance(grid4, m);
  CoshModel2D model;
  model.grid = sc.grid;
  model.m = m;
  model.charge = alpha;
  model.lambda = lambda;
  model.cov_half = sc.half_table();
  model.prec_half.resize(model.cov_half.size());
  for (std::size_t i = 0; i < model.cov_half.size(); ++i)
    model.prec_half[i] = 1.0 / model.cov_half[i];
  model.wick2 = 0.5 * sc.site_variance();
  model.validate();
  return model;
}

Field base_covariance_table(const CoshModel2D& model) {
  return apply_multiplier_table(delta_over_cell(model.grid.shape()),
                                model.cov_half);
}

double action(const Field& phi, const CoshModel2D& model, double exp_cap) {
  const Shape sh = model.grid.shape();
  if (!(phi.shape == sh))
    throw std::invalid_argument("action: field does not live on the model grid");
  Field qphi = apply_multiplier_table(phi, model.prec_half);
  KahanSum quad;
  for (std::int64_t i = 0; i < phi.size(); ++i) quad.add(phi[i] * qphi[i]);
  double out = 0.5 * quad.s * sh.cell_vol();
  if (model.lambda > 0.0) {
    KahanSum pot;
    for (std::int64_t i = 0; i < phi.size(); ++i) {
      const double s = model.charge * phi[i];
      if (std::abs(s) > exp_cap) return kInf;
      pot.add(std::cosh(std::abs(s)));
    }
    const double cw = std::exp(-model.charge * model.charge * model.wick2);
    out += model.lambda * sh.cell_vol() * cw * pot.s;
  }
  return out;
}

namespace {

// grad S(phi) = cell (C^{-1} phi + lambda c_w charge sinh(charge phi)).
Field action_gradient(const Field& phi, const CoshModel2D& model, double cw) {
  Field g = apply_multiplier_table(phi, model.prec_half);
  const double cell = phi.shape.cell_vol();
  if (model.lambda > 0.0) {
    const double amp = model.lambda * cw * model.charge;
    for (std::int64_t i = 0; i < g.size(); ++i)
      g[i] += amp * std::sinh(model.charge * phi[i]);
  }
  for (std::int64_t i = 0; i < g.size(); ++i) g[i] *= cell;
  return g;
}

}  // namespace

ChainResult sample_chain(const CoshModel2D& model, int n_samples,
                         std::uint64_t seed, const ChainConfig& cfg) {
  model.validate();
  if (n_samples < 1) throw std::invalid_argument("chain: need n_samples >= 1");
  if (cfg.step_size <= 0.0 || cfg.n_steps < 1 || cfg.thin < 1 || cfg.burn_in < 0)
    throw std::invalid_argument("chain: bad configuration");

  const Shape sh = model.grid.shape();
  const double cell = sh.cell_vol();
  const double cw = std::exp(-model.charge * model.charge * model.wick2);

  // M = cell C^{-1}: draw p = M^{1/2} z, apply M^{-1} spectrally.
  std::vector<double> msqrt(model.prec_half.size());
  std::vector<double> minv(model.prec_half.size());
  for (std::size_t i = 0; i < msqrt.size(); ++i) {
    msqrt[i] = std::sqrt(cell * model.prec_half[i]);
    minv[i] = model.cov_half[i] / cell;
  }
  auto kinetic = [&](const Field& p) {
    Field mp = apply_multiplier_table(p, minv);
    KahanSum acc;
    for (std::int64_t i = 0; i < p.size(); ++i) acc.add(p[i] * mp[i]);
    return 0.5 * acc.s;
  };

  Field phi(sh, 0.0);
  double h = cfg.step_size;
  const int total = cfg.burn_in + n_samples * cfg.thin;
  int accepted_measure = 0, window_accepted = 0, window_count = 0;

  ChainResult out;
  out.samples.reserve(n_samples);

  for (int t = 0; t < total; ++t) {
    Field z(sh);
    for (std::int64_t i = 0; i < z.size(); ++i)
      z[i] = normal_at(seed, 2 * std::uint64_t(t), i);
    Field p = apply_multiplier_table(z, msqrt);

    const double h0 = action(phi, model, cfg.exp_cap) + kinetic(p);
    Field q = phi;
    Field g = action_gradient(q, model, cw);
    for (std::int64_t i = 0; i < p.size(); ++i) p[i] -= 0.5 * h * g[i];
    for (int step = 0; step < cfg.n_steps; ++step) {
      Field mp = apply_multiplier_table(p, minv);
      for (std::int64_t i = 0; i < q.size(); ++i) q[i] += h * mp[i];
      g = action_gradient(q, model, cw);
      const double w = step + 1 == cfg.n_steps ? 0.5 : 1.0;
      for (std::int64_t i = 0; i < p.size(); ++i) p[i] -= w * h * g[i];
    }
    const double h1 = action(q, model, cfg.exp_cap) + kinetic(p);

    const double dh = h1 - h0;
    bool accept = false;
    if (std::isfinite(dh)) {
      if (dh <= 0.0)
        accept = true;
      else
        accept = uniform_at(seed, 2 * std::uint64_t(t) + 1) < std::exp(-dh);
    }
    if (accept) phi = std::move(q);

    if (t < cfg.burn_in) {
      if (cfg.autotune) {
        window_accepted += accept ? 1 : 0;
        if (++window_count == 50) {
          const double acc = window_accepted / 50.0;
          if (acc > 0.9)
            h *= 1.1;
          else if (acc < 0.6)
            h /= 1.15;
          h = std::min(std::max(h, 1e-3), 1.9);
          window_accepted = 0;
          window_count = 0;
        }
      }
    } else {
      accepted_measure += accept ? 1 : 0;
      if ((t - cfg.burn_in) % cfg.thin == cfg.thin - 1) out.samples.push_back(phi);
    }
  }

  ChainStats& st = out.stats;
  st.samples = int(out.samples.size());
  st.acceptance = double(accepted_measure) / double(n_samples * cfg.thin);
  st.step_size_final = h;
  st.mistuned = st.acceptance < 0.2;
  if (st.mistuned)
    std::fprintf(stderr,
                 "chain: acceptance %.3f is below 0.2, step size %.4g looks "
                 "mistuned\n",
                 st.acceptance, h);

  std::vector<double> mean_series(out.samples.size());
  std::vector<double> site_series(out.samples.size());
  std::vector<double> cosh_series(out.samples.size());
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    const Field& f = out.samples[k];
    KahanSum acc, cs;
    for (std::int64_t i = 0; i < f.size(); ++i) {
      acc.add(f[i]);
      cs.add(std::cosh(std::abs(model.charge * f[i])));
    }
    mean_series[k] = acc.s * cell;
    site_series[k] = f[0];
    cosh_series[k] = cs.s * cell * cw;
  }
  const std::int64_t n = std::int64_t(out.samples.size());
  for (auto& [name, series] :
       std::initializer_list<std::pair<const char*, std::vector<double>*>>{
           {"field_mean", &mean_series},
           {"site00", &site_series},
           {"cosh_sum", &cosh_series}}) {
    ObservableStat ob;
    ob.name = name;
    ob.tau_int = tau_int(*series);
    ob.ess = ess_from_tau(n, ob.tau_int);
    st.observables.push_back(std::move(ob));
  }
  return out;
}

SchwingerEstimate schwinger(const std::vector<Field>& samples,
                            const std::vector<Field>& fs) {
  if (fs.size() > 4)
    throw std::invalid_argument("schwinger: at most four test functions");
  SchwingerEstimate est;
  if (fs.empty()) {
    est.value = 1.0;
    return est;
  }
  if (samples.empty()) throw std::invalid_argument("schwinger: no samples");
  for (const Field& f : fs)
    if (!(f.shape == samples.front().shape))
      throw std::invalid_argument("schwinger: test function grid mismatch");

  std::vector<double> series(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    double prod = 1.0;
    for (const Field& f : fs) prod *= dot_cell(samples[k], f);
    series[k] = prod;
  }
  est.value = mean(series);
  est.tau = tau_int(series);
  std::int64_t b = std::int64_t(std::ceil(2.0 * est.tau));
  b = std::max<std::int64_t>(b, 1);
  if (std::int64_t(series.size()) / b < 2) b = std::int64_t(series.size()) / 2;
  std::vector<double> blocks = block_means(series, b);
  est.stderr_ = jackknife_stderr(blocks);
  est.blocks = int(blocks.size());
  return est;
}

std::string estimator_csv(const std::vector<EstimatorRow>& rows) {
  std::string out = "observable,value,stderr,tau_int,ess\n";
  char line[256];
  for (const EstimatorRow& r : rows) {
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g\n",
                  r.observable.c_str(), r.value, r.stderr_, r.tau_int, r.ess);
    out += line;
  }
  return out;
}

}  // namespace sinhq
