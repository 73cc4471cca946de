#include "flocbal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flocbal/rng.hpp"

namespace flocbal {

namespace {

// Cash-Karp embedded 4(5) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27,
                 a54 = 35.0 / 27;
constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                 a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594,
                 b6 = 512.0 / 1771;
constexpr double e1 = b1 - 2825.0 / 27648, e3 = b3 - 18575.0 / 48384,
                 e4 = b4 - 13525.0 / 55296, e5 = -277.0 / 14336,
                 e6 = b6 - 1.0 / 4;

}  // namespace

BinDensity dense_ode_oracle(const CoeffTable& tab, const BinDensity& rho0,
                            double t_end, double tol) {
  if (!(t_end >= 0.0))
    throw std::invalid_argument("dense_ode_oracle: t_end must be >= 0");
  if (!(tol > 0.0))
    throw std::invalid_argument("dense_ode_oracle: tol must be > 0");
  if (tol < 1e-14)
    throw std::invalid_argument(
        "dense_ode_oracle: tol below 1e-14 is not attainable in double "
        "precision");
  const int I = tab.size();
  BinDensity y = rho0;
  if (t_end == 0.0) return y;

  double scale_ref = 1.0;
  for (double v : y.values) scale_ref = std::max(scale_ref, std::abs(v));
  const double atol = tol * scale_ref;

  const auto f = [&](const BinDensity& state) { return apply_gbar(tab, state); };

  double t = 0.0;
  double h = t_end / 64.0;
  BinDensity stage(rho0.grid), y5(rho0.grid);

  while (t < t_end) {
    h = std::min(h, t_end - t);
    if (!(h > 1e-14 * t_end))
      throw std::runtime_error("dense_ode_oracle: step-size underflow");

    const BinDensity k1 = f(y);
    for (int i = 0; i < I; ++i)
      stage.values[i] = y.values[i] + h * a21 * k1.values[i];
    const BinDensity k2 = f(stage);
    for (int i = 0; i < I; ++i)
      stage.values[i] =
          y.values[i] + h * (a31 * k1.values[i] + a32 * k2.values[i]);
    const BinDensity k3 = f(stage);
    for (int i = 0; i < I; ++i)
      stage.values[i] = y.values[i] + h * (a41 * k1.values[i] +
                                           a42 * k2.values[i] +
                                           a43 * k3.values[i]);
    const BinDensity k4 = f(stage);
    for (int i = 0; i < I; ++i)
      stage.values[i] =
          y.values[i] + h * (a51 * k1.values[i] + a52 * k2.values[i] +
                             a53 * k3.values[i] + a54 * k4.values[i]);
    const BinDensity k5 = f(stage);
    for (int i = 0; i < I; ++i)
      stage.values[i] =
          y.values[i] + h * (a61 * k1.values[i] + a62 * k2.values[i] +
                             a63 * k3.values[i] + a64 * k4.values[i] +
                             a65 * k5.values[i]);
    const BinDensity k6 = f(stage);

    double err_norm = 0.0;
    for (int i = 0; i < I; ++i) {
      y5.values[i] = y.values[i] + h * (b1 * k1.values[i] + b3 * k3.values[i] +
                                        b4 * k4.values[i] + b6 * k6.values[i]);
      const double err = h * (e1 * k1.values[i] + e3 * k3.values[i] +
                              e4 * k4.values[i] + e5 * k5.values[i] +
                              e6 * k6.values[i]);
      const double sc = atol + tol * std::max(std::abs(y.values[i]),
                                              std::abs(y5.values[i]));
      err_norm = std::max(err_norm, std::abs(err) / sc);
    }

    if (err_norm <= 1.0) {
      t += h;
      y.values = y5.values;
      const double grow =
          err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      h *= std::clamp(0.9 * std::pow(err_norm, -0.25), 0.1, 0.9);
    }
  }
  return y;
}

namespace {

// integral of 1/m over [lo, hi) for m = N_d * lambda^d, closed form.
double inv_mass_integral(double lo, double hi, double d, double n_d) {
  if (d == 1.0) return std::log(hi / lo) / n_d;
  return (std::pow(lo, 1.0 - d) - std::pow(hi, 1.0 - d)) / (n_d * (d - 1.0));
}

// Inverse CDF of the within-cell number density (proportional to 1/m).
double sample_in_cell(double lo, double hi, double d, double u) {
  if (d == 1.0) return lo * std::pow(hi / lo, u);
  const double plo = std::pow(lo, 1.0 - d), phi = std::pow(hi, 1.0 - d);
  return std::pow(plo - u * (plo - phi), 1.0 / (1.0 - d));
}

}  // namespace

BinDensity particle_mc_oracle(const KernelSet& ks, const FluidField& F, int N,
                              const BinDensity& rho0, double t_end,
                              std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("particle_mc_oracle: N must be >= 1");
  if (!(t_end >= 0.0))
    throw std::invalid_argument("particle_mc_oracle: t_end must be >= 0");
  if (!ks.families())
    throw std::invalid_argument(
        "particle_mc_oracle: built-in kernel families required");
  const KernelFamilies fam = *ks.families();
  const GridPtr& grid = rho0.grid;
  const int I = grid->size();
  const double d = ks.dim();
  const double lmin = ks.lambda_min();

  // Number of physical particles per cell and in total.
  std::vector<double> cum(I);
  double n_phys = 0.0;
  for (int i = 0; i < I; ++i) {
    const double nu =
        inv_mass_integral(grid->lo(i), grid->hi(i), d, ks.mass_const());
    n_phys += rho0.values[i] * nu;
    cum[i] = n_phys;
  }
  BinDensity out(grid);
  if (n_phys <= 0.0) return out;
  const double v_eff = static_cast<double>(N) / n_phys;

  Rng rng(seed);
  std::vector<double> sizes(N);
  double max_size = 0.0;
  for (int p = 0; p < N; ++p) {
    const double target = rng.uniform() * n_phys;
    const int cell = static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
    const int c = std::min(cell, I - 1);
    sizes[p] = sample_in_cell(grid->lo(c), grid->hi(c), d, rng.uniform());
    max_size = std::max(max_size, sizes[p]);
  }

  // Upper bounds for thinning, as functions of the largest size seen so far.
  const auto ba_bound = [&](double lam_hat) -> double {
    switch (fam.agg) {
      case AggKernel::none: return 0.0;
      case AggKernel::constant: return fam.beta0;
      case AggKernel::sum: return fam.beta0 * 2.0 * std::pow(lam_hat, d);
      case AggKernel::shear: {
        const double s = 2.0 * lam_hat;
        return fam.beta0 * s * s * s * std::sqrt(F.eps / fam.nu_w);
      }
    }
    return 0.0;
  };
  const auto bf_bound = [&](double lam_hat) -> double {
    switch (fam.frag) {
      case FragKernel::none: return 0.0;
      case FragKernel::constant: return fam.k_f;
      case FragKernel::power: {
        const double hi = fam.k_f * std::pow(lam_hat / lmin, fam.p);
        const double lo = fam.k_f * std::pow(std::pow(2.0, 1.0 / d), fam.p);
        return std::max(hi, lo) * std::sqrt(F.eps);
      }
    }
    return 0.0;
  };

  double t = 0.0;
  long iterations = 0;
  while (true) {
    const long n = static_cast<long>(sizes.size());
    const double ra =
        n >= 2 ? ba_bound(max_size) * 0.5 * static_cast<double>(n) *
                     static_cast<double>(n - 1) / v_eff
               : 0.0;
    const double rf = bf_bound(max_size) * static_cast<double>(n);
    const double rate = ra + rf;
    if (!(rate > 0.0)) break;
    if (!std::isfinite(rate) || ++iterations > 500000000L)
      throw std::runtime_error("particle_mc_oracle: event-rate overflow");

    t += -std::log(1.0 - rng.uniform()) / rate;
    if (t > t_end) break;

    if (rng.uniform() * rate < ra) {
      // Candidate aggregation: uniform distinct pair, thinned by B_a.
      const long p = static_cast<long>(rng.below(n));
      long q = static_cast<long>(rng.below(n - 1));
      if (q >= p) ++q;
      const double accept = ks.b_a(F, sizes[p], sizes[q]) / ba_bound(max_size);
      if (rng.uniform() < accept) {
        const double merged = ks.agg_size(sizes[p], sizes[q]);
        sizes[p] = merged;
        sizes[q] = sizes.back();
        sizes.pop_back();
        max_size = std::max(max_size, merged);
      }
    } else {
      // Candidate fragmentation: uniform particle, thinned by B_f.
      const long p = static_cast<long>(rng.below(n));
      const double lam = sizes[p];
      const double accept = ks.b_f(F, lam) / bf_bound(max_size);
      if (rng.uniform() < accept) {
        const double mf = ks.max_fragment(lam);
        double frag;
        if (fam.breakup == BreakupKernel::uniform) {
          frag = lmin + rng.uniform() * (mf - lmin);
        } else {
          const double lo_d = std::pow(lmin, d);
          const double hi_d = 0.5 * std::pow(lam, d);
          frag = std::pow(lo_d + rng.uniform() * (hi_d - lo_d), 1.0 / d);
        }
        sizes[p] = ks.frag_complement(lam, frag);
        sizes.push_back(frag);
      }
    }
  }

  // Empirical bin mass density; oversized particles land in the top cell.
  for (double lam : sizes) {
    const double clamped = std::clamp(lam, grid->lambda_min(), grid->lambda_max());
    const int i = grid->bin_index(clamped);
    out.values[i] += ks.mass_of(lam) / (v_eff * grid->width(i));
  }
  return out;
}

}  // namespace flocbal
