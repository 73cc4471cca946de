#include "flocbal/aggfrag.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace flocbal {

namespace {

double dth_root(double x, double d) { return std::pow(std::max(x, 0.0), 1.0 / d); }

// Integrate f over [a,b], inserting the given interior cut points; each
// segment gets an equal share of spec.tol.
double integrate_segments(const std::function<double(double)>& f, double a,
                          double b, std::vector<double> cuts,
                          const QuadSpec& spec) {
  if (!(b > a)) return 0.0;
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts;
  for (double c : cuts) {
    if (c < a || c > b) continue;
    if (!pts.empty() && !(c > pts.back())) continue;
    pts.push_back(c);
  }
  QuadSpec seg = spec;
  seg.tol = spec.tol / static_cast<double>(pts.size() - 1);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s)
    total += integrate_adaptive(f, pts[s], pts[s + 1], seg);
  return total;
}

}  // namespace

AggFragTerms g_continuous_terms(const KernelSet& ks, const FluidField& F,
                                const ContinuousDensity& rho, double lambda,
                                double lambda_max, const QuadSpec& quad) {
  const double d = ks.dim();
  const double lmin = ks.lambda_min();
  const double s_lo = std::max(rho.support_lo, lmin);
  const double s_hi = std::min(rho.support_hi, lambda_max);
  const double guard = std::pow(2.0, 1.0 / d) * lmin;  // B_f switches on here

  AggFragTerms out;
  const double rho_here = rho(lambda);

  // Fragmentation loss.
  out.loss_frag = rho_here * ks.b_f(F, lambda);

  // Aggregation loss: rho(l) * integral of rho(l')/m(l') * B_a(l,l').
  if (rho_here != 0.0 && s_hi > s_lo) {
    const double integral = integrate_adaptive(
        [&](double lp) {
          return rho(lp) / ks.mass_of(lp) * ks.b_a(F, lambda, lp);
        },
        s_lo, s_hi, quad);
    out.loss_agg = rho_here * integral;
  }

  // Fragmentation gain. Two parent ranges: lambda appears as the smaller
  // fragment of parents with at least twice its mass, and as the larger
  // fragment of parents between lambda and the doubling size.
  if (s_hi > s_lo) {
    const double m_here = ks.mass_of(lambda);
    double number_gain = 0.0;

    const double a1 = std::max(std::pow(2.0, 1.0 / d) * lambda, s_lo);
    const double b1 = s_hi;
    if (b1 > a1) {
      number_gain += integrate_segments(
          [&](double lp) {
            return rho(lp) / ks.mass_of(lp) * ks.b_f(F, lp) *
                   ks.b_e(F, lp, lambda);
          },
          a1, b1, {guard}, quad);
    }

    const double a2 = std::max(
        {lambda, dth_root(std::pow(lambda, d) + std::pow(lmin, d), d), s_lo});
    const double b2 = std::min(std::pow(2.0, 1.0 / d) * lambda, s_hi);
    if (b2 > a2) {
      number_gain += integrate_segments(
          [&](double lp) {
            if (lambda > lp || lambda < ks.max_fragment(lp)) return 0.0;
            return rho(lp) / ks.mass_of(lp) * ks.b_f(F, lp) *
                   ks.b_e_tilde(F, lp, lambda);
          },
          a2, b2, {guard}, quad);
    }
    out.gain_frag = m_here * number_gain;
  }

  // Aggregation gain: pairs (l', l'') with l'^d + l''^d = lambda^d, both in
  // the density's support. Interval arithmetic is done on d-th powers so the
  // complement size is formed with a single subtraction.
  if (s_hi > s_lo) {
    const double Ld = std::pow(lambda, d);
    const double slo_d = std::pow(s_lo, d);
    const double shi_d = std::pow(s_hi, d);
    const double lo_pow = std::max(slo_d, Ld - shi_d);
    const double hi_pow = std::min(shi_d, Ld - slo_d);
    if (hi_pow > lo_pow) {
      // The complement's Jacobian is singular as l' -> lambda; integrate the
      // near-diagonal tail in the complement variable instead.
      const double split_pow = std::pow(lambda * (1.0 - 1e-3), d);
      double inner = 0.0;

      const double b_direct = std::min(hi_pow, split_pow);
      if (b_direct > lo_pow) {
        inner += integrate_adaptive(
            [&](double lp) {
              const double comp = ks.frag_complement(lambda, lp);
              if (comp < s_lo || comp > s_hi) return 0.0;
              const double v = rho(lp) / ks.mass_of(lp) * rho(comp) /
                               ks.mass_of(comp) * ks.b_a(F, lp, comp);
              return v / std::pow(comp, d - 1.0);
            },
            dth_root(lo_pow, d), dth_root(b_direct, d), quad);
      }

      if (hi_pow > split_pow) {
        const double u_lo_pow = std::max(slo_d, Ld - shi_d);
        const double u_hi_pow =
            std::min({shi_d, Ld - slo_d, Ld - split_pow});
        if (u_hi_pow > u_lo_pow) {
          inner += integrate_adaptive(
              [&](double u) {
                const double lp = dth_root(Ld - std::pow(u, d), d);
                if (lp < s_lo || lp > s_hi) return 0.0;
                const double v = rho(lp) / ks.mass_of(lp) * rho(u) /
                                 ks.mass_of(u) * ks.b_a(F, lp, u);
                return v / std::pow(lp, d - 1.0);
              },
              dth_root(u_lo_pow, d), dth_root(u_hi_pow, d), quad);
        }
      }
      out.gain_agg =
          0.5 * ks.mass_of(lambda) * std::pow(lambda, d - 1.0) * inner;
    }
  }

  return out;
}

double g_continuous(const KernelSet& ks, const FluidField& F,
                    const ContinuousDensity& rho, double lambda,
                    double lambda_max, const QuadSpec& quad) {
  return g_continuous_terms(ks, F, rho, lambda, lambda_max, quad).sum();
}

double mass_balance(const KernelSet& ks, const FluidField& F,
                    const ContinuousDensity& rho, double lambda_max,
                    const QuadSpec& quad) {
  const double d = ks.dim();
  const double lmin = ks.lambda_min();
  const double len = lambda_max - lmin;
  if (!(len > 0.0)) return 0.0;

  // The outer integral sees each rate evaluation only up to the inner
  // tolerance; tighten it so the accumulated inner error stays well below
  // the outer budget, and tell the outer panels about the residual noise so
  // they stop refining once they reach it.
  QuadSpec inner = quad;
  inner.tol = std::max(std::min(quad.tol / 100.0, 1e-12), 5e-14);
  QuadSpec outer = quad;
  outer.noise_floor = 20.0 * inner.tol;

  const double two_d = std::pow(2.0, 1.0 / d);
  std::vector<double> cuts = {
      rho.support_lo,
      rho.support_hi,
      two_d * lmin,
      two_d * rho.support_lo,
      two_d * rho.support_hi,
      rho.support_lo / two_d,
      rho.support_hi / two_d,
      ks.agg_size(std::max(rho.support_lo, lmin),
                  std::max(rho.support_lo, lmin)),
      ks.agg_size(std::min(rho.support_hi, lambda_max),
                  std::min(rho.support_hi, lambda_max)),
  };
  return integrate_segments(
      [&](double lam) { return g_continuous(ks, F, rho, lam, lambda_max, inner); },
      lmin, lambda_max, cuts, outer);
}

}  // namespace flocbal
