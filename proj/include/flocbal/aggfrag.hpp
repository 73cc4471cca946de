#pragma once

#include <functional>

#include "flocbal/fluid.hpp"
#include "flocbal/kernels.hpp"
#include "flocbal/quadrature.hpp"

namespace flocbal {

// Mass density over particle size, as a callable with an explicit compact
// support. Evaluation outside the support returns exactly 0 so integration
// intervals can be clipped without changing the result.
struct ContinuousDensity {
  std::function<double(double)> fn;
  double support_lo = 0.0;
  double support_hi = 0.0;

  double operator()(double lambda) const {
    if (lambda < support_lo || lambda > support_hi) return 0.0;
    return fn(lambda);
  }
};

// The four contributions to the aggregation-fragmentation rate at one size,
// stored as nonnegative magnitudes. sum() has the sign convention of the
// evolution equation: gains positive, losses negative.
struct AggFragTerms {
  double loss_frag = 0.0;
  double loss_agg = 0.0;
  double gain_frag = 0.0;
  double gain_agg = 0.0;

  double sum() const { return gain_frag + gain_agg - loss_frag - loss_agg; }
};

// Evaluates the four terms at lambda by adaptive quadrature over
// [lambda_min, lambda_max] intersected with the density's support.
// Aggregation gain producing sizes beyond lambda_max is not produced here at
// all (the evaluation point is capped by the caller's grid); the matching
// loss stays, so the balance integral reports the leakage.
AggFragTerms g_continuous_terms(const KernelSet& ks, const FluidField& F,
                                const ContinuousDensity& rho, double lambda,
                                double lambda_max, const QuadSpec& quad = {});

// Net rate: gain_frag + gain_agg - loss_frag - loss_agg at lambda.
double g_continuous(const KernelSet& ks, const FluidField& F,
                    const ContinuousDensity& rho, double lambda,
                    double lambda_max, const QuadSpec& quad = {});

// Integral of the net rate over [lambda_min, lambda_max]. Zero up to
// quadrature tolerance when no aggregate is pushed past lambda_max;
// otherwise negative with magnitude equal to the mass flux past lambda_max.
double mass_balance(const KernelSet& ks, const FluidField& F,
                    const ContinuousDensity& rho, double lambda_max,
                    const QuadSpec& quad = {});

}  // namespace flocbal
