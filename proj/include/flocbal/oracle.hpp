#pragma once

#include <cstdint>

#include "flocbal/discrete.hpp"
#include "flocbal/fluid.hpp"
#include "flocbal/grid.hpp"
#include "flocbal/kernels.hpp"

namespace flocbal {

// Reference integration of the sectional system d(rho)/dt = Gbar(rho) with an
// embedded adaptive 4/5-order pair to local tolerance tol. Test-surface only.
// Requires 1e-14 <= tol (tighter is unattainable in double precision and is
// rejected up front); throws std::runtime_error on step-size underflow.
BinDensity dense_ode_oracle(const CoeffTable& tab, const BinDensity& rho0,
                            double t_end, double tol);

// Stochastic particle reference: samples N particles from the number density
// of rho0, simulates aggregation and fragmentation event-by-event (thinned
// exact simulation; pair rate B_a/V_eff with V_eff = N / total number), and
// returns the empirical bin mass density. Deterministic for a given seed.
// Supports the built-in kernel families only.
BinDensity particle_mc_oracle(const KernelSet& ks, const FluidField& F, int N,
                              const BinDensity& rho0, double t_end,
                              std::uint64_t seed);

}  // namespace flocbal
