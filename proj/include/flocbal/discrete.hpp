#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flocbal/fluid.hpp"
#include "flocbal/grid.hpp"
#include "flocbal/kernels.hpp"

namespace flocbal {

enum class TableMode { raw, corrected };

// Precomputed per-cell rate coefficients for the sectional
// aggregation-fragmentation operator on a fixed grid and fluid state.
//
// Conventions (all cell averages, piecewise-constant densities):
//   b_lf[i]            mean fragmentation rate over cell i                (1/s)
//   b_la[i*I+j]        loss pairing of cell i against partner cell j;
//                      enters the rate as rho_i * b_la * |cell_j| * rho_j
//   b_gf[i*I+j]        fragmentation gain into cell i from parents in j;
//                      enters as b_gf * |cell_j| * rho_j
//   aggregation gain   stored per unordered source pair (k <= l) as a short
//                      list of (destination cell, coefficient); enters as
//                      coeff * rho_k * rho_l. Pair entries with k < l already
//                      carry the factor 2 for the two orderings.
//   ga_redirect[p]     rate coefficient of mass produced past the top edge
//                      by pair p; that mass is deposited into the top cell
//                      and tallied separately.
//
// In corrected mode every gain column is rescaled by one scalar per
// fragmentation source cell / per aggregation source pair so that the exact
// discrete balance  sum_i |cell_i| * rate_i = 0  telescopes identically.
struct CoeffTable {
  GridPtr grid;
  TableMode mode = TableMode::corrected;
  int quad_order = 4;
  double d = 1.0;
  std::uint64_t kernel_hash = 0;

  std::vector<double> b_lf;  // I
  std::vector<double> b_la;  // I*I row-major
  std::vector<double> b_gf;  // I*I row-major

  std::vector<std::uint32_t> ga_pair_k;   // per pair, k <= l
  std::vector<std::uint32_t> ga_pair_l;   // per pair
  std::vector<std::uint32_t> ga_offset;   // size pairs+1, ranges into ga_cell/ga_value
  std::vector<std::uint32_t> ga_cell;     // destination cells
  std::vector<double> ga_value;           // gain coefficients
  std::vector<double> ga_redirect;        // per pair

  int size() const { return grid ? grid->size() : 0; }
};

CoeffTable precompute(const KernelSet& ks, const FluidField& F, GridPtr grid,
                      int quad_order, TableMode mode);

struct GbarResult {
  BinDensity rhs;
  double redirected_rate = 0.0;  // mass/volume/time entering the top cell from overflow
  double activity = 0.0;         // sum_i |cell_i| (|gain_i| + |loss_i|): scale for residuals
};

// Rate of change of the bin density under the precomputed operator, the
// redirect deposit into the top cell included.
BinDensity apply_gbar(const CoeffTable& tab, const BinDensity& rho);
GbarResult apply_gbar_detailed(const CoeffTable& tab, const BinDensity& rho);

struct StepResult {
  BinDensity rho;
  double redirected_mass = 0.0;  // mass/volume moved into the top cell this step
  int substeps = 1;              // number of equal sub-steps actually taken
};

// One forward-Euler step of length dt, halving the sub-step (dt/2^n, n <= 30)
// until every intermediate state is nonnegative. Throws std::runtime_error if
// positivity cannot be reached.
StepResult euler_step(const CoeffTable& tab, const BinDensity& rho, double dt);

struct ConservationReport {
  int trials = 0;
  double max_residual = 0.0;  // max over trials of |sum_i |cell_i| rate_i| / activity
  std::string summary() const;
};

// Evaluates the discrete mass balance on `trials` random nonnegative densities.
ConservationReport check_conservation(const CoeffTable& tab, int trials,
                                      std::uint64_t seed);

// Binary cache (magic "FBCT", versioned, little-endian doubles); reload is
// bit-exact. load_table rebuilds the grid from the stored edges.
void save_table(const CoeffTable& tab, const std::string& path);
CoeffTable load_table(const std::string& path);

}  // namespace flocbal
