#pragma once

#include <vector>

#include "flocbal/discrete.hpp"
#include "flocbal/fluid.hpp"
#include "flocbal/grid.hpp"

namespace flocbal {

// Vertical water column: z ascends from the bed (z=0) to the surface; cell 0
// sits on the bed. Each cell carries a full bin density over particle size.
struct ColumnState {
  std::vector<double> z_edges;  // ascending, size cells()+1
  std::vector<BinDensity> rho;  // one per z-cell
  double deposited = 0.0;       // mass per area settled through the bed
  double redirected = 0.0;      // mass per area moved into the top size cell
  double time = 0.0;

  int cells() const { return static_cast<int>(rho.size()); }
  double dz(int f) const { return z_edges[f + 1] - z_edges[f]; }
  double z_mid(int f) const { return 0.5 * (z_edges[f] + z_edges[f + 1]); }
};

// Uniformly spaced empty column.
ColumnState make_column(int nz, double depth, GridPtr grid);

// Power-law settling with crowding hindrance: velocity grows with particle
// size and shuts off as the local suspended density approaches r_gel.
struct SettlingLaw {
  double w0 = 0.0;             // settling velocity of the smallest particle, m/s
  double exponent = 2.0;       // size power
  double r_gel = 1.0;          // suspended density of full hindrance, mass/volume
  double hindrance_power = 1.0;
  double lambda_min = 1.0;     // reference size

  void validate() const;  // throws std::invalid_argument
};

// w0 * (lambda/lambda_min)^exponent * max(0, 1 - r/r_gel)^hindrance_power.
double settling_velocity(const SettlingLaw& law, double lambda, double r);

double suspended_mass(const ColumnState& state);  // mass per area
// suspended + deposited: conserved along transport and split stepping.
double column_budget(const ColumnState& state);

struct TransportOptions {
  double cfl = 0.9;
  long max_substeps = 1000000;
  // Optional per-size-cell scaling of the eddy viscosity (default 1).
  const std::vector<double>* bin_viscosity_scale = nullptr;
};

// Conservative finite-volume step: first-order upwind settling plus central
// turbulent diffusion, per size cell independently. Zero total flux at the
// surface; settling through the bed accumulates into `deposited`. Sub-steps
// automatically to meet the explicit stability bound; throws
// std::runtime_error when more than opt.max_substeps would be needed.
ColumnState transport_step(const ColumnState& state, const ColumnField& fields,
                           const SettlingLaw& law, double dt,
                           const TransportOptions& opt = {});

struct SplitStepResult {
  ColumnState state;
  double redirected_mass = 0.0;  // mass per area redirected this step
};

// transport_step followed by one sectional reaction step at every z-cell.
// `tables` holds either one table per z-cell or a single shared table.
SplitStepResult split_step(const ColumnState& state,
                           const std::vector<const CoeffTable*>& tables,
                           const ColumnField& fields, const SettlingLaw& law,
                           double dt, const TransportOptions& opt = {});

}  // namespace flocbal
