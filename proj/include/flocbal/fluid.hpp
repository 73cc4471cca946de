#pragma once

#include <functional>
#include <string>
#include <vector>

namespace flocbal {

// Prescribed fluid field at a point: velocity, salinity, temperature,
// turbulence energy and dissipation, pH, organic matter. Inputs only;
// nothing here is ever computed from flow equations.
struct FluidField {
  double u = 0.0, v = 0.0, w = 0.0;  // m/s
  double S = 0.0;                    // psu
  double T = 0.0;                    // degrees C
  double k = 0.0;                    // m^2/s^2
  double eps = 0.0;                  // m^2/s^3
  double pH = 0.0;                   // dimensionless
  double O = 0.0;                    // kg/m^3

  // Throws std::invalid_argument when a nonnegative-constrained component
  // (S, T+273.15, k, eps, pH, O) is negative.
  void validate() const;
};

// Fluid field sampled on a vertical line of nodes, bed (z=0) to surface.
struct ColumnField {
  std::vector<double> z_nodes;     // strictly increasing, m
  std::vector<FluidField> fields;  // one per node

  void validate() const;
  // Piecewise-linear interpolation in z, clamped at the ends.
  FluidField at(double z) const;
};

ColumnField uniform_field(const FluidField& values, const std::vector<double>& z_nodes);

// Turbulent eddy viscosity c_mu_tilde * k^2 / eps. eps must be positive.
double eddy_viscosity(const FluidField& F, double c_mu_tilde = 90.0);

// Equilibrium-size closure sigma0 / (1 + c_k * k): turbulence shrinks the
// equilibrium floc size. The functional form is a swappable calibration choice.
double sigma_eq(const FluidField& F, double sigma0, double c_k);

using SigmaClosure = std::function<double(const FluidField&)>;
SigmaClosure make_sigma_eq(double sigma0, double c_k);

// Reader for the column-field CSV (header z,u,v,w,S,T,k,eps,pH,O).
ColumnField load_column_field(const std::string& path);

}  // namespace flocbal
