#pragma once

#include <functional>

#include "flocbal/grid.hpp"

namespace flocbal {

// Equilibrium size density: 0 below lambda_min, otherwise the Gamma(2) form
// ((lambda-lambda_min)/sigma^2) * exp(-(lambda-lambda_min)/sigma).
// The decaying exponential is required for the unit normalization this
// density is defined by; see the erratum note in README/report output.
double d_eq(double lambda, double lambda_min, double sigma);

struct RelaxParams {
  double t_eq = 1.0;                     // relaxation time, s
  double lambda_min = 1.0;               // smallest particle size
  double sigma = 1.0;                    // equilibrium width (from sigma_eq closure)
  std::function<double(double)> weight;  // empty: plain (mass-conserving) operator

  void validate() const;  // t_eq > 0, sigma > 0
};

enum class TimeScheme { euler, rk4 };

// Relaxation toward the projected equilibrium. The projected equilibrium is
// renormalized once so its discrete conserved functional is exactly 1:
//   unweighted: sum_i |cell_i| D_i = 1      (conserves total mass)
//   weighted:   sum_i A_i * F_i = 1 with A_i = D_i / f(mid_i), F_i = per-cell
//               quadrature of f             (conserves the f-weighted mass)
// This makes the discrete fixed point and the invariant exact to rounding
// rather than quadrature-limited.
class RelaxationOperator {
 public:
  RelaxationOperator(GridPtr grid, RelaxParams params, int quad_order = 4);

  // Projected, renormalized equilibrium density D.
  const BinDensity& equilibrium() const { return d_eq_; }
  bool weighted() const { return static_cast<bool>(params_.weight); }
  const GridPtr& grid() const { return grid_; }

  // RHS -(1/T_eq)(rho - W*A) with W the conserved functional of rho.
  // The f-weighted (or plain) integral of the result is 0 to rounding.
  std::vector<double> rhs(const BinDensity& rho) const;

  // Closed-form solution: attractor + (rho0 - attractor) * exp(-t/t_eq).
  BinDensity exact(const BinDensity& rho0, double t) const;

  // Explicit time marching; euler rejects dt > 2*t_eq (unstable).
  BinDensity integrate(const BinDensity& rho0, double t_end, double dt,
                       TimeScheme scheme) const;

  // Conserved functional of rho: total mass, or f-weighted mass when weighted.
  double invariant(const BinDensity& rho) const;

 private:
  GridPtr grid_;
  RelaxParams params_;
  int quad_order_;
  BinDensity d_eq_;                 // normalized projection of d_eq
  std::vector<double> attractor_;   // A_i
  std::vector<double> functional_;  // F_i: |cell_i| or per-cell integral of f
};

}  // namespace flocbal
