#include "flocbal/relaxation.hpp"

#include <cmath>
#include <stdexcept>

#include "flocbal/quadrature.hpp"

namespace flocbal {

double d_eq(double lambda, double lambda_min, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("d_eq: sigma must be > 0");
  if (lambda < lambda_min) return 0.0;
  const double x = (lambda - lambda_min) / sigma;
  return x / sigma * std::exp(-x);
}

void RelaxParams::validate() const {
  if (!(t_eq > 0.0)) throw std::invalid_argument("RelaxParams: t_eq must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("RelaxParams: sigma must be > 0");
}

RelaxationOperator::RelaxationOperator(GridPtr grid, RelaxParams params,
                                       int quad_order)
    : grid_(std::move(grid)), params_(std::move(params)), quad_order_(quad_order) {
  params_.validate();
  const double lmin = params_.lambda_min;
  const double sig = params_.sigma;
  d_eq_ = project([lmin, sig](double lam) { return d_eq(lam, lmin, sig); },
                  grid_, quad_order_);
  double norm = 0.0;
  for (int i = 0; i < grid_->size(); ++i) norm += grid_->width(i) * d_eq_.values[i];
  if (!(norm > 0.0))
    throw std::invalid_argument(
        "RelaxationOperator: equilibrium density vanishes on the grid");
  for (double& v : d_eq_.values) v /= norm;

  const int I = grid_->size();
  functional_.resize(I);
  attractor_.resize(I);
  if (params_.weight) {
    for (int i = 0; i < I; ++i) {
      const double fm = params_.weight(grid_->mid(i));
      if (!(fm > 0.0))
        throw std::invalid_argument(
            "RelaxationOperator: weight must be positive on the grid");
      functional_[i] =
          flocbal::integrate(params_.weight, grid_->lo(i), grid_->hi(i), quad_order_);
      attractor_[i] = d_eq_.values[i] / fm;
    }
    double s = 0.0;
    for (int i = 0; i < I; ++i) s += attractor_[i] * functional_[i];
    if (!(s > 0.0))
      throw std::invalid_argument("RelaxationOperator: degenerate weighted attractor");
    for (double& a : attractor_) a /= s;
  } else {
    for (int i = 0; i < I; ++i) {
      functional_[i] = grid_->width(i);
      attractor_[i] = d_eq_.values[i];
    }
  }
}

double RelaxationOperator::invariant(const BinDensity& rho) const {
  double s = 0.0;
  for (int i = 0; i < grid_->size(); ++i) s += functional_[i] * rho.values[i];
  return s;
}

std::vector<double> RelaxationOperator::rhs(const BinDensity& rho) const {
  const int I = grid_->size();
  const double W = invariant(rho);
  std::vector<double> out(I);
  for (int i = 0; i < I; ++i)
    out[i] = -(rho.values[i] - W * attractor_[i]) / params_.t_eq;
  return out;
}

BinDensity RelaxationOperator::exact(const BinDensity& rho0, double t) const {
  if (t < 0.0) throw std::invalid_argument("RelaxationOperator::exact: t must be >= 0");
  const double W = invariant(rho0);
  const double decay = std::exp(-t / params_.t_eq);
  BinDensity out(grid_);
  for (int i = 0; i < grid_->size(); ++i) {
    const double eq = W * attractor_[i];
    out.values[i] = eq + (rho0.values[i] - eq) * decay;
  }
  return out;
}

BinDensity RelaxationOperator::integrate(const BinDensity& rho0, double t_end,
                                         double dt, TimeScheme scheme) const {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  if (t_end < 0.0) throw std::invalid_argument("integrate: t_end must be >= 0");
  if (scheme == TimeScheme::euler && dt > 2.0 * params_.t_eq)
    throw std::invalid_argument("integrate: euler unstable for dt > 2*t_eq");

  const int I = grid_->size();
  BinDensity rho = rho0;
  rho.grid = grid_;
  const long nfull = static_cast<long>(std::floor(t_end / dt + 1e-12));
  const double rem = t_end - nfull * dt;

  const auto step = [&](double h) {
    const std::vector<double> k1 = rhs(rho);
    if (scheme == TimeScheme::euler) {
      for (int i = 0; i < I; ++i) rho.values[i] += h * k1[i];
      return;
    }
    BinDensity tmp(grid_);
    for (int i = 0; i < I; ++i) tmp.values[i] = rho.values[i] + 0.5 * h * k1[i];
    const std::vector<double> k2 = rhs(tmp);
    for (int i = 0; i < I; ++i) tmp.values[i] = rho.values[i] + 0.5 * h * k2[i];
    const std::vector<double> k3 = rhs(tmp);
    for (int i = 0; i < I; ++i) tmp.values[i] = rho.values[i] + h * k3[i];
    const std::vector<double> k4 = rhs(tmp);
    for (int i = 0; i < I; ++i)
      rho.values[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };

  for (long n = 0; n < nfull; ++n) step(dt);
  if (rem > 1e-12 * std::max(dt, t_end)) step(rem);
  return rho;
}

}  // namespace flocbal
