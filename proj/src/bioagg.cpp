#include "flocbal/bioagg.hpp"

#include <cmath>
#include <stdexcept>

namespace flocbal {

void BioParams::validate() const {
  if (!(lambda_min > 0.0)) throw std::invalid_argument("BioParams: lambda_min must be > 0");
  if (!(lambda_bio >= 0.0)) throw std::invalid_argument("BioParams: lambda_bio must be >= 0");
  if (!(M_min > 0.0)) throw std::invalid_argument("BioParams: M_min must be > 0");
  if (!(M_bio >= 0.0)) throw std::invalid_argument("BioParams: M_bio must be >= 0");
  if (!(d >= 1.0)) throw std::invalid_argument("BioParams: d must be >= 1");
}

namespace {

void require_domain(const BioParams& p, double lambda, const char* who) {
  if (lambda < p.lambda_min)
    throw std::invalid_argument(std::string(who) + ": lambda below lambda_min");
}

}  // namespace

double n_of_lambda(const BioParams& p, double lambda) {
  require_domain(p, lambda, "n_of_lambda");
  return (lambda + p.lambda_bio) / (p.lambda_min + p.lambda_bio);
}

double theta(const BioParams& p, double lambda) {
  require_domain(p, lambda, "theta");
  return (lambda + p.lambda_bio) * p.lambda_min /
         ((p.lambda_min + p.lambda_bio) * lambda);
}

double theta_complement(const BioParams& p, double lambda) {
  require_domain(p, lambda, "theta_complement");
  return (lambda - p.lambda_min) * p.lambda_bio /
         ((p.lambda_min + p.lambda_bio) * lambda);
}

double mass_bio(const BioParams& p, double lambda) {
  require_domain(p, lambda, "mass_bio");
  const double ld = std::pow(lambda, p.d);
  return theta(p, lambda) * ld * p.M_min + theta_complement(p, lambda) * ld * p.M_bio;
}

namespace {

// theta(L) * L^d, the quantity conserved under aggregation; strictly increasing in L.
double theta_ld(const BioParams& p, double L) {
  return (L + p.lambda_bio) * p.lambda_min / (p.lambda_min + p.lambda_bio) *
         std::pow(L, p.d - 1.0);
}

}  // namespace

double aggregate_length(const BioParams& p, double lambda, double lambda_p) {
  require_domain(p, lambda, "aggregate_length");
  require_domain(p, lambda_p, "aggregate_length");
  if (p.d == 1.0) return lambda + lambda_p + p.lambda_bio;

  const double target = theta_ld(p, lambda) + theta_ld(p, lambda_p);
  double lo = std::max(lambda, lambda_p);
  double hi = std::pow(std::pow(lambda, p.d) + std::pow(lambda_p, p.d), 1.0 / p.d) +
              p.lambda_bio;
  // theta_ld is increasing, so the root is bracketed; widen defensively if not.
  for (int grow = 0; theta_ld(p, hi) < target && grow < 64; ++grow)
    hi += (hi - lo) + p.lambda_bio + 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (theta_ld(p, mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double f_bio(const BioParams& p, double lambda) {
  require_domain(p, lambda, "f_bio");
  const double th = theta(p, lambda);
  const double thc = theta_complement(p, lambda);
  return th * p.M_min / (th * p.M_min + thc * p.M_bio);
}

double f_bio_approx(const BioParams& p, double lambda) {
  require_domain(p, lambda, "f_bio_approx");
  return 1.0 - ((lambda - p.lambda_min) / lambda) * (p.lambda_bio * p.M_bio) /
                   (p.lambda_min * p.M_min);
}

std::function<double(double)> make_f_bio(const BioParams& p) {
  p.validate();
  return [p](double lambda) { return f_bio(p, lambda); };
}

}  // namespace flocbal
