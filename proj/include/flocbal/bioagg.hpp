#pragma once

#include <functional>

namespace flocbal {

// Geometry of composite particles built from elementary sediment grains of
// size lambda_min (d-dimensional mass density M_min) glued by biological
// particles of size lambda_bio (density M_bio).
struct BioParams {
  double lambda_min = 1.0;
  double lambda_bio = 0.0;
  double M_min = 1.0;
  double M_bio = 0.0;
  double d = 1.0;

  void validate() const;  // lambda_min > 0, lambda_bio >= 0, M_min > 0, M_bio >= 0, d >= 1
};

// Number of elementary sediment grains in a particle of size lambda:
// (lambda + lambda_bio) / (lambda_min + lambda_bio).
double n_of_lambda(const BioParams& p, double lambda);

// Lineic proportion of sediment in the particle:
// (lambda + lambda_bio) * lambda_min / ((lambda_min + lambda_bio) * lambda).
double theta(const BioParams& p, double lambda);

// 1 - theta evaluated in the cancellation-free closed form
// (lambda - lambda_min) * lambda_bio / ((lambda_min + lambda_bio) * lambda).
double theta_complement(const BioParams& p, double lambda);

// Mass of a composite particle: theta*lambda^d*M_min + (1-theta)*lambda^d*M_bio.
double mass_bio(const BioParams& p, double lambda);

// Size of the aggregate of two particles. d=1: lambda + lambda' + lambda_bio
// (one extra glue particle). d>1: root of theta(L)L^d = theta(lambda)lambda^d
// + theta(lambda')lambda'^d, bracketed in [max(lambda,lambda'),
// (lambda^d+lambda'^d)^{1/d}+lambda_bio], solved to 1e-12 relative.
double aggregate_length(const BioParams& p, double lambda, double lambda_p);

// Sediment mass fraction: theta*M_min / (theta*M_min + (1-theta)*M_bio).
// Decreasing in lambda, equals 1 at lambda_min. f*m is additive under
// aggregate_length, which makes it the conserved-weight choice.
double f_bio(const BioParams& p, double lambda);

// First-order approximation 1 - ((lambda-lambda_min)/lambda)*(lambda_bio*M_bio)/(lambda_min*M_min).
double f_bio_approx(const BioParams& p, double lambda);

// The weight as a plain callable for the relaxation module.
std::function<double(double)> make_f_bio(const BioParams& p);

}  // namespace flocbal
