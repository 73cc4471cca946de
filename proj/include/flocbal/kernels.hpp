#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flocbal/fluid.hpp"
#include "flocbal/grid.hpp"

namespace flocbal {

// Built-in kernel families. The source model defers kernel physics to
// calibration; these shapes span the standard coagulation-literature forms
// while satisfying every structural constraint below.
enum class AggKernel { none, constant, sum, shear };
enum class FragKernel { none, constant, power };
enum class BreakupKernel { uniform, uniform_mass };

struct KernelFamilies {
  AggKernel agg = AggKernel::constant;
  double beta0 = 1.0;   // aggregation scale
  double nu_w = 1e-6;   // water kinematic viscosity (shear kernel), m^2/s
  FragKernel frag = FragKernel::none;
  double k_f = 0.0;     // fragmentation scale
  double p = 1.0;       // fragmentation size exponent
  BreakupKernel breakup = BreakupKernel::uniform;
};

// The kernel triple (B_a, B_f, B_e) plus the particle mass law m = N_d*lambda^d.
// Structural contracts:
//   B_a symmetric in (lambda, lambda');
//   B_e(lambda, .) supported on [lambda_min, (lambda^d/2)^{1/d}] with unit integral
//     whenever B_f(lambda) > 0;
//   B_f == 0 when lambda^d < 2*lambda_min^d (no admissible fragments) — enforced
//     by this class around any user-supplied B_f.
class KernelSet {
 public:
  using BaFn = std::function<double(const FluidField&, double, double)>;
  using BfFn = std::function<double(const FluidField&, double)>;
  using BeFn = std::function<double(const FluidField&, double, double)>;

  KernelSet(double d, double n_d, double lambda_min, const KernelFamilies& fam);
  // Custom kernels (tests): the fragmentation guard is still wrapped on.
  KernelSet(double d, double n_d, double lambda_min, BaFn ba, BfFn bf, BeFn be);

  double dim() const { return d_; }
  double mass_const() const { return n_d_; }
  double lambda_min() const { return lambda_min_; }
  const std::optional<KernelFamilies>& families() const { return families_; }

  double mass_of(double lambda) const;
  // (lambda^d + lambda'^d)^{1/d}; commutative, >= max of the inputs.
  double agg_size(double lambda, double lambda_p) const;
  // (lambda^d - lambda'^d)^{1/d}; requires lambda' <= lambda.
  double frag_complement(double lambda, double lambda_p) const;
  // Largest admissible fragment (lambda^d/2)^{1/d}.
  double max_fragment(double lambda) const;
  bool can_fragment(double lambda) const;  // lambda^d >= 2*lambda_min^d

  double b_a(const FluidField& F, double lambda, double lambda_p) const;
  double b_f(const FluidField& F, double lambda) const;
  double b_e(const FluidField& F, double lambda, double lambda_p) const;

  // Density of the larger fragment:
  // B_e(lambda, (lambda^d - L^d)^{1/d}) * (lambda^d - L^d)^{(1-d)/d} * L^{d-1},
  // for L in [(lambda^d/2)^{1/d}, lambda]; throws outside that interval.
  double b_e_tilde(const FluidField& F, double lambda, double L) const;

  // Stable identity of the kernel configuration (families, parameters, d, N_d,
  // lambda_min, fluid record) for coefficient-cache validation.
  std::uint64_t family_hash(const FluidField& F) const;

 private:
  double d_;
  double n_d_;
  double lambda_min_;
  std::optional<KernelFamilies> families_;
  BaFn ba_;
  BfFn bf_;  // guard-wrapped
  BeFn be_;
};

struct ValidationReport {
  std::vector<std::string> violations;     // human-readable, with locations
  double max_symmetry_error = 0.0;         // should be exactly 0
  double max_be_norm_error = 0.0;          // max |integral(B_e) - 1| on fragmenting probes
  double max_be_tilde_norm_error = 0.0;    // same through the transformed density
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Checks symmetry (exact equality on sampled pairs), B_e support, the
// fragmentation guard, and B_e / transformed-B_e normalization by quadrature
// at every probe cell midpoint. Violations are data, not exceptions.
ValidationReport validate(const KernelSet& ks, const FluidField& F,
                          const LambdaGrid& probe);

}  // namespace flocbal
