#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "flocbal/fluid.hpp"
#include "flocbal/grid.hpp"
#include "flocbal/kernels.hpp"
#include "flocbal/quadrature.hpp"

using namespace flocbal;

namespace {
KernelSet make_ks(double d, AggKernel agg, FragKernel frag, BreakupKernel br,
                  double lambda_min = 1.0) {
  KernelFamilies fam;
  fam.agg = agg;
  fam.beta0 = 0.8;
  fam.frag = frag;
  fam.k_f = 0.6;
  fam.p = 1.3;
  fam.breakup = br;
  return KernelSet(d, 1.0, lambda_min, fam);
}

FluidField turbulent() {
  FluidField f;
  f.k = 0.02;
  f.eps = 0.004;
  return f;
}
}  // namespace

TEST_CASE("mass law and size composition") {
  KernelSet k1 = make_ks(1.0, AggKernel::constant, FragKernel::none, BreakupKernel::uniform);
  CHECK(k1.mass_of(2.0) == 2.0);
  CHECK(k1.agg_size(1.0, 2.0) == doctest::Approx(3.0).epsilon(1e-15));

  KernelSet k2 = make_ks(2.0, AggKernel::constant, FragKernel::none, BreakupKernel::uniform);
  CHECK(k2.agg_size(3.0, 4.0) == doctest::Approx(5.0).epsilon(1e-15));

  KernelSet k3 = make_ks(3.0, AggKernel::constant, FragKernel::none, BreakupKernel::uniform);
  CHECK(k3.mass_of(2.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(k3.agg_size(1.0, 1.0) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-15));

  // mass additivity under composition
  for (double a : {1.0, 2.5}) {
    for (double b : {1.3, 4.0}) {
      double merged = k3.agg_size(a, b);
      CHECK(k3.mass_of(merged) ==
            doctest::Approx(k3.mass_of(a) + k3.mass_of(b)).epsilon(1e-14));
    }
  }
}

TEST_CASE("fragment complement inverts composition") {
  KernelSet k1 = make_ks(1.0, AggKernel::none, FragKernel::constant, BreakupKernel::uniform);
  CHECK(k1.frag_complement(10.0, 4.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(k1.frag_complement(10.0, 0.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(k1.frag_complement(4.0, 10.0), std::invalid_argument);

  KernelSet k3 = make_ks(3.0, AggKernel::none, FragKernel::constant, BreakupKernel::uniform);
  for (double lam : {2.0, 5.0}) {
    for (double frac : {0.3, 0.77}) {
      double lp = frac * lam;
      double round_trip = k3.agg_size(lp, k3.frag_complement(lam, lp));
      CHECK(round_trip == doctest::Approx(lam).epsilon(1e-14));
    }
  }
}

TEST_CASE("largest fragment and the fragmentation guard") {
  KernelSet k1 = make_ks(1.0, AggKernel::none, FragKernel::constant, BreakupKernel::uniform);
  FluidField f = turbulent();
  CHECK(k1.max_fragment(10.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(k1.can_fragment(2.1));
  CHECK_FALSE(k1.can_fragment(1.9));
  // below the guard the rate is forced to zero; above, the constant family value
  CHECK(k1.b_f(f, 1.9) == 0.0);
  CHECK(k1.b_f(f, 2.1) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("built-in family values") {
  FluidField f = turbulent();
  KernelSet sum2 = make_ks(2.0, AggKernel::sum, FragKernel::power, BreakupKernel::uniform);
  CHECK(sum2.b_a(f, 2.0, 3.0) == doctest::Approx(0.8 * (4.0 + 9.0)).epsilon(1e-14));
  CHECK(sum2.b_a(f, 3.0, 2.0) == sum2.b_a(f, 2.0, 3.0));

  KernelSet shear = make_ks(1.0, AggKernel::shear, FragKernel::none, BreakupKernel::uniform);
  double expected = 0.8 * std::pow(5.0, 3) * std::sqrt(f.eps / 1e-6);
  CHECK(shear.b_a(f, 2.0, 3.0) == doctest::Approx(expected).epsilon(1e-13));
  FluidField still;  // eps = 0: no shear, no collisions
  CHECK(shear.b_a(still, 2.0, 3.0) == 0.0);

  // power fragmentation: k_f*(lambda/lambda_min)^p*sqrt(eps)
  double bf = sum2.b_f(f, 4.0);
  CHECK(bf == doctest::Approx(0.6 * std::pow(4.0, 1.3) * std::sqrt(f.eps)).epsilon(1e-13));

  KernelSet none = make_ks(1.0, AggKernel::none, FragKernel::none, BreakupKernel::uniform);
  CHECK(none.b_a(f, 2.0, 3.0) == 0.0);
  CHECK(none.b_f(f, 100.0) == 0.0);
}

TEST_CASE("daughter density: support and normalization") {
  FluidField f = turbulent();
  KernelSet k1 = make_ks(1.0, AggKernel::none, FragKernel::constant, BreakupKernel::uniform);
  // lambda = 10, lambda_min = 1: constant 1/4 on [1, 5]
  CHECK(k1.b_e(f, 10.0, 3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(k1.b_e(f, 10.0, 0.5) == 0.0);
  CHECK(k1.b_e(f, 10.0, 5.5) == 0.0);

  for (auto br : {BreakupKernel::uniform, BreakupKernel::uniform_mass}) {
    for (double d : {1.0, 2.0, 3.0}) {
      KernelSet ks = make_ks(d, AggKernel::none, FragKernel::constant, br);
      for (double lam : {2.2, 6.0, 17.0}) {
        QuadSpec spec;
        spec.tol = 1e-12;
        double norm = integrate_adaptive([&](double lp) { return ks.b_e(f, lam, lp); },
                                         1.0, ks.max_fragment(lam), spec);
        CHECK(std::abs(norm - 1.0) <= 1e-10);
      }
    }
  }
}

TEST_CASE("larger-fragment density: hand-computed change of variables") {
  FluidField f = turbulent();
  KernelSet k1 = make_ks(1.0, AggKernel::none, FragKernel::constant, BreakupKernel::uniform);
  // d=1, lambda=10: Btilde_e == B_e(10 - L) = 1/4 on [5,9], 0 on (9,10]
  CHECK(k1.b_e_tilde(f, 10.0, 7.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(k1.b_e_tilde(f, 10.0, 5.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(k1.b_e_tilde(f, 10.0, 9.5) == 0.0);
  CHECK_THROWS_AS(k1.b_e_tilde(f, 10.0, 4.9), std::domain_error);
  CHECK_THROWS_AS(k1.b_e_tilde(f, 10.0, 10.1), std::domain_error);

  // the transformed density integrates to one whenever B_e does
  for (double d : {1.0, 2.0, 3.0}) {
    KernelSet ks = make_ks(d, AggKernel::none, FragKernel::constant,
                           BreakupKernel::uniform_mass);
    for (double lam : {3.0, 8.0}) {
      double lo = ks.max_fragment(lam);
      double hi = ks.frag_complement(lam, 1.0);  // complement hits lambda_min here
      QuadSpec spec;
      spec.tol = 1e-10;
      double norm = integrate_adaptive(
          [&](double L) { return ks.b_e_tilde(f, lam, L); }, lo, hi, spec);
      CHECK(std::abs(norm - 1.0) <= 1e-8);
    }
  }
}

TEST_CASE("structural validation passes every built-in family") {
  FluidField f = turbulent();
  GridPtr probe = make_grid(1.0, 64.0, 24, Spacing::geometric);
  for (auto agg : {AggKernel::none, AggKernel::constant, AggKernel::sum, AggKernel::shear}) {
    for (auto frag : {FragKernel::none, FragKernel::constant, FragKernel::power}) {
      for (auto br : {BreakupKernel::uniform, BreakupKernel::uniform_mass}) {
        for (double d : {1.0, 3.0}) {
          KernelSet ks = make_ks(d, agg, frag, br);
          ValidationReport rep = validate(ks, f, *probe);
          INFO(rep.summary());
          CHECK(rep.ok());
          CHECK(rep.max_symmetry_error == 0.0);
          CHECK(rep.max_be_norm_error <= 1e-10);
          CHECK(rep.max_be_tilde_norm_error <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("validation flags an asymmetric aggregation kernel") {
  FluidField f = turbulent();
  GridPtr probe = make_grid(1.0, 16.0, 8, Spacing::geometric);
  KernelSet bad(
      1.0, 1.0, 1.0, [](const FluidField&, double lam, double) { return lam; },
      [](const FluidField&, double) { return 0.0; },
      [](const FluidField&, double, double) { return 0.0; });
  ValidationReport rep = validate(bad, f, *probe);
  CHECK_FALSE(rep.ok());
  CHECK(rep.max_symmetry_error > 0.0);
}

TEST_CASE("kernel configuration hash tracks parameters and fluid state") {
  FluidField f = turbulent();
  KernelSet a = make_ks(1.0, AggKernel::constant, FragKernel::constant, BreakupKernel::uniform);
  KernelSet b = make_ks(1.0, AggKernel::constant, FragKernel::constant, BreakupKernel::uniform);
  CHECK(a.family_hash(f) == b.family_hash(f));

  KernelFamilies fam = *a.families();
  fam.beta0 *= 2.0;
  KernelSet c(1.0, 1.0, 1.0, fam);
  CHECK(c.family_hash(f) != a.family_hash(f));

  FluidField f2 = f;
  f2.k += 1.0;
  CHECK(a.family_hash(f2) != a.family_hash(f));
}
