#include "flocbal/kernels.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "flocbal/quadrature.hpp"

namespace flocbal {

namespace {

void check_geometry(double d, double n_d, double lambda_min) {
  if (!(d >= 1.0)) throw std::invalid_argument("KernelSet: d must be >= 1");
  if (!(n_d > 0.0)) throw std::invalid_argument("KernelSet: N_d must be > 0");
  if (!(lambda_min > 0.0)) throw std::invalid_argument("KernelSet: lambda_min must be > 0");
}

// lambda^d - lp^d for 0 < lp <= lambda. The naive difference of two pow()
// results loses all accuracy as lp -> lambda (absolute error ~eps*lambda^d
// swamps the small true value); factoring through log1p/expm1 keeps the
// relative error O(eps) over the whole range.
double pow_diff(double lambda, double lp, double d) {
  if (lp >= lambda) return 0.0;
  return -std::pow(lambda, d) * std::expm1(d * std::log1p((lp - lambda) / lambda));
}

KernelSet::BaFn make_ba(const KernelFamilies& fam, double d) {
  switch (fam.agg) {
    case AggKernel::none:
      return [](const FluidField&, double, double) { return 0.0; };
    case AggKernel::constant: {
      const double b0 = fam.beta0;
      return [b0](const FluidField&, double, double) { return b0; };
    }
    case AggKernel::sum: {
      const double b0 = fam.beta0;
      return [b0, d](const FluidField&, double a, double b) {
        return b0 * (std::pow(a, d) + std::pow(b, d));
      };
    }
    case AggKernel::shear: {
      const double b0 = fam.beta0;
      const double nu_w = fam.nu_w;
      return [b0, nu_w](const FluidField& F, double a, double b) {
        const double s = a + b;
        return b0 * s * s * s * std::sqrt(F.eps / nu_w);
      };
    }
  }
  throw std::logic_error("make_ba: unreachable");
}

KernelSet::BfFn make_bf(const KernelFamilies& fam, double lambda_min) {
  switch (fam.frag) {
    case FragKernel::none:
      return [](const FluidField&, double) { return 0.0; };
    case FragKernel::constant: {
      const double kf = fam.k_f;
      return [kf](const FluidField&, double) { return kf; };
    }
    case FragKernel::power: {
      const double kf = fam.k_f;
      const double p = fam.p;
      return [kf, p, lambda_min](const FluidField& F, double lam) {
        return kf * std::pow(lam / lambda_min, p) * std::sqrt(F.eps);
      };
    }
  }
  throw std::logic_error("make_bf: unreachable");
}

}  // namespace

KernelSet::KernelSet(double d, double n_d, double lambda_min,
                     const KernelFamilies& fam)
    : d_(d), n_d_(n_d), lambda_min_(lambda_min), families_(fam) {
  check_geometry(d, n_d, lambda_min);
  if (!(fam.beta0 >= 0.0) || !(fam.k_f >= 0.0) || !(fam.nu_w > 0.0))
    throw std::invalid_argument("KernelSet: invalid family parameters");
  ba_ = make_ba(fam, d_);
  const BfFn raw_bf = make_bf(fam, lambda_min_);
  bf_ = [this, raw_bf](const FluidField& F, double lam) {
    return can_fragment(lam) ? raw_bf(F, lam) : 0.0;
  };
  const BreakupKernel breakup = fam.breakup;
  be_ = [this, breakup](const FluidField&, double lam, double lam_p) {
    const double mf = max_fragment(lam);
    if (lam_p < lambda_min_ || lam_p > mf) return 0.0;
    if (mf <= lambda_min_) return 0.0;  // empty admissible interval
    if (breakup == BreakupKernel::uniform) return 1.0 / (mf - lambda_min_);
    // Uniform in the lambda'^d (mass) measure.
    const double range = 0.5 * std::pow(lam, d_) - std::pow(lambda_min_, d_);
    return d_ * std::pow(lam_p, d_ - 1.0) / range;
  };
}

KernelSet::KernelSet(double d, double n_d, double lambda_min, BaFn ba, BfFn bf,
                     BeFn be)
    : d_(d),
      n_d_(n_d),
      lambda_min_(lambda_min),
      ba_(std::move(ba)),
      be_(std::move(be)) {
  check_geometry(d, n_d, lambda_min);
  BfFn raw_bf = std::move(bf);
  bf_ = [this, raw_bf](const FluidField& F, double lam) {
    return can_fragment(lam) ? raw_bf(F, lam) : 0.0;
  };
}

double KernelSet::mass_of(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("mass_of: lambda must be > 0");
  return n_d_ * std::pow(lambda, d_);
}

double KernelSet::agg_size(double lambda, double lambda_p) const {
  if (!(lambda > 0.0) || !(lambda_p > 0.0))
    throw std::invalid_argument("agg_size: sizes must be > 0");
  if (d_ == 1.0) return lambda + lambda_p;
  return std::pow(std::pow(lambda, d_) + std::pow(lambda_p, d_), 1.0 / d_);
}

double KernelSet::frag_complement(double lambda, double lambda_p) const {
  if (lambda_p > lambda)
    throw std::invalid_argument("frag_complement: fragment exceeds parent");
  if (d_ == 1.0) return lambda - lambda_p;
  return std::pow(pow_diff(lambda, lambda_p, d_), 1.0 / d_);
}

double KernelSet::max_fragment(double lambda) const {
  return std::pow(0.5 * std::pow(lambda, d_), 1.0 / d_);
}

bool KernelSet::can_fragment(double lambda) const {
  return std::pow(lambda, d_) >= 2.0 * std::pow(lambda_min_, d_);
}

double KernelSet::b_a(const FluidField& F, double lambda, double lambda_p) const {
  return ba_(F, lambda, lambda_p);
}

double KernelSet::b_f(const FluidField& F, double lambda) const {
  return bf_(F, lambda);
}

double KernelSet::b_e(const FluidField& F, double lambda, double lambda_p) const {
  return be_(F, lambda, lambda_p);
}

double KernelSet::b_e_tilde(const FluidField& F, double lambda, double L) const {
  const double mf = max_fragment(lambda);
  if (L < mf || L > lambda)
    throw std::domain_error("b_e_tilde: larger-fragment size outside [max_fragment, lambda]");
  if (d_ == 1.0) return b_e(F, lambda, lambda - L);
  const double u = pow_diff(lambda, L, d_);
  const double comp = std::pow(u, 1.0 / d_);
  if (comp < lambda_min_) return 0.0;  // outside B_e support; avoids the u->0 power
  return b_e(F, lambda, comp) * std::pow(u, (1.0 - d_) / d_) *
         std::pow(L, d_ - 1.0);
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_f64(double v, std::uint64_t h) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return fnv1a(&bits, sizeof bits, h);
}

}  // namespace

std::uint64_t KernelSet::family_hash(const FluidField& F) const {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a_f64(d_, h);
  h = fnv1a_f64(n_d_, h);
  h = fnv1a_f64(lambda_min_, h);
  if (families_) {
    const KernelFamilies& f = *families_;
    const std::uint32_t tags[3] = {static_cast<std::uint32_t>(f.agg),
                                   static_cast<std::uint32_t>(f.frag),
                                   static_cast<std::uint32_t>(f.breakup)};
    h = fnv1a(tags, sizeof tags, h);
    h = fnv1a_f64(f.beta0, h);
    h = fnv1a_f64(f.nu_w, h);
    h = fnv1a_f64(f.k_f, h);
    h = fnv1a_f64(f.p, h);
  } else {
    h = fnv1a("custom", 6, h);
  }
  const double fv[9] = {F.u, F.v, F.w, F.S, F.T, F.k, F.eps, F.pH, F.O};
  for (double v : fv) h = fnv1a_f64(v, h);
  return h;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (ok() ? "kernel validation: PASS" : "kernel validation: FAIL") << "\n";
  os << "  max symmetry error: " << max_symmetry_error << "\n";
  os << "  max B_e normalization error: " << max_be_norm_error << "\n";
  os << "  max transformed-B_e normalization error: " << max_be_tilde_norm_error
     << "\n";
  for (const auto& v : violations) os << "  violation: " << v << "\n";
  return os.str();
}

ValidationReport validate(const KernelSet& ks, const FluidField& F,
                          const LambdaGrid& probe) {
  ValidationReport rep;
  std::ostringstream os;
  const int I = probe.size();

  // Symmetry: exact evaluation equality on all probe midpoint pairs.
  for (int i = 0; i < I; ++i) {
    for (int j = i; j < I; ++j) {
      const double a = probe.mid(i), b = probe.mid(j);
      const double ab = ks.b_a(F, a, b);
      const double ba = ks.b_a(F, b, a);
      if (ab != ba) {
        const double err = std::abs(ab - ba);
        rep.max_symmetry_error = std::max(rep.max_symmetry_error, err);
        os.str("");
        os << "B_a asymmetric at (" << a << ", " << b << "): " << ab << " vs " << ba;
        rep.violations.push_back(os.str());
      }
    }
  }

  const double lmin = ks.lambda_min();
  for (int i = 0; i < I; ++i) {
    const double lam = probe.mid(i);
    const double mf = ks.max_fragment(lam);

    // Support: exactly zero beyond the largest admissible fragment and below
    // the smallest particle size.
    const double outside[] = {mf * 1.000001 + 1e-12, lam, probe.lambda_max(),
                              0.5 * lmin};
    for (double lp : outside) {
      if (lp >= lmin && lp <= mf) continue;  // not actually outside
      if (ks.b_e(F, lam, lp) != 0.0) {
        os.str("");
        os << "B_e nonzero outside support at (" << lam << ", " << lp << ")";
        rep.violations.push_back(os.str());
      }
    }

    // Guard: no fragmentation where no admissible fragments exist.
    if (!ks.can_fragment(lam) && ks.b_f(F, lam) != 0.0) {
      os.str("");
      os << "B_f nonzero in the guarded region at lambda=" << lam;
      rep.violations.push_back(os.str());
    }

    // Normalization where fragmentation is active.
    if (ks.b_f(F, lam) > 0.0 && mf > lmin) {
      QuadSpec spec;
      spec.tol = 1e-12;
      const double norm = integrate_adaptive(
          [&](double lp) { return ks.b_e(F, lam, lp); }, lmin, mf, spec);
      const double err = std::abs(norm - 1.0);
      rep.max_be_norm_error = std::max(rep.max_be_norm_error, err);
      if (err > 1e-8) {
        os.str("");
        os << "B_e normalization off by " << err << " at lambda=" << lam;
        rep.violations.push_back(os.str());
      }

      // Same mass through the larger-fragment change of variables; the
      // integrand's support ends where the complement hits lambda_min.
      const double hi_eff = ks.frag_complement(lam, lmin);
      const double norm2 = integrate_adaptive(
          [&](double L) { return ks.b_e_tilde(F, lam, L); }, mf,
          std::min(hi_eff, lam), spec);
      const double err2 = std::abs(norm2 - 1.0);
      rep.max_be_tilde_norm_error = std::max(rep.max_be_tilde_norm_error, err2);
      if (err2 > 1e-6) {
        os.str("");
        os << "transformed B_e normalization off by " << err2 << " at lambda=" << lam;
        rep.violations.push_back(os.str());
      }
    }
  }
  return rep;
}

}  // namespace flocbal
