#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace flocbal {

// Gauss-Legendre rule on [-1,1].
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes/weights for the given order (>=1), computed once and cached.
const QuadRule& gauss_legendre(int order);

// Fixed-order Gauss-Legendre integral of f over [a,b]. Degenerate intervals give 0.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int order);

struct QuadSpec {
  double tol = 1e-8;    // absolute tolerance per integral
  // Bisection depth before declaring non-convergence. Chains toward an
  // integrable singularity at x != 0 terminate at the abscissa-resolution
  // floor, depth ~log2(width / (256 eps |x|)) <= ~55 for ordinary ranges;
  // the ceiling exists to catch integrands that are singular at 0 or
  // genuinely pathological.
  int max_refine = 60;
  int order = 15;       // panel rule order
  // Known pointwise noise in f per unit width (e.g. when f is itself computed
  // by quadrature): panels whose refinement disagreement is below this floor
  // are accepted, since refining cannot beat the noise.
  double noise_floor = 0.0;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive bisection with Gauss-Legendre panels: a panel is accepted when the
// whole-panel rule and the two half-panel rules agree within the panel's share
// of spec.tol, or when refining cannot change the computable result — the
// disagreement is at the rounding floor of the panel values or of the whole
// integral, below spec.noise_floor, or the panel is so narrow that node
// abscissas quantize to the double grid. Throws QuadratureError after
// spec.max_refine levels.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const QuadSpec& spec);

}  // namespace flocbal
