#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "flocbal/bioagg.hpp"
#include "flocbal/grid.hpp"
#include "flocbal/quadrature.hpp"
#include "flocbal/relaxation.hpp"
#include "flocbal/rng.hpp"

using namespace flocbal;

TEST_CASE("equilibrium profile shape and normalization") {
  const double lmin = 5.0;
  CHECK(d_eq(lmin, lmin, 1.0) == 0.0);
  CHECK(d_eq(4.0, lmin, 1.0) == 0.0);
  for (double sigma : {1.0, 3.0}) {
    // mode at lambda_min + sigma with value 1/(e*sigma)
    CHECK(d_eq(lmin + sigma, lmin, sigma) ==
          doctest::Approx(std::exp(-1.0) / sigma).epsilon(1e-14));
    CHECK(d_eq(lmin + 0.9 * sigma, lmin, sigma) < d_eq(lmin + sigma, lmin, sigma));
    CHECK(d_eq(lmin + 1.1 * sigma, lmin, sigma) < d_eq(lmin + sigma, lmin, sigma));
    // unit integral over [lambda_min, lambda_min + 40 sigma]
    QuadSpec spec;
    spec.tol = 1e-12;
    double norm = integrate_adaptive([&](double l) { return d_eq(l, lmin, sigma); },
                                     lmin, lmin + 40.0 * sigma, spec);
    CHECK(std::abs(norm - 1.0) <= 1e-10);
  }
  CHECK_THROWS_AS(d_eq(6.0, 5.0, 0.0), std::invalid_argument);
}

namespace {
RelaxParams base_params() {
  RelaxParams p;
  p.t_eq = 2.0;
  p.lambda_min = 5.0;
  p.sigma = 1.5;
  return p;
}

GridPtr base_grid() { return make_grid(5.0, 5.0 + 60.0, 128, Spacing::uniform); }

BinDensity bumpy(GridPtr g, double mass) {
  BinDensity rho = project([](double l) { return d_eq(l, 5.0, 4.0); }, g, 8);
  double scale = mass / total_mass(rho);
  for (double& v : rho.values) v *= scale;
  return rho;
}
}  // namespace

TEST_CASE("relaxation RHS: fixed point and zero-sum") {
  GridPtr g = base_grid();
  RelaxationOperator op(g, base_params(), 8);

  BinDensity zero(g);
  for (double v : op.rhs(zero)) CHECK(v == 0.0);

  // rho = M * projected equilibrium is a fixed point
  BinDensity eq = op.equilibrium();
  for (double& v : eq.values) v *= 3.7;
  for (double v : op.rhs(eq)) CHECK(std::abs(v) <= 1e-15);

  // random rho: cell-measure sum of RHS vanishes
  Rng rng(4213);
  BinDensity rho(g);
  for (double& v : rho.values) v = rng.uniform();
  double m = total_mass(rho);
  std::vector<double> rhs = op.rhs(rho);
  double s = 0.0;
  for (int i = 0; i < g->size(); ++i) s += g->width(i) * rhs[i];
  CHECK(std::abs(s) <= 1e-13 * m / base_params().t_eq);
}

TEST_CASE("closed-form relaxation") {
  GridPtr g = base_grid();
  RelaxationOperator op(g, base_params(), 8);
  BinDensity rho0 = bumpy(g, 2.0);

  BinDensity at0 = op.exact(rho0, 0.0);
  for (int i = 0; i < g->size(); ++i)
    CHECK(at0.values[i] == doctest::Approx(rho0.values[i]).epsilon(1e-15));

  // deviation from equilibrium decays by exactly 1/e per t_eq
  const BinDensity& eq = op.equilibrium();
  double mass = total_mass(rho0);
  BinDensity at1 = op.exact(rho0, base_params().t_eq);
  for (int i = 0; i < g->size(); ++i) {
    double dev0 = rho0.values[i] - mass * eq.values[i];
    double dev1 = at1.values[i] - mass * eq.values[i];
    CHECK(dev1 == doctest::Approx(dev0 * std::exp(-1.0)).epsilon(1e-12));
  }

  // long-time limit collapses onto the attractor
  BinDensity late = op.exact(rho0, 50.0 * base_params().t_eq);
  for (int i = 0; i < g->size(); ++i)
    CHECK(std::abs(late.values[i] - mass * eq.values[i]) <= 1e-20);

  CHECK(total_mass(at1) == doctest::Approx(mass).epsilon(1e-13));
  CHECK_THROWS_AS(op.exact(rho0, -1.0), std::invalid_argument);
}

TEST_CASE("rk4 marches onto the closed form; mass is conserved") {
  GridPtr g = base_grid();
  RelaxParams p = base_params();
  RelaxationOperator op(g, p, 8);
  BinDensity rho0 = bumpy(g, 2.0);

  BinDensity num = op.integrate(rho0, 5.0 * p.t_eq, p.t_eq / 100.0, TimeScheme::rk4);
  BinDensity ref = op.exact(rho0, 5.0 * p.t_eq);
  double scale = 0.0, err = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    scale = std::max(scale, std::abs(ref.values[i]));
    err = std::max(err, std::abs(num.values[i] - ref.values[i]));
  }
  CHECK(err <= 1e-8 * scale);
  CHECK(std::abs(total_mass(num) - total_mass(rho0)) <= 1e-12 * total_mass(rho0));

  // zero steps return the input
  BinDensity same = op.integrate(rho0, 0.0, 0.5, TimeScheme::rk4);
  for (int i = 0; i < g->size(); ++i) CHECK(same.values[i] == rho0.values[i]);
}

TEST_CASE("rk4 observed convergence order is at least 3.8") {
  GridPtr g = make_grid(5.0, 25.0, 32, Spacing::uniform);
  RelaxParams p = base_params();
  RelaxationOperator op(g, p, 8);
  BinDensity rho0 = bumpy(g, 1.0);
  const double T = 2.0 * p.t_eq;
  BinDensity ref = op.exact(rho0, T);

  auto err_at = [&](double dt) {
    BinDensity num = op.integrate(rho0, T, dt, TimeScheme::rk4);
    double e = 0.0;
    for (int i = 0; i < g->size(); ++i)
      e = std::max(e, std::abs(num.values[i] - ref.values[i]));
    return e;
  };
  double e1 = err_at(p.t_eq / 4.0);
  double e2 = err_at(p.t_eq / 8.0);
  double e3 = err_at(p.t_eq / 16.0);
  CHECK(std::log2(e1 / e2) >= 3.8);
  CHECK(std::log2(e2 / e3) >= 3.8);
}

TEST_CASE("euler rejects unstable steps but works when stable") {
  GridPtr g = make_grid(5.0, 25.0, 16, Spacing::uniform);
  RelaxParams p = base_params();
  RelaxationOperator op(g, p, 8);
  BinDensity rho0 = bumpy(g, 1.0);
  CHECK_THROWS_AS(op.integrate(rho0, 10.0, 2.1 * p.t_eq, TimeScheme::euler),
                  std::invalid_argument);
  BinDensity out = op.integrate(rho0, 4.0 * p.t_eq, p.t_eq / 50.0, TimeScheme::euler);
  CHECK(total_mass(out) == doctest::Approx(total_mass(rho0)).epsilon(1e-12));
}

TEST_CASE("weighted relaxation conserves the weighted integral") {
  GridPtr g = base_grid();
  BioParams bp;
  bp.lambda_min = 5.0;
  bp.lambda_bio = 1.0;
  bp.M_min = 1.0;
  bp.M_bio = 0.5;
  RelaxParams p = base_params();
  p.weight = make_f_bio(bp);
  RelaxationOperator op(g, p, 8);
  CHECK(op.weighted());

  BinDensity rho0 = bumpy(g, 2.0);
  double w0 = op.invariant(rho0);

  // stationarity of the weighted functional along the RHS
  std::vector<double> rhs = op.rhs(rho0);
  BinDensity rhs_density(g);
  rhs_density.values = rhs;
  CHECK(std::abs(op.invariant(rhs_density)) <= 1e-13 * w0 / p.t_eq);

  // weighted fixed point: rho* proportional to attractor has zero RHS
  BinDensity num = op.integrate(rho0, 5.0 * p.t_eq, p.t_eq / 100.0, TimeScheme::rk4);
  CHECK(std::abs(op.invariant(num) - w0) <= 1e-10 * w0);

  // unit weight reduces to the plain operator
  RelaxParams pu = base_params();
  pu.weight = [](double) { return 1.0; };
  RelaxationOperator op_unit(g, pu, 8);
  RelaxationOperator op_plain(g, base_params(), 8);
  std::vector<double> a = op_unit.rhs(rho0);
  std::vector<double> b = op_plain.rhs(rho0);
  for (int i = 0; i < g->size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}
