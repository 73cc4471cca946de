#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "flocbal/fluid.hpp"

using namespace flocbal;

TEST_CASE("eddy viscosity closure") {
  FluidField f;
  f.k = 1.0;
  f.eps = 1.0;
  CHECK(eddy_viscosity(f) == doctest::Approx(90.0).epsilon(1e-15));

  f.k = 0.1;
  f.eps = 0.01;
  CHECK(eddy_viscosity(f) == doctest::Approx(90.0).epsilon(1e-14));

  f.k = 0.0;
  CHECK(eddy_viscosity(f) == 0.0);

  f.eps = 0.0;
  CHECK_THROWS_AS(eddy_viscosity(f), std::invalid_argument);

  // homogeneous of degree 2 in k at fixed eps
  FluidField a, b;
  a.k = 0.3; a.eps = 0.7;
  b.k = 0.6; b.eps = 0.7;
  CHECK(eddy_viscosity(b) == doctest::Approx(4.0 * eddy_viscosity(a)).epsilon(1e-14));
}

TEST_CASE("equilibrium width closure") {
  FluidField f;
  CHECK(sigma_eq(f, 2.5, 3.0) == 2.5);  // k = 0
  f.k = 1.0;
  CHECK(sigma_eq(f, 3.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  // nonincreasing in k, bounded by sigma0
  double prev = sigma_eq(f, 1.0, 0.5);
  for (double k = 2.0; k < 30.0; k *= 2.0) {
    f.k = k;
    double cur = sigma_eq(f, 1.0, 0.5);
    CHECK(cur <= prev);
    CHECK(cur > 0.0);
    CHECK(cur <= 1.0);
    prev = cur;
  }
  SigmaClosure closure = make_sigma_eq(3.0, 2.0);
  f.k = 1.0;
  CHECK(closure(f) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("field invariants") {
  FluidField f;
  f.S = -1.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.S = 0.0;
  f.eps = -1.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.eps = 0.0;
  f.T = -300.0;  // below absolute zero
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.T = -1.0;  // cold but physical
  CHECK_NOTHROW(f.validate());
}

TEST_CASE("uniform column field replicates one record") {
  FluidField f;
  f.k = 0.01;
  f.eps = 0.001;
  ColumnField col = uniform_field(f, {0.0, 1.0, 2.0});
  REQUIRE(col.fields.size() == 3);
  for (double z : {0.0, 0.7, 1.3, 2.0}) {
    CHECK(col.at(z).k == f.k);
    CHECK(eddy_viscosity(col.at(z)) > 0.0);
  }
  FluidField bad;
  bad.eps = -1.0;
  CHECK_THROWS_AS(uniform_field(bad, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("column field interpolates linearly and clamps at the ends") {
  ColumnField col;
  col.z_nodes = {0.0, 2.0};
  FluidField lo, hi;
  lo.S = 10.0;
  hi.S = 30.0;
  col.fields = {lo, hi};
  col.validate();
  CHECK(col.at(1.0).S == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(col.at(0.5).S == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(col.at(-1.0).S == 10.0);  // clamp below bed
  CHECK(col.at(9.0).S == 30.0);   // clamp above surface

  ColumnField bad;
  bad.z_nodes = {0.0, 0.0};
  bad.fields = {lo, hi};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("column field file round-trip") {
  const char* path = "test_fluid_column.csv";
  {
    std::ofstream out(path);
    out << "z,u,v,w,S,T,k,eps,pH,O\n";
    out << "0,0.1,0,0,30,12,0.01,0.001,8,0.002\n";
    out << "5,0.2,0,0,31,11,0.02,0.004,8,0.001\n";
  }
  ColumnField col = load_column_field(path);
  REQUIRE(col.fields.size() == 2);
  CHECK(col.z_nodes[1] == 5.0);
  CHECK(col.at(0.0).S == 30.0);
  CHECK(col.at(2.5).k == doctest::Approx(0.015).epsilon(1e-14));
  std::remove(path);

  {
    std::ofstream out(path);
    out << "z,u,v\n0,0.1,0\n";
  }
  CHECK_THROWS_AS(load_column_field(path), std::runtime_error);
  std::remove(path);
  CHECK_THROWS_AS(load_column_field("does_not_exist.csv"), std::runtime_error);
}
