#include "flocbal/column.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flocbal {

ColumnState make_column(int nz, double depth, GridPtr grid) {
  if (nz < 1) throw std::invalid_argument("make_column: nz must be >= 1");
  if (!(depth > 0.0)) throw std::invalid_argument("make_column: depth must be > 0");
  if (!grid) throw std::invalid_argument("make_column: null grid");
  ColumnState st;
  st.z_edges.resize(nz + 1);
  for (int f = 0; f <= nz; ++f)
    st.z_edges[f] = depth * static_cast<double>(f) / nz;
  st.z_edges[nz] = depth;
  st.rho.assign(nz, BinDensity(grid));
  return st;
}

void SettlingLaw::validate() const {
  if (!(w0 >= 0.0)) throw std::invalid_argument("settling: w0 must be >= 0");
  if (!(r_gel > 0.0)) throw std::invalid_argument("settling: r_gel must be > 0");
  if (!(hindrance_power >= 0.0))
    throw std::invalid_argument("settling: hindrance power must be >= 0");
  if (!(lambda_min > 0.0))
    throw std::invalid_argument("settling: lambda_min must be > 0");
}

double settling_velocity(const SettlingLaw& law, double lambda, double r) {
  if (!(r >= 0.0))
    throw std::invalid_argument("settling_velocity: r must be >= 0");
  const double base = 1.0 - r / law.r_gel;
  double hindrance;
  if (base <= 0.0)
    hindrance = law.hindrance_power > 0.0 ? 0.0 : 1.0;
  else
    hindrance = std::pow(base, law.hindrance_power);
  return law.w0 * std::pow(lambda / law.lambda_min, law.exponent) * hindrance;
}

double suspended_mass(const ColumnState& state) {
  double total = 0.0;
  for (int f = 0; f < state.cells(); ++f)
    total += state.dz(f) * total_mass(state.rho[f]);
  return total;
}

double column_budget(const ColumnState& state) {
  return suspended_mass(state) + state.deposited;
}

namespace {

struct FaceViscosity {
  std::vector<double> nu;   // per interior face (index 1..Nz-1; 0 at boundaries)
  std::vector<double> dzc;  // center-to-center distance per interior face
};

FaceViscosity face_viscosity(const ColumnState& st, const ColumnField& fields) {
  const int nz = st.cells();
  FaceViscosity fv;
  fv.nu.assign(nz + 1, 0.0);
  fv.dzc.assign(nz + 1, 1.0);
  for (int f = 1; f < nz; ++f) {
    const FluidField F = fields.at(st.z_edges[f]);
    fv.nu[f] = (F.k == 0.0) ? 0.0 : eddy_viscosity(F);
    fv.dzc[f] = st.z_mid(f) - st.z_mid(f - 1);
  }
  return fv;
}

}  // namespace

ColumnState transport_step(const ColumnState& state, const ColumnField& fields,
                           const SettlingLaw& law, double dt,
                           const TransportOptions& opt) {
  if (!(dt >= 0.0))
    throw std::invalid_argument("transport_step: dt must be >= 0");
  law.validate();
  const int nz = state.cells();
  if (nz == 0 || dt == 0.0) {
    ColumnState out = state;
    out.time += dt;
    return out;
  }
  const int I = state.rho[0].grid->size();
  const GridPtr& grid = state.rho[0].grid;
  const FaceViscosity fv = face_viscosity(state, fields);

  ColumnState out = state;
  double remaining = dt;
  long used = 0;

  std::vector<double> wface(static_cast<std::size_t>(nz) * I);  // settling at a cell's lower face
  std::vector<double> flux(nz + 1);

  while (remaining > 0.0) {
    // Freeze the crowding density and the stability bound for this sub-step.
    double max_rate = 0.0;
    for (int f = 0; f < nz; ++f) {
      const double r = total_mass(out.rho[f]);
      const double dzf = out.dz(f);
      for (int b = 0; b < I; ++b) {
        const double scale =
            opt.bin_viscosity_scale ? (*opt.bin_viscosity_scale)[b] : 1.0;
        const double w = settling_velocity(law, grid->mid(b), r);
        wface[static_cast<std::size_t>(f) * I + b] = w;
        double rate = w / dzf;
        if (f > 0) rate += scale * fv.nu[f] / (dzf * fv.dzc[f]);
        if (f + 1 < nz) rate += scale * fv.nu[f + 1] / (dzf * fv.dzc[f + 1]);
        max_rate = std::max(max_rate, rate);
      }
    }
    const double h_stable =
        max_rate > 0.0 ? opt.cfl / max_rate : remaining;
    const double h = std::min(remaining, h_stable);
    if (++used > opt.max_substeps)
      throw std::runtime_error(
          "transport_step: stability bound needs more sub-steps than allowed");

    for (int b = 0; b < I; ++b) {
      const double scale =
          opt.bin_viscosity_scale ? (*opt.bin_viscosity_scale)[b] : 1.0;
      // Downward-positive flux through each face; donor cell sits above.
      flux[nz] = 0.0;  // surface: zero total flux
      flux[0] = wface[b] * out.rho[0].values[b];  // bed: settling only
      for (int f = 1; f < nz; ++f) {
        const double settl =
            wface[static_cast<std::size_t>(f) * I + b] * out.rho[f].values[b];
        const double diff = scale * fv.nu[f] *
                            (out.rho[f].values[b] - out.rho[f - 1].values[b]) /
                            fv.dzc[f];
        flux[f] = settl + diff;
      }
      for (int f = 0; f < nz; ++f)
        out.rho[f].values[b] += h / out.dz(f) * (flux[f + 1] - flux[f]);
      out.deposited += h * grid->width(b) * flux[0];
    }
    remaining -= h;
    if (remaining < 1e-15 * dt) remaining = 0.0;
  }

  out.time += dt;
  return out;
}

SplitStepResult split_step(const ColumnState& state,
                           const std::vector<const CoeffTable*>& tables,
                           const ColumnField& fields, const SettlingLaw& law,
                           double dt, const TransportOptions& opt) {
  const int nz = state.cells();
  if (tables.size() != 1 && static_cast<int>(tables.size()) != nz)
    throw std::invalid_argument(
        "split_step: need one table total or one per z-cell");

  SplitStepResult res;
  res.state = transport_step(state, fields, law, dt, opt);
  for (int f = 0; f < nz; ++f) {
    const CoeffTable* tab = tables.size() == 1 ? tables[0] : tables[f];
    StepResult r = euler_step(*tab, res.state.rho[f], dt);
    res.state.rho[f] = std::move(r.rho);
    res.redirected_mass += res.state.dz(f) * r.redirected_mass;
  }
  res.state.redirected += res.redirected_mass;
  return res;
}

}  // namespace flocbal
