#include "flocbal/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flocbal {

void FluidField::validate() const {
  const auto bad = [](double x) { return !(x >= 0.0) || std::isnan(x); };
  if (bad(S)) throw std::invalid_argument("FluidField: S must be >= 0");
  if (bad(T + 273.15)) throw std::invalid_argument("FluidField: T below absolute zero");
  if (bad(k)) throw std::invalid_argument("FluidField: k must be >= 0");
  if (bad(eps)) throw std::invalid_argument("FluidField: eps must be >= 0");
  if (bad(pH)) throw std::invalid_argument("FluidField: pH must be >= 0");
  if (bad(O)) throw std::invalid_argument("FluidField: O must be >= 0");
}

void ColumnField::validate() const {
  if (z_nodes.empty()) throw std::invalid_argument("ColumnField: no nodes");
  if (z_nodes.size() != fields.size())
    throw std::invalid_argument("ColumnField: node/field count mismatch");
  for (std::size_t i = 1; i < z_nodes.size(); ++i)
    if (!(z_nodes[i] > z_nodes[i - 1]))
      throw std::invalid_argument("ColumnField: z_nodes must be strictly increasing");
  for (const auto& f : fields) f.validate();
}

FluidField ColumnField::at(double z) const {
  if (z <= z_nodes.front()) return fields.front();
  if (z >= z_nodes.back()) return fields.back();
  const auto it = std::upper_bound(z_nodes.begin(), z_nodes.end(), z);
  const std::size_t hi = it - z_nodes.begin();
  const std::size_t lo = hi - 1;
  const double t = (z - z_nodes[lo]) / (z_nodes[hi] - z_nodes[lo]);
  const FluidField& a = fields[lo];
  const FluidField& b = fields[hi];
  FluidField out;
  out.u = a.u + t * (b.u - a.u);
  out.v = a.v + t * (b.v - a.v);
  out.w = a.w + t * (b.w - a.w);
  out.S = a.S + t * (b.S - a.S);
  out.T = a.T + t * (b.T - a.T);
  out.k = a.k + t * (b.k - a.k);
  out.eps = a.eps + t * (b.eps - a.eps);
  out.pH = a.pH + t * (b.pH - a.pH);
  out.O = a.O + t * (b.O - a.O);
  return out;
}

ColumnField uniform_field(const FluidField& values, const std::vector<double>& z_nodes) {
  values.validate();
  ColumnField col;
  col.z_nodes = z_nodes;
  col.fields.assign(z_nodes.size(), values);
  col.validate();
  return col;
}

double eddy_viscosity(const FluidField& F, double c_mu_tilde) {
  if (!(F.eps > 0.0))
    throw std::invalid_argument("eddy_viscosity: eps must be positive (singular closure)");
  return c_mu_tilde * F.k * F.k / F.eps;
}

double sigma_eq(const FluidField& F, double sigma0, double c_k) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma_eq: sigma0 must be > 0");
  if (c_k < 0.0) throw std::invalid_argument("sigma_eq: c_k must be >= 0");
  return sigma0 / (1.0 + c_k * F.k);
}

SigmaClosure make_sigma_eq(double sigma0, double c_k) {
  return [sigma0, c_k](const FluidField& F) { return sigma_eq(F, sigma0, c_k); };
}

ColumnField load_column_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_column_field: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_column_field: empty file " + path);
  // Tolerate whitespace/CR around the header.
  std::string header = line;
  header.erase(std::remove_if(header.begin(), header.end(),
                              [](char c) { return c == ' ' || c == '\r'; }),
               header.end());
  if (header != "z,u,v,w,S,T,k,eps,pH,O")
    throw std::runtime_error("load_column_field: bad header in " + path);
  ColumnField col;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 10)
      throw std::runtime_error("load_column_field: expected 10 columns at line " +
                               std::to_string(lineno));
    col.z_nodes.push_back(vals[0]);
    FluidField f;
    f.u = vals[1];
    f.v = vals[2];
    f.w = vals[3];
    f.S = vals[4];
    f.T = vals[5];
    f.k = vals[6];
    f.eps = vals[7];
    f.pH = vals[8];
    f.O = vals[9];
    col.fields.push_back(f);
  }
  col.validate();
  return col;
}

}  // namespace flocbal
