#include "flocbal/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace flocbal {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strips a trailing comment that starts at an unquoted '#' or ';'.
std::string strip_comment(const std::string& s) {
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '#' || s[i] == ';') return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw std::runtime_error("config line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

bool ConfigMap::has(const std::string& key) const { return entries.count(key) != 0; }

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  const std::string& v = it->second;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(x))
    throw std::runtime_error("key '" + key + "': expected a finite number, got '" + v + "'");
  return x;
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
  auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  const std::string& v = it->second;
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("key '" + key + "': expected an integer, got '" + v + "'");
  return x;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (section.empty()) fail(line_no, "key '" + key + "' outside any [section]");
    std::string full = section + "." + key;
    if (cfg.entries.count(full)) fail(line_no, "duplicate key '" + full + "'");
    cfg.entries[full] = value;
  }
  return cfg;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

// Schema: every accepted key, so that typos surface as violations instead of
// silently falling back to defaults.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid.lambda_min", "grid.lambda_max", "grid.bins", "grid.spacing",
      "kernels.d", "kernels.N_d", "kernels.aggregation", "kernels.beta0",
      "kernels.nu_w", "kernels.fragmentation", "kernels.k_f", "kernels.p",
      "kernels.breakup",
      "relaxation.T_eq", "relaxation.sigma0", "relaxation.c_k",
      "relaxation.weight", "relaxation.lambda_bio", "relaxation.M_min",
      "relaxation.M_bio",
      "scenario.mode", "scenario.t_end", "scenario.dt", "scenario.operator",
      "initial.shape", "initial.mass", "initial.mean", "initial.width",
      "column.nz", "column.depth", "column.settling.w0",
      "column.settling.exponent", "column.settling.r_gel",
      "column.settling.power", "column.field_file", "column.r0",
      "fluid.u", "fluid.v", "fluid.w", "fluid.S", "fluid.T", "fluid.k",
      "fluid.eps", "fluid.pH", "fluid.O",
      "output.stride", "output.seed", "output.snapshots", "output.budget_tol",
  };
  return keys;
}

bool one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return true;
  return false;
}

}  // namespace

std::vector<std::string> validate_config(const ConfigMap& cfg) {
  std::vector<std::string> out;
  auto bad = [&](const std::string& msg) { out.push_back(msg); };

  for (const auto& [key, value] : cfg.entries) {
    (void)value;
    if (!known_keys().count(key)) bad("unknown key '" + key + "'");
  }

  // Numeric fetch that converts parse failures into violations. Returns the
  // fallback on any problem so dependent checks can still run.
  auto num = [&](const std::string& key, double fallback) {
    try {
      return cfg.get_double(key, fallback);
    } catch (const std::exception& e) {
      bad(e.what());
      return fallback;
    }
  };
  auto integer = [&](const std::string& key, long long fallback) {
    try {
      return cfg.get_int(key, fallback);
    } catch (const std::exception& e) {
      bad(e.what());
      return fallback;
    }
  };
  auto require = [&](const std::string& key) {
    if (!cfg.has(key)) bad("missing required key '" + key + "'");
  };

  // --- grid ---
  require("grid.lambda_min");
  require("grid.lambda_max");
  require("grid.bins");
  double lmin = num("grid.lambda_min", 1.0);
  double lmax = num("grid.lambda_max", 2.0);
  if (lmin <= 0) bad("grid.lambda_min must be > 0");
  if (lmax <= lmin) bad("grid.lambda_max must exceed grid.lambda_min");
  long long bins = integer("grid.bins", 1);
  if (bins < 1) bad("grid.bins must be >= 1");
  if (bins > 100000) bad("grid.bins must be <= 100000");
  std::string spacing = cfg.get("grid.spacing", "geometric");
  if (!one_of(spacing, {"uniform", "geometric"}))
    bad("grid.spacing must be 'uniform' or 'geometric', got '" + spacing + "'");

  // --- kernels ---
  double d = num("kernels.d", 1.0);
  if (d < 1.0) bad("kernels.d must be >= 1");
  if (num("kernels.N_d", 1.0) <= 0) bad("kernels.N_d must be > 0");
  std::string agg = cfg.get("kernels.aggregation", "none");
  if (!one_of(agg, {"none", "constant", "sum", "shear"}))
    bad("kernels.aggregation: unknown family '" + agg + "'");
  std::string frag = cfg.get("kernels.fragmentation", "none");
  if (!one_of(frag, {"none", "constant", "power"}))
    bad("kernels.fragmentation: unknown family '" + frag + "'");
  std::string breakup = cfg.get("kernels.breakup", "uniform");
  if (!one_of(breakup, {"uniform", "uniform_mass"}))
    bad("kernels.breakup: unknown family '" + breakup + "'");
  if (num("kernels.beta0", 1.0) < 0) bad("kernels.beta0 must be >= 0");
  if (num("kernels.k_f", 0.0) < 0) bad("kernels.k_f must be >= 0");
  if (num("kernels.nu_w", 1e-6) <= 0) bad("kernels.nu_w must be > 0");

  // --- relaxation ---
  double t_eq = num("relaxation.T_eq", 1.0);
  if (t_eq <= 0) bad("relaxation.T_eq must be > 0");
  if (num("relaxation.sigma0", 1.0) <= 0) bad("relaxation.sigma0 must be > 0");
  if (num("relaxation.c_k", 0.0) < 0) bad("relaxation.c_k must be >= 0");
  std::string weight = cfg.get("relaxation.weight", "none");
  if (!one_of(weight, {"none", "bio"}))
    bad("relaxation.weight must be 'none' or 'bio', got '" + weight + "'");
  if (weight == "bio") {
    if (num("relaxation.lambda_bio", 0.0) < 0) bad("relaxation.lambda_bio must be >= 0");
    if (num("relaxation.M_min", 1.0) <= 0) bad("relaxation.M_min must be > 0");
    if (num("relaxation.M_bio", 0.0) < 0) bad("relaxation.M_bio must be >= 0");
  }

  // --- scenario ---
  require("scenario.mode");
  require("scenario.t_end");
  require("scenario.dt");
  std::string mode = cfg.get("scenario.mode", "");
  if (!mode.empty() && !one_of(mode, {"zero_d_relax", "zero_d_aggfrag", "column"}))
    bad("scenario.mode must be zero_d_relax, zero_d_aggfrag or column, got '" + mode + "'");
  if (num("scenario.t_end", 1.0) < 0) bad("scenario.t_end must be >= 0");
  if (num("scenario.dt", 1.0) <= 0) bad("scenario.dt must be > 0");
  std::string op = cfg.get("scenario.operator", "");
  if (!op.empty()) {
    if (!one_of(op, {"relax", "relax_weighted", "gbar"}))
      bad("scenario.operator must be relax, relax_weighted or gbar, got '" + op + "'");
    if (mode == "zero_d_relax" && op == "gbar")
      bad("scenario.operator 'gbar' is not a relaxation operator; use mode zero_d_aggfrag");
    if ((mode == "zero_d_aggfrag" || mode == "column") && op != "gbar")
      bad("scenario.mode '" + mode + "' runs the sectional operator; scenario.operator must be 'gbar'");
  }
  if (mode == "zero_d_relax" && op == "relax_weighted" && weight == "none")
    bad("scenario.operator 'relax_weighted' requires relaxation.weight = bio");

  // --- initial ---
  std::string shape = cfg.get("initial.shape", "equilibrium");
  if (!one_of(shape, {"equilibrium", "gamma", "uniform", "bump"}))
    bad("initial.shape must be equilibrium, gamma, uniform or bump, got '" + shape + "'");
  if (num("initial.mass", 1.0) <= 0) bad("initial.mass must be > 0");
  double width = num("initial.width", 0.25 * (lmax - lmin));
  if (width <= 0) bad("initial.width must be > 0");
  if (shape == "uniform" || shape == "bump") {
    double mean = num("initial.mean", 0.5 * (lmin + lmax));
    if (mean + 0.5 * width <= lmin || mean - 0.5 * width >= lmax)
      bad("initial distribution support [mean-width/2, mean+width/2] misses the grid");
  }

  // --- column ---
  if (mode == "column") {
    require("column.depth");
    if (num("column.depth", 1.0) <= 0) bad("column.depth must be > 0");
    long long nz = integer("column.nz", 20);
    if (nz < 1) bad("column.nz must be >= 1");
    if (nz > 100000) bad("column.nz must be <= 100000");
    if (num("column.settling.w0", 0.0) < 0) bad("column.settling.w0 must be >= 0");
    if (num("column.settling.r_gel", 1.0) <= 0) bad("column.settling.r_gel must be > 0");
    if (num("column.settling.power", 1.0) < 0) bad("column.settling.power must be >= 0");
    if (cfg.has("column.r0") && num("column.r0", 1.0) <= 0) bad("column.r0 must be > 0");
  }

  // --- fluid ---
  if (num("fluid.S", 0.0) < 0) bad("fluid.S must be >= 0");
  if (num("fluid.T", 0.0) < -273.15) bad("fluid.T must be above absolute zero");
  double k = num("fluid.k", 0.0);
  double eps = num("fluid.eps", 0.0);
  if (k < 0) bad("fluid.k must be >= 0");
  if (eps < 0) bad("fluid.eps must be >= 0");
  if (num("fluid.pH", 0.0) < 0) bad("fluid.pH must be >= 0");
  if (num("fluid.O", 0.0) < 0) bad("fluid.O must be >= 0");
  if (mode == "column" && k > 0 && eps <= 0)
    bad("fluid.eps must be > 0 when fluid.k > 0 (eddy viscosity is k^2/eps-based)");
  if ((agg == "shear" || frag == "power") && eps < 0)
    bad("fluid.eps must be >= 0 for shear/power kernels");

  // --- output ---
  if (integer("output.stride", 1) < 1) bad("output.stride must be >= 1");
  long long seed = integer("output.seed", 12345);
  if (seed < 0) bad("output.seed must be >= 0");
  if (num("output.budget_tol", 1e-9) <= 0) bad("output.budget_tol must be > 0");
  std::string snaps = cfg.get("output.snapshots", "");
  if (!snaps.empty()) {
    std::istringstream ss(snaps);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) {
        bad("output.snapshots: empty entry in list");
        continue;
      }
      char* end = nullptr;
      double t = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(t) || t < 0)
        bad("output.snapshots: expected nonnegative times, got '" + tok + "'");
    }
  }

  return out;
}

}  // namespace flocbal
