#include "flocbal/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flocbal/quadrature.hpp"
#include "flocbal/rng.hpp"

namespace flocbal {

namespace {

double dth_root(double x, double d) { return std::pow(std::max(x, 0.0), 1.0 / d); }

// Fixed-order Gauss-Legendre over [a,b] with the interior cut points in
// `cuts` inserted, so each smooth piece gets its own panels.
template <class F>
double gl_segments(const F& f, double a, double b, std::vector<double> cuts,
                   int order) {
  if (!(b > a)) return 0.0;
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts{a};
  for (double c : cuts)
    if (c > pts.back() && c < b) pts.push_back(c);
  pts.push_back(b);

  const QuadRule& rule = gauss_legendre(order);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double mid = 0.5 * (pts[s] + pts[s + 1]);
    const double half = 0.5 * (pts[s + 1] - pts[s]);
    if (!(half > 0.0)) continue;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q)
      acc += rule.w[q] * f(mid + half * rule.x[q]);
    total += half * acc;
  }
  return total;
}

}  // namespace

CoeffTable precompute(const KernelSet& ks, const FluidField& F, GridPtr grid,
                      int quad_order, TableMode mode) {
  if (!grid) throw std::invalid_argument("precompute: null grid");
  if (grid->lambda_min() != ks.lambda_min())
    throw std::invalid_argument(
        "precompute: grid lambda_min differs from the kernel set's");
  if (quad_order < 1)
    throw std::invalid_argument("precompute: quad_order must be >= 1");

  const int I = grid->size();
  const double d = ks.dim();
  const double lmin = ks.lambda_min();
  const double lmax = grid->lambda_max();
  const double two_pow = std::pow(2.0, 1.0 / d);
  const double guard = two_pow * lmin;  // B_f switches on at twice the minimal mass

  CoeffTable tab;
  tab.grid = grid;
  tab.mode = mode;
  tab.quad_order = quad_order;
  tab.d = d;
  tab.kernel_hash = ks.family_hash(F);
  tab.b_lf.assign(I, 0.0);
  tab.b_la.assign(static_cast<std::size_t>(I) * I, 0.0);
  tab.b_gf.assign(static_cast<std::size_t>(I) * I, 0.0);
  tab.ga_offset.push_back(0);

  std::vector<double> edge_pow(I + 1);
  for (int e = 0; e <= I; ++e) edge_pow[e] = std::pow(grid->edges()[e], d);
  const double lmin_d = edge_pow[0];
  const double lmax_d = edge_pow[I];

  const bool any_frag = !(ks.families() && ks.families()->frag == FragKernel::none);
  const bool any_agg = !(ks.families() && ks.families()->agg == AggKernel::none);

  // Fragmenting part of a cell: [guard, hi). When a grid edge lands within a
  // few ulps of the guard, that part can be a rounding sliver whose loss
  // integral picks up a ~1e-16-scale rate while the matching gain support is
  // a sub-ulp corner of the (fragment, parent) domain that quadrature cannot
  // see at all. Activity confined below the rounding resolution of the cell
  // is dropped, loss and gain together.
  const auto frag_resolvable = [&](int j) {
    const double frag_lo = std::max(grid->lo(j), guard);
    return grid->hi(j) - frag_lo >
           16.0 * std::numeric_limits<double>::epsilon() * grid->hi(j);
  };

  // Mean fragmentation rate per cell.
  if (any_frag) {
    for (int i = 0; i < I; ++i) {
      if (!frag_resolvable(i)) continue;
      tab.b_lf[i] = gl_segments([&](double lam) { return ks.b_f(F, lam); },
                                grid->lo(i), grid->hi(i), {guard}, quad_order) /
                    grid->width(i);
    }
  }

  // Aggregation loss coefficients.
  if (any_agg) {
    for (int i = 0; i < I; ++i) {
      for (int j = 0; j < I; ++j) {
        const double v = gl_segments(
            [&](double lam) {
              return gl_segments(
                  [&](double lp) { return ks.b_a(F, lam, lp) / ks.mass_of(lp); },
                  grid->lo(j), grid->hi(j), {}, quad_order);
            },
            grid->lo(i), grid->hi(i), {}, quad_order);
        tab.b_la[static_cast<std::size_t>(i) * I + j] =
            v / (grid->width(i) * grid->width(j));
      }
    }
  }

  // Fragmentation gain: destination cell i, parent cell j. The outer cuts are
  // the sizes where an inner breakpoint crosses a parent-cell edge; the inner
  // cuts are the branch switch (smaller vs larger fragment), the size below
  // which the complement would drop under lambda_min, and the B_f guard.
  if (any_frag) {
    for (int j = 0; j < I; ++j) {
      if (!frag_resolvable(j)) continue;  // also covers hi(j) below the guard
      const std::vector<double> outer_cuts = {
          grid->lo(j) / two_pow, grid->hi(j) / two_pow,
          dth_root(edge_pow[j] - lmin_d, d), dth_root(edge_pow[j + 1] - lmin_d, d)};
      for (int i = 0; i < I; ++i) {
        if (grid->lo(i) >= grid->hi(j)) break;  // fragments are smaller than parents
        const double v = gl_segments(
            [&](double lam) {
              const double lam_d = std::pow(lam, d);
              return ks.mass_of(lam) *
                     gl_segments(
                         [&](double lp) {
                           const double bf = ks.b_f(F, lp);
                           if (bf == 0.0) return 0.0;
                           double kernel;
                           if (std::pow(lp, d) >= 2.0 * lam_d) {
                             kernel = ks.b_e(F, lp, lam);
                           } else {
                             if (lam > lp || lam < ks.max_fragment(lp)) return 0.0;
                             kernel = ks.b_e_tilde(F, lp, lam);
                           }
                           return bf / ks.mass_of(lp) * kernel;
                         },
                         grid->lo(j), grid->hi(j),
                         {two_pow * lam, dth_root(lam_d + lmin_d, d), guard},
                         quad_order);
            },
            grid->lo(i), grid->hi(i), outer_cuts, quad_order);
        tab.b_gf[static_cast<std::size_t>(i) * I + j] =
            v / (grid->width(i) * grid->width(j));
      }
    }
  }

  // Aggregation gain per unordered source pair (k <= l). The inner variable
  // runs over the lower cell k so the complement size is formed by
  // subtracting the smaller d-th power from the larger one.
  if (any_agg) {
    for (int k = 0; k < I; ++k) {
      for (int l = k; l < I; ++l) {
        const double fac = (k == l) ? 1.0 : 2.0;
        const double p_lo_pow = edge_pow[k] + edge_pow[l];
        const double p_hi_pow = edge_pow[k + 1] + edge_pow[l + 1];
        const double p_lo = dth_root(p_lo_pow, d);
        const double p_hi = dth_root(p_hi_pow, d);
        const std::vector<double> corners = {
            p_lo, dth_root(edge_pow[k] + edge_pow[l + 1], d),
            dth_root(edge_pow[k + 1] + edge_pow[l], d), p_hi};

        tab.ga_pair_k.push_back(static_cast<std::uint32_t>(k));
        tab.ga_pair_l.push_back(static_cast<std::uint32_t>(l));

        if (p_lo < lmax) {
          const double cap = std::min(p_hi, lmax);
          for (int i = grid->bin_index(p_lo); i < I && grid->lo(i) < cap; ++i) {
            const double a = std::max(grid->lo(i), p_lo);
            const double b = std::min(grid->hi(i), cap);
            if (!(b > a)) continue;
            const double v = gl_segments(
                [&](double lam) {
                  const double lam_d = std::pow(lam, d);
                  const double lo_q = std::max(edge_pow[k], lam_d - edge_pow[l + 1]);
                  const double hi_q = std::min(edge_pow[k + 1], lam_d - edge_pow[l]);
                  if (!(hi_q > lo_q)) return 0.0;
                  const double inner = gl_segments(
                      [&](double lp) {
                        const double comp = dth_root(lam_d - std::pow(lp, d), d);
                        return ks.b_a(F, lp, comp) /
                               (ks.mass_of(lp) * ks.mass_of(comp) *
                                std::pow(comp, d - 1.0));
                      },
                      dth_root(lo_q, d), dth_root(hi_q, d), {}, quad_order);
                  return 0.5 * ks.mass_of(lam) * std::pow(lam, d - 1.0) * inner;
                },
                a, b, corners, quad_order);
            const double coeff = fac * v / grid->width(i);
            if (coeff != 0.0) {
              tab.ga_cell.push_back(static_cast<std::uint32_t>(i));
              tab.ga_value.push_back(coeff);
            }
          }
        }

        // Mass produced past the top edge: redirected into the top cell.
        double redirect = 0.0;
        if (p_hi_pow > lmax_d) {
          redirect =
              fac *
              gl_segments(
                  [&](double lp) {
                    const double floor_d = lmax_d - std::pow(lp, d);
                    const double a2 = std::max(grid->lo(l), dth_root(floor_d, d));
                    const double b2 = grid->hi(l);
                    if (!(b2 > a2)) return 0.0;
                    return gl_segments(
                        [&](double lq) {
                          return 0.5 *
                                 (1.0 / ks.mass_of(lp) + 1.0 / ks.mass_of(lq)) *
                                 ks.b_a(F, lp, lq);
                        },
                        a2, b2, {}, quad_order);
                  },
                  grid->lo(k), grid->hi(k),
                  {dth_root(lmax_d - edge_pow[l + 1], d),
                   dth_root(lmax_d - edge_pow[l], d)},
                  quad_order);
        }
        tab.ga_redirect.push_back(redirect);
        tab.ga_offset.push_back(static_cast<std::uint32_t>(tab.ga_cell.size()));
      }
    }
  }

  if (mode == TableMode::corrected) {
    // One scalar per fragmentation source cell: total gain = total loss.
    for (int j = 0; j < I; ++j) {
      double denom = 0.0;
      for (int i = 0; i < I; ++i)
        denom += grid->width(i) * tab.b_gf[static_cast<std::size_t>(i) * I + j];
      const double target = tab.b_lf[j];
      if (target == 0.0) {
        if (denom != 0.0)
          for (int i = 0; i < I; ++i)
            tab.b_gf[static_cast<std::size_t>(i) * I + j] = 0.0;
        continue;
      }
      if (!(denom > 0.0))
        throw std::runtime_error(
            "precompute: cannot balance fragmentation gain for a source cell");
      const double s = target / denom;
      for (int i = 0; i < I; ++i)
        tab.b_gf[static_cast<std::size_t>(i) * I + j] *= s;
    }
    // One scalar per aggregation source pair (redirect rescaled along).
    for (std::size_t p = 0; p < tab.ga_pair_k.size(); ++p) {
      const int k = static_cast<int>(tab.ga_pair_k[p]);
      const int l = static_cast<int>(tab.ga_pair_l[p]);
      const double wk = grid->width(k), wl = grid->width(l);
      const double target =
          (k == l) ? wk * wk * tab.b_la[static_cast<std::size_t>(k) * I + k]
                   : wk * wl *
                         (tab.b_la[static_cast<std::size_t>(k) * I + l] +
                          tab.b_la[static_cast<std::size_t>(l) * I + k]);
      double denom = tab.ga_redirect[p];
      for (std::uint32_t e = tab.ga_offset[p]; e < tab.ga_offset[p + 1]; ++e)
        denom += grid->width(static_cast<int>(tab.ga_cell[e])) * tab.ga_value[e];
      if (target == 0.0) {
        for (std::uint32_t e = tab.ga_offset[p]; e < tab.ga_offset[p + 1]; ++e)
          tab.ga_value[e] = 0.0;
        tab.ga_redirect[p] = 0.0;
        continue;
      }
      if (!(denom > 0.0))
        throw std::runtime_error(
            "precompute: cannot balance aggregation gain for a source pair");
      const double s = target / denom;
      for (std::uint32_t e = tab.ga_offset[p]; e < tab.ga_offset[p + 1]; ++e)
        tab.ga_value[e] *= s;
      tab.ga_redirect[p] *= s;
    }
  }

  return tab;
}

GbarResult apply_gbar_detailed(const CoeffTable& tab, const BinDensity& rho) {
  const GridPtr& g = tab.grid;
  if (!rho.grid || (rho.grid != g && rho.grid->edges() != g->edges()))
    throw std::invalid_argument("apply_gbar: density grid differs from table grid");
  const int I = g->size();

  std::vector<double> w(I);
  for (int i = 0; i < I; ++i) w[i] = g->width(i) * rho.values[i];

  std::vector<double> gain(I, 0.0), loss(I, 0.0);
  for (int i = 0; i < I; ++i) {
    const double* la = &tab.b_la[static_cast<std::size_t>(i) * I];
    const double* gf = &tab.b_gf[static_cast<std::size_t>(i) * I];
    double s_la = 0.0, s_gf = 0.0;
    for (int j = 0; j < I; ++j) {
      s_la += la[j] * w[j];
      s_gf += gf[j] * w[j];
    }
    loss[i] = tab.b_lf[i] * rho.values[i] + rho.values[i] * s_la;
    gain[i] = s_gf;
  }

  double redirected = 0.0;
  for (std::size_t p = 0; p < tab.ga_pair_k.size(); ++p) {
    const double ww =
        rho.values[tab.ga_pair_k[p]] * rho.values[tab.ga_pair_l[p]];
    if (ww == 0.0) continue;
    for (std::uint32_t e = tab.ga_offset[p]; e < tab.ga_offset[p + 1]; ++e)
      gain[tab.ga_cell[e]] += tab.ga_value[e] * ww;
    redirected += tab.ga_redirect[p] * ww;
  }
  if (I > 0) gain[I - 1] += redirected / g->width(I - 1);

  GbarResult res;
  res.rhs = BinDensity(rho.grid);
  res.redirected_rate = redirected;
  for (int i = 0; i < I; ++i) {
    res.rhs.values[i] = gain[i] - loss[i];
    res.activity += g->width(i) * (gain[i] + loss[i]);
  }
  return res;
}

BinDensity apply_gbar(const CoeffTable& tab, const BinDensity& rho) {
  return apply_gbar_detailed(tab, rho).rhs;
}

StepResult euler_step(const CoeffTable& tab, const BinDensity& rho, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
  const int I = tab.size();
  for (int n = 0; n <= 30; ++n) {
    const long steps = 1L << n;
    const double h = dt / static_cast<double>(steps);
    BinDensity cur = rho;
    double redirected = 0.0;
    bool ok = true;
    for (long s = 0; s < steps && ok; ++s) {
      const GbarResult r = apply_gbar_detailed(tab, cur);
      for (int i = 0; i < I; ++i) {
        cur.values[i] += h * r.rhs.values[i];
        if (cur.values[i] < 0.0) ok = false;
      }
      if (ok) redirected += h * r.redirected_rate;
    }
    if (ok) return {std::move(cur), redirected, static_cast<int>(steps)};
  }
  throw std::runtime_error(
      "euler_step: positivity not reached within 30 sub-step halvings");
}

std::string ConservationReport::summary() const {
  std::ostringstream os;
  os << "discrete mass balance over " << trials
     << " random densities: max relative residual = " << max_residual;
  return os.str();
}

ConservationReport check_conservation(const CoeffTable& tab, int trials,
                                      std::uint64_t seed) {
  Rng rng(seed);
  ConservationReport rep;
  rep.trials = trials;
  const int I = tab.size();
  for (int t = 0; t < trials; ++t) {
    BinDensity rho(tab.grid);
    for (int i = 0; i < I; ++i)
      rho.values[i] = (rng.uniform() < 0.2) ? 0.0 : rng.uniform(0.0, 2.0);
    const GbarResult r = apply_gbar_detailed(tab, rho);
    double sum = 0.0;
    for (int i = 0; i < I; ++i) sum += tab.grid->width(i) * r.rhs.values[i];
    const double rel =
        r.activity > 0.0 ? std::abs(sum) / r.activity : std::abs(sum);
    rep.max_residual = std::max(rep.max_residual, rel);
  }
  return rep;
}

namespace {

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void put_vec(std::ofstream& os, const std::vector<T>& v) {
  if (!v.empty())
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
}

template <class T>
void get_vec(std::ifstream& is, std::vector<T>& v, std::size_t n) {
  v.resize(n);
  if (n)
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(T)));
}

constexpr std::uint32_t kTableVersion = 1;

}  // namespace

void save_table(const CoeffTable& tab, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_table: cannot open " + path);
  os.write("FBCT", 4);
  put(os, kTableVersion);
  put(os, static_cast<std::uint32_t>(tab.size()));
  put(os, tab.d);
  put(os, tab.kernel_hash);
  put(os, static_cast<std::uint32_t>(tab.mode));
  put(os, static_cast<std::uint32_t>(tab.quad_order));
  put_vec(os, tab.grid->edges());
  put_vec(os, tab.b_lf);
  put_vec(os, tab.b_la);
  put_vec(os, tab.b_gf);
  put(os, static_cast<std::uint64_t>(tab.ga_pair_k.size()));
  put_vec(os, tab.ga_pair_k);
  put_vec(os, tab.ga_pair_l);
  put(os, static_cast<std::uint64_t>(tab.ga_cell.size()));
  put_vec(os, tab.ga_offset);
  put_vec(os, tab.ga_cell);
  put_vec(os, tab.ga_value);
  put_vec(os, tab.ga_redirect);
  if (!os) throw std::runtime_error("save_table: write failed for " + path);
}

CoeffTable load_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_table: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FBCT", 4) != 0)
    throw std::runtime_error("load_table: bad magic in " + path);
  std::uint32_t version = 0, I32 = 0, mode32 = 0, order32 = 0;
  get(is, version);
  if (version != kTableVersion)
    throw std::runtime_error("load_table: unsupported version in " + path);
  get(is, I32);
  if (I32 == 0 || I32 > 1000000)
    throw std::runtime_error("load_table: corrupt cell count in " + path);
  const std::size_t I = I32;

  CoeffTable tab;
  get(is, tab.d);
  get(is, tab.kernel_hash);
  get(is, mode32);
  get(is, order32);
  if (mode32 > 1) throw std::runtime_error("load_table: corrupt mode in " + path);
  tab.mode = static_cast<TableMode>(mode32);
  tab.quad_order = static_cast<int>(order32);

  std::vector<double> edges;
  get_vec(is, edges, I + 1);
  get_vec(is, tab.b_lf, I);
  get_vec(is, tab.b_la, I * I);
  get_vec(is, tab.b_gf, I * I);
  std::uint64_t npairs = 0, nentries = 0;
  get(is, npairs);
  if (npairs > I * I) throw std::runtime_error("load_table: corrupt pair count in " + path);
  get_vec(is, tab.ga_pair_k, npairs);
  get_vec(is, tab.ga_pair_l, npairs);
  get(is, nentries);
  get_vec(is, tab.ga_offset, npairs ? npairs + 1 : 1);
  get_vec(is, tab.ga_cell, nentries);
  get_vec(is, tab.ga_value, nentries);
  get_vec(is, tab.ga_redirect, npairs);
  if (!is) throw std::runtime_error("load_table: truncated file " + path);
  if (npairs == 0 && tab.ga_offset.empty()) tab.ga_offset.push_back(0);

  tab.grid = make_grid(std::move(edges));
  return tab;
}

}  // namespace flocbal
