#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace flocbal {

enum class Spacing { uniform, geometric, explicit_edges };

// Partition of [lambda_min, lambda_max] into I half-open cells [edge_i, edge_{i+1});
// lambda_max itself maps to the last cell so bin lookup is total on the domain.
class LambdaGrid {
 public:
  LambdaGrid(std::vector<double> edges, Spacing spacing);

  int size() const { return static_cast<int>(edges_.size()) - 1; }
  double lo(int i) const { return edges_[i]; }
  double hi(int i) const { return edges_[i + 1]; }
  double width(int i) const { return edges_[i + 1] - edges_[i]; }
  double mid(int i) const { return 0.5 * (edges_[i] + edges_[i + 1]); }
  double lambda_min() const { return edges_.front(); }
  double lambda_max() const { return edges_.back(); }
  Spacing spacing() const { return spacing_; }
  const std::vector<double>& edges() const { return edges_; }

  // Cell index of lambda; throws std::out_of_range outside [lambda_min, lambda_max].
  int bin_index(double lambda) const;

 private:
  std::vector<double> edges_;
  Spacing spacing_;
};

using GridPtr = std::shared_ptr<const LambdaGrid>;

GridPtr make_grid(double lambda_min, double lambda_max, int bins, Spacing spacing);
GridPtr make_grid(std::vector<double> edges);

// Piecewise-constant nonnegative density: rho(lambda) = values[i] on cell i.
struct BinDensity {
  GridPtr grid;
  std::vector<double> values;

  BinDensity() = default;
  explicit BinDensity(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(grid->size(), fill) {}
};

struct ProjectStats {
  int clipped_cells = 0;  // cells whose quadrature average came out negative
};

// Cell averages of rho_fn by per-cell Gauss-Legendre of order quad_order.
// Negative averages are clipped to 0 and counted in stats.
BinDensity project(const std::function<double(double)>& rho_fn, GridPtr grid,
                   int quad_order = 4, ProjectStats* stats = nullptr);

// Exact lambda-integral of the piecewise-constant density: sum_i |cell_i| rho^i.
double total_mass(const BinDensity& rho);

// integral of rho/m by per-cell quadrature; mass_of(lambda) must be > 0.
double number_total(const BinDensity& rho,
                    const std::function<double(double)>& mass_of,
                    int quad_order = 4);

// integral of rho*f by per-cell quadrature.
double weighted_mass(const BinDensity& rho,
                     const std::function<double(double)>& f,
                     int quad_order = 4);

}  // namespace flocbal
