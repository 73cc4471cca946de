#include "flocbal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flocbal/quadrature.hpp"

namespace flocbal {

LambdaGrid::LambdaGrid(std::vector<double> edges, Spacing spacing)
    : edges_(std::move(edges)), spacing_(spacing) {
  if (edges_.size() < 2) throw std::invalid_argument("LambdaGrid: need at least one cell");
  if (!(edges_.front() > 0.0))
    throw std::invalid_argument("LambdaGrid: lambda_min must be positive");
  for (std::size_t k = 1; k < edges_.size(); ++k)
    if (!(edges_[k] > edges_[k - 1]))
      throw std::invalid_argument("LambdaGrid: edges must be strictly increasing");
}

int LambdaGrid::bin_index(double lambda) const {
  if (lambda < lambda_min() || lambda > lambda_max())
    throw std::out_of_range("LambdaGrid::bin_index: lambda outside the grid");
  if (lambda == lambda_max()) return size() - 1;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), lambda);
  return static_cast<int>(it - edges_.begin()) - 1;
}

GridPtr make_grid(double lambda_min, double lambda_max, int bins, Spacing spacing) {
  if (!(lambda_min > 0.0)) throw std::invalid_argument("make_grid: lambda_min must be > 0");
  if (!(lambda_max > lambda_min))
    throw std::invalid_argument("make_grid: lambda_max must exceed lambda_min");
  if (bins < 1) throw std::invalid_argument("make_grid: need at least one bin");
  std::vector<double> edges(bins + 1);
  edges.front() = lambda_min;
  edges.back() = lambda_max;
  switch (spacing) {
    case Spacing::uniform: {
      const double h = (lambda_max - lambda_min) / bins;
      for (int k = 1; k < bins; ++k) edges[k] = lambda_min + h * k;
      break;
    }
    case Spacing::geometric: {
      const double ratio = std::pow(lambda_max / lambda_min, 1.0 / bins);
      for (int k = 1; k < bins; ++k) edges[k] = lambda_min * std::pow(ratio, k);
      break;
    }
    case Spacing::explicit_edges:
      throw std::invalid_argument("make_grid: explicit spacing needs an edge list");
  }
  return std::make_shared<LambdaGrid>(std::move(edges), spacing);
}

GridPtr make_grid(std::vector<double> edges) {
  return std::make_shared<LambdaGrid>(std::move(edges), Spacing::explicit_edges);
}

BinDensity project(const std::function<double(double)>& rho_fn, GridPtr grid,
                   int quad_order, ProjectStats* stats) {
  BinDensity out(std::move(grid));
  for (int i = 0; i < out.grid->size(); ++i) {
    double avg =
        integrate(rho_fn, out.grid->lo(i), out.grid->hi(i), quad_order) /
        out.grid->width(i);
    if (avg < 0.0) {
      if (stats) ++stats->clipped_cells;
      avg = 0.0;
    }
    out.values[i] = avg;
  }
  return out;
}

double total_mass(const BinDensity& rho) {
  double sum = 0.0;
  for (int i = 0; i < rho.grid->size(); ++i)
    sum += rho.grid->width(i) * rho.values[i];
  return sum;
}

double number_total(const BinDensity& rho,
                    const std::function<double(double)>& mass_of,
                    int quad_order) {
  double sum = 0.0;
  for (int i = 0; i < rho.grid->size(); ++i) {
    if (rho.values[i] == 0.0) continue;
    sum += rho.values[i] *
           integrate([&](double lam) { return 1.0 / mass_of(lam); },
                     rho.grid->lo(i), rho.grid->hi(i), quad_order);
  }
  return sum;
}

double weighted_mass(const BinDensity& rho,
                     const std::function<double(double)>& f, int quad_order) {
  double sum = 0.0;
  for (int i = 0; i < rho.grid->size(); ++i) {
    if (rho.values[i] == 0.0) continue;
    sum += rho.values[i] * integrate(f, rho.grid->lo(i), rho.grid->hi(i), quad_order);
  }
  return sum;
}

}  // namespace flocbal
