#pragma once
/// @file relaxer.hpp
/// Bilinear grid discretization of the singularly perturbed multiwell energy
/// and its numerical minimization under Dirichlet data.
///
/// Nodes carry displacements (linear mode) or deformations (nonlinear mode).
/// Each cell gets the gradient of the bilinear interpolant at its centre.  The
/// surface term is an isotropic Huber total variation of that cell field,
/// taken at interior grid nodes from centred differences of the four
/// surrounding cells: huber(sqrt(|dx G|^2 + |dy G|^2), delta) * h.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "martenscale/microstructure.hpp"

namespace martenscale {

struct Grid {
  int nx = 0, ny = 0;
  double h = 0.0;
  Vec2 origin;
  /// Cell (i, j) at index j * nx + i; inside iff it meets the domain interior.
  std::vector<char> mask;
  /// Domain area fraction of each cell.
  std::vector<double> weight;
  /// Node (i, j) at index j * (nx + 1) + i; free iff strictly inside the domain.
  std::vector<char> free;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t nodes() const { return static_cast<std::size_t>(nx + 1) * (ny + 1); }
  std::size_t cell_index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  std::size_t node_index(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
  Vec2 node(int i, int j) const { return origin + Vec2{i * h, j * h}; }
  Vec2 node(std::size_t k) const;
  Vec2 cell_center(int i, int j) const { return origin + Vec2{(i + 0.5) * h, (j + 0.5) * h}; }
};

/// Square cells, n of them along the longer side of the bounding box.
Grid make_grid(const Polygon& domain, int n);

struct DiscreteField {
  std::shared_ptr<const Grid> grid;
  std::vector<Vec2> u;       ///< nodal values
  std::vector<char> fixed;   ///< Dirichlet nodes
  FieldMode mode = FieldMode::Displacement;
  /// Nodes filled by nearest-cell extension during interpolation.
  std::size_t extrapolated = 0;

  /// Gradient of the bilinear interpolant at the centre of cell (i, j).
  Mat2 cell_gradient(int i, int j) const;
};

struct RelaxConfig {
  double huber_delta = 1e-3;
  int max_iters = 200;
  double tol = 1e-8;
  int restarts = 8;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Perturbation amplitude for restarts, in units of h.
  double perturbation = 0.25;

  void validate() const;
};

/// 1e-3 times the largest well norm.
double default_huber_delta(const WellSet& w);

double huber(double r, double delta);

EnergyBreakdown discrete_energy(const DiscreteField& f, const WellSet& w, double eps, const RelaxConfig& cfg);

/// Dirichlet data: the value prescribed at a fixed node position.
using BoundaryData = std::function<Vec2(const Vec2&)>;

/// Zero displacement (linear) or the identity (nonlinear).
BoundaryData austenite_data(FieldMode mode);

/// Field with fixed = !grid.free and every node set from `bc`.
DiscreteField make_field(std::shared_ptr<const Grid> g, FieldMode mode, const BoundaryData& bc);

struct RelaxResult {
  DiscreteField field;
  EnergyBreakdown energy;
  double total = 0.0;
  bool converged = false;
  std::uint64_t best_seed = 0;
  int best_restart = 0;
  /// Objective after every accepted iteration of the winning restart.
  std::vector<double> trace;
  /// Final objective of every restart, in restart order.
  std::vector<double> restart_totals;
  /// Objective of each warm start after applying the Dirichlet data.
  std::vector<double> warm_totals;
};

/// Restart 0 starts from the first warm start (or the austenite field),
/// restart 1 from the austenite field, later restarts from seeded
/// perturbations of those, alternating.  Warm starts have their fixed nodes
/// overwritten by `bc`.
RelaxResult minimize(std::shared_ptr<const Grid> g, const BoundaryData& bc, const WellSet& w, double eps,
                     const RelaxConfig& cfg, const std::vector<DiscreteField>& warm = {});

/// Nodal sampling of a piecewise-affine field.  Nodes outside every cell take
/// the value of the nearest cell's affine map and are counted in `extrapolated`.
DiscreteField interpolate(const PAField& f, std::shared_ptr<const Grid> g);
DiscreteField interpolate(const std::function<Vec2(const Vec2&)>& f, std::shared_ptr<const Grid> g, FieldMode mode);

/// Differenced slice energy on the cell column containing x: well distance
/// integrated over the overlap with [y0, y1] plus the variation of the cell
/// gradients along the column.
double slice_energy(const DiscreteField& f, const WellSet& w, double x, double y0, double y1);

}  // namespace martenscale
