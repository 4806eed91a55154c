#pragma once
/// @file microstructure.hpp
/// Cell complexes, continuous piecewise-affine fields, their exact energy,
/// laminates and slice diagnostics.

#include <optional>
#include <string>
#include <vector>

#include "martenscale/algebra2d.hpp"
#include "martenscale/geometry.hpp"
#include "martenscale/wells.hpp"

namespace martenscale {

/// Shared piece of boundary between two cells.  `normal` points from c0 to c1.
struct Interface {
  int c0 = -1;
  int c1 = -1;
  Vec2 p, q;
  Vec2 normal;
  double length = 0.0;
};

/// Part of a cell edge not shared with any other cell.
struct BoundarySegment {
  int cell = -1;
  Vec2 p, q;
};

class CellComplex {
public:
  CellComplex() = default;
  /// Cells are convex polygons listed counterclockwise.  Interfaces are found
  /// by collinear overlap, so hanging vertices are allowed.
  static CellComplex build(std::vector<std::vector<Vec2>> cells);

  std::size_t size() const { return cells_.size(); }
  const std::vector<Vec2>& cell(std::size_t i) const { return cells_[i]; }
  const std::vector<std::vector<Vec2>>& cells() const { return cells_; }
  const std::vector<Interface>& interfaces() const { return interfaces_; }
  const std::vector<BoundarySegment>& boundary() const { return boundary_; }
  double cell_area(std::size_t i) const { return areas_[i]; }
  double total_area() const;

  /// Deduplicated vertex list and per-cell index lists.
  std::pair<std::vector<Vec2>, std::vector<std::vector<std::size_t>>> indexed() const;

  /// Index of a cell containing p (closed, tolerance tol), or -1.
  int locate(const Vec2& p, double tol = 1e-12) const;

private:
  std::vector<std::vector<Vec2>> cells_;
  std::vector<double> areas_;
  std::vector<Interface> interfaces_;
  std::vector<BoundarySegment> boundary_;
  // Uniform bucket grid for locate().
  Vec2 lo_, hi_;
  int nb_ = 0;
  std::vector<std::vector<int>> buckets_;
  void build_buckets();
};

enum class FieldMode { Displacement, Deformation };

std::string to_string(FieldMode m);

/// Continuous piecewise-affine map x -> A_c x + b_c.
struct PAField {
  CellComplex complex;
  std::vector<Mat2> a;
  std::vector<Vec2> b;
  FieldMode mode = FieldMode::Displacement;

  Vec2 value(std::size_t cell, const Vec2& x) const { return a[cell] * x + b[cell]; }
  /// Spatial rescaling by lambda: points and translations scale, gradients stay.
  PAField rescaled(double lambda) const;
};

struct ContinuityReport {
  bool pass = true;
  double worst_rank = 0.0;   ///< largest second singular value of an edge jump
  double worst_trace = 0.0;  ///< largest mismatch of traces at edge endpoints
  double worst_tangential = 0.0;  ///< largest |jump * tau|
  std::size_t interfaces = 0;
};

ContinuityReport check_continuity(const PAField& f, double tol = 1e-10);

struct EnergyBreakdown {
  double elastic = 0.0;
  double surface = 0.0;  ///< before multiplying by eps
  double total(double eps) const { return elastic + eps * surface; }
};

/// Per-cell squared well distance of a gradient in the given field mode.
double cell_energy_density(const Mat2& grad, FieldMode mode, const WellSet& w);

/// Elastic sum of area * dist^2 and surface sum of length * |jump|.
/// Throws "not an admissible field" when continuity fails.
EnergyBreakdown exact_energy(const PAField& f, const WellSet& w, double eps);

/// Strain-0 / variant-j laminate in a convex region.  `theta` is the variant
/// volume fraction; theta = 1 gives a single variant band.
PAField laminate(const WellSet& w, std::size_t variant, const Vec2& normal, double period, double theta,
                 const Polygon& region);

/// Vector a with a (.) n = E for the given unit normal, when n is admissible.
std::optional<Vec2> rank_one_with_normal(const SymMat2& e, const Vec2& n, double tol = 1e-10);

/// Energy along the vertical slice {x} x [y0, y1]: well distance integral plus
/// the total variation of the gradient across crossed interfaces.
double slice_energy(const PAField& f, const WellSet& w, double x, double y0, double y1);

}  // namespace martenscale
