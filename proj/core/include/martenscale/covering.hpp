#pragma once
/// @file covering.hpp
/// Greedy covering of a polygon by stars in nested dyadic triangle lattices.
///
/// Level l uses equilateral triangles of side 2^-l spanned by u(15 deg) and
/// u(75 deg).  A triangle inside the domain whose parent is not inside is
/// placed and filled with a star; a triangle meeting the boundary at the
/// finest level m is left as zero displacement (boundary layer).

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "martenscale/microstructure.hpp"
#include "martenscale/star_block.hpp"

namespace martenscale {

struct LatticeTri {
  int level = 0;
  bool down = false;
  std::int64_t i = 0, j = 0;

  bool operator==(const LatticeTri& o) const {
    return level == o.level && down == o.down && i == o.i && j == o.j;
  }
  LatticeTri parent() const;
  std::array<LatticeTri, 4> children() const;
  std::array<LatticeTri, 3> neighbors() const;
};

enum class TriStatus { Outside, Partial, Inside };

class DyadicCover {
public:
  /// Builds the placement tree down to level m_max.  The domain must be
  /// convex for materialization and star-shaped about the origin.
  DyadicCover(const Polygon& domain, int m_max, const WellSet& w, double lip = 1.0);

  static double side(int level) { return std::ldexp(1.0, -level); }
  Triangle vertices(const LatticeTri& t) const;
  /// Triangle of the given level containing p (ties resolved toward up).
  LatticeTri locate(const Vec2& p, int level) const;

  int max_level() const { return m_max_; }
  const Polygon& domain() const { return domain_; }
  const StarProfile& profile() const { return profile_; }

  /// Placed triangles at level l.
  std::size_t count(int level) const { return counts_.at(level); }
  std::vector<std::size_t> counts(int m) const;
  /// (20 C_f + 20) 2^l with C_f = 10 Lip + 10.
  double count_bound(int level) const;
  /// Domain area of boundary-layer cells when the finest level is m.
  double boundary_layer_area(int m) const { return bl_area_.at(m); }
  /// Edges between a level-m boundary cell and a covered level-m neighbour.
  std::size_t exposed_edges(int m) const { return exposed_.at(m); }

  /// Analytic energy of the construction with finest level m.
  EnergyBreakdown energy(int m, double eps) const;
  /// m in {0, ..., ceil(log2(1/eps)) + 2} minimizing energy(m, eps).total(eps).
  int optimal_depth(double eps) const;

  /// Displacement of the construction at p (zero outside placed triangles).
  Vec2 value(const Vec2& p, int m, double eps) const;

  /// Explicit piecewise-affine field (small m only).
  PAField materialize(int m, double eps) const;

  /// Placed triangles (levels <= m) and boundary-layer triangles (level m).
  std::pair<std::vector<LatticeTri>, std::vector<LatticeTri>> enumerate(int m) const;

  TriStatus status(const LatticeTri& t) const;
  /// Star depth used in a placed triangle of the given level.
  int star_depth(int level, double eps) const { return profile_.depth_for(eps, side(level)); }

private:
  Polygon domain_;
  int m_max_;
  WellSet wells_;
  double lip_;
  StarProfile profile_;
  Vec2 ea_, eb_;
  std::vector<LatticeTri> roots_;
  std::vector<std::size_t> counts_;
  std::vector<double> bl_area_;
  std::vector<std::size_t> exposed_;
  double bl_density_ = 2.0;
  bool convex_ = true;
  mutable std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
  mutable std::map<std::pair<int, bool>, std::shared_ptr<const StarBlock>> star_cache_;

  double clipped_area(const LatticeTri& t) const;
  TriStatus classify(const LatticeTri& t, double* area) const;
  std::shared_ptr<const StarBlock> reference_star(int depth, bool down) const;
  Vec2 centroid(const LatticeTri& t) const;
};

struct CoverResult {
  EnergyBreakdown energy;
  std::vector<std::size_t> counts;
  int m = 0;
  std::optional<PAField> field;
};

/// Builds the cover with finest level m and evaluates its energy; the field is
/// materialized on request.
CoverResult greedy_cover(const Polygon& domain, int m, const WellSet& w, double eps, bool materialize = false,
                         double lip = 1.0);

/// Optimal finest level for the unit square [-1/2, 1/2]^2.
int optimal_depth(double eps);

}  // namespace martenscale
