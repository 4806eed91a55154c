#pragma once
/// @file star_block.hpp
/// Self-similar star microstructure in an admissible equilateral triangle.
///
/// One ring has seven cells: three edge cells (V_k, V_k+1, X_k) carrying the
/// variant whose austenite-compatible tangent is the edge direction, three
/// corner cells (V_k, X_k, X_k-1) carrying the remaining variant, and an
/// austenite core (X0, X1, X2) which is the next, inverted, triangle.
/// X_k = V_k + 2 sin(15 deg) Q(15 deg) (V_k+1 - V_k).

#include <array>
#include <vector>

#include "martenscale/microstructure.hpp"

namespace martenscale {

using Triangle = std::array<Vec2, 3>;

struct StarRing {
  Triangle outer{};
  Triangle inner{};
  /// Cells 0..2 edge, 3..5 corner, 6 core.
  std::array<std::vector<Vec2>, 7> cells;
  std::array<Mat2, 7> a{};
  std::array<Vec2, 7> b{};
  std::array<int, 7> variant{};  ///< -1 for the austenite core
  double residual = 0.0;
};

struct StarBlock {
  PAField field;
  std::vector<StarRing> rings;
  Triangle core{};
  Mat2 core_a;
  Vec2 core_b;
  int depth = 0;
};

/// Scale ratio of successive rings, 2 - sqrt(3).
double star_scale_ratio();

/// Equilateral, counterclockwise, with edges along three distinct variants'
/// austenite-compatible tangents.  `why` receives the reason on failure.
bool admissible_star_triangle(const Triangle& t, const WellSet& w, std::string* why = nullptr);

/// Solves one ring with outer trace x -> g x + c.
StarRing solve_star_ring(const Triangle& t, const WellSet& w, const Mat2& g, const Vec2& c);

/// Depth-N star: N rings and an austenite core.  Zero trace on the boundary.
StarBlock star_block(const Triangle& t, int depth, const WellSet& w);

/// Admissible side-1 triangle with edges along 15, 75 and 135 degrees and
/// centroid at the origin.  `inverted` gives the 180-degree rotated copy.
Triangle reference_star_triangle(bool inverted = false);

/// Energy profile of stars in similar triangles: elastic(N, s) and
/// surface(N, s) for side s, from one solved reference ring.
struct StarProfile {
  double rho = 0.0;
  double s_int = 0.0;  ///< ring-internal surface at side 1
  double s_b = 0.0;    ///< corner/core surface at side 1
  double edge_jump = 0.0;  ///< |A| of the edge cells, the jump against zero displacement
  double elastic(int depth, double side) const;
  double surface(int depth, double side) const;
  /// Smallest N >= 1 with elastic(N, side) <= eps * side.
  int depth_for(double eps, double side) const;
};

StarProfile star_profile(const WellSet& w);

}  // namespace martenscale
