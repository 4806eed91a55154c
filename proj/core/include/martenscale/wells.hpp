#pragma once
/// @file wells.hpp
/// Well sets: the linear hexagonal-to-rhombic strains and the nonlinear
/// oblique families built from U1(a, n) and a lattice point group.

#include <string>
#include <vector>

#include "martenscale/algebra2d.hpp"

namespace martenscale {

enum class WellMode { Linear, Nonlinear };
enum class Branch { Plus, Minus };
enum class LatticeKind { Square, Hexagonal };

std::string to_string(WellMode mode);

struct WellSet {
  WellMode mode = WellMode::Linear;
  std::string name;

  // linear mode
  std::vector<SymMat2> strains;

  // nonlinear mode
  Mat2 base = Mat2::identity();  ///< U1
  std::vector<Mat2> variants;    ///< U_j = P_j U1 P_j^t, without the rotation branch
  Mat2 rotation_branch = Mat2::identity();
  double a = 1.0;
  int ngon = 0;
  std::vector<Mat2> point_group;
  bool degenerate = false;

  std::size_t size() const { return mode == WellMode::Linear ? strains.size() : variants.size(); }
  /// Q(a) U_j.
  Mat2 well(std::size_t j) const { return rotation_branch * variants.at(j); }
};

/// e(1), e(2), e(3) of the hexagonal-to-rhombic transformation, in order.
WellSet hex_rhombic_wells();

/// Arbitrary finite linear well set.
WellSet linear_wells(std::vector<SymMat2> strains, std::string name = "custom");

/// U1(a, n) = [[a, (1/a - a)/tan(phi)], [0, 1/a]] with phi = (n-2) pi / (2n).
Mat2 oblique_base(int ngon, double a);

/// Nonlinear oblique well set. ngon = 4 uses the square point group, ngon = 3
/// the hexagonal one, other n the dihedral group of the regular n-gon.  a = 1
/// gives a flagged single-well set.
WellSet oblique_wells(int ngon, double a, Branch branch = Branch::Plus);

/// The listed point-group representatives (4 square, 6 hexagonal).
std::vector<Mat2> point_group(LatticeKind kind);

/// Symmetry group of the regular n-gon modulo +-Id (conjugation classes).
std::vector<Mat2> ngon_symmetry_group(int ngon);

/// Linear: min_j |G - e(j)|.
double dist_to_well_set(const SymMat2& g, const WellSet& w);
/// Nonlinear: min_j dist(G, SO(2) Q(a) U_j).
double dist_to_well_set(const Mat2& g, const WellSet& w);

/// Index of the nearest well (ties go to the lowest index).
std::size_t nearest_well(const SymMat2& g, const WellSet& w);
std::size_t nearest_well(const Mat2& g, const WellSet& w);

}  // namespace martenscale
