#pragma once
/// @file normal_set.hpp
/// Directions reduced modulo sign.

#include <string>
#include <vector>

#include "martenscale/algebra2d.hpp"

namespace martenscale {

enum class NormalProvenance { LinearHex, NonlinearN3, NonlinearN4, Custom };

std::string to_string(NormalProvenance p);

class NormalSet {
public:
  static constexpr double kAngleTol = 1e-8;

  NormalSet() = default;
  explicit NormalSet(NormalProvenance prov) : provenance_(prov) {}

  /// Sentinel for E = 0: every direction qualifies.
  static NormalSet all_directions(NormalProvenance prov = NormalProvenance::Custom);

  /// Adds a direction unless one within kAngleTol (mod pi) is already present.
  /// Returns true when inserted.
  bool insert(const Vec2& v);
  void merge(const NormalSet& other);

  bool contains(const Vec2& v, double tol = kAngleTol) const;
  bool is_all() const { return all_; }
  bool empty() const { return !all_ && angles_.empty(); }
  std::size_t size() const { return angles_.size(); }

  /// Sorted angles in [0, pi).
  const std::vector<double>& angles() const { return angles_; }
  /// Unit vectors with canonical sign, sorted by angle.
  std::vector<Vec2> directions() const;

  NormalProvenance provenance() const { return provenance_; }
  void set_provenance(NormalProvenance p) { provenance_ = p; }

  /// Same directions within tol (both all-sentinels compare equal).
  bool same_as(const NormalSet& other, double tol = kAngleTol) const;

private:
  std::vector<double> angles_;
  NormalProvenance provenance_ = NormalProvenance::Custom;
  bool all_ = false;
};

/// Distance of two angles on the circle of length pi.
double angle_distance_mod_pi(double a, double b);

}  // namespace martenscale
