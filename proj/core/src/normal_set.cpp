#include "martenscale/normal_set.hpp"

#include <algorithm>

namespace martenscale {

std::string to_string(NormalProvenance p) {
  switch (p) {
    case NormalProvenance::LinearHex: return "linear_hex";
    case NormalProvenance::NonlinearN3: return "nonlinear_n3";
    case NormalProvenance::NonlinearN4: return "nonlinear_n4";
    case NormalProvenance::Custom: break;
  }
  return "custom";
}

double angle_distance_mod_pi(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

NormalSet NormalSet::all_directions(NormalProvenance prov) {
  NormalSet s(prov);
  s.all_ = true;
  return s;
}

bool NormalSet::insert(const Vec2& v) {
  const double ang = angle_mod_pi(normalized(v));
  for (double a : angles_)
    if (angle_distance_mod_pi(a, ang) < kAngleTol) return false;
  angles_.insert(std::upper_bound(angles_.begin(), angles_.end(), ang), ang);
  return true;
}

void NormalSet::merge(const NormalSet& other) {
  if (other.all_) all_ = true;
  for (double a : other.angles_) insert(unit_at(a));
}

bool NormalSet::contains(const Vec2& v, double tol) const {
  if (all_) return true;
  const double ang = angle_mod_pi(normalized(v));
  return std::any_of(angles_.begin(), angles_.end(),
                     [&](double a) { return angle_distance_mod_pi(a, ang) <= tol; });
}

std::vector<Vec2> NormalSet::directions() const {
  std::vector<Vec2> out;
  out.reserve(angles_.size());
  for (double a : angles_) out.push_back(canonical_sign(unit_at(a)));
  return out;
}

bool NormalSet::same_as(const NormalSet& other, double tol) const {
  if (all_ || other.all_) return all_ == other.all_;
  if (angles_.size() != other.angles_.size()) return false;
  for (double a : angles_)
    if (!other.contains(unit_at(a), tol)) return false;
  return true;
}

}  // namespace martenscale
