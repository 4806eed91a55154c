#include "martenscale/wells.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "martenscale/compatibility.hpp"

namespace martenscale {

std::string to_string(WellMode mode) { return mode == WellMode::Linear ? "linear" : "nonlinear"; }

WellSet hex_rhombic_wells() {
  const double s3 = std::sqrt(3.0);
  WellSet w;
  w.mode = WellMode::Linear;
  w.name = "hex_rhombic";
  w.strains = {SymMat2{0.5, -0.5 * s3, -0.5}, SymMat2{-1.0, 0.0, 1.0}, SymMat2{0.5, 0.5 * s3, -0.5}};
  return w;
}

WellSet linear_wells(std::vector<SymMat2> strains, std::string name) {
  if (strains.empty()) throw Error("a well set needs at least one well");
  for (const auto& s : strains)
    if (!s.full().finite()) throw Error("matrix entries must be finite");
  WellSet w;
  w.mode = WellMode::Linear;
  w.name = std::move(name);
  w.strains = std::move(strains);
  return w;
}

Mat2 oblique_base(int ngon, double a) {
  if (ngon < 3) throw Error("ngon must be at least 3");
  if (!(a > 0.0) || !std::isfinite(a)) throw Error("parameter a must be positive");
  const double phi = static_cast<double>(ngon - 2) / (2.0 * ngon) * kPi;
  // Exact cotangents for the two printed families.
  double cot_phi = 1.0 / std::tan(phi);
  if (ngon == 4) cot_phi = 1.0;
  if (ngon == 3) cot_phi = std::sqrt(3.0);
  return {a, (1.0 / a - a) * cot_phi, 0.0, 1.0 / a};
}

std::vector<Mat2> point_group(LatticeKind kind) {
  if (kind == LatticeKind::Square) {
    return {Mat2::identity(), Mat2{-1.0, 0.0, 0.0, 1.0}, Mat2{0.0, -1.0, 1.0, 0.0},
            Mat2{0.0, 1.0, 1.0, 0.0}};
  }
  const double h = 0.5 * std::sqrt(3.0);
  return {Mat2::identity(),        Mat2{-1.0, 0.0, 0.0, 1.0}, Mat2{0.5, h, -h, 0.5},
          Mat2{-0.5, h, h, 0.5},   Mat2{0.5, -h, h, 0.5},     Mat2{0.5, h, h, -0.5}};
}

namespace {
bool same_up_to_sign(const Mat2& p, const Mat2& q) {
  return (p - q).norm() < 1e-10 || (p + q).norm() < 1e-10;
}
bool contains_matrix(const std::vector<Mat2>& list, const Mat2& m, double tol) {
  return std::any_of(list.begin(), list.end(), [&](const Mat2& x) { return (x - m).norm() < tol; });
}
}  // namespace

std::vector<Mat2> ngon_symmetry_group(int ngon) {
  if (ngon < 3) throw Error("ngon must be at least 3");
  if (ngon == 4) return point_group(LatticeKind::Square);
  if (ngon == 3 || ngon == 6) return point_group(LatticeKind::Hexagonal);
  std::vector<Mat2> out;
  const Mat2 mirror{1.0, 0.0, 0.0, -1.0};
  for (int k = 0; k < ngon; ++k) {
    const Mat2 r = rotation(2.0 * kPi * k / ngon);
    for (const Mat2& g : {r, r * mirror}) {
      bool dup = false;
      for (const Mat2& x : out) dup = dup || same_up_to_sign(x, g);
      if (!dup) out.push_back(g);
    }
  }
  return out;
}

WellSet oblique_wells(int ngon, double a, Branch branch) {
  WellSet w;
  w.mode = WellMode::Nonlinear;
  w.ngon = ngon;
  w.a = a;
  w.base = oblique_base(ngon, a);
  w.name = "oblique_n" + std::to_string(ngon);
  w.point_group = ngon_symmetry_group(ngon);

  if (std::abs(a - 1.0) < 1e-14) {
    w.degenerate = true;
    w.variants = {Mat2::identity()};
    w.rotation_branch = Mat2::identity();
    return w;
  }

  for (const Mat2& p : w.point_group) {
    const Mat2 u = p * w.base * p.transpose();
    if (!contains_matrix(w.variants, u, 1e-10)) w.variants.push_back(u);
  }

  auto twins = twinning_with_identity(w.base);
  if (twins.empty()) throw Error("base well is not compatible with the identity");
  std::sort(twins.begin(), twins.end(), [](const Twin& x, const Twin& y) {
    return std::abs(x.angle) < std::abs(y.angle);
  });
  const Twin& chosen = (branch == Branch::Minus && twins.size() > 1) ? twins[1] : twins[0];
  w.rotation_branch = chosen.q;
  return w;
}

double dist_to_well_set(const SymMat2& g, const WellSet& w) {
  if (w.mode != WellMode::Linear) throw Error("mode mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : w.strains) best = std::min(best, (g - e).norm());
  return best;
}

double dist_to_well_set(const Mat2& g, const WellSet& w) {
  if (w.mode != WellMode::Nonlinear) throw Error("mode mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < w.variants.size(); ++j)
    best = std::min(best, dist_to_rotated_well(g, w.well(j)));
  return best;
}

std::size_t nearest_well(const SymMat2& g, const WellSet& w) {
  if (w.mode != WellMode::Linear) throw Error("mode mismatch");
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < w.strains.size(); ++j) {
    const double d = (g - w.strains[j]).norm2();
    if (d < best) { best = d; arg = j; }
  }
  return arg;
}

std::size_t nearest_well(const Mat2& g, const WellSet& w) {
  if (w.mode != WellMode::Nonlinear) throw Error("mode mismatch");
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < w.variants.size(); ++j) {
    const double d = dist_to_rotated_well(g, w.well(j));
    if (d < best) { best = d; arg = j; }
  }
  return arg;
}

}  // namespace martenscale
