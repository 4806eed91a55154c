#pragma once
// Shared helpers for the unit tests.

#include <cmath>
#include <functional>
#include <random>

#include "martenscale/algebra2d.hpp"
#include "martenscale/microstructure.hpp"
#include "martenscale/wells.hpp"

namespace testing_support {

using martenscale::Mat2;
using martenscale::Vec2;

inline double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int k = 0; k < 200 && b - a > 1e-15; ++k) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f(0.5 * (a + b));
}

// Grid scan over [0, 2 pi) followed by golden-section refinement.
inline double angle_min(const std::function<double(double)>& f, int n = 4096) {
  const double pi = 3.14159265358979323846;
  double best = 1e300, arg = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * pi * k / n;
    const double v = f(t);
    if (v < best) best = v, arg = t;
  }
  const double h = 2 * pi / n;
  return golden_min(f, arg - h, arg + h);
}

inline Mat2 random_mat(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng)};
}

using martenscale::PAField;
using martenscale::Polygon;
using martenscale::WellSet;

inline PAField single_cell(const Polygon& p, const Mat2& a, const Vec2& b = {}) {
  PAField f;
  f.complex = martenscale::CellComplex::build({p.vertices()});
  f.a = {a};
  f.b = {b};
  return f;
}

// [0,1]^2 and [1,2]x[0,1], traces matched along x = 1.
inline PAField two_cells(const Mat2& a0, const Mat2& a1) {
  PAField f;
  f.complex = martenscale::CellComplex::build({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 0}, {2, 0}, {2, 1}, {1, 1}}});
  f.a = {a0, a1};
  f.b = {{0, 0}, (a0 - a1) * Vec2{1.0, 0.0}};
  return f;
}

// Hex wells rotated by -15 deg so e1 and e2 become admissible normals.
inline WellSet aligned_wells() {
  const Mat2 q = martenscale::rotation(-martenscale::kPi / 12.0);
  std::vector<martenscale::SymMat2> s;
  for (const auto& e : martenscale::hex_rhombic_wells().strains) s.push_back(martenscale::sym(q * e.full() * q.transpose()));
  return martenscale::linear_wells(s, "hex_rhombic_rot15");
}

inline WellSet with_austenite(const WellSet& w) {
  std::vector<martenscale::SymMat2> s = w.strains;
  s.push_back(martenscale::SymMat2{});
  return martenscale::linear_wells(s, w.name + "+austenite");
}

inline std::size_t variant_for(const WellSet& w, const Vec2& n) {
  for (std::size_t j = 0; j < w.strains.size(); ++j)
    if (martenscale::rank_one_with_normal(w.strains[j], n)) return j;
  return w.strains.size();
}

}  // namespace testing_support
