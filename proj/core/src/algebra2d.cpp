#include "martenscale/algebra2d.hpp"

#include <algorithm>

namespace martenscale {

Vec2 normalized(const Vec2& v) {
  const double len = v.norm();
  if (!(len > 1e-300)) throw Error("cannot normalize a zero vector");
  return v / len;
}

double angle_mod_pi(const Vec2& v) {
  double a = std::atan2(v.y, v.x);
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

Vec2 canonical_sign(const Vec2& v) {
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return -v;
  return v;
}

Mat2 Mat2::checked(double m11, double m12, double m21, double m22) {
  Mat2 m{m11, m12, m21, m22};
  if (!m.finite()) throw Error("matrix entries must be finite");
  return m;
}

bool Mat2::finite() const {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
}

std::pair<double, double> Mat2::singular_values() const {
  // s1^2 + s2^2 = |M|^2 and s1 s2 = |det M|.
  const double f2 = norm2();
  const double d = std::abs(det());
  const double disc = std::sqrt(std::max(0.0, f2 * f2 - 4.0 * d * d));
  const double s1 = std::sqrt(0.5 * (f2 + disc));
  const double s2 = s1 > 0.0 ? d / s1 : 0.0;
  return {s1, s2};
}

double Mat2::op_norm() const { return singular_values().first; }

Mat2 Mat2::inverse() const {
  const double d = det();
  if (std::abs(d) <= 1e-300) throw Error("singular matrix");
  return Mat2{a22, -a12, -a21, a11} * (1.0 / d);
}

SymMat2 SymMat2::from(const Mat2& m) {
  if (!m.finite()) throw Error("matrix entries must be finite");
  if (std::abs(m.a12 - m.a21) > 1e-12 * std::max(1.0, m.norm()))
    throw Error("matrix is not symmetric");
  return {m.a11, 0.5 * (m.a12 + m.a21), m.a22};
}

Mat2 rotation(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {c, -s, s, c};
}

double rotation_angle(const Mat2& q) { return std::atan2(q.a21 - q.a12, q.a11 + q.a22); }

double rank_one_det_tolerance(const SymMat2& e) { return 1e-12 * std::max(1.0, e.norm2()); }

std::optional<SymRankOne> sym_rank_one_decompose(const SymMat2& e) {
  if (e.det() > rank_one_det_tolerance(e)) return std::nullopt;
  if (e.norm() == 0.0) return SymRankOne{{0.0, 0.0}, {1.0, 0.0}};

  // Eigen-decomposition E = l1 v1 v1^t + l2 v2 v2^t with l1 >= l2.
  const double mean = 0.5 * (e.a11 + e.a22);
  const double half_diff = 0.5 * (e.a11 - e.a22);
  const double radius = std::hypot(half_diff, e.a12);
  double l1 = mean + radius;
  double l2 = mean - radius;
  const double theta = 0.5 * std::atan2(e.a12, half_diff);
  const Vec2 v1{std::cos(theta), std::sin(theta)};
  const Vec2 v2 = perp_ccw(v1);

  // Admissible tangents t solve t . E t = 0; normals are t rotated by 90 deg.
  // A tiny positive determinant within tolerance is treated as rank one.
  if (l2 > 0.0) l2 = 0.0;
  if (l1 < 0.0) l1 = 0.0;
  const double p = std::sqrt(-l2);
  const double q = std::sqrt(l1);
  Vec2 cands[2] = {normalized(v1 * p + v2 * q), normalized(v1 * p - v2 * q)};

  Vec2 best_n{};
  double best_angle = 10.0;
  for (const Vec2& t : cands) {
    const Vec2 n = perp_cw(t);
    const double ang = angle_mod_pi(n);
    if (ang < best_angle - 1e-15) {
      best_angle = ang;
      best_n = n;
    }
  }
  const Vec2 n = canonical_sign(best_n);
  const Vec2 t = perp_ccw(n);
  // a = (n.En) n + 2 (t.En) t reproduces E exactly when t.Et = 0.
  const Vec2 en = e * n;
  const Vec2 a = n * n.dot(en) + t * (2.0 * t.dot(en));
  return SymRankOne{a, n};
}

namespace {
// max over rotations Q of <F, Q U> = |(tr A, A12 - A21)| with A = U F^t.
struct RotAlign {
  double c;
  double s;
};
RotAlign align(const Mat2& f, const Mat2& u) {
  const Mat2 a = u * f.transpose();
  return {a.a11 + a.a22, a.a12 - a.a21};
}
}  // namespace

double dist_to_rotated_well(const Mat2& f, const Mat2& u) {
  const RotAlign r = align(f, u);
  const double best = std::hypot(r.c, r.s);
  const double d2 = f.norm2() + u.norm2() - 2.0 * best;
  return std::sqrt(std::max(0.0, d2));
}

Mat2 closest_rotation(const Mat2& f, const Mat2& u) {
  const RotAlign r = align(f, u);
  if (std::hypot(r.c, r.s) == 0.0) return Mat2::identity();
  return rotation(std::atan2(r.s, r.c));
}

}  // namespace martenscale
