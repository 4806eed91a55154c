#pragma once
/// @file algebra2d.hpp
/// Closed-form 2x2 linear algebra used throughout martenscale: planar
/// vectors, general and symmetric 2x2 matrices, rotations, symmetrized
/// rank-one splitting and distances to rotation orbits.
///
/// All norms on matrices are Frobenius norms.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace martenscale {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  friend constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  /// z-component of the 3D cross product.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  constexpr double norm2() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Unit vector, throws on (near) zero input.
Vec2 normalized(const Vec2& v);
/// Clockwise rotation by 90 degrees, (x, y) -> (y, -x).
constexpr Vec2 perp_cw(const Vec2& v) { return {v.y, -v.x}; }
/// Counterclockwise rotation by 90 degrees.
constexpr Vec2 perp_ccw(const Vec2& v) { return {-v.y, v.x}; }
/// Unit vector at angle `phi` (radians).
inline Vec2 unit_at(double phi) { return {std::cos(phi), std::sin(phi)}; }
/// Angle of a direction reduced modulo pi into [0, pi).
double angle_mod_pi(const Vec2& v);
/// Sign convention for directions defined up to sign: nonnegative first
/// component, positive second component when the first vanishes.
Vec2 canonical_sign(const Vec2& v);

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  constexpr Mat2() = default;
  constexpr Mat2(double m11, double m12, double m21, double m22)
      : a11(m11), a12(m12), a21(m21), a22(m22) {}

  /// Validating constructor; rejects NaN and infinite entries.
  static Mat2 checked(double m11, double m12, double m21, double m22);
  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  /// Infinitesimal rotation generator [[0,-1],[1,0]].
  static constexpr Mat2 skew_unit() { return {0.0, -1.0, 1.0, 0.0}; }

  constexpr Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  constexpr Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  constexpr Mat2 operator-() const { return {-a11, -a12, -a21, -a22}; }
  Mat2& operator+=(const Mat2& o) { return *this = *this + o; }
  Mat2& operator-=(const Mat2& o) { return *this = *this - o; }
  constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  friend constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }
  constexpr Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  constexpr Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }

  constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr double trace() const { return a11 + a22; }
  double norm() const { return std::sqrt(norm2()); }
  constexpr double norm2() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }
  /// Largest singular value.
  double op_norm() const;
  /// Singular values, largest first.
  std::pair<double, double> singular_values() const;
  Mat2 inverse() const;
  /// Skew component w such that M = sym(M) + w * skew_unit().
  constexpr double skew_part() const { return 0.5 * (a21 - a12); }
  bool finite() const;
  constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }
  constexpr Vec2 row(int i) const { return i == 0 ? Vec2{a11, a12} : Vec2{a21, a22}; }
};

struct SymMat2 {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;

  constexpr SymMat2() = default;
  constexpr SymMat2(double m11, double m12, double m22) : a11(m11), a12(m12), a22(m22) {}

  /// Converts a symmetric Mat2; throws unless |a12 - a21| <= 1e-12 max(1, |M|).
  static SymMat2 from(const Mat2& m);

  constexpr Mat2 full() const { return {a11, a12, a12, a22}; }
  constexpr SymMat2 operator+(const SymMat2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  constexpr SymMat2 operator-(const SymMat2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
  constexpr SymMat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
  constexpr double det() const { return a11 * a22 - a12 * a12; }
  constexpr double trace() const { return a11 + a22; }
  constexpr double norm2() const { return a11 * a11 + 2.0 * a12 * a12 + a22 * a22; }
  double norm() const { return std::sqrt(norm2()); }
  /// Quadratic form v . S v.
  constexpr double quad(const Vec2& v) const {
    return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y;
  }
  constexpr Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
  }
};

constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
  return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}

/// (M + M^t) / 2.
constexpr SymMat2 sym(const Mat2& m) { return {m.a11, 0.5 * (m.a12 + m.a21), m.a22}; }

/// a (.) n := (a n^t + n a^t) / 2.
constexpr SymMat2 sym_outer(const Vec2& a, const Vec2& n) { return sym(outer(a, n)); }

/// Counterclockwise rotation by `phi` radians.
Mat2 rotation(double phi);

/// Rotation angle of a matrix assumed to be (close to) a rotation.
double rotation_angle(const Mat2& q);

struct SymRankOne {
  Vec2 a;
  Vec2 n;  ///< unit
};

/// Splits E = a (.) n when det E <= 1e-12 max(1, |E|^2); absent otherwise.
/// n is canonical: among admissible normals the one with smaller angle in
/// [0, pi), oriented by canonical_sign.  E = 0 yields (0, e1).
std::optional<SymRankOne> sym_rank_one_decompose(const SymMat2& e);

/// Tolerance used by sym_rank_one_decompose for det E.
double rank_one_det_tolerance(const SymMat2& e);

/// min over Q in SO(2) of |F - Q U| (closed form).
double dist_to_rotated_well(const Mat2& f, const Mat2& u);

/// The rotation attaining dist_to_rotated_well.
Mat2 closest_rotation(const Mat2& f, const Mat2& u);

constexpr double kPi = 3.14159265358979323846;

}  // namespace martenscale
