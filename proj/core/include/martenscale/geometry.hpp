#pragma once
/// @file geometry.hpp
/// Polygons, boundary patches and boundary normal coordinates.
///
/// A graph patch describes the boundary near p0 in a local frame where the
/// outward normal at p0 is -e1 and the counterclockwise tangent is -e2:
/// local = R (z - p0), boundary = {(h(y), y)}, domain on the side x > h(y).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "martenscale/algebra2d.hpp"
#include "martenscale/normal_set.hpp"

namespace martenscale {

// ---------------------------------------------------------------- polygons

class Polygon {
public:
  Polygon() = default;
  /// Validates: at least 3 vertices, no degenerate edge, simple, ccw.
  explicit Polygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  const Vec2& operator[](std::size_t i) const { return v_[i]; }
  Vec2 edge_start(std::size_t k) const { return v_[k]; }
  Vec2 edge_end(std::size_t k) const { return v_[(k + 1) % v_.size()]; }

  double area() const;
  double perimeter() const;
  /// Closed containment (boundary points count as inside within tol).
  bool contains(const Vec2& p, double tol = 1e-12) const;
  bool strictly_contains(const Vec2& p, double tol = 1e-12) const;
  /// Every ray from `c` leaves through exactly one boundary point: c lies
  /// strictly on the inner side of every edge line seen from c.
  bool star_shaped_about(const Vec2& c) const;
  bool convex() const;
  std::pair<Vec2, Vec2> bounding_box() const;
  Polygon translated(const Vec2& t) const;
  Polygon scaled(double s) const;

  static Polygon unit_square();

private:
  std::vector<Vec2> v_;
};

double signed_area(const std::vector<Vec2>& pts);

/// Clips `subject` against the convex ccw polygon `clip` (Sutherland-Hodgman).
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);

/// Outward unit normal per edge.
std::vector<Vec2> polygon_boundary_normals(const Polygon& p);

enum class EdgeClass { Compatible, Generic };
struct PolygonClassification {
  std::vector<EdgeClass> edges;
  bool generic = true;  ///< no selected edge normal lies in the set
};

/// `selected` lists the edges carrying boundary data (empty = all edges).
PolygonClassification classify_polygon(const Polygon& p, const NormalSet& normals,
                                       const std::vector<std::size_t>& selected = {});

// ---------------------------------------------------------------- profiles

/// Scalar C^{2,1} function of one variable with h(0) = h'(0) = 0.
class Profile {
public:
  enum class Kind { Poly, Spline, Circle, Custom };

  /// h(y) = sum_k c_k y^k; requires c_0 = c_1 = 0.
  static Profile poly(std::vector<double> coeffs);
  /// Natural cubic spline through (knots, values).  Residual h(0), h'(0) up
  /// to 1e-6 are subtracted; larger ones are rejected.
  static Profile spline(std::vector<double> knots, std::vector<double> values);
  /// Boundary of a disk of radius rc touching the origin: rc - sqrt(rc^2 - y^2).
  static Profile circle(double rc);
  static Profile custom(std::function<double(double)> h, std::function<double(double)> d1,
                        std::function<double(double)> d2, double max_abs_y);

  double value(double y) const;
  double d1(double y) const;
  double d2(double y) const;
  Kind kind() const { return kind_; }
  /// Largest |y| where the profile is defined.
  double max_abs_y() const { return max_y_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& knot_values() const { return knot_values_; }

private:
  struct SplineData;
  Kind kind_ = Kind::Poly;
  std::vector<double> coeffs_;
  std::vector<double> knots_, knot_values_;
  double rc_ = 0.0;
  double max_y_ = 1e300;
  double shift0_ = 0.0, shift1_ = 0.0;
  std::shared_ptr<const SplineData> spline_;
  std::function<double(double)> f_, f1_, f2_;
};

struct GraphPatch {
  Profile h = Profile::poly({0.0, 0.0});
  double rho = 1.0;
  Vec2 p0{};
  Mat2 frame = Mat2::identity();  ///< R, a rotation

  GraphPatch() = default;
  GraphPatch(Profile profile, double rho_, Vec2 p0_ = {}, Mat2 frame_ = Mat2::identity());

  /// Unit disk near (1, 0): rc = 1, R = -Id.
  static GraphPatch unit_circle(double rho = 0.5);
};

struct Frame {
  Vec2 nu;     ///< outward normal
  Vec2 tau;    ///< tangent
  double kappa;
};

Frame frame_fields(const GraphPatch& patch, double y);
Vec2 boundary_normal_map(const GraphPatch& patch, double x, double y);
Mat2 grad_boundary_normal_map(const GraphPatch& patch, double x, double y);

// ---------------------------------------------------------- boundary patches

/// Parameterized boundary arc t in [t0, t1] with unit tangent (domain on the
/// left), outward unit normal and curvature.
struct BoundaryPatch {
  std::function<Vec2(double)> point;
  std::function<Vec2(double)> tangent;
  std::function<double(double)> curvature;
  double t0 = 0.0;
  double t1 = 1.0;
  std::string kind;

  Vec2 normal(double t) const { return perp_cw(tangent(t)); }
  double length(int samples = 4096) const;

  static BoundaryPatch segment(const Vec2& a, const Vec2& b);
  static BoundaryPatch polygon_edge(const Polygon& p, std::size_t k);
  /// Counterclockwise arc of a circle, angle parameter.
  static BoundaryPatch circle_arc(const Vec2& center, double radius, double theta0, double theta1);
  /// World-frame boundary of a graph patch for y in [y0, y1].
  static BoundaryPatch graph(const GraphPatch& g, double y0, double y1);
  /// Orientation-preserving reparameterization t = phi(s), s in [s0, s1].
  static BoundaryPatch reparameterized(const BoundaryPatch& base, std::function<double(double)> phi,
                                       double s0, double s1);
};

// ---------------------------------------------------------------- flattening

struct DiffeoBounds {
  double grad_dev = 0.0;  ///< sup |grad F - R| (Frobenius)
  double det_dev = 0.0;   ///< sup |det grad F - 1|
  double c_dev = 0.0;     ///< sup |c - 1|
  double grad_const = 0.0;     ///< grad_dev / r
  double det_const = 0.0;      ///< det_dev / r
  double c_const = 0.0;        ///< (c_dev / r - |kappa(p0)|) / r, clamped at 0
  int samples = 0;
};

class Diffeo {
public:
  Diffeo(GraphPatch patch, double r, DiffeoBounds bounds = {});

  /// F(z) = Phi^{-1}(R (z - p0)); damped Newton, tol 1e-12, at most 50 steps.
  Vec2 forward(const Vec2& z) const;
  /// F^{-1}(x, y) = p0 + R^t Phi(x, y).
  Vec2 inverse(const Vec2& xy) const;
  Mat2 grad(const Vec2& z) const;
  /// c = sqrt(1 + h'^2) - x kappa evaluated at F(z).
  double tangential_factor(const Vec2& z) const;

  const GraphPatch& patch() const { return patch_; }
  double radius() const { return r_; }
  const Vec2& base_point() const { return patch_.p0; }
  const Mat2& frame() const { return patch_.frame; }
  const DiffeoBounds& bounds() const { return bounds_; }

private:
  GraphPatch patch_;
  double r_;
  DiffeoBounds bounds_;
};

/// Largest l <= rho with sup over Q_l of |grad Phi^{-1} - Id|_op < 0.5.
double flatten_radius_limit(const GraphPatch& patch, int grid = 33);

/// Builds F on Q_r; throws "patch radius exceeds r0" when r >= r0.
Diffeo flatten_patch(const GraphPatch& patch, double r, int grid = 41);

}  // namespace martenscale
