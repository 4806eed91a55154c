#include "martenscale/geometry.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace martenscale {

// ---------------------------------------------------------------- polygons

double signed_area(const std::vector<Vec2>& pts) {
  double s = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) s += pts[i].cross(pts[(i + 1) % n]);
  return 0.5 * s;
}

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c, double tol) {
  const double v = (b - a).cross(c - a);
  if (v > tol) return 1;
  if (v < -tol) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double tol) {
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return (p - a).norm() <= tol;
  if (std::abs(d.cross(p - a)) / len > tol) return false;
  const double t = d.dot(p - a) / (len * len);
  return t >= -tol / len && t <= 1.0 + tol / len;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double tol = 1e-14;
  const int o1 = orient(a, b, c, tol), o2 = orient(a, b, d, tol);
  const int o3 = orient(c, d, a, tol), o4 = orient(c, d, b, tol);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(a, b, c, 1e-14)) return true;
  if (o2 == 0 && on_segment(a, b, d, 1e-14)) return true;
  if (o3 == 0 && on_segment(c, d, a, 1e-14)) return true;
  if (o4 == 0 && on_segment(c, d, b, 1e-14)) return true;
  return false;
}

}  // namespace

Polygon::Polygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
  const std::size_t n = v_.size();
  if (n < 3) throw Error("polygon needs at least 3 vertices");
  for (const auto& p : v_)
    if (!p.finite()) throw Error("polygon vertices must be finite");
  for (std::size_t k = 0; k < n; ++k)
    if ((edge_end(k) - edge_start(k)).norm() < 1e-12) throw Error("degenerate polygon edge");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(edge_start(i), edge_end(i), edge_start(j), edge_end(j)))
        throw Error("polygon is not simple");
    }
  }
  if (!(signed_area(v_) > 0.0)) throw Error("polygon must be counterclockwise");
}

double Polygon::area() const { return signed_area(v_); }

double Polygon::perimeter() const {
  double s = 0.0;
  for (std::size_t k = 0; k < v_.size(); ++k) s += (edge_end(k) - edge_start(k)).norm();
  return s;
}

bool Polygon::contains(const Vec2& p, double tol) const {
  bool inside = false;
  const std::size_t n = v_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(v_[j], v_[i], p, tol)) return true;
    const Vec2& a = v_[i];
    const Vec2& b = v_[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::strictly_contains(const Vec2& p, double tol) const {
  for (std::size_t k = 0; k < v_.size(); ++k)
    if (on_segment(edge_start(k), edge_end(k), p, tol)) return false;
  return contains(p, 0.0);
}

bool Polygon::star_shaped_about(const Vec2& c) const {
  for (std::size_t k = 0; k < v_.size(); ++k) {
    const Vec2 a = edge_start(k), b = edge_end(k);
    if (!((b - a).cross(c - a) > 1e-12 * (b - a).norm())) return false;
  }
  return true;
}

bool Polygon::convex() const {
  const std::size_t n = v_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = v_[k], b = v_[(k + 1) % n], c = v_[(k + 2) % n];
    if ((b - a).cross(c - b) < -1e-14) return false;
  }
  return true;
}

std::pair<Vec2, Vec2> Polygon::bounding_box() const {
  Vec2 lo = v_[0], hi = v_[0];
  for (const auto& p : v_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

Polygon Polygon::translated(const Vec2& t) const {
  std::vector<Vec2> w = v_;
  for (auto& p : w) p += t;
  return Polygon(std::move(w));
}

Polygon Polygon::scaled(double s) const {
  if (!(s > 0.0)) throw Error("scale must be positive");
  std::vector<Vec2> w = v_;
  for (auto& p : w) p = p * s;
  return Polygon(std::move(w));
}

Polygon Polygon::unit_square() {
  return Polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  const std::size_t m = clip.size();
  for (std::size_t k = 0; k < m && !out.empty(); ++k) {
    const Vec2 a = clip[k], b = clip[(k + 1) % m];
    const Vec2 d = b - a;
    auto side = [&](const Vec2& p) { return d.cross(p - a); };
    std::vector<Vec2> in = std::move(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % n];
      const double sp = side(p), sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  return out;
}

std::vector<Vec2> polygon_boundary_normals(const Polygon& p) {
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2 d = p.edge_end(k) - p.edge_start(k);
    if (d.norm() < 1e-12) throw Error("degenerate polygon edge");
    out.push_back(normalized(perp_cw(d)));
  }
  return out;
}

PolygonClassification classify_polygon(const Polygon& p, const NormalSet& normals,
                                       const std::vector<std::size_t>& selected) {
  PolygonClassification c;
  const auto nu = polygon_boundary_normals(p);
  for (const auto& n : nu)
    c.edges.push_back(normals.contains(n) ? EdgeClass::Compatible : EdgeClass::Generic);
  std::vector<std::size_t> sel = selected;
  if (sel.empty())
    for (std::size_t k = 0; k < nu.size(); ++k) sel.push_back(k);
  for (std::size_t k : sel) {
    if (k >= nu.size()) throw Error("edge index out of range");
    if (c.edges[k] == EdgeClass::Compatible) c.generic = false;
  }
  return c;
}

// ---------------------------------------------------------------- profiles

struct Profile::SplineData {
  gsl_spline* spline = nullptr;
  explicit SplineData(const std::vector<double>& x, const std::vector<double>& y) {
    spline = gsl_spline_alloc(gsl_interp_cspline, x.size());
    gsl_spline_init(spline, x.data(), y.data(), x.size());
  }
  ~SplineData() { gsl_spline_free(spline); }
  SplineData(const SplineData&) = delete;
  SplineData& operator=(const SplineData&) = delete;
};

Profile Profile::poly(std::vector<double> coeffs) {
  while (coeffs.size() < 2) coeffs.push_back(0.0);
  for (double c : coeffs)
    if (!std::isfinite(c)) throw Error("profile coefficients must be finite");
  if (std::abs(coeffs[0]) > 1e-12 || std::abs(coeffs[1]) > 1e-12)
    throw Error("profile must satisfy h(0) = h'(0) = 0");
  Profile p;
  p.kind_ = Kind::Poly;
  p.coeffs_ = std::move(coeffs);
  return p;
}

Profile Profile::spline(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() != values.size() || knots.size() < 4)
    throw Error("spline needs at least 4 matching knots and values");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw Error("spline knots must be increasing");
  if (!(knots.front() < 0.0 && knots.back() > 0.0)) throw Error("spline knots must bracket 0");
  gsl_set_error_handler_off();
  Profile p;
  p.kind_ = Kind::Spline;
  p.knots_ = std::move(knots);
  p.knot_values_ = std::move(values);
  p.spline_ = std::make_shared<SplineData>(p.knots_, p.knot_values_);
  p.max_y_ = std::min(-p.knots_.front(), p.knots_.back());
  p.shift0_ = gsl_spline_eval(p.spline_->spline, 0.0, nullptr);
  p.shift1_ = gsl_spline_eval_deriv(p.spline_->spline, 0.0, nullptr);
  if (std::abs(p.shift0_) > 1e-6 || std::abs(p.shift1_) > 1e-6)
    throw Error("profile must satisfy h(0) = h'(0) = 0");
  return p;
}

Profile Profile::circle(double rc) {
  if (!(rc > 0.0)) throw Error("circle radius must be positive");
  Profile p;
  p.kind_ = Kind::Circle;
  p.rc_ = rc;
  p.max_y_ = rc;
  return p;
}

Profile Profile::custom(std::function<double(double)> h, std::function<double(double)> d1,
                        std::function<double(double)> d2, double max_abs_y) {
  if (std::abs(h(0.0)) > 1e-12 || std::abs(d1(0.0)) > 1e-12)
    throw Error("profile must satisfy h(0) = h'(0) = 0");
  Profile p;
  p.kind_ = Kind::Custom;
  p.f_ = std::move(h);
  p.f1_ = std::move(d1);
  p.f2_ = std::move(d2);
  p.max_y_ = max_abs_y;
  return p;
}

namespace {
void check_profile_range(double y, double max_y) {
  if (!(std::abs(y) < max_y)) throw Error("profile argument out of range");
}
}  // namespace

double Profile::value(double y) const {
  check_profile_range(y, max_y_);
  switch (kind_) {
    case Kind::Poly: {
      double s = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) s = s * y + coeffs_[k];
      return s;
    }
    case Kind::Spline:
      return gsl_spline_eval(spline_->spline, y, nullptr) - shift0_ - shift1_ * y;
    case Kind::Circle: return rc_ - std::sqrt(rc_ * rc_ - y * y);
    case Kind::Custom: return f_(y);
  }
  return 0.0;
}

double Profile::d1(double y) const {
  check_profile_range(y, max_y_);
  switch (kind_) {
    case Kind::Poly: {
      double s = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 1;) s = s * y + static_cast<double>(k) * coeffs_[k];
      return s;
    }
    case Kind::Spline: return gsl_spline_eval_deriv(spline_->spline, y, nullptr) - shift1_;
    case Kind::Circle: return y / std::sqrt(rc_ * rc_ - y * y);
    case Kind::Custom: return f1_(y);
  }
  return 0.0;
}

double Profile::d2(double y) const {
  check_profile_range(y, max_y_);
  switch (kind_) {
    case Kind::Poly: {
      double s = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 2;)
        s = s * y + static_cast<double>(k * (k - 1)) * coeffs_[k];
      return s;
    }
    case Kind::Spline: return gsl_spline_eval_deriv2(spline_->spline, y, nullptr);
    case Kind::Circle: {
      const double q = rc_ * rc_ - y * y;
      return rc_ * rc_ / (q * std::sqrt(q));
    }
    case Kind::Custom: return f2_(y);
  }
  return 0.0;
}

GraphPatch::GraphPatch(Profile profile, double rho_, Vec2 p0_, Mat2 frame_)
    : h(std::move(profile)), rho(rho_), p0(p0_), frame(frame_) {
  if (!(rho > 0.0)) throw Error("patch half-width must be positive");
  if ((frame.transpose() * frame - Mat2::identity()).norm() > 1e-10 || frame.det() < 0.0)
    throw Error("patch frame must be a rotation");
}

GraphPatch GraphPatch::unit_circle(double rho) {
  return GraphPatch(Profile::circle(1.0), rho, {1.0, 0.0}, Mat2{-1.0, 0.0, 0.0, -1.0});
}

Frame frame_fields(const GraphPatch& patch, double y) {
  if (!(std::abs(y) < 2.0 * patch.rho)) throw Error("y out of range");
  const double d1 = patch.h.d1(y);
  const double s = std::sqrt(1.0 + d1 * d1);
  return {Vec2{-1.0, d1} / s, Vec2{-d1, -1.0} / s, patch.h.d2(y) / (1.0 + d1 * d1)};
}

namespace {
void check_square(const GraphPatch& patch, double x, double y) {
  if (!(std::abs(x) <= patch.rho && std::abs(y) <= patch.rho)) throw Error("point out of range");
}
}  // namespace

Vec2 boundary_normal_map(const GraphPatch& patch, double x, double y) {
  check_square(patch, x, y);
  const Frame f = frame_fields(patch, y);
  return Vec2{patch.h.value(y), y} - f.nu * x;
}

Mat2 grad_boundary_normal_map(const GraphPatch& patch, double x, double y) {
  check_square(patch, x, y);
  const Frame f = frame_fields(patch, y);
  const double d1 = patch.h.d1(y);
  const double g = x * f.kappa - std::sqrt(1.0 + d1 * d1);
  return {-f.nu.x, f.tau.x * g, -f.nu.y, f.tau.y * g};
}

// ---------------------------------------------------------- boundary patches

double BoundaryPatch::length(int samples) const {
  // Composite Simpson on |d point / dt| via the tangent: |point'| is
  // recovered by finite differences of the point map.
  if (samples < 2) samples = 2;
  if (samples % 2) ++samples;
  const double h = (t1 - t0) / samples;
  auto speed = [&](double t) {
    const double e = 1e-6 * std::max(1.0, std::abs(t1 - t0));
    const double a = std::max(t0, t - e), b = std::min(t1, t + e);
    return (point(b) - point(a)).norm() / (b - a);
  };
  double s = speed(t0) + speed(t1);
  for (int i = 1; i < samples; ++i) s += (i % 2 ? 4.0 : 2.0) * speed(t0 + i * h);
  return s * h / 3.0;
}

BoundaryPatch BoundaryPatch::segment(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  if (d.norm() < 1e-12) throw Error("empty patch");
  const Vec2 t = normalized(d);
  BoundaryPatch p;
  p.point = [a, d](double s) { return a + d * s; };
  p.tangent = [t](double) { return t; };
  p.curvature = [](double) { return 0.0; };
  p.t0 = 0.0;
  p.t1 = 1.0;
  p.kind = "segment";
  return p;
}

BoundaryPatch BoundaryPatch::polygon_edge(const Polygon& poly, std::size_t k) {
  if (k >= poly.size()) throw Error("edge index out of range");
  return segment(poly.edge_start(k), poly.edge_end(k));
}

BoundaryPatch BoundaryPatch::circle_arc(const Vec2& c, double r, double th0, double th1) {
  if (!(r > 0.0) || !(th1 > th0)) throw Error("empty patch");
  BoundaryPatch p;
  p.point = [c, r](double t) { return c + unit_at(t) * r; };
  p.tangent = [](double t) { return unit_at(t + 0.5 * kPi); };
  p.curvature = [r](double) { return 1.0 / r; };
  p.t0 = th0;
  p.t1 = th1;
  p.kind = "circle_arc";
  return p;
}

BoundaryPatch BoundaryPatch::graph(const GraphPatch& g, double y0, double y1) {
  if (!(y1 > y0)) throw Error("empty patch");
  // The tangent points along decreasing y, so the parameter is t = -y.
  BoundaryPatch p;
  const Mat2 rt = g.frame.transpose();
  p.point = [g, rt](double t) { return g.p0 + rt * Vec2{g.h.value(-t), -t}; };
  p.tangent = [g, rt](double t) { return rt * frame_fields(g, -t).tau; };
  p.curvature = [g](double t) { return frame_fields(g, -t).kappa; };
  p.t0 = -y1;
  p.t1 = -y0;
  p.kind = "graph";
  return p;
}

BoundaryPatch BoundaryPatch::reparameterized(const BoundaryPatch& base, std::function<double(double)> phi,
                                             double s0, double s1) {
  if (!(s1 > s0)) throw Error("empty patch");
  BoundaryPatch p;
  p.point = [base, phi](double s) { return base.point(phi(s)); };
  p.tangent = [base, phi](double s) { return base.tangent(phi(s)); };
  p.curvature = [base, phi](double s) { return base.curvature(phi(s)); };
  p.t0 = s0;
  p.t1 = s1;
  p.kind = base.kind;
  return p;
}

// ---------------------------------------------------------------- flattening

namespace {

// Deviations of grad F = (grad Phi)^{-1} R from R at flattened coordinates (x, y).
struct LocalDev {
  double frob;
  double op;
  double det;
  double c;
};

LocalDev local_dev(const GraphPatch& patch, double x, double y) {
  const Mat2 j = grad_boundary_normal_map(patch, x, y);
  const Mat2 ji = j.inverse();
  const Mat2 dev = ji - Mat2::identity();
  const double d1 = patch.h.d1(y);
  const double c = std::sqrt(1.0 + d1 * d1) - x * frame_fields(patch, y).kappa;
  return {dev.norm(), dev.op_norm(), std::abs(1.0 / j.det() - 1.0), std::abs(c - 1.0)};
}

double max_op_dev(const GraphPatch& patch, double l, int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int k = 0; k < grid; ++k) {
      const double x = -l + 2.0 * l * i / (grid - 1);
      const double y = -l + 2.0 * l * k / (grid - 1);
      const Mat2 j = grad_boundary_normal_map(patch, x, y);
      if (!(j.det() > 0.0)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, (j.inverse() - Mat2::identity()).op_norm());
    }
  }
  return worst;
}

}  // namespace

double flatten_radius_limit(const GraphPatch& patch, int grid) {
  // Q_l must stay inside the domain of the profile and the patch square.
  const double cap = std::min(patch.rho, 0.999 * patch.h.max_abs_y());
  auto ok = [&](double l) {
    try {
      return max_op_dev(patch, l, grid) < 0.5;
    } catch (const Error&) {
      return false;
    }
  };
  if (ok(cap)) return cap;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

Diffeo::Diffeo(GraphPatch patch, double r, DiffeoBounds bounds)
    : patch_(std::move(patch)), r_(r), bounds_(bounds) {
  if (!(r > 0.0)) throw Error("patch radius must be positive");
}

Vec2 Diffeo::inverse(const Vec2& xy) const {
  return patch_.p0 + patch_.frame.transpose() * boundary_normal_map(patch_, xy.x, xy.y);
}

Vec2 Diffeo::forward(const Vec2& z) const {
  const Vec2 w = patch_.frame * (z - patch_.p0);
  Vec2 q = w;
  auto residual = [&](const Vec2& p) { return boundary_normal_map(patch_, p.x, p.y) - w; };
  Vec2 res = residual(q);
  const double tol = 1e-12 * std::max(1.0, w.norm());
  for (int it = 0; it < 50; ++it) {
    if (res.norm() <= tol) return q;
    const Vec2 step = grad_boundary_normal_map(patch_, q.x, q.y).inverse() * res;
    double t = 1.0;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Vec2 cand = q - step * t;
      try {
        const Vec2 r2 = residual(cand);
        if (r2.norm() < res.norm() || r2.norm() <= tol) {
          q = cand;
          res = r2;
          break;
        }
      } catch (const Error&) {
      }
    }
  }
  if (res.norm() <= tol) return q;
  throw Error("inverse boundary normal map did not converge");
}

Mat2 Diffeo::grad(const Vec2& z) const {
  const Vec2 q = forward(z);
  return grad_boundary_normal_map(patch_, q.x, q.y).inverse() * patch_.frame;
}

double Diffeo::tangential_factor(const Vec2& z) const {
  const Vec2 q = forward(z);
  const double d1 = patch_.h.d1(q.y);
  return std::sqrt(1.0 + d1 * d1) - q.x * frame_fields(patch_, q.y).kappa;
}

Diffeo flatten_patch(const GraphPatch& patch, double r, int grid) {
  if (!(r > 0.0)) throw Error("patch radius must be positive");
  const double r0 = flatten_radius_limit(patch);
  if (!(r < r0)) throw Error("patch radius exceeds r0");
  DiffeoBounds b;
  if (grid < 3) grid = 3;
  for (int i = 0; i < grid; ++i) {
    for (int k = 0; k < grid; ++k) {
      const double x = -r + 2.0 * r * i / (grid - 1);
      const double y = -r + 2.0 * r * k / (grid - 1);
      const LocalDev dv = local_dev(patch, x, y);
      b.grad_dev = std::max(b.grad_dev, dv.frob);
      b.det_dev = std::max(b.det_dev, dv.det);
      b.c_dev = std::max(b.c_dev, dv.c);
      ++b.samples;
    }
  }
  const double k0 = std::abs(frame_fields(patch, 0.0).kappa);
  b.grad_const = b.grad_dev / r;
  b.det_const = b.det_dev / r;
  b.c_const = std::max(0.0, (b.c_dev / r - k0) / r);
  return Diffeo(patch, r, b);
}

}  // namespace martenscale
