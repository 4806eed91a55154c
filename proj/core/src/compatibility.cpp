#include "martenscale/compatibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace martenscale {

NormalSet austenite_normals_linear(const SymMat2& e) {
  if (!e.full().finite()) throw Error("matrix entries must be finite");
  if (e.norm() == 0.0) return NormalSet::all_directions();
  NormalSet out;
  const double tol = rank_one_det_tolerance(e);
  const double det = e.det();
  if (det > tol) return out;

  const double mean = 0.5 * (e.a11 + e.a22);
  const double radius = std::hypot(0.5 * (e.a11 - e.a22), e.a12);
  double l1 = mean + radius;
  double l2 = mean - radius;
  if (std::abs(det) <= tol) {
    if (std::abs(l1) >= std::abs(l2)) l2 = 0.0;
    else l1 = 0.0;
  }
  l1 = std::max(l1, 0.0);
  l2 = std::min(l2, 0.0);
  const double theta = 0.5 * std::atan2(e.a12, 0.5 * (e.a11 - e.a22));
  const Vec2 v1 = unit_at(theta);
  const Vec2 v2 = perp_ccw(v1);
  const double p = std::sqrt(-l2), q = std::sqrt(l1);
  for (const Vec2& t : {v1 * p + v2 * q, v1 * p - v2 * q}) out.insert(perp_cw(t));
  return out;
}

NormalSet hex_rhombic_normal_set() {
  NormalSet out(NormalProvenance::LinearHex);
  for (int j = 0; j < 3; ++j) {
    const Mat2 q = rotation(2.0 * kPi * j / 3.0);
    out.insert(q * Vec2{1.0, 1.0});
    out.insert(q * Vec2{1.0, -1.0});
  }
  return out;
}

namespace {

double wrap_angle(double t) {
  t = std::remainder(t, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

Twin recover_twin(const Mat2& u, double theta) {
  Twin tw;
  tw.angle = wrap_angle(theta);
  tw.q = rotation(tw.angle);
  const Mat2 m = tw.q * u - Mat2::identity();
  const Vec2 r0 = m.row(0), r1 = m.row(1);
  Vec2 n = normalized(r0.norm2() >= r1.norm2() ? r0 : r1);
  n = canonical_sign(n);
  tw.n = n;
  tw.a = m * n;
  tw.residual = (m - outer(tw.a, tw.n)).norm();
  return tw;
}

}  // namespace

std::vector<Twin> twinning_with_identity(const Mat2& u) {
  if (!u.finite()) throw Error("matrix entries must be finite");
  const double det = u.det();
  if (!(det > 0.0)) throw Error("orientation-reversing well");

  if ((u.transpose() * u - Mat2::identity()).norm() <= 1e-12 * std::max(1.0, u.norm2())) {
    Twin tw;
    tw.q = u.transpose();
    tw.angle = rotation_angle(tw.q);
    tw.a = {0.0, 0.0};
    tw.n = {1.0, 0.0};
    tw.degenerate = true;
    tw.residual = (tw.q * u - Mat2::identity()).norm();
    return {tw};
  }

  // det(Q U - Id) = det U + 1 - tr(Q U) and tr(Q U) = c p + s q.
  const double p = u.trace();
  const double q = u.a12 - u.a21;
  const double rhs = det + 1.0;
  const double r = std::hypot(p, q);
  std::vector<Twin> out;
  if (r == 0.0) return out;
  const double c = rhs / r;
  if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12) return out;
  const double phi = std::atan2(q, p);
  const double delta = std::acos(std::clamp(c, -1.0, 1.0));
  out.push_back(recover_twin(u, phi + delta));
  if (delta > 1e-9) out.push_back(recover_twin(u, phi - delta));
  std::sort(out.begin(), out.end(), [](const Twin& x, const Twin& y) { return x.angle < y.angle; });
  return out;
}

NormalSet nonlinear_normal_set(const WellSet& w) {
  if (w.mode != WellMode::Nonlinear) throw Error("mode mismatch");
  if (w.degenerate) throw Error("degenerate well set");
  NormalProvenance prov = NormalProvenance::Custom;
  if (w.ngon == 4) prov = NormalProvenance::NonlinearN4;
  if (w.ngon == 3) prov = NormalProvenance::NonlinearN3;
  NormalSet out(prov);
  for (const Mat2& uj : w.variants)
    for (const Twin& t : twinning_with_identity(uj)) out.insert(t.n);
  return out;
}

double incompatibility_at(const Vec2& tau, const WellSet& w, std::size_t j) {
  if (w.mode == WellMode::Linear) return std::abs(w.strains.at(j).quad(tau));
  const Vec2 v = w.well(j) * tau;
  // Best rotation aligns v with tau.
  const Mat2 rot = rotation(std::atan2(v.cross(tau), v.dot(tau)));
  return (rot * v - tau).norm();
}

double incompatibility_reduced_at(const Vec2& tau, const WellSet& w, std::size_t j) {
  if (w.mode == WellMode::Linear) return incompatibility_at(tau, w, j);
  return std::abs((w.variants.at(j) * tau).norm() - 1.0);
}

IncompatibilityResult incompatibility_constant(const BoundaryPatch& patch, const WellSet& w,
                                               int samples) {
  if (!patch.tangent || !(patch.t1 > patch.t0)) throw Error("empty patch");
  if (w.size() == 0) throw Error("empty well set");
  const int n = std::max(samples, 2048);
  const double t0 = patch.t0, t1 = patch.t1;
  const double dt = (t1 - t0) / (n - 1);

  auto eval = [&](double t, std::size_t j) { return incompatibility_at(normalized(patch.tangent(t)), w, j); };

  struct Cand {
    double val;
    int i;
    std::size_t j;
  };
  std::vector<Cand> cands;
  for (std::size_t j = 0; j < w.size(); ++j) {
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = eval(t0 + dt * i, j);
    for (int i = 0; i < n; ++i) {
      const bool left = i == 0 || vals[i] <= vals[i - 1];
      const bool right = i == n - 1 || vals[i] <= vals[i + 1];
      if (left && right) cands.push_back({vals[i], i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.val < b.val || (a.val == b.val && (a.j < b.j || (a.j == b.j && a.i < b.i)));
  });
  if (cands.size() > 16) cands.resize(16);

  IncompatibilityResult res;
  res.mode = w.mode;
  res.d = std::numeric_limits<double>::infinity();
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (const Cand& c : cands) {
    double a = std::max(t0, t0 + dt * (c.i - 1));
    double b = std::min(t1, t0 + dt * (c.i + 1));
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = eval(x1, c.j), f2 = eval(x2, c.j);
    for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      if (f1 <= f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - g * (b - a); f1 = eval(x1, c.j);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + g * (b - a); f2 = eval(x2, c.j);
      }
    }
    double best_t = t0 + dt * c.i;
    double best = c.val;
    for (double t : {x1, x2, a, b}) {
      const double v = eval(t, c.j);
      if (v < best) { best = v; best_t = t; }
    }
    if (best < res.d) {
      res.d = best;
      res.argmin_point = best_t;
      res.argmin_well_index = c.j;
    }
  }
  res.d_reduced = res.d;
  if (w.mode == WellMode::Nonlinear)
    res.d_reduced = incompatibility_reduced_at(normalized(patch.tangent(res.argmin_point)), w,
                                               res.argmin_well_index);
  return res;
}

OscillationThresholds oscillation_thresholds(double d, double length) {
  if (!(d >= 0.0) || !(length >= 0.0)) throw Error("thresholds need nonnegative inputs");
  const double dl = d * length;
  return {dl / 208.0, dl / (64.0 * 17.0 * 9.0 * std::sqrt(2.0)), dl / 104.0, dl / 104.0};
}

namespace {
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}
}  // namespace

double trace_oscillation(const std::vector<Vec2>& values, const std::vector<Vec2>& points,
                         bool subtract_identity) {
  if (values.size() < 2) throw Error("trace oscillation needs at least 2 samples");
  std::vector<Vec2> w = values;
  if (subtract_identity) {
    if (points.size() != values.size()) throw Error("sample points and values differ in length");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= points[i];
  }
  // The diameter of a point set is attained on its convex hull.
  const auto hull = convex_hull(w);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, (hull[i] - hull[j]).norm());
  return best;
}

double trace_oscillation(const std::vector<Vec2>& values) { return trace_oscillation(values, {}, false); }

double lower_envelope(double eps, EnvelopeKind kind) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error("eps must be positive");
  if (kind == EnvelopeKind::Linear) return std::min(eps, 1.0);
  return std::min(1.0, eps * (std::abs(std::log(eps)) + 1.0));
}

}  // namespace martenscale
