#include "martenscale/star_block.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace martenscale {

double star_scale_ratio() { return 2.0 - std::sqrt(3.0); }

namespace {

int tangent_variant(const Vec2& d, const WellSet& w) {
  const Vec2 t = normalized(d);
  int found = -1;
  for (std::size_t j = 0; j < w.strains.size(); ++j) {
    if (std::abs(w.strains[j].quad(t)) <= 1e-9 * std::max(1.0, w.strains[j].norm())) {
      if (found >= 0) return -2;
      found = static_cast<int>(j);
    }
  }
  return found;
}

double tri_area(const Triangle& t) { return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]); }

}  // namespace

bool admissible_star_triangle(const Triangle& t, const WellSet& w, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (w.mode != WellMode::Linear || w.strains.size() != 3) return fail("star construction needs three linear wells");
  if (!(tri_area(t) > 0.0)) return fail("triangle must be counterclockwise");
  const double l0 = (t[1] - t[0]).norm(), l1 = (t[2] - t[1]).norm(), l2 = (t[0] - t[2]).norm();
  const double lm = (l0 + l1 + l2) / 3.0;
  if (std::max({std::abs(l0 - lm), std::abs(l1 - lm), std::abs(l2 - lm)}) > 1e-9 * lm)
    return fail("triangle is not equilateral");
  int seen = 0;
  for (int k = 0; k < 3; ++k) {
    const int j = tangent_variant(t[(k + 1) % 3] - t[k], w);
    if (j < 0) return fail("incompatible orientation");
    seen |= 1 << j;
  }
  if (seen != 7) return fail("incompatible orientation");
  return true;
}

StarRing solve_star_ring(const Triangle& t, const WellSet& w, const Mat2& g, const Vec2& c) {
  std::string why;
  if (!admissible_star_triangle(t, w, &why)) throw Error(why);
  StarRing ring;
  ring.outer = t;
  const double s15 = std::sin(kPi / 12.0);
  const Mat2 q15 = rotation(kPi / 12.0);
  for (int k = 0; k < 3; ++k) ring.inner[k] = t[k] + q15 * (t[(k + 1) % 3] - t[k]) * (2.0 * s15);

  std::array<int, 3> ev{};
  for (int k = 0; k < 3; ++k) ev[k] = tangent_variant(t[(k + 1) % 3] - t[k], w);
  for (int k = 0; k < 3; ++k) {
    ring.cells[k] = {t[k], t[(k + 1) % 3], ring.inner[k]};
    ring.variant[k] = ev[k];
    const int km = (k + 2) % 3;
    ring.cells[3 + k] = {t[k], ring.inner[k], ring.inner[km]};
    ring.variant[3 + k] = 3 - ev[k] - ev[km];
  }
  ring.cells[6] = {ring.inner[0], ring.inner[1], ring.inner[2]};
  ring.variant[6] = -1;
  for (const auto& cell : ring.cells)
    if (!(signed_area(cell) > 0.0)) throw Error("singular compatibility system: inverted ring cell");

  auto strain = [&](int cell) { return ring.variant[cell] < 0 ? Mat2::zero() : w.strains[ring.variant[cell]].full(); };

  // Unknowns (w, bx, by) per cell.  Rows: trace agreement at both ends of
  // every interior edge, and the prescribed trace on the outer edges.
  struct Link {
    int c0, c1;
    Vec2 p, q;
  };
  std::vector<Link> links;
  for (int k = 0; k < 3; ++k) {
    const int kp = (k + 1) % 3;
    links.push_back({k, 3 + k, t[k], ring.inner[k]});
    links.push_back({k, 3 + kp, t[kp], ring.inner[k]});
    const int km = (k + 2) % 3;
    links.push_back({3 + k, 6, ring.inner[k], ring.inner[km]});
  }
  const int rows = static_cast<int>(links.size()) * 4 + 3 * 4;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, 21);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(rows);
  const Mat2 jm = Mat2::skew_unit();
  int row = 0;
  auto add_point = [&](int cell, const Vec2& p, double sign) {
    const Vec2 jp = jm * p;
    m(row, 3 * cell) += sign * jp.x;
    m(row, 3 * cell + 1) += sign;
    m(row + 1, 3 * cell) += sign * jp.y;
    m(row + 1, 3 * cell + 2) += sign;
  };
  for (const auto& l : links) {
    for (const Vec2& p : {l.p, l.q}) {
      add_point(l.c0, p, 1.0);
      add_point(l.c1, p, -1.0);
      const Vec2 rhs = (strain(l.c1) - strain(l.c0)) * p;
      r(row) = rhs.x;
      r(row + 1) = rhs.y;
      row += 2;
    }
  }
  for (int k = 0; k < 3; ++k) {
    for (const Vec2& p : {t[k], t[(k + 1) % 3]}) {
      add_point(k, p, 1.0);
      const Vec2 rhs = (g - strain(k)) * p + c;
      r(row) = rhs.x;
      r(row + 1) = rhs.y;
      row += 2;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  if (qr.rank() < 21) {
    std::ostringstream os;
    os << "singular compatibility system: rank " << qr.rank() << " of 21";
    throw Error(os.str());
  }
  const Eigen::VectorXd x = qr.solve(r);
  const double scale = std::max({1.0, r.lpNorm<Eigen::Infinity>(), (t[1] - t[0]).norm()});
  ring.residual = (m * x - r).lpNorm<Eigen::Infinity>();
  if (ring.residual > 1e-9 * scale) {
    std::ostringstream os;
    os << "singular compatibility system: residual " << ring.residual;
    throw Error(os.str());
  }
  for (int i = 0; i < 7; ++i) {
    ring.a[i] = strain(i) + jm * x(3 * i);
    ring.b[i] = {x(3 * i + 1), x(3 * i + 2)};
  }
  return ring;
}

StarBlock star_block(const Triangle& t, int depth, const WellSet& w) {
  if (depth < 1) throw Error("star depth must be at least 1");
  StarBlock sb;
  sb.depth = depth;
  Triangle cur = t;
  Mat2 g = Mat2::zero();
  Vec2 c{};
  std::vector<std::vector<Vec2>> cells;
  std::vector<Mat2> as;
  std::vector<Vec2> bs;
  for (int k = 0; k < depth; ++k) {
    StarRing ring = solve_star_ring(cur, w, g, c);
    for (int i = 0; i < 6; ++i) {
      cells.push_back(ring.cells[i]);
      as.push_back(ring.a[i]);
      bs.push_back(ring.b[i]);
    }
    g = ring.a[6];
    c = ring.b[6];
    cur = ring.inner;
    sb.rings.push_back(std::move(ring));
  }
  cells.push_back({cur[0], cur[1], cur[2]});
  as.push_back(g);
  bs.push_back(c);
  sb.core = cur;
  sb.core_a = g;
  sb.core_b = c;
  sb.field.complex = CellComplex::build(std::move(cells));
  sb.field.a = std::move(as);
  sb.field.b = std::move(bs);
  sb.field.mode = FieldMode::Displacement;
  return sb;
}

Triangle reference_star_triangle(bool inverted) {
  const Vec2 e1 = unit_at(kPi / 12.0), e2 = unit_at(5.0 * kPi / 12.0);
  Triangle t{Vec2{0.0, 0.0}, e1, e2};
  const Vec2 centroid = (t[0] + t[1] + t[2]) / 3.0;
  for (auto& p : t) p = inverted ? centroid - p : p - centroid;
  return t;
}

double StarProfile::elastic(int depth, double side) const {
  return 2.0 * std::pow(rho, 2.0 * depth) * std::sqrt(3.0) / 4.0 * side * side;
}

double StarProfile::surface(int depth, double side) const {
  // Ring k contributes rho^k s_int; only the innermost ring borders the core.
  double s = 0.0, f = 1.0;
  for (int k = 0; k < depth; ++k, f *= rho) s += f * s_int;
  return side * (s + std::pow(rho, depth - 1) * s_b);
}

int StarProfile::depth_for(double eps, double side) const {
  int n = 1;
  while (elastic(n, side) > eps * side && n < 200) ++n;
  return n;
}

StarProfile star_profile(const WellSet& w) {
  const StarBlock sb = star_block(reference_star_triangle(), 1, w);
  const StarRing& r = sb.rings[0];
  StarProfile p;
  p.rho = star_scale_ratio();
  // Interior interfaces of the ring, split into edge/corner and corner/core.
  auto jump_len = [&](int c0, int c1, const Vec2& a, const Vec2& b) { return (r.a[c0] - r.a[c1]).norm() * (b - a).norm(); };
  for (int k = 0; k < 3; ++k) {
    const int kp = (k + 1) % 3, km = (k + 2) % 3;
    p.s_int += jump_len(k, 3 + k, r.outer[k], r.inner[k]);
    p.s_int += jump_len(k, 3 + kp, r.outer[kp], r.inner[k]);
    p.s_b += jump_len(3 + k, 6, r.inner[k], r.inner[km]);
    p.edge_jump = std::max(p.edge_jump, r.a[k].norm());
  }
  return p;
}

}  // namespace martenscale
