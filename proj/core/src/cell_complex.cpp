#include <algorithm>
#include <cmath>
#include <map>

#include "martenscale/microstructure.hpp"

namespace martenscale {

namespace {

struct EdgeRef {
  int cell;
  Vec2 p, q;
  double angle;   // canonical line angle in (-pi/2, pi/2]
  long long bin;  // quantized angle
  double offset;  // signed distance of the line from the origin
  double s0, s1;  // interval along the canonical direction
  Vec2 dir;       // canonical direction
};

bool convex_ccw(const std::vector<Vec2>& c, double tol) {
  const std::size_t n = c.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = c[k], b = c[(k + 1) % n], d = c[(k + 2) % n];
    if ((b - a).cross(d - b) < -tol) return false;
  }
  return true;
}

}  // namespace

CellComplex CellComplex::build(std::vector<std::vector<Vec2>> cells) {
  CellComplex cx;
  if (cells.empty()) throw Error("empty cell complex");
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& c : cells)
    for (const auto& p : c) {
      if (!p.finite()) throw Error("cell vertices must be finite");
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  const double scale = std::max((hi - lo).norm(), 1e-300);
  const double dup_tol = 1e-13 * scale;

  for (auto& c : cells) {
    std::vector<Vec2> clean;
    for (const auto& p : c)
      if (clean.empty() || (p - clean.back()).norm() > dup_tol) clean.push_back(p);
    while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= dup_tol) clean.pop_back();
    if (clean.size() < 3) throw Error("cell with fewer than 3 distinct vertices");
    const double area = signed_area(clean);
    if (!(area > 0.0)) throw Error("cells must be counterclockwise with positive area");
    if (!convex_ccw(clean, 1e-12 * scale * scale)) throw Error("cells must be convex");
    cx.areas_.push_back(area);
    cx.cells_.push_back(std::move(clean));
  }

  std::vector<EdgeRef> edges;
  for (std::size_t i = 0; i < cx.cells_.size(); ++i) {
    const auto& c = cx.cells_[i];
    for (std::size_t k = 0; k < c.size(); ++k) {
      EdgeRef e;
      e.cell = static_cast<int>(i);
      e.p = c[k];
      e.q = c[(k + 1) % c.size()];
      Vec2 d = canonical_sign(normalized(e.q - e.p));
      e.angle = std::atan2(d.y, d.x);
      if (e.angle < -0.5 * kPi + 1e-9) {
        d = -d;
        e.angle += kPi;
      }
      e.dir = d;
      e.bin = std::llround(e.angle * 1e8);
      e.offset = d.cross(e.p);
      const double a = d.dot(e.p), b = d.dot(e.q);
      e.s0 = std::min(a, b);
      e.s1 = std::max(a, b);
      edges.push_back(e);
    }
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeRef& x, const EdgeRef& y) {
    if (x.bin != y.bin) return x.bin < y.bin;
    return x.offset < y.offset;
  });

  const double off_tol = 1e-9 * scale;
  const double len_tol = 1e-11 * scale;
  std::vector<std::vector<std::pair<double, double>>> covered(edges.size());

  // Group edges lying on a common line, then sweep their intervals.
  std::size_t g0 = 0;
  while (g0 < edges.size()) {
    std::size_t g1 = g0 + 1;
    while (g1 < edges.size() && edges[g1].bin == edges[g1 - 1].bin &&
           std::abs(edges[g1].offset - edges[g1 - 1].offset) < off_tol)
      ++g1;
    std::vector<std::size_t> idx;
    for (std::size_t i = g0; i < g1; ++i) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return edges[x].s0 < edges[y].s0; });
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const EdgeRef& ea = edges[idx[a]];
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const EdgeRef& eb = edges[idx[b]];
        if (eb.s0 >= ea.s1 - len_tol) break;
        if (ea.cell == eb.cell) continue;
        if (std::abs(ea.offset - eb.offset) >= off_tol) continue;
        const double s0 = std::max(ea.s0, eb.s0), s1 = std::min(ea.s1, eb.s1);
        if (s1 - s0 <= len_tol) continue;
        const Vec2 da = ea.q - ea.p, db = eb.q - eb.p;
        if (da.dot(db) >= 0.0) throw Error("overlapping cells in complex");
        Interface it;
        it.c0 = std::min(ea.cell, eb.cell);
        it.c1 = std::max(ea.cell, eb.cell);
        // x = dir * s - perp * offset lies on the line at position s.
        const Vec2 perp{ea.dir.y, -ea.dir.x};
        it.p = ea.dir * s0 - perp * ea.offset;
        it.q = ea.dir * s1 - perp * ea.offset;
        const EdgeRef& owner = ea.cell == it.c0 ? ea : eb;
        it.normal = normalized(perp_cw(owner.q - owner.p));
        it.length = s1 - s0;
        cx.interfaces_.push_back(it);
        covered[idx[a]].push_back({s0, s1});
        covered[idx[b]].push_back({s0, s1});
      }
    }
    g0 = g1;
  }

  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& cov = covered[i];
    std::sort(cov.begin(), cov.end());
    const EdgeRef& e = edges[i];
    const Vec2 perp{e.dir.y, -e.dir.x};
    double s = e.s0;
    auto emit = [&](double a, double b) {
      if (b - a > len_tol) cx.boundary_.push_back({e.cell, e.dir * a - perp * e.offset, e.dir * b - perp * e.offset});
    };
    for (const auto& [a, b] : cov) {
      emit(s, a);
      s = std::max(s, b);
    }
    emit(s, e.s1);
  }

  std::sort(cx.interfaces_.begin(), cx.interfaces_.end(), [](const Interface& x, const Interface& y) {
    if (x.c0 != y.c0) return x.c0 < y.c0;
    if (x.c1 != y.c1) return x.c1 < y.c1;
    return x.p.x < y.p.x || (x.p.x == y.p.x && x.p.y < y.p.y);
  });
  cx.lo_ = lo;
  cx.hi_ = hi;
  cx.build_buckets();
  return cx;
}

double CellComplex::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

void CellComplex::build_buckets() {
  nb_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(cells_.size()))), 1, 512);
  buckets_.assign(static_cast<std::size_t>(nb_) * nb_, {});
  const Vec2 ext = hi_ - lo_;
  auto cell_of = [&](double v, double l, double e) {
    if (e <= 0.0) return 0;
    return std::clamp(static_cast<int>((v - l) / e * nb_), 0, nb_ - 1);
  };
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    Vec2 clo = cells_[i][0], chi = cells_[i][0];
    for (const auto& p : cells_[i]) {
      clo = {std::min(clo.x, p.x), std::min(clo.y, p.y)};
      chi = {std::max(chi.x, p.x), std::max(chi.y, p.y)};
    }
    const int x0 = cell_of(clo.x, lo_.x, ext.x), x1 = cell_of(chi.x, lo_.x, ext.x);
    const int y0 = cell_of(clo.y, lo_.y, ext.y), y1 = cell_of(chi.y, lo_.y, ext.y);
    for (int ix = x0; ix <= x1; ++ix)
      for (int iy = y0; iy <= y1; ++iy) buckets_[static_cast<std::size_t>(iy) * nb_ + ix].push_back(static_cast<int>(i));
  }
}

int CellComplex::locate(const Vec2& p, double tol) const {
  if (buckets_.empty()) return -1;
  const Vec2 ext = hi_ - lo_;
  const double scale = std::max(ext.norm(), 1e-300);
  if (p.x < lo_.x - tol * scale || p.y < lo_.y - tol * scale || p.x > hi_.x + tol * scale ||
      p.y > hi_.y + tol * scale)
    return -1;
  auto cell_of = [&](double v, double l, double e) {
    if (e <= 0.0) return 0;
    return std::clamp(static_cast<int>((v - l) / e * nb_), 0, nb_ - 1);
  };
  const int ix = cell_of(p.x, lo_.x, ext.x), iy = cell_of(p.y, lo_.y, ext.y);
  for (int c : buckets_[static_cast<std::size_t>(iy) * nb_ + ix]) {
    const auto& poly = cells_[c];
    bool inside = true;
    for (std::size_t k = 0; k < poly.size() && inside; ++k) {
      const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
      const double len = (b - a).norm();
      if ((b - a).cross(p - a) < -tol * scale * len) inside = false;
    }
    if (inside) return c;
  }
  return -1;
}

std::pair<std::vector<Vec2>, std::vector<std::vector<std::size_t>>> CellComplex::indexed() const {
  std::map<std::pair<long long, long long>, std::size_t> ids;
  std::vector<Vec2> verts;
  std::vector<std::vector<std::size_t>> out;
  const double q = 1e-10;
  for (const auto& c : cells_) {
    std::vector<std::size_t> ix;
    for (const auto& p : c) {
      const auto key = std::make_pair(std::llround(p.x / q), std::llround(p.y / q));
      auto it = ids.find(key);
      if (it == ids.end()) {
        it = ids.emplace(key, verts.size()).first;
        verts.push_back(p);
      }
      ix.push_back(it->second);
    }
    out.push_back(std::move(ix));
  }
  return {verts, out};
}

}  // namespace martenscale
