#include "martenscale/covering.hpp"

#include <algorithm>
#include <cmath>

namespace martenscale {

LatticeTri LatticeTri::parent() const {
  if (level == 0) throw Error("root triangle has no parent");
  LatticeTri p;
  p.level = level - 1;
  p.i = i >> 1;
  p.j = j >> 1;
  const bool odd = (i & 1) && (j & 1);
  const bool even = !(i & 1) && !(j & 1);
  p.down = down ? !even : odd;
  return p;
}

std::array<LatticeTri, 4> LatticeTri::children() const {
  const int l = level + 1;
  const std::int64_t a = 2 * i, b = 2 * j;
  if (!down) return {LatticeTri{l, false, a, b}, LatticeTri{l, false, a + 1, b}, LatticeTri{l, false, a, b + 1},
                     LatticeTri{l, true, a, b}};
  return {LatticeTri{l, true, a + 1, b}, LatticeTri{l, true, a + 1, b + 1}, LatticeTri{l, true, a, b + 1},
          LatticeTri{l, false, a + 1, b + 1}};
}

std::array<LatticeTri, 3> LatticeTri::neighbors() const {
  if (!down) return {LatticeTri{level, true, i, j}, LatticeTri{level, true, i - 1, j}, LatticeTri{level, true, i, j - 1}};
  return {LatticeTri{level, false, i, j}, LatticeTri{level, false, i + 1, j}, LatticeTri{level, false, i, j + 1}};
}

DyadicCover::DyadicCover(const Polygon& domain, int m_max, const WellSet& w, double lip)
    : domain_(domain), m_max_(m_max), wells_(w), lip_(lip) {
  if (m_max < 0 || m_max > 30) throw Error("cover level out of range");
  if (!domain_.star_shaped_about({0.0, 0.0})) throw Error("domain not star-shaped about the origin");
  if (!(lip >= 0.0)) throw Error("Lipschitz constant must be nonnegative");
  convex_ = domain_.convex();
  profile_ = star_profile(w);
  bl_density_ = cell_energy_density(Mat2::zero(), FieldMode::Displacement, w);
  ea_ = unit_at(kPi / 12.0);
  eb_ = unit_at(5.0 * kPi / 12.0);

  // Root triangles meeting the bounding box.
  const auto [lo, hi] = domain_.bounding_box();
  const double det = ea_.cross(eb_);
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (const Vec2& c : {lo, hi, Vec2{lo.x, hi.y}, Vec2{hi.x, lo.y}}) {
    const double a = c.cross(eb_) / det, b = ea_.cross(c) / det;
    amin = std::min(amin, a);
    amax = std::max(amax, a);
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
  }
  std::vector<LatticeTri> frontier;
  for (auto i = static_cast<std::int64_t>(std::floor(amin)) - 1; i <= static_cast<std::int64_t>(std::floor(amax)) + 1; ++i)
    for (auto j = static_cast<std::int64_t>(std::floor(bmin)) - 1; j <= static_cast<std::int64_t>(std::floor(bmax)) + 1; ++j)
      for (bool d : {false, true}) frontier.push_back(LatticeTri{0, d, i, j});
  roots_ = frontier;

  counts_.assign(m_max + 1, 0);
  bl_area_.assign(m_max + 1, 0.0);
  exposed_.assign(m_max + 1, 0);
  for (int level = 0; level <= m_max; ++level) {
    std::vector<LatticeTri> partial;
    for (const auto& t : frontier) {
      double a = 0.0;
      const TriStatus st = classify(t, &a);
      if (st == TriStatus::Inside) {
        ++counts_[level];
      } else if (st == TriStatus::Partial) {
        partial.push_back(t);
        bl_area_[level] += a;
      }
    }
    for (const auto& t : partial)
      for (const auto& nb : t.neighbors())
        if (status(nb) == TriStatus::Inside) ++exposed_[level];
    frontier.clear();
    if (level < m_max)
      for (const auto& t : partial)
        for (const auto& c : t.children()) frontier.push_back(c);
  }
}

Triangle DyadicCover::vertices(const LatticeTri& t) const {
  const double s = side(t.level);
  auto pt = [&](std::int64_t a, std::int64_t b) {
    return ea_ * (s * static_cast<double>(a)) + eb_ * (s * static_cast<double>(b));
  };
  if (!t.down) return {pt(t.i, t.j), pt(t.i + 1, t.j), pt(t.i, t.j + 1)};
  return {pt(t.i + 1, t.j), pt(t.i + 1, t.j + 1), pt(t.i, t.j + 1)};
}

Vec2 DyadicCover::centroid(const LatticeTri& t) const {
  const Triangle v = vertices(t);
  return (v[0] + v[1] + v[2]) / 3.0;
}

LatticeTri DyadicCover::locate(const Vec2& p, int level) const {
  const double s = side(level);
  const double det = ea_.cross(eb_);
  const double a = p.cross(eb_) / (det * s), b = ea_.cross(p) / (det * s);
  const double fa = std::floor(a), fb = std::floor(b);
  LatticeTri t;
  t.level = level;
  t.i = static_cast<std::int64_t>(fa);
  t.j = static_cast<std::int64_t>(fb);
  t.down = (a - fa) + (b - fb) > 1.0;
  return t;
}

double DyadicCover::clipped_area(const LatticeTri& t) const {
  // Clip in coordinates centred on the triangle so rounding scales with its side.
  const Vec2 o = centroid(t);
  const Triangle v = vertices(t);
  std::vector<Vec2> dom = domain_.vertices();
  for (auto& p : dom) p -= o;
  const auto piece = clip_convex(dom, {v[0] - o, v[1] - o, v[2] - o});
  return piece.size() < 3 ? 0.0 : std::max(0.0, signed_area(piece));
}

namespace {

bool proper_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double tol) {
  const double d1 = (b - a).cross(c - a), d2 = (b - a).cross(d - a);
  const double d3 = (d - c).cross(a - c), d4 = (d - c).cross(b - c);
  return ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol));
}

}  // namespace

TriStatus DyadicCover::classify(const LatticeTri& t, double* area) const {
  const double s = side(t.level);
  const double full = std::sqrt(3.0) / 4.0 * s * s;
  const Triangle v = vertices(t);
  const double tol = 1e-12 * s;
  bool inside = true;
  for (const auto& p : v) inside = inside && domain_.contains(p, tol);
  if (inside && !convex_) {
    const auto& dv = domain_.vertices();
    for (std::size_t k = 0; inside && k < dv.size(); ++k) {
      const Vec2 a = dv[k], b = dv[(k + 1) % dv.size()];
      bool strictly = true;
      for (int e = 0; e < 3; ++e) strictly = strictly && (v[(e + 1) % 3] - v[e]).cross(a - v[e]) > tol * s;
      if (strictly) inside = false;
      for (int e = 0; inside && e < 3; ++e)
        if (proper_cross(a, b, v[e], v[(e + 1) % 3], tol * s)) inside = false;
    }
  }
  if (inside) {
    if (area) *area = full;
    return TriStatus::Inside;
  }
  const double a = clipped_area(t);
  if (area) *area = a;
  return a > 1e-9 * full ? TriStatus::Partial : TriStatus::Outside;
}

TriStatus DyadicCover::status(const LatticeTri& t) const { return classify(t, nullptr); }

std::vector<std::size_t> DyadicCover::counts(int m) const {
  if (m < 0 || m > m_max_) throw Error("cover level out of range");
  return {counts_.begin(), counts_.begin() + m + 1};
}

double DyadicCover::count_bound(int level) const {
  const double cf = 10.0 * lip_ + 10.0;
  return (20.0 * cf + 20.0) * std::ldexp(1.0, level);
}

EnergyBreakdown DyadicCover::energy(int m, double eps) const {
  if (m < 0 || m > m_max_) throw Error("cover level out of range");
  if (!(eps > 0.0)) throw Error("eps must be positive");
  EnergyBreakdown e;
  for (int l = 0; l <= m; ++l) {
    if (counts_[l] == 0) continue;
    const double s = side(l);
    const int n = profile_.depth_for(eps, s);
    const double c = static_cast<double>(counts_[l]);
    e.elastic += c * profile_.elastic(n, s);
    e.surface += c * profile_.surface(n, s);
  }
  e.elastic += bl_density_ * bl_area_[m];
  e.surface += profile_.edge_jump * side(m) * static_cast<double>(exposed_[m]);
  return e;
}

int DyadicCover::optimal_depth(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0, 1)");
  const int mdef = static_cast<int>(std::ceil(std::log2(1.0 / eps) - 1e-12));
  const int mmax = mdef + 2;
  if (mmax > m_max_) throw Error("cover not built deep enough for this eps");
  double best = 1e300;
  for (int m = 0; m <= mmax; ++m) best = std::min(best, energy(m, eps).total(eps));
  const double tol = 1e-12 * best;
  if (energy(mdef, eps).total(eps) <= best + tol) return mdef;
  for (int m = 0; m <= mmax; ++m)
    if (energy(m, eps).total(eps) <= best + tol) return m;
  return mdef;
}

std::shared_ptr<const StarBlock> DyadicCover::reference_star(int depth, bool down) const {
  std::lock_guard<std::mutex> lock(*cache_mutex_);
  auto key = std::make_pair(depth, down);
  auto it = star_cache_.find(key);
  if (it != star_cache_.end()) return it->second;
  auto sb = std::make_shared<const StarBlock>(star_block(reference_star_triangle(down), depth, wells_));
  star_cache_.emplace(key, sb);
  return sb;
}

Vec2 DyadicCover::value(const Vec2& p, int m, double eps) const {
  if (m < 0 || m > m_max_) throw Error("cover level out of range");
  for (int l = 0; l <= m; ++l) {
    const LatticeTri t = locate(p, l);
    const TriStatus st = status(t);
    if (st == TriStatus::Outside) return {0.0, 0.0};
    if (st == TriStatus::Partial) continue;
    const double s = side(l);
    const auto ref = reference_star(profile_.depth_for(eps, s), t.down);
    const Vec2 x = (p - centroid(t)) / s;
    int c = ref->field.complex.locate(x, 1e-9);
    if (c < 0) c = ref->field.complex.locate(x, 1e-6);
    if (c < 0) return {0.0, 0.0};
    return ref->field.value(static_cast<std::size_t>(c), x) * s;
  }
  return {0.0, 0.0};
}

std::pair<std::vector<LatticeTri>, std::vector<LatticeTri>> DyadicCover::enumerate(int m) const {
  if (m < 0 || m > m_max_) throw Error("cover level out of range");
  std::vector<LatticeTri> placed, bl, frontier = roots_;
  for (int level = 0; level <= m; ++level) {
    std::vector<LatticeTri> partial;
    for (const auto& t : frontier) {
      const TriStatus st = status(t);
      if (st == TriStatus::Inside) placed.push_back(t);
      else if (st == TriStatus::Partial) partial.push_back(t);
    }
    frontier.clear();
    if (level == m) bl = partial;
    else
      for (const auto& t : partial)
        for (const auto& c : t.children()) frontier.push_back(c);
  }
  return {placed, bl};
}

PAField DyadicCover::materialize(int m, double eps) const {
  if (!domain_.convex()) throw Error("materialization needs a convex domain");
  const auto [placed, bl] = enumerate(m);
  std::vector<std::vector<Vec2>> cells;
  std::vector<Mat2> as;
  std::vector<Vec2> bs;
  for (const auto& t : placed) {
    const double s = side(t.level);
    const auto ref = reference_star(profile_.depth_for(eps, s), t.down);
    const Vec2 o = centroid(t);
    for (std::size_t c = 0; c < ref->field.complex.size(); ++c) {
      std::vector<Vec2> poly = ref->field.complex.cell(c);
      for (auto& p : poly) p = o + p * s;
      cells.push_back(std::move(poly));
      as.push_back(ref->field.a[c]);
      bs.push_back(ref->field.b[c] * s - ref->field.a[c] * o);
    }
  }
  for (const auto& t : bl) {
    const Triangle v = vertices(t);
    auto piece = clip_convex(domain_.vertices(), {v[0], v[1], v[2]});
    if (piece.size() < 3 || signed_area(piece) <= 1e-14 * side(t.level) * side(t.level)) continue;
    cells.push_back(std::move(piece));
    as.push_back(Mat2::zero());
    bs.push_back({0.0, 0.0});
  }
  PAField f;
  f.complex = CellComplex::build(std::move(cells));
  f.a = std::move(as);
  f.b = std::move(bs);
  f.mode = FieldMode::Displacement;
  return f;
}

CoverResult greedy_cover(const Polygon& domain, int m, const WellSet& w, double eps, bool materialize, double lip) {
  DyadicCover cover(domain, m, w, lip);
  CoverResult r;
  r.m = m;
  r.energy = cover.energy(m, eps);
  r.counts = cover.counts(m);
  if (materialize) r.field = cover.materialize(m, eps);
  return r;
}

int optimal_depth(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0, 1)");
  static std::mutex mu;
  static std::unique_ptr<DyadicCover> cached;
  const int need = static_cast<int>(std::ceil(std::log2(1.0 / eps) - 1e-12)) + 2;
  std::lock_guard<std::mutex> lock(mu);
  if (!cached || cached->max_level() < need)
    cached = std::make_unique<DyadicCover>(Polygon::unit_square(), std::max(need, 16), hex_rhombic_wells());
  return cached->optimal_depth(eps);
}

}  // namespace martenscale
