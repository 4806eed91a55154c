#include "martenscale/microstructure.hpp"

#include <algorithm>
#include <cmath>

#include "martenscale/parallel.hpp"

namespace martenscale {

std::string to_string(FieldMode m) { return m == FieldMode::Displacement ? "displacement" : "deformation"; }

PAField PAField::rescaled(double lambda) const {
  if (!(lambda > 0.0)) throw Error("scale must be positive");
  std::vector<std::vector<Vec2>> cells = complex.cells();
  for (auto& c : cells)
    for (auto& p : c) p = p * lambda;
  PAField g;
  g.complex = CellComplex::build(std::move(cells));
  g.a = a;
  g.b = b;
  for (auto& t : g.b) t = t * lambda;
  g.mode = mode;
  return g;
}

ContinuityReport check_continuity(const PAField& f, double tol) {
  ContinuityReport r;
  const auto& ifs = f.complex.interfaces();
  r.interfaces = ifs.size();
  double scale = 1.0;
  for (std::size_t c = 0; c < f.a.size(); ++c) {
    for (const auto& p : f.complex.cell(c)) scale = std::max(scale, f.value(c, p).norm());
  }
  for (const auto& it : ifs) {
    const Mat2 jump = f.a[it.c1] - f.a[it.c0];
    r.worst_rank = std::max(r.worst_rank, jump.singular_values().second);
    const Vec2 tau = normalized(it.q - it.p);
    r.worst_tangential = std::max(r.worst_tangential, (jump * tau).norm());
    for (const Vec2& x : {it.p, it.q})
      r.worst_trace = std::max(r.worst_trace, (f.value(it.c1, x) - f.value(it.c0, x)).norm());
  }
  r.pass = r.worst_rank <= tol * std::max(1.0, scale) && r.worst_trace <= tol * scale &&
           r.worst_tangential <= tol * std::max(1.0, scale);
  return r;
}

double cell_energy_density(const Mat2& grad, FieldMode mode, const WellSet& w) {
  if (mode == FieldMode::Displacement) {
    if (w.mode != WellMode::Linear) throw Error("mode mismatch");
    const double d = dist_to_well_set(sym(grad), w);
    return d * d;
  }
  if (w.mode != WellMode::Nonlinear) throw Error("mode mismatch");
  const double d = dist_to_well_set(grad, w);
  return d * d;
}

EnergyBreakdown exact_energy(const PAField& f, const WellSet& w, double eps) {
  if (!(eps > 0.0)) throw Error("eps must be positive");
  const bool linear = f.mode == FieldMode::Displacement;
  if (linear != (w.mode == WellMode::Linear)) throw Error("mode mismatch");
  if (!check_continuity(f).pass) throw Error("not an admissible field");

  const std::size_t nc = f.complex.size();
  std::vector<double> el(nc);
  parallel_for(nc, [&](std::size_t c) { el[c] = f.complex.cell_area(c) * cell_energy_density(f.a[c], f.mode, w); });
  const auto& ifs = f.complex.interfaces();
  std::vector<double> su(ifs.size());
  parallel_for(ifs.size(), [&](std::size_t i) { su[i] = ifs[i].length * (f.a[ifs[i].c1] - f.a[ifs[i].c0]).norm(); });
  return {pairwise_sum(el), pairwise_sum(su)};
}

std::optional<Vec2> rank_one_with_normal(const SymMat2& e, const Vec2& n_in, double tol) {
  const Vec2 n = normalized(n_in);
  const Vec2 t = perp_ccw(n);
  if (std::abs(e.quad(t)) > tol * std::max(1.0, e.norm())) return std::nullopt;
  const Vec2 en = e * n;
  return n * n.dot(en) + t * (2.0 * t.dot(en));
}

PAField laminate(const WellSet& w, std::size_t variant, const Vec2& normal, double period, double theta,
                 const Polygon& region) {
  if (w.mode != WellMode::Linear) throw Error("mode mismatch");
  if (variant >= w.strains.size()) throw Error("variant index out of range");
  if (!(period > 0.0)) throw Error("period must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("volume fraction must lie in (0, 1]");
  if (!region.convex()) throw Error("laminate region must be convex");
  const Vec2 n = normalized(normal);
  const auto av = rank_one_with_normal(w.strains[variant], n);
  if (!av) throw Error("normal is not compatible with the variant");
  const Vec2 a = *av;
  // Variant gradient e + wJ with e + wJ = a (x) n.
  const Mat2 gv = outer(a, n);
  const Mat2 ga = Mat2::zero();

  double smin = 1e300, smax = -1e300;
  for (const auto& p : region.vertices()) {
    smin = std::min(smin, n.dot(p));
    smax = std::max(smax, n.dot(p));
  }
  // Band boundaries s_k; bands alternate variant (width theta p) and austenite.
  std::vector<double> cuts;
  std::vector<bool> is_variant;
  if (theta >= 1.0) {
    cuts = {smin, smax};
    is_variant = {true};
  } else {
    const double k0 = std::floor(smin / period);
    for (double k = k0;; k += 1.0) {
      const double s0 = k * period, s1 = s0 + theta * period, s2 = (k + 1.0) * period;
      if (cuts.empty()) cuts.push_back(s0);
      cuts.push_back(s1);
      is_variant.push_back(true);
      cuts.push_back(s2);
      is_variant.push_back(false);
      if (s2 >= smax) break;
    }
  }

  std::vector<std::vector<Vec2>> cells;
  std::vector<Mat2> grads;
  std::vector<Vec2> shifts;
  // u = G x + b continuous; crossing s_k from band k-1 to k adds (G_k - G_{k-1}) jump.
  Vec2 bcur{0.0, 0.0};
  Mat2 gprev = is_variant[0] ? gv : ga;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Mat2 g = is_variant[k] ? gv : ga;
    if (k > 0) {
      // (G_k - G_{k-1}) x = +-a s on the line n.x = s.
      bcur = bcur - (g - gprev) * (n * cuts[k]);
    }
    gprev = g;
    const Vec2 t = perp_ccw(n);
    // Half-plane strip as a large convex quadrilateral.
    const double big = 4.0 * (smax - smin + period) + 10.0 * region.perimeter();
    Vec2 c0 = n * 0.0;
    for (const auto& p : region.vertices()) c0 += p;
    c0 = c0 / static_cast<double>(region.size());
    const Vec2 ct = t * t.dot(c0);
    std::vector<Vec2> strip = {ct + n * cuts[k] - t * big, ct + n * cuts[k + 1] - t * big,
                               ct + n * cuts[k + 1] + t * big, ct + n * cuts[k] + t * big};
    if (signed_area(strip) < 0.0) std::reverse(strip.begin(), strip.end());
    auto piece = clip_convex(region.vertices(), strip);
    if (piece.size() < 3 || signed_area(piece) <= 1e-14 * region.area()) continue;
    cells.push_back(std::move(piece));
    grads.push_back(g);
    shifts.push_back(bcur);
  }
  PAField f;
  f.complex = CellComplex::build(std::move(cells));
  f.a = std::move(grads);
  f.b = std::move(shifts);
  f.mode = FieldMode::Displacement;
  return f;
}

double slice_energy(const PAField& f, const WellSet& w, double x, double y0, double y1) {
  if (!(y1 > y0)) throw Error("empty slice interval");
  struct Piece {
    double lo, hi;
    std::size_t cell;
  };
  std::vector<Piece> pieces;
  for (std::size_t c = 0; c < f.complex.size(); ++c) {
    const auto& poly = f.complex.cell(c);
    double lo = 1e300, hi = -1e300;
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 a = poly[k], b = poly[(k + 1) % n];
      if ((a.x - x) * (b.x - x) <= 0.0 && a.x != b.x) {
        const double y = a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      } else if (a.x == x && b.x == x) {
        lo = std::min({lo, a.y, b.y});
        hi = std::max({hi, a.y, b.y});
      }
    }
    lo = std::max(lo, y0);
    hi = std::min(hi, y1);
    if (hi - lo > 1e-14 * (y1 - y0)) pieces.push_back({lo, hi, c});
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  const double tol = 1e-10 * std::max(1.0, y1 - y0);
  if (pieces.empty() || pieces.front().lo > y0 + tol || pieces.back().hi < y1 - tol)
    throw Error("slice outside domain");
  double el = 0.0, tv = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    el += (pieces[i].hi - pieces[i].lo) * cell_energy_density(f.a[pieces[i].cell], f.mode, w);
    if (i > 0) {
      if (pieces[i].lo > pieces[i - 1].hi + tol) throw Error("slice outside domain");
      tv += (f.a[pieces[i].cell] - f.a[pieces[i - 1].cell]).norm();
    }
  }
  return el + tv;
}

}  // namespace martenscale
