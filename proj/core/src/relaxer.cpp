#include "martenscale/relaxer.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "martenscale/parallel.hpp"

namespace martenscale {

Vec2 Grid::node(std::size_t k) const {
  const auto i = static_cast<int>(k % static_cast<std::size_t>(nx + 1));
  const auto j = static_cast<int>(k / static_cast<std::size_t>(nx + 1));
  return node(i, j);
}

Grid make_grid(const Polygon& domain, int n) {
  if (n < 8) throw Error("grid needs at least 8 cells per side");
  const auto [lo, hi] = domain.bounding_box();
  Grid g;
  g.h = std::max(hi.x - lo.x, hi.y - lo.y) / n;
  g.nx = std::max(8, static_cast<int>(std::ceil((hi.x - lo.x) / g.h - 1e-9)));
  g.ny = std::max(8, static_cast<int>(std::ceil((hi.y - lo.y) / g.h - 1e-9)));
  g.origin = lo;
  g.mask.assign(g.cells(), 0);
  g.weight.assign(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 a = g.node(i, j);
      // Clip around the cell corner to keep rounding relative to h.
      std::vector<Vec2> dom = domain.vertices();
      for (auto& p : dom) p -= a;
      const auto piece = clip_convex(dom, {{0.0, 0.0}, {g.h, 0.0}, {g.h, g.h}, {0.0, g.h}});
      const double w = piece.size() < 3 ? 0.0 : std::clamp(signed_area(piece) / (g.h * g.h), 0.0, 1.0);
      g.weight[g.cell_index(i, j)] = w;
      g.mask[g.cell_index(i, j)] = w > 1e-12;
    }
  g.free.assign(g.nodes(), 0);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) g.free[g.node_index(i, j)] = domain.strictly_contains(g.node(i, j), 1e-9 * g.h);
  return g;
}

Mat2 DiscreteField::cell_gradient(int i, int j) const {
  const Grid& g = *grid;
  const Vec2 u00 = u[g.node_index(i, j)], u10 = u[g.node_index(i + 1, j)];
  const Vec2 u01 = u[g.node_index(i, j + 1)], u11 = u[g.node_index(i + 1, j + 1)];
  const Vec2 cx = (u10 + u11 - u00 - u01) / (2.0 * g.h);
  const Vec2 cy = (u01 + u11 - u00 - u10) / (2.0 * g.h);
  return {cx.x, cy.x, cx.y, cy.y};
}

void RelaxConfig::validate() const {
  if (!(huber_delta > 0.0)) throw Error("huber_delta must be positive");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  if (restarts < 1) throw Error("restarts must be at least 1");
  if (max_iters < 0) throw Error("max_iters must be nonnegative");
  if (!(perturbation >= 0.0)) throw Error("perturbation must be nonnegative");
}

double default_huber_delta(const WellSet& w) {
  double s = 0.0;
  if (w.mode == WellMode::Linear)
    for (const auto& e : w.strains) s = std::max(s, e.norm());
  else
    for (std::size_t j = 0; j < w.size(); ++j) s = std::max(s, w.well(j).norm());
  return 1e-3 * std::max(s, 1e-12);
}

double huber(double r, double delta) { return r <= delta ? 0.5 * r * r / delta : r - 0.5 * delta; }

namespace {

void check_consistent(const DiscreteField& f) {
  if (!f.grid) throw Error("field has no grid");
  const Grid& g = *f.grid;
  if (f.u.size() != g.nodes() || f.fixed.size() != g.nodes() || g.mask.size() != g.cells())
    throw Error("mask/grid inconsistency");
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (f.fixed[g.node_index(i, j)]) continue;
      if (i == 0 || j == 0 || i == g.nx || j == g.ny) throw Error("mask/grid inconsistency");
      for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di)
          if (!g.mask[g.cell_index(i + di, j + dj)]) throw Error("mask/grid inconsistency");
    }
}

// Per-cell gradients, zero outside the mask.
std::vector<Mat2> gradients(const DiscreteField& f) {
  const Grid& g = *f.grid;
  std::vector<Mat2> gr(g.cells(), Mat2::zero());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.mask[g.cell_index(i, j)]) gr[g.cell_index(i, j)] = f.cell_gradient(i, j);
  return gr;
}

// Centred differences of the cell field at the dual node shared by cells
// (i, j) .. (i + 1, j + 1); false unless all four cells are inside.
bool dual_differences(const Grid& g, const std::vector<Mat2>& gr, int i, int j, Mat2& dx, Mat2& dy) {
  if (i + 1 >= g.nx || j + 1 >= g.ny) return false;
  const std::size_t c = g.cell_index(i, j);
  if (!(g.mask[c] && g.mask[c + 1] && g.mask[c + g.nx] && g.mask[c + g.nx + 1])) return false;
  const Mat2 &g00 = gr[c], &g10 = gr[c + 1], &g01 = gr[c + g.nx], &g11 = gr[c + g.nx + 1];
  dx = (g10 + g11 - g00 - g01) * 0.5;
  dy = (g01 + g11 - g00 - g10) * 0.5;
  return true;
}

struct Parts {
  double elastic = 0.0, surface = 0.0;
};

Parts energy_parts(const DiscreteField& f, const std::vector<Mat2>& gr, const WellSet& w, double delta) {
  const Grid& g = *f.grid;
  std::vector<double> el(g.cells(), 0.0), su(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t c = g.cell_index(i, j);
      if (!g.mask[c]) continue;
      el[c] = g.weight[c] * g.h * g.h * cell_energy_density(gr[c], f.mode, w);
      Mat2 dx, dy;
      if (dual_differences(g, gr, i, j, dx, dy)) su[c] = g.h * huber(std::sqrt(dx.norm2() + dy.norm2()), delta);
    }
  return {pairwise_sum(el), pairwise_sum(su)};
}

}  // namespace

EnergyBreakdown discrete_energy(const DiscreteField& f, const WellSet& w, double eps, const RelaxConfig& cfg) {
  cfg.validate();
  if (!(eps > 0.0)) throw Error("eps must be positive");
  if ((f.mode == FieldMode::Displacement) != (w.mode == WellMode::Linear)) throw Error("mode mismatch");
  check_consistent(f);
  const auto gr = gradients(f);
  const Parts p = energy_parts(f, gr, w, cfg.huber_delta);
  return {p.elastic, p.surface};
}

BoundaryData austenite_data(FieldMode mode) {
  if (mode == FieldMode::Displacement) return [](const Vec2&) { return Vec2{0.0, 0.0}; };
  return [](const Vec2& x) { return x; };
}

DiscreteField make_field(std::shared_ptr<const Grid> g, FieldMode mode, const BoundaryData& bc) {
  DiscreteField f;
  f.mode = mode;
  f.u.resize(g->nodes());
  f.fixed.resize(g->nodes());
  for (std::size_t k = 0; k < g->nodes(); ++k) {
    f.u[k] = bc(g->node(k));
    f.fixed[k] = !g->free[k];
  }
  f.grid = std::move(g);
  return f;
}

namespace {

// Gradient basis of the bilinear element at the cell centre, nodes 00 10 01 11.
constexpr int kDi[4] = {0, 1, 0, 1};
constexpr int kDj[4] = {0, 0, 1, 1};
constexpr double kGx[4] = {-1.0, 1.0, -1.0, 1.0};
constexpr double kGy[4] = {-1.0, -1.0, 1.0, 1.0};

class Problem {
public:
  Problem(const DiscreteField& proto, const WellSet& w, double eps, const RelaxConfig& cfg)
      : g_(*proto.grid), w_(w), eps_(eps), delta_(cfg.huber_delta), mode_(proto.mode), fixed_(proto.fixed) {}

  double objective(const DiscreteField& f, Parts* parts = nullptr) const {
    const auto gr = gradients(f);
    const Parts p = energy_parts(f, gr, w_, delta_);
    if (parts) *parts = p;
    return p.elastic + eps_ * p.surface;
  }

  // Linear mode: nearest-well assignment, then one reweighted quadratic solve.
  // With floor = delta the quadratic majorizes the objective; larger floors
  // give longer trial steps that the caller accepts only if they pay off.
  bool irls_step(DiscreteField& f, double floor) {
    const auto gr = gradients(f);
    build_pattern();
    std::fill(store_.begin(), store_.end(), 0.0);
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
    const double h = g_.h;

    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        const std::size_t c = g_.cell_index(i, j);
        if (!g_.mask[c]) continue;
        const SymMat2 e = w_.strains[nearest_well(sym(gr[c]), w_)];
        const double wt = g_.weight[c] * h * h;
        double rl[18];
        for (int q = 0; q < 18; ++q) rl[q] = wt * (e.a11 * el_.r11[q] + e.a22 * el_.r22[q] + 2.0 * e.a12 * el_.r12[q]);
        add_local(i, j, el_.k, wt, rl, f);
        Mat2 dx, dy;
        if (!dual_differences(g_, gr, i, j, dx, dy)) continue;
        const double r = std::sqrt(dx.norm2() + dy.norm2());
        add_local(i, j, tv_, 0.5 * eps_ * h / std::max(r, floor), nullptr, f);
      }

    for (std::size_t n = 0; n < slot_.size(); ++n) mat_.valuePtr()[n] = store_[slot_[n]];
    // Preconditioned CG from the current iterate; every CG step lowers the
    // quadratic model, so an inexact solve still decreases the energy.
    Eigen::VectorXd x0(static_cast<Eigen::Index>(rhs_.size()));
    for (std::size_t d = 0; d < dof_.size(); ++d)
      if (dof_[d] >= 0) x0(dof_[d]) = d % 2 ? f.u[d / 2].y : f.u[d / 2].x;
    if (!analyzed_) {
      solver_.analyzePattern(mat_);
      analyzed_ = true;
    }
    solver_.setMaxIterations(cg_iters_);
    solver_.setTolerance(1e-10);
    solver_.factorize(mat_);
    if (solver_.info() != Eigen::Success) return false;
    Eigen::Map<const Eigen::VectorXd> b(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
    const Eigen::VectorXd x = solver_.solveWithGuess(b, x0);
    if (!x.allFinite()) return false;
    for (std::size_t d = 0; d < dof_.size(); ++d) {
      if (dof_[d] < 0) continue;
      Vec2& v = f.u[d / 2];
      (d % 2 ? v.y : v.x) = x(dof_[d]);
    }
    return true;
  }

  // Gradient of the objective with respect to all nodal values.
  std::vector<Vec2> gradient(const DiscreteField& f) const {
    const auto gr = gradients(f);
    std::vector<Mat2> dg(g_.cells(), Mat2::zero());
    const double h = g_.h;
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        const std::size_t c = g_.cell_index(i, j);
        if (!g_.mask[c]) continue;
        const double wt = g_.weight[c] * h * h;
        if (mode_ == FieldMode::Displacement) {
          const SymMat2 e = w_.strains[nearest_well(sym(gr[c]), w_)];
          dg[c] += (sym(gr[c]) - e).full() * (2.0 * wt);
        } else {
          const std::size_t k = nearest_well(gr[c], w_);
          const Mat2 u = w_.well(k);
          dg[c] += (gr[c] - closest_rotation(gr[c], u) * u) * (2.0 * wt);
        }
        Mat2 dx, dy;
        if (!dual_differences(g_, gr, i, j, dx, dy)) continue;
        const double r = std::sqrt(dx.norm2() + dy.norm2());
        if (r == 0.0) continue;
        const double k = 0.5 * eps_ * h / std::max(r, delta_);
        dg[c] += (-dx - dy) * k;
        dg[c + 1] += (dx - dy) * k;
        dg[c + g_.nx] += (dy - dx) * k;
        dg[c + g_.nx + 1] += (dx + dy) * k;
      }
    std::vector<Vec2> out(g_.nodes(), Vec2{0.0, 0.0});
    const double s = 1.0 / (2.0 * h);
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        const std::size_t c = g_.cell_index(i, j);
        if (!g_.mask[c]) continue;
        for (int k = 0; k < 4; ++k) out[g_.node_index(i + kDi[k], j + kDj[k])] += dg[c] * Vec2{kGx[k] * s, kGy[k] * s};
      }
    for (std::size_t k = 0; k < out.size(); ++k)
      if (fixed_[k]) out[k] = {0.0, 0.0};
    return out;
  }

private:
  // Local dofs: node (di, dj) of the 3 x 3 block at (i, j), component c,
  // index 2 (3 dj + di) + c.  Nonzeros of a constant local matrix.
  struct Entry {
    int p, q;
    double v;
  };
  struct Elastic {
    double r11[18]{}, r22[18]{}, r12[18]{};
    std::vector<Entry> k;
  };
  const Grid& g_;
  const WellSet& w_;
  double eps_, delta_;
  FieldMode mode_;
  std::vector<char> fixed_;

  std::vector<int> dof_;          // global dof -> unknown index or -1
  std::vector<double> store_;     // stencil storage: (node, offset, comp pair)
  std::vector<double> rhs_;
  std::vector<std::size_t> slot_; // nonzero -> store_ index
  Eigen::SparseMatrix<double> mat_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>
      solver_;
  int cg_iters_ = 100;
  Elastic el_;
  std::vector<Entry> tv_;
  bool built_ = false, analyzed_ = false;

  static constexpr int kR = 2, kW = 2 * kR + 1;

  std::size_t store_index(std::size_t na, int ca, std::size_t nb, int cb) const {
    const int stride = g_.nx + 1;
    const int ia = static_cast<int>(na % stride), ja = static_cast<int>(na / stride);
    const int ib = static_cast<int>(nb % stride), jb = static_cast<int>(nb / stride);
    const int off = (jb - ja + kR) * kW + (ib - ia + kR);
    return (na * kW * kW + off) * 4 + ca * 2 + cb;
  }

  void build_pattern() {
    if (built_) return;
    built_ = true;
    build_templates();
    dof_.assign(2 * g_.nodes(), -1);
    int n = 0;
    for (std::size_t k = 0; k < g_.nodes(); ++k)
      if (!fixed_[k]) {
        dof_[2 * k] = n++;
        dof_[2 * k + 1] = n++;
      }
    store_.assign(g_.nodes() * kW * kW * 4, 0.0);
    rhs_.assign(n, 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::pair<std::pair<int, int>, std::size_t>> entries;
    const int stride = g_.nx + 1;
    for (std::size_t a = 0; a < g_.nodes(); ++a) {
      if (fixed_[a]) continue;
      const int ia = static_cast<int>(a % stride), ja = static_cast<int>(a / stride);
      for (int dj = -kR; dj <= kR; ++dj)
        for (int di = -kR; di <= kR; ++di) {
          const int ib = ia + di, jb = ja + dj;
          if (ib < 0 || jb < 0 || ib > g_.nx || jb > g_.ny) continue;
          const std::size_t b = g_.node_index(ib, jb);
          if (fixed_[b]) continue;
          for (int ca = 0; ca < 2; ++ca)
            for (int cb = 0; cb < 2; ++cb)
              entries.push_back({{dof_[2 * b + cb], dof_[2 * a + ca]}, store_index(a, ca, b, cb)});
        }
    }
    // Column-major order so slot n matches valuePtr()[n].
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
      return x.first.second != y.first.second ? x.first.second < y.first.second : x.first.first < y.first.first;
    });
    trip.reserve(entries.size());
    slot_.reserve(entries.size());
    for (const auto& e : entries) {
      trip.emplace_back(e.first.first, e.first.second, 1.0);
      slot_.push_back(e.second);
    }
    mat_.resize(n, n);
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();
    if (static_cast<std::size_t>(mat_.nonZeros()) != slot_.size()) throw Error("sparse pattern mismatch");
  }

  void build_templates() {
    const double s = 1.0 / (2.0 * g_.h);
    auto dense_to_entries = [](const std::vector<std::vector<double>>& rows, const std::vector<double>& wts) {
      std::vector<Entry> out;
      for (int p = 0; p < 18; ++p)
        for (int q = 0; q < 18; ++q) {
          double v = 0.0;
          for (std::size_t r = 0; r < rows.size(); ++r) v += wts[r] * rows[r][p] * rows[r][q];
          if (v != 0.0) out.push_back({p, q, v});
        }
      return out;
    };
    for (int k = 0; k < 4; ++k) {
      const int n = 3 * kDj[k] + kDi[k];
      el_.r11[2 * n] += kGx[k] * s;
      el_.r22[2 * n + 1] += kGy[k] * s;
      el_.r12[2 * n] += 0.5 * kGy[k] * s;
      el_.r12[2 * n + 1] += 0.5 * kGx[k] * s;
    }
    el_.k = dense_to_entries({std::vector<double>(el_.r11, el_.r11 + 18), std::vector<double>(el_.r22, el_.r22 + 18),
                              std::vector<double>(el_.r12, el_.r12 + 18)},
                             {1.0, 1.0, 2.0});
    // Dual-node differences: cells ordered 00 10 01 11 with weights cx, cy.
    static constexpr double cx[4] = {-0.5, 0.5, -0.5, 0.5};
    static constexpr double cy[4] = {-0.5, -0.5, 0.5, 0.5};
    std::vector<std::vector<double>> rows;
    for (int comp = 0; comp < 2; ++comp)
      for (int der = 0; der < 2; ++der)
        for (const double* cw : {cx, cy}) {
          std::vector<double> r(18, 0.0);
          const double* gk = der == 0 ? kGx : kGy;
          for (int q = 0; q < 4; ++q)
            for (int k = 0; k < 4; ++k) r[2 * (3 * (kDj[q] + kDj[k]) + kDi[q] + kDi[k]) + comp] += cw[q] * gk[k] * s;
          rows.push_back(std::move(r));
        }
    tv_ = dense_to_entries(rows, std::vector<double>(rows.size(), 1.0));
  }

  // Adds wt (u^t K u) - 2 rhs . u on the 3 x 3 node block at (i, j); fixed
  // values move to the right-hand side.
  void add_local(int i, int j, const std::vector<Entry>& k, double wt, const double* rhs, const DiscreteField& f) {
    const int stride = g_.nx + 1;
    const std::size_t n0 = g_.node_index(i, j);
    auto node = [&](int p) { return n0 + static_cast<std::size_t>((p / 2) / 3) * stride + (p / 2) % 3; };
    if (rhs)
      for (int p = 0; p < 18; ++p) {
        if (rhs[p] == 0.0) continue;
        const int d = dof_[2 * node(p) + p % 2];
        if (d >= 0) rhs_[d] += rhs[p];
      }
    for (const Entry& e : k) {
      const std::size_t na = node(e.p), nb = node(e.q);
      const int da = dof_[2 * na + e.p % 2];
      if (da < 0) continue;
      const int db = dof_[2 * nb + e.q % 2];
      if (db < 0) {
        const Vec2& v = f.u[nb];
        rhs_[da] -= wt * e.v * (e.q % 2 ? v.y : v.x);
        continue;
      }
      const int pa = e.p / 2, pb = e.q / 2;
      const int off = (pb / 3 - pa / 3 + kR) * kW + (pb % 3 - pa % 3 + kR);
      store_[(na * kW * kW + off) * 4 + (e.p % 2) * 2 + e.q % 2] += wt * e.v;
    }
  }
};

struct RunResult {
  DiscreteField field;
  double total = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

RunResult run_one(DiscreteField f, const WellSet& w, double eps, const RelaxConfig& cfg) {
  Problem prob(f, w, eps, cfg);
  RunResult rr;
  double e = prob.objective(f);
  rr.trace.push_back(e);
  int quiet = 0;
  double step = 1.0;
  double floor = std::max(cfg.huber_delta, 0.5);
  for (int it = 0; it < cfg.max_iters; ++it) {
    DiscreteField cand = f;
    double ec = e;
    if (f.mode == FieldMode::Displacement) {
      bool ok = false;
      while (true) {
        cand = f;
        if (prob.irls_step(cand, floor)) {
          ec = prob.objective(cand);
          if (ec < e) {
            ok = true;
            break;
          }
        }
        if (floor <= cfg.huber_delta) break;
        floor = std::max(cfg.huber_delta, floor / 8.0);
      }
      if (!ok) {
        rr.converged = true;
        break;
      }
    } else {
      const auto gvec = prob.gradient(f);
      double gn2 = 0.0;
      for (const auto& v : gvec) gn2 += v.norm2();
      if (gn2 == 0.0) {
        rr.converged = true;
        break;
      }
      step *= 2.0;
      bool ok = false;
      while (step > 1e-30) {
        for (std::size_t k = 0; k < f.u.size(); ++k) cand.u[k] = f.u[k] - gvec[k] * step;
        ec = prob.objective(cand);
        if (ec <= e - 1e-4 * step * gn2) {
          ok = true;
          break;
        }
        step *= 0.5;
      }
      if (!ok) {
        rr.converged = true;
        break;
      }
    }
    const double rel = (e - ec) / std::max(std::abs(e), std::numeric_limits<double>::min());
    f = std::move(cand);
    e = ec;
    rr.trace.push_back(e);
    quiet = rel < cfg.tol ? quiet + 1 : 0;
    if (quiet >= 10) {
      rr.converged = true;
      break;
    }
  }
  rr.field = std::move(f);
  rr.total = e;
  return rr;
}

}  // namespace

RelaxResult minimize(std::shared_ptr<const Grid> g, const BoundaryData& bc, const WellSet& w, double eps,
                     const RelaxConfig& cfg, const std::vector<DiscreteField>& warm) {
  cfg.validate();
  if (!(eps > 0.0)) throw Error("eps must be positive");
  const FieldMode mode = w.mode == WellMode::Linear ? FieldMode::Displacement : FieldMode::Deformation;
  const DiscreteField base = make_field(g, mode, bc);
  check_consistent(base);

  std::vector<DiscreteField> starts;
  for (const auto& ws : warm) {
    if (ws.mode != mode) throw Error("mode mismatch");
    if (!ws.grid || ws.u.size() != g->nodes() || ws.grid->nx != g->nx || ws.grid->ny != g->ny)
      throw Error("warm start grid mismatch");
    DiscreteField s = base;
    for (std::size_t k = 0; k < s.u.size(); ++k)
      if (!s.fixed[k]) s.u[k] = ws.u[k];
    starts.push_back(std::move(s));
  }
  starts.push_back(base);

  RelaxResult res;
  {
    const Problem prob(base, w, eps, cfg);
    for (std::size_t k = 0; k + 1 < starts.size(); ++k) res.warm_totals.push_back(prob.objective(starts[k]));
  }

  const int nr = cfg.restarts;
  std::vector<RunResult> runs(nr);
  parallel_for(
      static_cast<std::size_t>(nr),
      [&](std::size_t k) {
        DiscreteField f = starts[k % starts.size()];
        if (k >= starts.size() && cfg.perturbation > 0.0) {
          std::mt19937_64 rng(cfg.seed + k);
          std::normal_distribution<double> nd(0.0, cfg.perturbation * g->h);
          for (std::size_t n = 0; n < f.u.size(); ++n) {
            const double px = nd(rng), py = nd(rng);
            if (!f.fixed[n]) f.u[n] += Vec2{px, py};
          }
        }
        runs[k] = run_one(std::move(f), w, eps, cfg);
      },
      cfg.threads);

  int best = 0;
  for (int k = 0; k < nr; ++k) {
    res.restart_totals.push_back(runs[k].total);
    if (runs[k].total < runs[best].total) best = k;
  }
  res.best_restart = best;
  res.best_seed = cfg.seed + static_cast<std::uint64_t>(best);
  res.converged = runs[best].converged;
  res.trace = std::move(runs[best].trace);
  res.field = std::move(runs[best].field);
  Parts p;
  res.total = Problem(res.field, w, eps, cfg).objective(res.field, &p);
  res.energy = {p.elastic, p.surface};
  return res;
}

namespace {

double dist_to_cell(const std::vector<Vec2>& poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0);
    d = std::min(d, (p - (a + ab * t)).norm());
  }
  return d;
}

}  // namespace

DiscreteField interpolate(const PAField& f, std::shared_ptr<const Grid> g) {
  DiscreteField out = make_field(g, f.mode, austenite_data(f.mode));
  if (f.complex.size() == 0) throw Error("empty field");
  const double tol = 1e-9 * g->h;
  for (std::size_t k = 0; k < g->nodes(); ++k) {
    const Vec2 p = g->node(k);
    int c = f.complex.locate(p, tol);
    if (c < 0) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < f.complex.size(); ++q) {
        const double d = dist_to_cell(f.complex.cell(q), p);
        if (d < best) {
          best = d;
          c = static_cast<int>(q);
        }
      }
      ++out.extrapolated;
    }
    out.u[k] = f.value(static_cast<std::size_t>(c), p);
  }
  return out;
}

DiscreteField interpolate(const std::function<Vec2(const Vec2&)>& f, std::shared_ptr<const Grid> g, FieldMode mode) {
  DiscreteField out = make_field(g, mode, austenite_data(mode));
  std::vector<Vec2> vals(g->nodes());
  parallel_for(g->nodes(), [&](std::size_t k) { vals[k] = f(g->node(k)); });
  out.u = std::move(vals);
  return out;
}

double slice_energy(const DiscreteField& f, const WellSet& w, double x, double y0, double y1) {
  if (!(y1 > y0)) throw Error("empty slice interval");
  check_consistent(f);
  const Grid& g = *f.grid;
  const int i = static_cast<int>(std::floor((x - g.origin.x) / g.h));
  if (i < 0 || i >= g.nx) throw Error("slice outside domain");
  double el = 0.0, tv = 0.0;
  bool have = false;
  Mat2 prev;
  double covered = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double lo = std::max(y0, g.origin.y + j * g.h), hi = std::min(y1, g.origin.y + (j + 1) * g.h);
    if (hi - lo <= 1e-14 * g.h) continue;
    if (!g.mask[g.cell_index(i, j)]) throw Error("slice outside domain");
    const Mat2 gr = f.cell_gradient(i, j);
    el += (hi - lo) * cell_energy_density(gr, f.mode, w);
    if (have) tv += (gr - prev).norm();
    prev = gr;
    have = true;
    covered += hi - lo;
  }
  if (covered < (y1 - y0) * (1.0 - 1e-9)) throw Error("slice outside domain");
  return el + tv;
}

}  // namespace martenscale
