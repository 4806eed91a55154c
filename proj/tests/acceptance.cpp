// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: martenscale_acceptance [criterion ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "martenscale/compatibility.hpp"
#include "martenscale/covering.hpp"
#include "martenscale/relaxer.hpp"
#include "martenscale/scaling.hpp"
#include "martenscale/scenario.hpp"
#include "martenscale/star_block.hpp"

using namespace martenscale;

namespace {

// Tolerances and budgets.
constexpr double kAngleTol = 1e-10;
constexpr double kRankOneTol = 1e-10;
constexpr double kTwinTol = 1e-10;
constexpr double kContinuityTol = 1e-10;
constexpr double kCellElasticTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kGeometricTol = 1e-6;
constexpr double kLinearRms = 0.1;
constexpr double kLogRms = 0.15;
constexpr double kLogVsLinear = 0.5;
constexpr int kRelaxGrid = 128;
constexpr int kRelaxRestarts = 8;
constexpr int kRelaxIters = 30;
constexpr double kReducedTol = 1e-10;
// Tangents at 15 + 30k degrees are not representable, so "zero" means roundoff.
constexpr double kZeroTol = 1e-14;
constexpr double kFdTol = 1e-6;
constexpr double kFlattenFactor = 4.0;
constexpr double kPlantedTol = 1e-10;
constexpr int kNoisyPasses = 95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <typename... Ts>
std::string cat(const Ts&... xs) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << xs);
  return os.str();
}

double deg(double d) { return d * kPi / 180.0; }

double twin_residual(const Twin& t, const Mat2& u) { return (t.q * u - Mat2::identity() - outer(t.a, t.n)).norm(); }

Outcome normal_set() {
  const NormalSet s = hex_rhombic_normal_set();
  NormalSet from_q;
  for (int j = 0; j < 3; ++j) {
    const Mat2 q = rotation(2 * kPi * j / 3);
    from_q.insert(q * Vec2{1, 1});
    from_q.insert(q * Vec2{1, -1});
  }
  NormalSet from_wells;
  for (const auto& e : hex_rhombic_wells().strains) from_wells.merge(austenite_normals_linear(e));
  double worst = 0;
  if (s.size() == 6)
    for (std::size_t k = 0; k < 6; ++k) worst = std::max(worst, std::abs(s.angles()[k] - deg(15 + 30.0 * k)));
  const bool ok = s.size() == 6 && worst <= kAngleTol && s.same_as(from_q, kAngleTol) && s.same_as(from_wells, kAngleTol);
  return {ok, cat(s.size(), " directions, angle error ", worst)};
}

Outcome pairwise_compatibility() {
  const WellSet w = hex_rhombic_wells();
  double worst = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      const SymMat2 d = w.strains[i] - w.strains[j];
      const auto r = sym_rank_one_decompose(d);
      if (!r) return {false, cat("pair ", i, ",", j, " has no decomposition")};
      worst = std::max(worst, (sym_outer(r->a, r->n) - d).norm());
      ++pairs;
    }
  return {pairs == 3 && worst <= kRankOneTol, cat(pairs, " pairs, reconstruction error ", worst)};
}

Outcome twinning_counts() {
  std::ostringstream os;
  bool ok = true;
  double worst = 0;
  for (int n : {4, 3}) {
    for (double a : {0.8, 0.9, 1.1, 1.25}) {
      const WellSet w = oblique_wells(n, a);
      const NormalSet s = nonlinear_normal_set(w);
      ok = ok && s.size() <= (n == 4 ? 8u : 12u);
      os << "K" << n << "(" << a << ")=" << s.size() << " ";
      for (const Vec2& dir : s.directions()) {
        double best = 1e300;
        for (std::size_t j = 0; j < w.size(); ++j)
          for (const auto& t : twinning_with_identity(w.well(j)))
            if (!t.degenerate && angle_distance_mod_pi(angle_mod_pi(t.n), angle_mod_pi(dir)) < 1e-9)
              best = std::min(best, twin_residual(t, w.well(j)));
        worst = std::max(worst, best);
      }
    }
  }
  ok = ok && worst <= kTwinTol;
  os << "worst residual " << worst;
  return {ok, os.str()};
}

Outcome star_construction() {
  const WellSet w = hex_rhombic_wells();
  const Triangle t = reference_star_triangle();
  double cont = 0, cell = 0, trace = 0;
  std::vector<double> surf;
  for (int n = 1; n <= 6; ++n) {
    const StarBlock s = star_block(t, n, w);
    cont = std::max(cont, check_continuity(s.field, kContinuityTol).worst_rank);
    for (const auto& r : s.rings)
      for (int k = 0; k < 6; ++k)
        cell = std::max(cell, cell_energy_density(r.a[k], FieldMode::Displacement, w) * std::abs(signed_area(r.cells[k])));
    for (const auto& b : s.field.complex.boundary())
      trace = std::max({trace, s.field.value(b.cell, b.p).norm(), s.field.value(b.cell, b.q).norm()});
    surf.push_back(exact_energy(s.field, w, 1.0).surface);
  }
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 2; k < surf.size(); ++k) {
    const double q = (surf[k] - surf[k - 1]) / (surf[k - 1] - surf[k - 2]);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const bool ok = cont <= kContinuityTol && cell <= kCellElasticTol && trace <= kTraceTol && hi - lo <= kGeometricTol;
  return {ok, cat("continuity ", cont, ", ring cell elastic ", cell, ", trace ", trace, ", increment ratio ", lo, "..", hi)};
}

std::vector<double> acceptance_eps() { return dyadic_eps(4, 14); }

SweepReport construction_sweep(const std::string& preset) {
  SweepSpec s;
  s.scenario = preset_scenario(preset);
  s.scenario.eps = acceptance_eps();
  return run_sweep(s);
}

Outcome linear_scaling() {
  const SweepReport r = construction_sweep("compatible_triangle");
  const FitResult f = fit_dichotomy(r, Source::Construction);
  const bool ok = f.verdict == Verdict::Linear && f.rms_lin <= kLinearRms;
  return {ok, cat("verdict ", to_string(f.verdict), ", rms_lin ", f.rms_lin, ", rms_log ", f.rms_log, ", c_lin ", f.c_lin)};
}

Outcome log_scaling() {
  const SweepReport r = construction_sweep("unit_square");
  const FitResult f = fit_dichotomy(r, Source::Construction);
  const DyadicCover cv(Polygon::unit_square(), 14, hex_rhombic_wells());
  double worst = 0;
  for (int l = 0; l <= 14; ++l) worst = std::max(worst, cv.count(l) / cv.count_bound(l));
  const bool fit_ok =
      f.verdict == Verdict::Logarithmic && f.rms_log <= kLogRms && f.rms_log <= kLogVsLinear * f.rms_lin;
  return {fit_ok && worst <= 1.0, cat("verdict ", to_string(f.verdict), ", rms_log ", f.rms_log, ", rms_lin ", f.rms_lin,
                                      ", max count/bound ", worst)};
}

Outcome energy_dominance() {
  std::ostringstream os;
  bool ok = true;
  for (const char* preset : {"compatible_triangle", "unit_square"}) {
    SweepSpec s;
    s.scenario = preset_scenario(preset);
    s.scenario.eps = acceptance_eps();
    s.scenario.relaxed = true;
    s.scenario.grid = kRelaxGrid;
    s.scenario.relax.restarts = kRelaxRestarts;
    s.scenario.relax.max_iters = kRelaxIters;
    const SweepReport r = run_sweep(s);
    double worst = -1e300;
    int below_exact = 0;
    for (const auto& row : r.rows) {
      ok = ok && row.total_relaxed <= row.total_warm * (1 + 1e-12);
      worst = std::max(worst, (row.total_relaxed - row.total_warm) / row.total_warm);
      below_exact += row.total_relaxed <= row.total_construction;
    }
    os << preset << ": max (relaxed - warm)/warm " << worst << ", " << below_exact << "/" << r.rows.size()
       << " under the exact construction; ";
  }
  return {ok, os.str()};
}

Outcome incompatibility() {
  const WellSet hex = hex_rhombic_wells();
  const NormalSet ns = hex_rhombic_normal_set();
  int mismatches = 0, zeros = 0;
  double zero_max = 0, other_min = 1e300;
  for (int k = 0; k < 360; ++k) {
    const Vec2 tau = unit_at(deg(k));
    const double d = incompatibility_constant(BoundaryPatch::segment({0, 0}, tau), hex).d;
    const bool zero = d <= kZeroTol;
    zeros += zero;
    mismatches += zero != ns.contains(tau, 1e-9);
    if (zero) zero_max = std::max(zero_max, d);
    else other_min = std::min(other_min, d);
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi), st(0.7, 1.4);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const WellSet w = oblique_wells(k % 2 ? 4 : 3, st(rng));
    const Vec2 tau = unit_at(ang(rng));
    for (std::size_t j = 0; j < w.size(); ++j)
      worst = std::max(worst, std::abs(incompatibility_at(tau, w, j) - incompatibility_reduced_at(tau, w, j)));
  }
  return {mismatches == 0 && worst <= kReducedTol,
          cat(zeros, " zeros (largest ", zero_max, "), smallest nonzero ", other_min, ", ", mismatches,
              " mismatches, reduced vs full ", worst)};
}

Mat2 fd_grad(const GraphPatch& p, double x, double y, double h) {
  const Vec2 cx = (boundary_normal_map(p, x + h, y) - boundary_normal_map(p, x - h, y)) / (2 * h);
  const Vec2 cy = (boundary_normal_map(p, x, y + h) - boundary_normal_map(p, x, y - h)) / (2 * h);
  return {cx.x, cy.x, cx.y, cy.y};
}

Outcome normal_coordinates() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> c(-0.6, 0.6), x(-0.2, 0.2), y(-0.4, 0.4);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const GraphPatch p(Profile::poly({0.0, 0.0, c(rng), c(rng), c(rng)}), 0.5);
    const double px = x(rng), py = y(rng);
    const Mat2 g = grad_boundary_normal_map(p, px, py);
    worst = std::max(worst, (g - fd_grad(p, px, py, 1e-5)).norm() / g.norm());
  }
  const GraphPatch circle = GraphPatch::unit_circle();
  const double r = 0.5 * flatten_radius_limit(circle);
  std::vector<double> ratio;
  for (int k = 0; k < 4; ++k) {
    const double rk = std::ldexp(r, -k);
    ratio.push_back(flatten_patch(circle, rk).bounds().grad_dev / rk);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  return {worst <= kFdTol && *hi <= kFlattenFactor * *lo,
          cat("fd relative error ", worst, ", sup|grad F - R|/r in [", *lo, ", ", *hi, "]")};
}

Outcome fit_correctness() {
  const auto eps = acceptance_eps();
  std::vector<double> lin, lg;
  for (double e : eps) {
    lin.push_back(2.5 * lower_envelope(e, EnvelopeKind::Linear));
    lg.push_back(0.7 * lower_envelope(e, EnvelopeKind::Log));
  }
  const FitResult fl = fit_dichotomy(eps, lin), fg = fit_dichotomy(eps, lg);
  const double planted = std::max(std::abs(fl.c_lin - 2.5), std::abs(fg.c_log - 0.7));
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.05);
  int lin_ok = 0, log_ok = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a, b;
    for (double e : eps) {
      a.push_back(4.0 * lower_envelope(e, EnvelopeKind::Linear) * (1 + noise(rng)));
      b.push_back(4.0 * lower_envelope(e, EnvelopeKind::Log) * (1 + noise(rng)));
    }
    lin_ok += fit_dichotomy(eps, a).verdict == Verdict::Linear;
    log_ok += fit_dichotomy(eps, b).verdict == Verdict::Logarithmic;
  }
  const bool ok = planted <= kPlantedTol && fl.verdict == Verdict::Linear && fg.verdict == Verdict::Logarithmic &&
                  lin_ok >= kNoisyPasses && log_ok >= kNoisyPasses;
  return {ok, cat("planted error ", planted, ", noisy linear ", lin_ok, "/100, noisy log ", log_ok, "/100")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "normal-set exactness", 1, normal_set},
      {2, "pairwise compatibility", 1, pairwise_compatibility},
      {3, "twinning counts", 5, twinning_counts},
      {4, "star stress-freeness", 10, star_construction},
      {5, "linear scaling on the compatible triangle", 60, linear_scaling},
      {6, "log scaling on the unit square", 300, log_scaling},
      {7, "relaxed energy dominance", 1800, energy_dominance},
      {8, "incompatibility constants", 10, incompatibility},
      {9, "boundary normal coordinates", 30, normal_coordinates},
      {10, "fit correctness", 10, fit_correctness},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("criterion %2d: %s  %s | %s | %.2f s (budget %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.budget_s, in_budget ? "" : " over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
