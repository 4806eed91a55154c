#include <doctest.h>

#include <algorithm>
#include <random>

#include "martenscale/compatibility.hpp"

using namespace martenscale;

namespace {
double deg(double d) { return d * kPi / 180.0; }

double twin_residual(const Twin& t, const Mat2& u) { return (t.q * u - Mat2::identity() - outer(t.a, t.n)).norm(); }

// Rotations with det(QU - Id) = 0, counted by sign changes and double roots on a grid.
int singular_rotations(const Mat2& u) {
  auto f = [&](double t) { return (rotation(t) * u - Mat2::identity()).det(); };
  const int n = 100000;
  int roots = 0;
  const double h = 2 * kPi / n;
  for (int k = 0; k < n; ++k) {
    const double t = -kPi + k * h;
    const double f0 = f(t), f1 = f(t + h), fm = f(t - h);
    if (f0 == 0.0 || f0 * f1 < 0.0) ++roots;
    else if (std::abs(f0) < 1e-8 && std::abs(fm) > std::abs(f0) && std::abs(f1) > std::abs(f0)) ++roots;
  }
  return roots;
}
}  // namespace

TEST_CASE("austenite normals of single strains") {
  const NormalSet s = austenite_normals_linear(SymMat2{-1, 0, 1});
  CHECK(s.size() == 2);
  CHECK(s.contains(Vec2{1, 1}));
  CHECK(s.contains(Vec2{1, -1}));
  CHECK(austenite_normals_linear(SymMat2{1, 0, 1}).empty());
  CHECK(austenite_normals_linear(SymMat2{1, 0, 0}).size() == 1);
  CHECK(austenite_normals_linear(SymMat2{}).is_all());
}

TEST_CASE("hex normal set") {
  const NormalSet s = hex_rhombic_normal_set();
  REQUIRE(s.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(s.angles()[k] - deg(15 + 30.0 * k)) <= 1e-10);
  CHECK(s.contains(Vec2{1, 1}));
  CHECK(s.contains(Vec2{1, -1}));
  NormalSet u;
  for (const auto& e : hex_rhombic_wells().strains) u.merge(austenite_normals_linear(e));
  CHECK(u.same_as(s, 1e-12));
}

TEST_CASE("twinning with the identity") {
  const auto id = twinning_with_identity(Mat2::identity());
  REQUIRE(id.size() == 1);
  CHECK(id[0].degenerate);
  CHECK(id[0].a.norm() == 0.0);

  const Mat2 u = Mat2::diag(2, 0.5);
  const auto t = twinning_with_identity(u);
  CHECK(t.size() == 2);
  CHECK(singular_rotations(u) == 2);
  for (const auto& s : t) CHECK(twin_residual(s, u) <= 1e-10);

  // det 2: only Q = Id makes QU - Id singular, giving e1 (x) e1.
  const Mat2 v = Mat2::diag(2, 1);
  const auto w = twinning_with_identity(v);
  CHECK(static_cast<int>(w.size()) == singular_rotations(v));
  REQUIRE(w.size() == 1);
  CHECK(twin_residual(w[0], v) <= 1e-12);
  CHECK(std::abs(std::abs(w[0].n.x) - 1.0) <= 1e-12);
}

TEST_CASE("nonlinear normal sets are bounded and certified") {
  for (int n : {3, 4}) {
    for (double a : {0.8, 0.9, 1.1, 1.25}) {
      const WellSet w = oblique_wells(n, a);
      const NormalSet s = nonlinear_normal_set(w);
      CHECK(s.size() <= (n == 4 ? 8u : 12u));
      CHECK(s.size() > 0);
      for (const Vec2& dir : s.directions()) {
        double best = 1e300;
        for (std::size_t j = 0; j < w.size(); ++j)
          for (const auto& t : twinning_with_identity(w.well(j)))
            if (!t.degenerate && angle_distance_mod_pi(angle_mod_pi(t.n), angle_mod_pi(dir)) < 1e-9)
              best = std::min(best, twin_residual(t, w.well(j)));
        CHECK(best <= 1e-10);
      }
    }
  }
  // Frozen counts of the generic case.
  CHECK(nonlinear_normal_set(oblique_wells(4, 1.1)).size() == 8);
  CHECK(nonlinear_normal_set(oblique_wells(3, 1.1)).size() == 12);
}

TEST_CASE("incompatibility of flat boundaries") {
  const WellSet hex = hex_rhombic_wells();
  CHECK(incompatibility_constant(BoundaryPatch::segment({0, 0}, {1, 1}), hex).d <= 1e-15);
  // (1,1) entries of the three strains are 1/2, -1, 1/2.
  CHECK(incompatibility_constant(BoundaryPatch::segment({0, 0}, {1, 0}), hex).d == doctest::Approx(0.5).epsilon(1e-15));
  const auto r = incompatibility_constant(BoundaryPatch::segment({0, 0}, {0, 1}), oblique_wells(4, 1.1));
  CHECK(std::abs(r.d - r.d_reduced) <= 1e-10);
  CHECK(r.mode == WellMode::Nonlinear);
}

TEST_CASE("d vanishes exactly on normal-set tangents") {
  const WellSet hex = hex_rhombic_wells();
  const NormalSet ns = hex_rhombic_normal_set();
  int zeros = 0;
  for (int k = 0; k < 360; ++k) {
    const Vec2 tau = unit_at(deg(k));
    const double d = incompatibility_constant(BoundaryPatch::segment({0, 0}, tau), hex).d;
    const bool in_set = ns.contains(tau, 1e-9);
    CHECK((d <= 1e-12) == in_set);
    zeros += d <= 1e-12;
  }
  CHECK(zeros == 12);
}

TEST_CASE("reduced nonlinear form matches the full form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi), st(0.7, 1.4);
  for (int k = 0; k < 1000; ++k) {
    const WellSet w = oblique_wells(k % 2 ? 4 : 3, st(rng));
    const Vec2 tau = unit_at(ang(rng));
    for (std::size_t j = 0; j < w.size(); ++j)
      CHECK(std::abs(incompatibility_at(tau, w, j) - incompatibility_reduced_at(tau, w, j)) <= 1e-10);
  }
}

TEST_CASE("incompatibility is invariant under reparameterization") {
  const WellSet hex = hex_rhombic_wells();
  const auto arc = BoundaryPatch::circle_arc({0, 0}, 1.0, 0.2, 1.4);
  const auto re = BoundaryPatch::reparameterized(arc, [](double s) { return 0.2 + 1.2 * s * s; }, 0.0, 1.0);
  const double a = incompatibility_constant(arc, hex, 8192).d;
  const double b = incompatibility_constant(re, hex, 8192).d;
  CHECK(std::abs(a - b) <= 1e-8);
}

TEST_CASE("oscillation thresholds") {
  const auto z = oscillation_thresholds(0, 5);
  CHECK(z.nonlinear_general == 0);
  CHECK(z.linear_general == 0);
  CHECK(z.square_nonlinear == 0);
  CHECK(z.square_linear == 0);
  CHECK(oscillation_thresholds(208, 1).nonlinear_general == doctest::Approx(1.0));
  CHECK(oscillation_thresholds(104, 2).square_nonlinear == doctest::Approx(2.0));
  CHECK_THROWS_AS(oscillation_thresholds(-1, 1), Error);
}

TEST_CASE("trace oscillation") {
  CHECK(trace_oscillation(std::vector<Vec2>(4, Vec2{1, 2})) == 0.0);
  std::vector<Vec2> p, v;
  const Mat2 m{0.3, -1.2, 0.7, 0.4};
  for (int k = 0; k <= 40; ++k) {
    p.push_back(Vec2{0.6, 0.8} * (k / 40.0));
    v.push_back(m * p.back());
  }
  CHECK(trace_oscillation(p, p, true) == 0.0);
  CHECK(trace_oscillation(v, p, false) == doctest::Approx((m * Vec2{0.6, 0.8}).norm()).epsilon(1e-14));
}

TEST_CASE("envelopes") {
  CHECK(lower_envelope(1.0, EnvelopeKind::Log) == 1.0);
  CHECK(lower_envelope(2.0, EnvelopeKind::Linear) == 1.0);
  CHECK(lower_envelope(std::exp(-1.0), EnvelopeKind::Log) == doctest::Approx(0.7357588823428847).epsilon(1e-15));
  for (int k = 0; k <= 200; ++k) {
    const double e = std::exp2(-k / 10.0);
    CHECK(lower_envelope(e, EnvelopeKind::Log) >= lower_envelope(e, EnvelopeKind::Linear));
  }
  CHECK_THROWS_AS(lower_envelope(0.0, EnvelopeKind::Log), Error);
}
