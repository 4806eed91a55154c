#include <doctest.h>

#include "martenscale/covering.hpp"
#include "martenscale/scaling.hpp"

using namespace martenscale;

TEST_CASE("lattice triangles") {
  const LatticeTri t{3, false, 2, -1};
  for (const auto& c : t.children()) CHECK(c.parent() == t);
  const LatticeTri d{3, true, 2, -1};
  for (const auto& c : d.children()) CHECK(c.parent() == d);
}

TEST_CASE("placement counts stay under the bound") {
  const DyadicCover cv(Polygon::unit_square(), 12, hex_rhombic_wells());
  for (int l = 0; l <= 12; ++l) CHECK(static_cast<double>(cv.count(l)) <= cv.count_bound(l));
  // Inside triangles double per level once the cover is established.
  CHECK(cv.count(10) > cv.count(8));
}

TEST_CASE("cover with no levels is all boundary layer") {
  const auto r = greedy_cover(Polygon::unit_square(), 0, hex_rhombic_wells(), 0.1);
  CHECK(r.counts.size() == 1);
  CHECK(r.energy.elastic >= 1.0);
}

TEST_CASE("optimal depth") {
  const int coarse = optimal_depth(0.5);
  CHECK(coarse >= 0);
  CHECK(coarse <= 2);
  int prev = -1;
  for (double e : log_spaced_eps(std::ldexp(1.0, -14), 0.5, 40)) {
    const int m = optimal_depth(e);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("cover energy follows eps log(1/eps)") {
  const DyadicCover cv(Polygon::unit_square(), 14, hex_rhombic_wells());
  std::vector<double> ratio;
  for (int k = 4; k <= 12; ++k) {
    const double eps = std::ldexp(1.0, -k);
    ratio.push_back(cv.energy(k, eps).total(eps) / (eps * (k * std::log(2.0) + 1)));
  }
  const double c = *std::max_element(ratio.begin(), ratio.end());
  CHECK(ratio.back() <= c);
  CHECK(ratio.back() <= 1.25 * ratio[ratio.size() / 2]);
}

TEST_CASE("materialized cover matches the analytic energy") {
  const WellSet hex = hex_rhombic_wells();
  const double eps = 0.05;
  const DyadicCover cv(Polygon::unit_square(), 4, hex);
  for (int m = 1; m <= 3; ++m) {
    const PAField f = cv.materialize(m, eps);
    CHECK(check_continuity(f).pass);
    const auto exact = exact_energy(f, hex, eps);
    const auto analytic = cv.energy(m, eps);
    CHECK(exact.elastic == doctest::Approx(analytic.elastic).epsilon(1e-9));
    CHECK(exact.surface == doctest::Approx(analytic.surface).epsilon(1e-9));
    // Pointwise value agrees with the field.
    for (const Vec2 p : {Vec2{0.1, 0.2}, Vec2{-0.3, 0.05}, Vec2{0.4, -0.4}}) {
      const int c = f.complex.locate(p, 1e-12);
      REQUIRE(c >= 0);
      CHECK((f.value(c, p) - cv.value(p, m, eps)).norm() <= 1e-10);
    }
  }
}
