#include <doctest.h>

#include "martenscale/star_block.hpp"
#include "support.hpp"

using namespace martenscale;
using namespace testing_support;

TEST_CASE("continuity of two-cell fields") {
  const Mat2 a0{0.3, 0.1, -0.2, 0.5};
  const auto same = check_continuity(two_cells(a0, a0));
  CHECK(same.pass);
  CHECK(same.worst_rank == 0.0);
  CHECK(same.worst_trace == 0.0);
  CHECK(check_continuity(two_cells(a0, a0 - outer({0.4, -0.7}, {1, 0}))).pass);
  const Mat2 j{0.9, 0.2, -0.1, 0.4};
  const auto bad = check_continuity(two_cells(a0, a0 - j));
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_rank == doctest::Approx(j.singular_values().second).epsilon(1e-12));
  CHECK_THROWS_AS(exact_energy(two_cells(a0, a0 - j), hex_rhombic_wells(), 1.0), Error);
}

TEST_CASE("exact energy examples") {
  const WellSet hex = hex_rhombic_wells();
  const auto z = exact_energy(single_cell(Polygon::unit_square(), Mat2::zero()), hex, 1.0);
  CHECK(z.elastic == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(z.surface == 0.0);
  CHECK(exact_energy(single_cell(Polygon::unit_square(), hex.strains[0].full()), hex, 1.0).elastic <= 1e-28);
  const Vec2 a{0.4, -0.7}, n{1, 0};
  const Mat2 u0 = hex.strains[0].full();
  const auto e = exact_energy(two_cells(u0, u0 - outer(a, n)), hex, 1.0);
  CHECK(e.surface == doctest::Approx(outer(a, n).norm()).epsilon(1e-14));
  CHECK(e.total(0.5) == doctest::Approx(e.elastic + 0.5 * e.surface));
}

TEST_CASE("energy is additive over cells") {
  const WellSet hex = hex_rhombic_wells();
  const Mat2 a0{0.3, 0.1, -0.2, 0.5}, a1 = a0 - outer({0.4, -0.7}, {1, 0});
  const auto both = exact_energy(two_cells(a0, a1), hex, 1.0);
  const auto l = exact_energy(single_cell(Polygon::unit_square().translated({0.5, 0.5}), a0), hex, 1.0);
  const auto r = exact_energy(single_cell(Polygon::unit_square().translated({1.5, 0.5}), a1), hex, 1.0);
  CHECK(std::abs(both.elastic - l.elastic - r.elastic) <= 1e-12);
  CHECK(both.surface == doctest::Approx((a0 - a1).norm()).epsilon(1e-14));
}

TEST_CASE("laminates") {
  const WellSet hex = hex_rhombic_wells();
  const PAField f = laminate(hex, 1, Vec2{1, 1}, 0.1, 0.5, Polygon::unit_square());
  CHECK(check_continuity(f).pass);
  // Austenite bands cost dist(0)^2 = 2 per unit area unless zero strain is a well.
  CHECK(exact_energy(f, with_austenite(hex), 1.0).elastic <= 1e-26);
  CHECK(exact_energy(f, hex, 1.0).elastic == doctest::Approx(1.0).epsilon(1e-12));

  const WellSet aw = aligned_wells();
  const std::size_t v = variant_for(aw, {1, 0});
  REQUIRE(v < aw.size());
  const double p = 0.125;
  const PAField g = laminate(aw, v, Vec2{1, 0}, p, 0.5, Polygon::unit_square());
  const double jump = rank_one_with_normal(aw.strains[v], {1, 0})->norm();
  CHECK(exact_energy(g, aw, 1.0).surface == doctest::Approx((1.0 / (p / 2) - 1) * jump).epsilon(1e-12));

  const auto pure = exact_energy(laminate(hex, 1, Vec2{1, 1}, 0.1, 1.0, Polygon::unit_square()), hex, 1.0);
  CHECK(pure.surface == 0.0);
  CHECK(pure.elastic <= 1e-26);
  CHECK_THROWS_AS(laminate(hex, 1, Vec2{1, 0}, 0.1, 0.5, Polygon::unit_square()), Error);
}

TEST_CASE("rank-one with a given normal") {
  const WellSet hex = hex_rhombic_wells();
  const auto a = rank_one_with_normal(hex.strains[1], normalized(Vec2{1, 1}));
  REQUIRE(a);
  CHECK((sym_outer(*a, normalized(Vec2{1, 1})) - hex.strains[1]).norm() <= 1e-12);
  CHECK_FALSE(rank_one_with_normal(hex.strains[1], Vec2{1, 0}));
}

TEST_CASE("star blocks") {
  const WellSet hex = hex_rhombic_wells();
  const Triangle t = reference_star_triangle();
  CHECK(admissible_star_triangle(t, hex));
  CHECK(admissible_star_triangle(reference_star_triangle(true), hex));
  const double area = Polygon({t[0], t[1], t[2]}).area(), rho = star_scale_ratio();
  CHECK(rho == doctest::Approx(2 - std::sqrt(3.0)).epsilon(1e-15));
  std::vector<double> surf;
  for (int n = 1; n <= 6; ++n) {
    const StarBlock s = star_block(t, n, hex);
    CHECK(check_continuity(s.field).pass);
    double trace = 0;
    for (const auto& b : s.field.complex.boundary())
      trace = std::max({trace, s.field.value(b.cell, b.p).norm(), s.field.value(b.cell, b.q).norm()});
    CHECK(trace <= 1e-10);
    const auto e = exact_energy(s.field, hex, 1.0);
    CHECK(std::abs(e.elastic - 2 * std::pow(rho, 2 * n) * area) <= 1e-12);
    surf.push_back(e.surface);
  }
  for (std::size_t k = 2; k < surf.size(); ++k)
    CHECK(std::abs((surf[k] - surf[k - 1]) - rho * (surf[k - 1] - surf[k - 2])) <= 1e-9);

  const StarProfile prof = star_profile(hex);
  for (int n = 1; n <= 4; ++n) {
    const auto e = exact_energy(star_block(t, n, hex).field, hex, 1.0);
    CHECK(prof.elastic(n, 1.0) == doctest::Approx(e.elastic).epsilon(1e-10));
    CHECK(prof.surface(n, 1.0) == doctest::Approx(e.surface).epsilon(1e-10));
  }
  CHECK_FALSE(admissible_star_triangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{0.5, std::sqrt(3.0) / 2}}, hex));
}

TEST_CASE("rescaling a star scales elastic by lambda^2 and surface by lambda") {
  const WellSet hex = hex_rhombic_wells();
  for (int n = 1; n <= 3; ++n) {
    const PAField f = star_block(reference_star_triangle(), n, hex).field;
    const auto e = exact_energy(f, hex, 1.0);
    for (double lam : {0.5, 2.0, 3.0}) {
      const auto s = exact_energy(f.rescaled(lam), hex, 1.0);
      CHECK(std::abs(s.elastic - lam * lam * e.elastic) <= 1e-12 * std::max(1.0, lam * lam * e.elastic));
      CHECK(std::abs(s.surface - lam * e.surface) <= 1e-12 * std::max(1.0, lam * e.surface));
    }
  }
}

TEST_CASE("slice energy") {
  const WellSet hex = hex_rhombic_wells();
  CHECK(slice_energy(single_cell(Polygon::unit_square(), hex.strains[1].full()), hex, 0.1, -0.5, 0.5) <= 1e-15);
  CHECK(slice_energy(single_cell(Polygon::unit_square(), Mat2::zero()), hex, 0.2, -0.5, 0.25) ==
        doctest::Approx(1.5).epsilon(1e-14));
}
