#include <doctest.h>

#include "martenscale/algebra2d.hpp"
#include "martenscale/wells.hpp"
#include "support.hpp"

using namespace martenscale;
using testing_support::angle_min;
using testing_support::random_mat;

TEST_CASE("sym") {
  CHECK(sym(Mat2{0, 1, -1, 0}).norm() == 0.0);
  const SymMat2 d = sym(Mat2::diag(2, 3));
  CHECK(d.a11 == 2);
  CHECK(d.a12 == 0);
  CHECK(d.a22 == 3);
  const SymMat2 o = sym(Mat2{0, 1, 0, 0});
  CHECK(o.a12 == 0.5);
  CHECK(o.a11 == 0);
}

TEST_CASE("sym is idempotent on symmetric and kills skew") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Mat2 m = random_mat(rng, 3.0);
    const SymMat2 s = sym(m);
    CHECK((sym(s.full()).full() - s.full()).norm() == 0.0);
    const Mat2 w = m - m.transpose();
    CHECK(sym(w).norm() <= 1e-15);
  }
}

TEST_CASE("rotation") {
  CHECK((rotation(0.0) - Mat2::identity()).norm() == 0.0);
  const double s3 = std::sqrt(3.0);
  CHECK((rotation(2 * kPi / 3) - Mat2{-0.5, -s3 / 2, s3 / 2, -0.5}).norm() < 1e-15);
  CHECK((rotation(kPi) - Mat2::diag(-1, -1)).norm() < 1e-15);
  CHECK(rotation_angle(rotation(0.4)) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("symmetrized rank-one split") {
  const auto z = sym_rank_one_decompose(SymMat2{});
  REQUIRE(z);
  CHECK(z->a.norm() == 0.0);
  CHECK(z->n.x == 1.0);
  CHECK(z->n.y == 0.0);
  CHECK_FALSE(sym_rank_one_decompose(SymMat2{1, 0, 1}));

  const double s3 = std::sqrt(3.0);
  const SymMat2 e{1.5, -s3 / 2, -1.5};
  const auto d = sym_rank_one_decompose(e);
  REQUIRE(d);
  CHECK((sym_outer(d->a, d->n) - e).norm() <= 1e-12);
  CHECK(d->n.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rank-one split property over random symmetric matrices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int with = 0, without = 0;
  for (int k = 0; k < 10000; ++k) {
    const SymMat2 e{u(rng), u(rng), u(rng)};
    const auto d = sym_rank_one_decompose(e);
    if (e.det() <= 0.0) {
      REQUIRE(d);
      CHECK((sym_outer(d->a, d->n) - e).norm() <= 1e-10 * std::max(1.0, e.norm()));
      ++with;
    } else if (e.det() > rank_one_det_tolerance(e)) {
      CHECK_FALSE(d);
      ++without;
    }
  }
  CHECK(with > 1000);
  CHECK(without > 1000);
}

TEST_CASE("distance to a rotated well") {
  const Mat2 u = oblique_base(4, 1.2);
  CHECK(dist_to_rotated_well(u, u) <= 1e-14);
  CHECK(dist_to_rotated_well(rotation(0.7) * u, u) <= 1e-14);
  // Identity against diag(2, 1/2): scan of the rotation angle.
  const Mat2 f = Mat2::identity(), v = Mat2::diag(2, 0.5);
  const double oracle = angle_min([&](double t) { return (f - rotation(t) * v).norm(); }, 1 << 20);
  CHECK(dist_to_rotated_well(f, v) == doctest::Approx(oracle).epsilon(1e-12));
  // Frozen: sqrt(|I|^2 + |U|^2 - 2 max tr(QU)) = sqrt(6.25 - 5).
  CHECK(dist_to_rotated_well(f, v) == doctest::Approx(1.1180339887498949).epsilon(1e-12));
}

TEST_CASE("distance to a rotated well: frame indifference and grid oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  for (int k = 0; k < 1000; ++k) {
    const Mat2 f = random_mat(rng, 2.0), u = random_mat(rng, 2.0);
    const double d = dist_to_rotated_well(f, u);
    CHECK(std::abs(dist_to_rotated_well(rotation(ang(rng)) * f, u) - d) <= 1e-10);
    const double oracle = angle_min([&](double t) { return (f - rotation(t) * u).norm(); });
    CHECK(std::abs(d - oracle) <= 1e-8);
    CHECK((f - closest_rotation(f, u) * u).norm() == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("distance to well sets") {
  const WellSet hex = hex_rhombic_wells();
  CHECK(dist_to_well_set(hex.strains[1], hex) == 0.0);
  CHECK(dist_to_well_set(SymMat2{}, hex) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const WellSet k4 = oblique_wells(4, 1.2);
  CHECK(dist_to_well_set(k4.well(0), k4) <= 1e-14);
}

TEST_CASE("checked matrices reject non-finite entries") {
  CHECK_THROWS_AS(Mat2::checked(1, std::nan(""), 0, 1), Error);
  CHECK_THROWS_AS(normalized(Vec2{0, 0}), Error);
}
