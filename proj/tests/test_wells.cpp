#include <doctest.h>

#include "martenscale/algebra2d.hpp"
#include "martenscale/wells.hpp"

using namespace martenscale;

namespace {
const double s3 = std::sqrt(3.0);

bool in_list(const Mat2& m, const std::vector<Mat2>& list, double tol = 1e-10) {
  for (const auto& x : list)
    if ((x - m).norm() <= tol) return true;
  return false;
}
}  // namespace

TEST_CASE("hexagonal to rhombic wells") {
  const WellSet w = hex_rhombic_wells();
  REQUIRE(w.strains.size() == 3);
  CHECK(w.mode == WellMode::Linear);
  CHECK((w.strains[1] - SymMat2{-1, 0, 1}).norm() == 0.0);
  CHECK((w.strains[0] - SymMat2{0.5, -s3 / 2, -0.5}).norm() < 1e-15);
  const Mat2 q = rotation(2 * kPi / 3);
  CHECK((q * w.strains[0].full() * q.transpose() - w.strains[1].full()).norm() < 1e-14);
  for (const auto& e : w.strains) CHECK(e.trace() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hex wells are pairwise symmetrized rank-one connected") {
  const WellSet w = hex_rhombic_wells();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      const SymMat2 d = w.strains[i] - w.strains[j];
      CHECK(d.det() <= 0.0);
      const auto r = sym_rank_one_decompose(d);
      REQUIRE(r);
      CHECK((sym_outer(r->a, r->n) - d).norm() <= 1e-10);
    }
}

TEST_CASE("oblique base matrices") {
  for (double a : {0.8, 1.1, 1.25}) {
    CHECK((oblique_base(4, a) - Mat2{a, 1 / a - a, 0, 1 / a}).norm() < 1e-14);
    CHECK((oblique_base(3, a) - Mat2{a, s3 * (1 / a - a), 0, 1 / a}).norm() < 1e-14);
  }
  for (int n = 3; n <= 8; ++n)
    for (double a : {0.5, 0.9, 1.3, 2.0}) CHECK(oblique_base(n, a).det() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("point groups") {
  const auto sq = point_group(LatticeKind::Square);
  const auto hx = point_group(LatticeKind::Hexagonal);
  CHECK(sq.size() == 4);
  CHECK(hx.size() == 6);
  CHECK(in_list(Mat2{0, -1, 1, 0}, sq, 1e-15));
  CHECK(in_list(Mat2{1, s3, s3, -1} * 0.5, hx, 1e-15));
  for (const auto& p : sq) CHECK(std::abs(p.det()) == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& p : hx) CHECK(std::abs(p.det()) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("oblique variants: count, distinctness and conjugation closure") {
  for (int n : {3, 4}) {
    for (double a : {0.8, 0.9, 1.1, 1.25}) {
      const WellSet w = oblique_wells(n, a);
      CHECK(w.mode == WellMode::Nonlinear);
      CHECK(w.variants.size() == (n == 4 ? 4u : 6u));
      for (std::size_t i = 0; i < w.variants.size(); ++i)
        for (std::size_t j = i + 1; j < w.variants.size(); ++j) CHECK((w.variants[i] - w.variants[j]).norm() > 1e-10);
      for (const auto& p : w.point_group)
        for (const auto& u : w.variants) CHECK(in_list(p * u * p.transpose(), w.variants));
      for (const auto& u : w.variants) CHECK(u.det() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("oblique branches and degenerate stretch") {
  const WellSet plus = oblique_wells(4, 1.1, Branch::Plus);
  const WellSet minus = oblique_wells(4, 1.1, Branch::Minus);
  CHECK((plus.rotation_branch - minus.rotation_branch).norm() > 1e-6);
  CHECK(oblique_wells(4, 1.0).degenerate);
  CHECK_THROWS_AS(oblique_wells(2, 1.1), Error);
  CHECK_THROWS_AS(oblique_wells(4, -1.0), Error);
}
