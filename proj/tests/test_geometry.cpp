#include <doctest.h>

#include <random>

#include "martenscale/compatibility.hpp"
#include "martenscale/geometry.hpp"
#include "martenscale/star_block.hpp"

using namespace martenscale;

namespace {
Mat2 fd_grad(const GraphPatch& p, double x, double y, double h = 1e-5) {
  const Vec2 cx = (boundary_normal_map(p, x + h, y) - boundary_normal_map(p, x - h, y)) / (2 * h);
  const Vec2 cy = (boundary_normal_map(p, x, y + h) - boundary_normal_map(p, x, y - h)) / (2 * h);
  return {cx.x, cy.x, cx.y, cy.y};
}

GraphPatch random_patch(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-0.6, 0.6);
  return GraphPatch(Profile::poly({0.0, 0.0, c(rng), c(rng), c(rng)}), 0.5);
}

Vec2 world(const GraphPatch& g, double x, double y) {
  return g.p0 + g.frame.transpose() * Vec2{g.h.value(y) + x, y};
}
}  // namespace

TEST_CASE("frame fields") {
  const GraphPatch flat(Profile::poly({0, 0}), 1.0);
  const Frame f = frame_fields(flat, 0.3);
  CHECK((f.nu - Vec2{-1, 0}).norm() == 0.0);
  CHECK((f.tau - Vec2{0, -1}).norm() == 0.0);
  CHECK(f.kappa == 0.0);
  const GraphPatch para(Profile::poly({0, 0, 0.5}), 1.0);
  CHECK(frame_fields(para, 0).kappa == doctest::Approx(1.0));
  CHECK((frame_fields(para, 1).nu - Vec2{-1, 1} / std::sqrt(2.0)).norm() < 1e-15);
}

TEST_CASE("frame fields are orthonormal on random profiles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> y(-0.5, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const GraphPatch g = random_patch(rng);
    const Frame f = frame_fields(g, y(rng));
    CHECK(std::abs(f.tau.dot(f.nu)) <= 1e-12);
    CHECK(std::abs(f.tau.norm() - 1) <= 1e-12);
    CHECK(std::abs(f.nu.norm() - 1) <= 1e-12);
  }
}

TEST_CASE("boundary normal map") {
  const GraphPatch para(Profile::poly({0, 0, 0.5}), 1.0);
  CHECK((boundary_normal_map(para, 0, 0.4) - Vec2{0.08, 0.4}).norm() < 1e-15);
  const GraphPatch flat(Profile::poly({0, 0}), 1.0);
  CHECK((boundary_normal_map(flat, 0.3, -0.2) - Vec2{0.3, -0.2}).norm() < 1e-15);
  CHECK((fd_grad(para, 0, 0, 1e-6) - Mat2::identity()).norm() < 1e-8);
  CHECK((grad_boundary_normal_map(para, 0, 0) - Mat2::identity()).norm() < 1e-15);
  CHECK((grad_boundary_normal_map(flat, 0.4, 0.7) - Mat2::identity()).norm() < 1e-15);
  const Mat2 g = grad_boundary_normal_map(para, 0.1, 0.2);
  CHECK((g - fd_grad(para, 0.1, 0.2)).norm() / g.norm() <= 1e-6);
}

TEST_CASE("gradient of the normal map matches finite differences on random patches") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(-0.2, 0.2), y(-0.4, 0.4);
  for (int k = 0; k < 1000; ++k) {
    const GraphPatch p = random_patch(rng);
    const double px = x(rng), py = y(rng);
    const Mat2 g = grad_boundary_normal_map(p, px, py);
    CHECK((g - fd_grad(p, px, py)).norm() / g.norm() <= 1e-6);
  }
}

TEST_CASE("spline profiles are normalized at the origin") {
  const Profile s = Profile::spline({-1, -0.5, 0, 0.5, 1}, {1, 0.25, 0, 0.25, 1});
  CHECK(std::abs(s.value(0)) <= 1e-14);
  CHECK(std::abs(s.d1(0)) <= 1e-12);
  CHECK(s.d2(0) > 0);
  CHECK_THROWS_AS(Profile::spline({-1, -0.5, 0, 0.5, 1}, {0.3, 0.2, 0.1, 0.25, 0.4}), Error);
  CHECK_THROWS_AS(Profile::poly({1.0, 0.0, 1.0}), Error);
}

TEST_CASE("flattening a flat boundary is rigid") {
  const Diffeo d = flatten_patch(GraphPatch(Profile::poly({0, 0}), 1.0), 0.2);
  CHECK(d.bounds().grad_dev < 1e-10);
  CHECK(d.bounds().c_dev < 1e-10);
  CHECK((d.grad({0.05, 0.03}) - d.frame()).norm() < 1e-10);
}

TEST_CASE("flattening the unit circle") {
  const GraphPatch c = GraphPatch::unit_circle();
  const double r = 0.05;
  const Diffeo d = flatten_patch(c, r);
  CHECK(d.bounds().c_dev <= (1 + d.bounds().c_const * r) * r + 1e-15);
  CHECK(d.bounds().c_const < 10);
  // Boundary goes to x = 0, interior to x > 0.
  for (int k = -10; k <= 10; ++k) {
    const double y = 0.8 * r * k / 10;
    CHECK(std::abs(d.forward(world(c, 0, y)).x) <= 1e-9);
    CHECK(d.forward(world(c, 0.3 * r, y)).x > 0);
    const Vec2 z = world(c, 0.2 * r, y);
    CHECK((d.inverse(d.forward(z)) - z).norm() <= 1e-10);
  }
  const double r0 = flatten_radius_limit(c);
  CHECK_THROWS_AS(flatten_patch(c, 1.01 * r0), Error);
}

TEST_CASE("flattening deviation is linear in r") {
  const GraphPatch c = GraphPatch::unit_circle();
  const double r = 0.5 * flatten_radius_limit(c);
  std::vector<double> dev;
  for (int k = 0; k < 4; ++k) dev.push_back(flatten_patch(c, std::ldexp(r, -k)).bounds().grad_dev);
  for (int k = 1; k < 4; ++k) {
    CHECK(dev[k] / dev[k - 1] >= 0.3);
    CHECK(dev[k] / dev[k - 1] <= 0.7);
  }
}

TEST_CASE("polygon normals and classification") {
  const auto n = polygon_boundary_normals(Polygon::unit_square());
  REQUIRE(n.size() == 4);
  CHECK((n[0] - Vec2{0, -1}).norm() < 1e-15);
  CHECK((n[1] - Vec2{1, 0}).norm() < 1e-15);
  CHECK(classify_polygon(Polygon::unit_square(), hex_rhombic_normal_set()).generic);

  const Triangle t = reference_star_triangle();
  const Polygon tri({t[0], t[1], t[2]});
  const auto cls = classify_polygon(tri, hex_rhombic_normal_set());
  CHECK_FALSE(cls.generic);
  for (auto e : cls.edges) CHECK(e == EdgeClass::Compatible);
  const auto tn = polygon_boundary_normals(tri);
  CHECK(std::any_of(tn.begin(), tn.end(), [](const Vec2& v) { return (v - Vec2{1, 1} / std::sqrt(2.0)).norm() < 1e-12; }));

  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), Error);
}

TEST_CASE("polygon utilities") {
  const Polygon sq = Polygon::unit_square();
  CHECK(sq.area() == doctest::Approx(1.0));
  CHECK(sq.perimeter() == doctest::Approx(4.0));
  CHECK(sq.contains({0.5, 0.0}));
  CHECK_FALSE(sq.strictly_contains({0.5, 0.0}));
  CHECK(sq.star_shaped_about({0, 0}));
  CHECK(sq.convex());
  CHECK(signed_area(clip_convex(sq.vertices(), sq.translated({0.5, 0.5}).vertices())) == doctest::Approx(0.25));
}
