#include <doctest.h>

#include "martenscale/relaxer.hpp"
#include "support.hpp"

using namespace martenscale;
using namespace testing_support;

namespace {
std::shared_ptr<const Grid> square_grid(int n) { return std::make_shared<const Grid>(make_grid(Polygon::unit_square(), n)); }

RelaxConfig quick(int restarts, int iters) {
  RelaxConfig c;
  c.restarts = restarts;
  c.max_iters = iters;
  c.threads = 1;
  return c;
}
}  // namespace

TEST_CASE("grid construction") {
  const Grid g = make_grid(Polygon::unit_square(), 8);
  CHECK(g.nx == 8);
  CHECK(g.ny == 8);
  CHECK(g.h == doctest::Approx(0.125));
  std::size_t fixed = 0;
  for (char f : g.free) fixed += !f;
  CHECK(fixed == 32);
}

TEST_CASE("discrete energy examples") {
  const WellSet hex = hex_rhombic_wells();
  auto g = square_grid(16);
  const Mat2 a = hex.strains[2].full() + Mat2::skew_unit() * 0.3;
  const auto e = discrete_energy(interpolate(single_cell(Polygon::unit_square(), a), g), hex, 1.0, RelaxConfig{});
  CHECK(e.elastic <= 1e-20);
  CHECK(e.surface <= 1e-12);
  const auto z = discrete_energy(make_field(square_grid(32), FieldMode::Displacement, austenite_data(FieldMode::Displacement)),
                                 hex, 1.0, RelaxConfig{});
  CHECK(z.elastic == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(huber(0.0, 1e-3) == 0.0);
  CHECK(huber(1.0, 1e-3) == doctest::Approx(1.0 - 0.5e-3));
}

TEST_CASE("interpolation reproduces affine maps at nodes") {
  const Mat2 a{0.3, -0.8, 1.1, 0.2};
  const Vec2 b{0.1, -0.4};
  auto g = square_grid(16);
  const auto d = interpolate(single_cell(Polygon::unit_square(), a, b), g);
  for (std::size_t k = 0; k < d.u.size(); ++k) CHECK((d.u[k] - (a * g->node(k) + b)).norm() <= 1e-15);
}

TEST_CASE("laminate surface energy is consistent with the exact value") {
  const WellSet aw = aligned_wells();
  const PAField f = laminate(aw, variant_for(aw, {1, 0}), Vec2{1, 0}, 0.25, 0.5, Polygon::unit_square());
  const double want = exact_energy(f, aw, 1.0).surface;
  const double got = discrete_energy(interpolate(f, square_grid(128)), aw, 1.0, RelaxConfig{}).surface;
  CHECK(std::abs(got - want) <= 0.1 * want);
}

TEST_CASE("interpolation error of a laminate is first order in h") {
  const WellSet hex = with_austenite(hex_rhombic_wells());
  const PAField f = laminate(hex, 1, Vec2{1, 1}, 0.25, 0.5, Polygon::unit_square());
  auto err = [&](int n) { return discrete_energy(interpolate(f, square_grid(n)), hex, 1.0, RelaxConfig{}).elastic; };
  CHECK(std::log2(err(64) / err(128)) >= 0.8);
}

TEST_CASE("nonlinear energy is frame indifferent") {
  const WellSet w = oblique_wells(4, 1.1);
  auto g = square_grid(12);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  DiscreteField f = make_field(g, FieldMode::Deformation, austenite_data(FieldMode::Deformation));
  for (auto& v : f.u) v = v + Vec2{u(rng), u(rng)};
  const auto e = discrete_energy(f, w, 0.1, RelaxConfig{});
  for (double t : {0.3, 1.7, -2.4}) {
    DiscreteField r = f;
    for (auto& v : r.u) v = rotation(t) * v;
    const auto er = discrete_energy(r, w, 0.1, RelaxConfig{});
    CHECK(std::abs(er.elastic - e.elastic) <= 1e-8);
    CHECK(std::abs(er.surface - e.surface) <= 1e-8);
  }
}

TEST_CASE("minimization keeps Dirichlet nodes and decreases the objective") {
  const WellSet hex = hex_rhombic_wells();
  auto g = square_grid(16);
  const Mat2 a{0.01, 0.02, -0.03, 0.0};
  const BoundaryData bc = [&](const Vec2& p) { return a * p; };
  const auto r = minimize(g, bc, hex, 0.1, quick(2, 15));
  for (std::size_t k = 0; k < g->nodes(); ++k)
    if (!g->free[k]) {
      const Vec2 want = bc(g->node(k));
      CHECK(r.field.u[k].x == want.x);
      CHECK(r.field.u[k].y == want.y);
    }
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1] + 1e-12);
  CHECK(r.restart_totals.size() == 2);
  CHECK(r.total == doctest::Approx(*std::min_element(r.restart_totals.begin(), r.restart_totals.end())));
}

TEST_CASE("relaxed energy never exceeds the warm start") {
  const WellSet hex = hex_rhombic_wells();
  auto g = square_grid(16);
  const WellSet aw0 = with_austenite(aligned_wells());
  const PAField f = laminate(aw0, variant_for(aw0, {1, 0}), Vec2{1, 0}, 0.25, 0.5, Polygon::unit_square());
  const auto warm = interpolate(f, g);
  const auto r = minimize(g, austenite_data(FieldMode::Displacement), hex, 0.05, quick(2, 10), {warm});
  REQUIRE(r.warm_totals.size() == 1);
  CHECK(r.total <= r.warm_totals[0] + 1e-12);

  const auto z = minimize(g, austenite_data(FieldMode::Displacement), hex, 1.0, quick(2, 10));
  CHECK(z.total <= 2 + 1e-12);
}

TEST_CASE("discrete slice energy") {
  const WellSet hex = hex_rhombic_wells();
  const auto zero = make_field(square_grid(16), FieldMode::Displacement, austenite_data(FieldMode::Displacement));
  CHECK(slice_energy(zero, hex, 0.2, -0.5, 0.25) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("relax configuration is validated") {
  RelaxConfig c;
  c.restarts = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = RelaxConfig{};
  c.huber_delta = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}
