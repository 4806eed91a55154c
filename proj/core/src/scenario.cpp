#include "martenscale/scenario.hpp"

#include <cmath>
#include <sstream>

namespace martenscale {

WellSet WellsSpec::build() const {
  if (kind == "hex_rhombic") return hex_rhombic_wells();
  if (kind == "oblique") return oblique_wells(ngon, a, branch);
  throw Error("unknown well set '" + kind + "'");
}

std::string WellsSpec::describe() const {
  if (kind != "oblique") return kind;
  std::ostringstream os;
  os << "oblique(n=" << ngon << ",a=" << a << "," << (branch == Branch::Plus ? "plus" : "minus") << ")";
  return os.str();
}

GraphPatch PatchSpec::build() const {
  if (profile == "circle") {
    if (!(radius > 0.0)) throw Error("circle radius must be positive");
    GraphPatch g = GraphPatch::unit_circle(rho);
    if (radius != 1.0) g = GraphPatch(Profile::circle(radius), rho, Vec2{radius, 0.0}, -Mat2::identity());
    return g;
  }
  if (profile == "poly") return GraphPatch(Profile::poly(coeffs), rho);
  if (profile == "spline") return GraphPatch(Profile::spline(knots, values), rho);
  throw Error("unknown profile '" + profile + "'");
}

void Scenario::validate() const {
  static const char* kExperiments[] = {"sweep", "relax", "construct", "normals", "dcheck", "flatten"};
  bool known = false;
  for (const char* e : kExperiments) known = known || experiment == e;
  if (!known) throw Error("unknown experiment '" + experiment + "'");
  if (!preset.empty() && preset != "unit_square" && preset != "compatible_triangle")
    throw Error("unknown preset '" + preset + "'");
  const WellSet w = wells.build();
  const bool needs_linear = experiment == "sweep" || experiment == "construct";
  if (needs_linear && w.mode != WellMode::Linear) throw Error("experiment '" + experiment + "' needs linear wells");
  if (construction == Construction::Star && w.mode != WellMode::Linear)
    throw Error("star construction needs linear wells");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0) || !std::isfinite(eps[k])) throw Error("eps values must be positive");
    if (k > 0 && !(eps[k] < eps[k - 1])) throw Error("eps values must be strictly decreasing");
  }
  for (auto e : boundary_edges)
    if (e >= domain.size()) throw Error("boundary edge index out of range");
  if (grid < 8) throw Error("grid needs at least 8 cells per side");
  relax.validate();
  if (experiment == "flatten" && !patch) throw Error("flatten experiment needs a patch");
}

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.preset = name;
  s.eps = dyadic_eps();
  if (name == "unit_square") {
    s.domain = Polygon::unit_square();
    s.construction = Construction::Cover;
  } else if (name == "compatible_triangle") {
    const Triangle t = reference_star_triangle();
    s.domain = Polygon({t[0], t[1], t[2]});
    s.construction = Construction::Star;
  } else {
    throw Error("unknown preset '" + name + "'");
  }
  return s;
}

std::vector<double> dyadic_eps(int lo_exp, int hi_exp) {
  if (hi_exp < lo_exp) throw Error("empty eps range");
  std::vector<double> out;
  for (int k = lo_exp; k <= hi_exp; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

std::vector<double> log_spaced_eps(double eps_min, double eps_max, int count) {
  if (!(eps_min > 0.0) || !(eps_max >= eps_min)) throw Error("invalid eps range");
  if (count < 1) throw Error("eps count must be positive");
  if (count == 1) return {eps_max};
  std::vector<double> out;
  const double l0 = std::log2(eps_max), l1 = std::log2(eps_min);
  for (int k = 0; k < count; ++k) out.push_back(std::exp2(l0 + (l1 - l0) * k / (count - 1)));
  return out;
}

}  // namespace martenscale
