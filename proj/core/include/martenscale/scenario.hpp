#pragma once
/// @file scenario.hpp
/// Experiment description shared by the sweep driver and the CLI.

#include <optional>
#include <string>
#include <vector>

#include "martenscale/covering.hpp"
#include "martenscale/geometry.hpp"
#include "martenscale/relaxer.hpp"
#include "martenscale/wells.hpp"

namespace martenscale {

enum class Construction { Star, Cover };

struct WellsSpec {
  std::string kind = "hex_rhombic";  ///< hex_rhombic | oblique
  int ngon = 4;
  double a = 1.1;
  Branch branch = Branch::Plus;

  WellSet build() const;
  std::string describe() const;
};

struct PatchSpec {
  std::string profile = "circle";  ///< circle | poly | spline
  double radius = 1.0;             ///< circle
  std::vector<double> coeffs;      ///< poly
  std::vector<double> knots, values;  ///< spline
  double rho = 0.5;
  double r = 0.0;  ///< flattening radius; 0 picks half the certified limit

  GraphPatch build() const;
};

struct Scenario {
  std::string name = "unnamed";
  std::string preset;  ///< unit_square | compatible_triangle | empty for a custom polygon
  Polygon domain;
  Construction construction = Construction::Cover;
  WellsSpec wells;
  /// Edges carrying austenite data; empty means all.
  std::vector<std::size_t> boundary_edges;
  std::string experiment = "sweep";
  std::vector<double> eps;
  bool relaxed = false;
  int grid = 128;
  RelaxConfig relax;
  /// Cover depth used when a fixed depth is requested (-1 = optimal_depth).
  int cover_depth = -1;
  std::optional<PatchSpec> patch;

  /// Checks presets, wells against the experiment and the eps list.
  void validate() const;
};

/// unit_square or compatible_triangle.
Scenario preset_scenario(const std::string& name);

/// 2^-lo_exp ... 2^-hi_exp, decreasing.
std::vector<double> dyadic_eps(int lo_exp = 4, int hi_exp = 14);

/// count log-spaced values from eps_max down to eps_min.
std::vector<double> log_spaced_eps(double eps_min, double eps_max, int count);

/// Thrown for malformed scenario documents; line and column are 1-based.
class ScenarioParseError : public Error {
public:
  ScenarioParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_, column_;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

}  // namespace martenscale
