#pragma once
/// @file scaling.hpp
/// eps sweeps over a scenario, the two-model fit and report emission.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "martenscale/compatibility.hpp"
#include "martenscale/scenario.hpp"

namespace martenscale {

struct SweepSpec {
  Scenario scenario;
  unsigned threads = 0;
  /// Called after each finished row (any thread, serialized).
  std::function<void(std::size_t index, double eps)> progress;
};

struct SweepRow {
  double eps = 0.0;
  double elastic_construction = 0.0;
  double surface_construction = 0.0;
  double total_construction = 0.0;
  double total_relaxed = std::numeric_limits<double>::quiet_NaN();
  /// Relaxed run did not meet its stopping rule.
  bool unconverged = false;
  /// Discrete energy of the interpolated construction on the relax grid.
  double total_warm = std::numeric_limits<double>::quiet_NaN();
  int depth = 0;  ///< cover level m or star depth N
  std::string verdict_running;
};

struct SweepReport {
  std::string scenario;
  std::string domain_hash;
  std::string wells_hash;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;
};

enum class Verdict { Linear, Logarithmic, Inconclusive };
std::string to_string(Verdict v);

struct FitResult {
  double c_lin = 0.0, c_log = 0.0;
  double rms_lin = 0.0, rms_log = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::size_t rows = 0;
};

enum class Source { Construction, Relaxed };

/// Exact energy of the scenario's construction at eps (star or cover at
/// optimal depth, or the scenario's fixed depth).
SweepRow construction_row(const Scenario& s, double eps);

/// Pointwise displacement of the construction (zero outside the domain).
std::function<Vec2(const Vec2&)> construction_sampler(const Scenario& s, double eps);

SweepReport run_sweep(const SweepSpec& spec);

/// Relative least squares: c minimizes sum ((c m_i - E_i) / E_i)^2.
/// Uses rows with eps <= 2^-4; needs at least 5 of them.
FitResult fit_dichotomy(const std::vector<double>& eps, const std::vector<double>& energy);
FitResult fit_dichotomy(const SweepReport& report, Source source);

enum class ReportFormat { Csv, Json, Svg };
ReportFormat parse_format(const std::string& s);

std::string report_csv(const SweepReport& r);
std::string report_json(const SweepReport& r, const FitResult& fit);
std::string report_svg(const SweepReport& r, const FitResult& fit);
/// Writes the chosen format; throws on unwritable paths.
void emit_report(const SweepReport& r, const FitResult& fit, ReportFormat fmt, const std::string& path);

/// Inverse of report_csv.  Restores metadata and the CSV columns; depth,
/// flags and warm totals are only carried by the JSON form.
SweepReport parse_csv(const std::string& text);

/// FNV-1a over the textual form, as 16 hex digits.
std::string stable_hash(const std::string& s);

}  // namespace martenscale
