#pragma once
/// @file compatibility.hpp
/// Jump-condition solvers, austenite normal sets, boundary incompatibility
/// constants, oscillation thresholds and the two scaling envelopes.

#include <vector>

#include "martenscale/algebra2d.hpp"
#include "martenscale/geometry.hpp"
#include "martenscale/normal_set.hpp"
#include "martenscale/wells.hpp"

namespace martenscale {

/// Normals nu with tau . E tau = 0 for tau perpendicular to nu.
NormalSet austenite_normals_linear(const SymMat2& e);

/// Normalized Q_j (e1 +- e2), j = 1, 2, 3: angles 15 + 30k degrees.
NormalSet hex_rhombic_normal_set();

struct Twin {
  Mat2 q = Mat2::identity();
  double angle = 0.0;  ///< rotation angle of q in (-pi, pi]
  Vec2 a{};
  Vec2 n{1.0, 0.0};
  bool degenerate = false;
  double residual = 0.0;  ///< |Q U - Id - a (x) n|
};

/// All (Q, a, n) with Q U = Id + a (x) n, reduced modulo (a, n) ~ (-a, -n).
/// n carries the canonical sign.  A rotation U yields one degenerate entry.
std::vector<Twin> twinning_with_identity(const Mat2& u);

/// Union over variants of the twin normals.
NormalSet nonlinear_normal_set(const WellSet& w);

struct IncompatibilityResult {
  double d = 0.0;
  double d_reduced = 0.0;  ///< nonlinear: min ||U_j tau| - 1|; linear: equals d
  double argmin_point = 0.0;
  std::size_t argmin_well_index = 0;
  WellMode mode = WellMode::Linear;
};

/// Pointwise integrand: linear |tau . e_j tau|, nonlinear min_R |R Q U_j tau - tau|.
double incompatibility_at(const Vec2& tau, const WellSet& w, std::size_t j);
/// Nonlinear reduced form ||U_j tau| - 1|.
double incompatibility_reduced_at(const Vec2& tau, const WellSet& w, std::size_t j);

IncompatibilityResult incompatibility_constant(const BoundaryPatch& patch, const WellSet& w,
                                               int samples = 2048);

struct OscillationThresholds {
  double nonlinear_general = 0.0;
  double linear_general = 0.0;
  double square_nonlinear = 0.0;
  double square_linear = 0.0;
};

OscillationThresholds oscillation_thresholds(double d, double length);

/// max |v(x1) - v(x2)| over sample pairs, optionally of v - id.
double trace_oscillation(const std::vector<Vec2>& values, const std::vector<Vec2>& points,
                         bool subtract_identity);
double trace_oscillation(const std::vector<Vec2>& values);

enum class EnvelopeKind { Log, Linear };

/// min{1, eps (|ln eps| + 1)} or min{eps, 1}.
double lower_envelope(double eps, EnvelopeKind kind);

}  // namespace martenscale
